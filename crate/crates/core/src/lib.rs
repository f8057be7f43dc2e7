//! Statevector emulation of Rydberg-atom arrays with a digital-analog
//! genetic ground-state search and a coherent-noise fidelity study.

pub mod ansatz;
pub mod config;
pub mod error;
pub mod genetic;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod pulse;
pub mod rng;
pub mod rydberg;
pub mod statevec;

pub use ansatz::{AnsatzConfig, AnsatzTemplate, Block, DriveParams, Genome, Operation, RotationOrder};
pub use config::{ExperimentConfig, RegisterSpec};
pub use error::{Error, Result, SourcePos};
pub use genetic::{GAConfig, GAResult, IterationRecord, RateChange, StopReason};
pub use linalg::{CMatrix, C64};
pub use noise::{AnalogNoiseModel, DigitalNoiseModel, FidelityEstimate, SweepConfig, SweepReport};
pub use pauli::{parse_ham_file, parse_hamiltonian, Axis, PauliHamiltonian, PauliTerm, SpectralResult};
pub use pulse::{Channel, PulseEntry, PulseKind, PulseSchedule};
pub use rydberg::{ring_register, AnalogParams, AnalogPropagator, DeviceConfig, Register};
pub use statevec::StateVector;
