//! Fixed-structure digital-analog ansatz.
//!
//! Layout, from `|0…0⟩`: per-qubit RX and RY, a fixed global block, a
//! per-qubit RZ layer, a global block whose duration is the free parameter
//! `t2`, and the same RZ layer again.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{Axis, PauliHamiltonian};
use crate::rydberg::{self, AnalogParams, AnalogPropagator, DeviceConfig, Register};
use crate::statevec::StateVector;

/// Order of the two leading rotations on each qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationOrder {
    #[default]
    RxThenRy,
    RyThenRx,
}

impl RotationOrder {
    fn axes(self) -> [Axis; 2] {
        match self {
            RotationOrder::RxThenRy => [Axis::X, Axis::Y],
            RotationOrder::RyThenRx => [Axis::Y, Axis::X],
        }
    }
}

/// Global-pulse settings without the per-candidate duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
}

impl DriveParams {
    pub fn with_duration(self, duration_ns: f64) -> AnalogParams {
        AnalogParams::new(self.omega, self.delta, self.phi, duration_ns)
    }
}

/// User-facing ansatz settings; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzConfig {
    pub block1: AnalogParams,
    pub block2: DriveParams,
    pub t2_min_ns: f64,
    pub t2_max_ns: f64,
    pub rotation_order: RotationOrder,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            block1: AnalogParams::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 50.0),
            block2: DriveParams {
                omega: PI,
                delta: PI,
                phi: PI,
            },
            t2_min_ns: 0.0,
            t2_max_ns: 1000.0,
            rotation_order: RotationOrder::RxThenRy,
        }
    }
}

impl AnsatzConfig {
    pub fn validate(&self) -> Result<()> {
        self.block1.validate()?;
        self.block2.with_duration(0.0).validate()?;
        if !(self.t2_min_ns >= 0.0 && self.t2_min_ns <= self.t2_max_ns && self.t2_max_ns.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t2 bounds [{}, {}] ns are invalid",
                self.t2_min_ns, self.t2_max_ns
            )));
        }
        Ok(())
    }
}

/// Variational parameters of one candidate circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub rx: Vec<f64>,
    pub ry: Vec<f64>,
    /// Applied identically before and after the second block.
    pub rz: Vec<f64>,
    pub t2_ns: f64,
}

impl Genome {
    pub fn zeros(n_qubits: usize, t2_ns: f64) -> Self {
        Self {
            rx: vec![0.0; n_qubits],
            ry: vec![0.0; n_qubits],
            rz: vec![0.0; n_qubits],
            t2_ns,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.rx.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    First,
    Second,
}

/// One step of a built circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operation {
    Rotation { qubit: usize, axis: Axis, angle: f64 },
    Analog { block: Block, params: AnalogParams },
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Rotation { qubit, axis, angle } => write!(f, "R{axis}({angle}) q{qubit}"),
            Operation::Analog { block, params } => write!(
                f,
                "Analog[{block:?}](omega={}, delta={}, phi={}, t={} ns)",
                params.omega, params.delta, params.phi, params.duration_ns
            ),
        }
    }
}

/// The ansatz bound to a register and device, with both analog blocks
/// pre-diagonalized.
#[derive(Debug, Clone)]
pub struct AnsatzTemplate {
    config: AnsatzConfig,
    register: Register,
    device: DeviceConfig,
    block1_unitary: CMatrix,
    block2: AnalogPropagator,
}

impl AnsatzTemplate {
    pub fn new(config: AnsatzConfig, register: Register, device: DeviceConfig) -> Result<Self> {
        config.validate()?;
        device.validate()?;
        let block1_unitary = rydberg::evolution_unitary(&register, &config.block1, &device)?;
        let block2 = AnalogPropagator::new(&register, &config.block2.with_duration(0.0), &device)?;
        Ok(Self {
            config,
            register,
            device,
            block1_unitary,
            block2,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn config(&self) -> &AnsatzConfig {
        &self.config
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn device(&self) -> &DeviceConfig {
        &self.device
    }

    pub fn block1(&self) -> AnalogParams {
        self.config.block1
    }

    pub fn block2(&self, t2_ns: f64) -> AnalogParams {
        self.config.block2.with_duration(t2_ns)
    }

    pub fn t2_bounds(&self) -> (f64, f64) {
        (self.config.t2_min_ns, self.config.t2_max_ns)
    }

    /// Human-readable gate order, recorded in run outputs.
    pub fn layout_description(&self) -> &'static str {
        match self.config.rotation_order {
            RotationOrder::RxThenRy => "rx,ry | block1 | rz | block2(t2) | rz",
            RotationOrder::RyThenRx => "ry,rx | block1 | rz | block2(t2) | rz",
        }
    }

    pub fn check_genome(&self, g: &Genome) -> Result<()> {
        let n = self.n_qubits();
        for (name, v) in [("rx", &g.rx), ("ry", &g.ry), ("rz", &g.rz)] {
            if v.len() != n {
                return Err(Error::GenomeMismatch(format!(
                    "{name} has {} angles, ansatz has {n} qubits",
                    v.len()
                )));
            }
        }
        let (lo, hi) = self.t2_bounds();
        if !(g.t2_ns >= lo && g.t2_ns <= hi) {
            return Err(Error::GenomeMismatch(format!(
                "t2 = {} ns outside [{lo}, {hi}]",
                g.t2_ns
            )));
        }
        Ok(())
    }

    /// Circuit state `|ψ(g)⟩` via the cached block propagators.
    pub fn prepare_state(&self, g: &Genome) -> Result<StateVector> {
        self.check_genome(g)?;
        let n = self.n_qubits();
        let mut psi = StateVector::zero_state(n)?;
        let [first, second] = self.config.rotation_order.axes();
        for q in 0..n {
            psi.rotate_in_place(q, first, angle_of(g, first, q))?;
            psi.rotate_in_place(q, second, angle_of(g, second, q))?;
        }
        psi = StateVector::from_amplitudes(crate::linalg::mat_vec(
            &self.block1_unitary,
            psi.amplitudes(),
        ))?;
        for (q, &a) in g.rz.iter().enumerate() {
            psi.rotate_in_place(q, Axis::Z, a)?;
        }
        psi = self.block2.apply(&psi, g.t2_ns)?;
        for (q, &a) in g.rz.iter().enumerate() {
            psi.rotate_in_place(q, Axis::Z, a)?;
        }
        Ok(psi)
    }

    /// Energy `⟨ψ(g)|H|ψ(g)⟩`.
    pub fn evaluate(&self, g: &Genome, h: &PauliHamiltonian) -> Result<f64> {
        if h.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                found: h.n_qubits(),
            });
        }
        h.expectation(&self.prepare_state(g)?)
    }

    pub fn build_circuit(&self, g: &Genome) -> Result<Vec<Operation>> {
        self.check_genome(g)?;
        let n = self.n_qubits();
        let mut ops = Vec::with_capacity(4 * n + 2);
        let [first, second] = self.config.rotation_order.axes();
        for q in 0..n {
            for axis in [first, second] {
                ops.push(Operation::Rotation {
                    qubit: q,
                    axis,
                    angle: angle_of(g, axis, q),
                });
            }
        }
        ops.push(Operation::Analog {
            block: Block::First,
            params: self.block1(),
        });
        let rz_layer = g.rz.iter().enumerate().map(|(q, &angle)| Operation::Rotation {
            qubit: q,
            axis: Axis::Z,
            angle,
        });
        ops.extend(rz_layer.clone());
        ops.push(Operation::Analog {
            block: Block::Second,
            params: self.block2(g.t2_ns),
        });
        ops.extend(rz_layer);
        Ok(ops)
    }

    /// Uniform angles on `[0, 2π)` and `t2` uniform on the configured bounds.
    pub fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let n = self.n_qubits();
        let angles = |rng: &mut R| (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        let rx = angles(rng);
        let ry = angles(rng);
        let rz = angles(rng);
        let (lo, hi) = self.t2_bounds();
        let t2_ns = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        Genome { rx, ry, rz, t2_ns }
    }
}

fn angle_of(g: &Genome, axis: Axis, q: usize) -> f64 {
    match axis {
        Axis::X => g.rx[q],
        Axis::Y => g.ry[q],
        Axis::Z => g.rz[q],
    }
}

/// Executes an operation list gate by gate, re-exponentiating every analog
/// block from scratch. Reference path for [`AnsatzTemplate::evaluate`].
pub fn simulate_circuit(
    ops: &[Operation],
    register: &Register,
    device: &DeviceConfig,
) -> Result<StateVector> {
    let mut psi = StateVector::zero_state(register.len())?;
    for op in ops {
        psi = match *op {
            Operation::Rotation { qubit, axis, angle } => psi.apply_rotation(qubit, axis, angle)?,
            Operation::Analog { params, .. } => {
                let u = rydberg::evolution_unitary(register, &params, device)?;
                psi.apply_dense_unitary(&u)?
            }
        };
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_hamiltonian;
    use crate::rydberg::ring_register;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn template(n: usize) -> AnsatzTemplate {
        AnsatzTemplate::new(
            AnsatzConfig::default(),
            ring_register(n, 8.0).unwrap(),
            DeviceConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn circuit_length_and_order() {
        let tpl = template(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = tpl.random_genome(&mut rng);
        let ops = tpl.build_circuit(&g).unwrap();
        assert_eq!(ops.len(), 10);
        assert!(matches!(ops[0], Operation::Rotation { qubit: 0, axis: Axis::X, .. }));
        assert!(matches!(ops[1], Operation::Rotation { qubit: 0, axis: Axis::Y, .. }));
        assert!(matches!(ops[4], Operation::Analog { block: Block::First, .. }));
        assert!(matches!(ops[7], Operation::Analog { block: Block::Second, params } if params.duration_ns == g.t2_ns));
        assert_eq!(&ops[5..7], &ops[8..10]);
    }

    #[test]
    fn trivial_genome_acts_as_first_block() {
        let tpl = template(2);
        let g = Genome::zeros(2, 0.0);
        let psi = tpl.prepare_state(&g).unwrap();
        let direct = crate::rydberg::evolve(
            &StateVector::zero_state(2).unwrap(),
            tpl.register(),
            &tpl.block1(),
            tpl.device(),
        )
        .unwrap();
        assert!((psi.overlap(&direct).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_hamiltonian_energy() {
        let tpl = template(3);
        let h = parse_hamiltonian("-2.75", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let g = tpl.random_genome(&mut rng);
            let e = tpl.evaluate(&g, &h).unwrap();
            assert!((e + 2.75).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_path_matches_gate_by_gate_simulation() {
        let tpl = template(3);
        let h = parse_hamiltonian("0.3 Z0 Z1 - 0.7 X2 + 0.2 Y0 Y2 + 0.1 Z1", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let g = tpl.random_genome(&mut rng);
            let fast = tpl.prepare_state(&g).unwrap();
            let slow = simulate_circuit(&tpl.build_circuit(&g).unwrap(), tpl.register(), tpl.device()).unwrap();
            for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
            let e_slow = h.expectation(&slow).unwrap();
            assert!((tpl.evaluate(&g, &h).unwrap() - e_slow).abs() < 1e-10);
        }
    }

    #[test]
    fn single_qubit_zero_genome_energy() {
        // One atom, no partner: block 1 is a pure Rabi/detuning rotation and
        // block 2 has zero length. Two-level algebra: with
        // H = (Ω/2)(cos φ X − sin φ Y) − δ (I − Z)/2, the Bloch vector of |0⟩
        // precesses about n = (Ω cos φ, −Ω sin φ, δ)/W with W = √(Ω² + δ²),
        // so ⟨Z⟩(t) = n_z² + (1 − n_z²) cos(W t).
        let tpl = template(1);
        let h = parse_hamiltonian("1.0 Z0", 1).unwrap();
        let e = tpl.evaluate(&Genome::zeros(1, 0.0), &h).unwrap();
        let (om, de, t) = (FRAC_PI_2, FRAC_PI_2, 0.05);
        let w = (om * om + de * de).sqrt();
        let nz2 = de * de / (w * w);
        let want = nz2 + (1.0 - nz2) * (w * t).cos();
        assert!((e - want).abs() < 1e-12, "{e} vs {want}");
    }

    #[test]
    fn rejects_inconsistent_genomes() {
        let tpl = template(2);
        let mut g = Genome::zeros(3, 0.0);
        assert!(matches!(tpl.build_circuit(&g), Err(Error::GenomeMismatch(_))));
        g = Genome::zeros(2, 5000.0);
        assert!(tpl.evaluate(&g, &parse_hamiltonian("1.0", 2).unwrap()).is_err());
        let h3 = parse_hamiltonian("1.0", 3).unwrap();
        assert!(matches!(
            tpl.evaluate(&Genome::zeros(2, 0.0), &h3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_genome_is_seeded_and_bounded() {
        let tpl = template(4);
        let a = tpl.random_genome(&mut ChaCha8Rng::seed_from_u64(5));
        let b = tpl.random_genome(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (lo, hi) = tpl.t2_bounds();
        for _ in 0..1000 {
            let g = tpl.random_genome(&mut rng);
            assert!(g.t2_ns >= lo && g.t2_ns <= hi);
            assert!(g.rx.iter().chain(&g.ry).chain(&g.rz).all(|&x| (0.0..TAU).contains(&x)));
        }
    }

    #[test]
    fn random_angle_mean_is_pi() {
        // Uniform on [0, 2π): mean π, standard deviation 2π/√12.
        let tpl = template(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let mean = (0..draws).map(|_| tpl.random_genome(&mut rng).rx[0]).sum::<f64>() / draws as f64;
        let se = TAU / 12f64.sqrt() / (draws as f64).sqrt();
        assert!((mean - PI).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn genome_json_shape() {
        let g = Genome {
            rx: vec![0.5],
            ry: vec![1.5],
            rz: vec![2.5],
            t2_ns: 42.0,
        };
        let v: serde_json::Value = serde_json::from_str(&g.to_json().unwrap()).unwrap();
        assert_eq!(v["t2_ns"], 42.0);
        assert_eq!(v["rx"][0], 0.5);
        assert_eq!(Genome::from_json(&g.to_json().unwrap()).unwrap(), g);
    }
}
