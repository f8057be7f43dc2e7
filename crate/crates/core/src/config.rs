//! Experiment configuration: one TOML (or JSON) file with every default
//! spelled out on dump.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzConfig, AnsatzTemplate};
use crate::error::{Error, Result};
use crate::genetic::GAConfig;
use crate::noise::{AnalogNoiseModel, SweepConfig};
use crate::pauli::{load_ham_file, PauliHamiltonian};
use crate::pulse::DEFAULT_ROTATION_NS;
use crate::rydberg::{ring_register, DeviceConfig, Register};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegisterSpec {
    /// Ring with nearest-neighbour spacing `device.spacing_um`; `n` defaults
    /// to the Hamiltonian's qubit count.
    Ring { n: Option<usize> },
    /// Inline `[x, y]` or `[x, y, z]` points in µm.
    Coords { points: Vec<Vec<f64>> },
    /// A `.reg` file.
    File { path: PathBuf },
}

impl Default for RegisterSpec {
    fn default() -> Self {
        RegisterSpec::Ring { n: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub analog: AnalogNoiseModel,
    pub sweep: SweepConfig,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            analog: AnalogNoiseModel::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub rotation_ns: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            rotation_ns: DEFAULT_ROTATION_NS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub hamiltonian_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub register: RegisterSpec,
    pub device: DeviceConfig,
    pub ansatz: AnsatzConfig,
    pub ga: GAConfig,
    pub noise: NoiseSection,
    pub pulse: PulseSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            hamiltonian_path: None,
            output_dir: PathBuf::from("out"),
            register: RegisterSpec::default(),
            device: DeviceConfig::default(),
            ansatz: AnsatzConfig::default(),
            ga: GAConfig::default(),
            noise: NoiseSection::default(),
            pulse: PulseSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `.json` files as JSON and anything else as TOML. Relative paths
    /// inside the file are taken relative to its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.ansatz.validate()?;
        self.ga.validate()?;
        self.noise.analog.validate()?;
        self.noise.sweep.validate()?;
        if !(self.pulse.rotation_ns > 0.0) {
            return Err(Error::InvalidConfig("pulse.rotation_ns must be positive".into()));
        }
        Ok(())
    }

    /// GA settings with the experiment seed applied.
    pub fn ga_config(&self) -> GAConfig {
        GAConfig {
            seed: self.seed,
            ..self.ga.clone()
        }
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_hamiltonian(&self) -> Result<PauliHamiltonian> {
        let path = self
            .hamiltonian_path
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("hamiltonian_path is not set".into()))?;
        load_ham_file(self.resolve_path(path))
    }

    pub fn build_register(&self, n_qubits: usize) -> Result<Register> {
        let reg = match &self.register {
            RegisterSpec::Ring { n } => ring_register(n.unwrap_or(n_qubits), self.device.spacing_um)?,
            RegisterSpec::Coords { points } => {
                let dims = points.first().map_or(2, Vec::len);
                if points.iter().any(|p| p.len() != dims) {
                    return Err(Error::InvalidRegister("mixed point dimensions".into()));
                }
                Register::new(
                    points
                        .iter()
                        .map(|p| [p[0], p.get(1).copied().unwrap_or(0.0), p.get(2).copied().unwrap_or(0.0)])
                        .collect(),
                    dims,
                )?
            }
            RegisterSpec::File { path } => Register::load(self.resolve_path(path))?,
        };
        if reg.len() != n_qubits {
            return Err(Error::InvalidRegister(format!(
                "register has {} atoms but the Hamiltonian acts on {n_qubits} qubits",
                reg.len()
            )));
        }
        Ok(reg)
    }

    pub fn build_template(&self, n_qubits: usize) -> Result<AnsatzTemplate> {
        AnsatzTemplate::new(self.ansatz.clone(), self.build_register(n_qubits)?, self.device)
    }

    /// Every field, defaults included.
    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn dump_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.hamiltonian_path = Some("data/h2.ham".into());
        cfg.register = RegisterSpec::Coords {
            points: vec![vec![0.0, 0.0], vec![8.0, 0.0]],
        };
        cfg.noise.sweep.cphase_angle_sd = Some(0.25);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sed = 1").is_err());
        assert!(ExperimentConfig::from_toml("[ga]\nseed = 3").is_err());
        assert!(ExperimentConfig::from_toml("[ga]\npopulation_size = 7").is_err());
    }

    #[test]
    fn register_specs() {
        let cfg = ExperimentConfig::from_toml("[register]\nkind = \"ring\"\nn = 3").unwrap();
        assert_eq!(cfg.build_register(3).unwrap().len(), 3);
        assert!(cfg.build_register(4).is_err());
        let cfg = ExperimentConfig::from_toml("[register]\nkind = \"coords\"\npoints = [[0, 0, 0], [0, 0, 9]]").unwrap();
        let reg = cfg.build_register(2).unwrap();
        assert_eq!(reg.spatial_dims(), 3);
        assert_eq!(reg.distance(0, 1), 9.0);
    }
}
