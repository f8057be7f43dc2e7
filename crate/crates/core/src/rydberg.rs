//! Rydberg-array effective Hamiltonian and square-pulse evolution.
//!
//! Units: Ω and δ in rad/µs, φ in rad, distances in µm, durations in ns at
//! every public interface. The Rydberg state is `|1⟩`, so `N = (I − Z)/2`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianEigen, C64};
use crate::statevec::StateVector;

/// Largest register the dense analog evolution accepts.
pub const MAX_ATOMS: usize = 12;

/// Interaction coefficient for the 60S Rydberg level, rad·µs⁻¹·µm⁶.
pub const C6_LEVEL_60: f64 = 865_723.02;
/// Interaction coefficient for the 70S Rydberg level, rad·µs⁻¹·µm⁶.
pub const C6_LEVEL_70: f64 = 5_420_158.53;

pub const DEFAULT_SPACING_UM: f64 = 8.0;

pub(crate) const NS_PER_US: f64 = 1000.0;

/// Atom positions in µm. Two-dimensional registers store `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    coords: Vec<[f64; 3]>,
    spatial_dims: usize,
}

impl Register {
    pub fn new(coords: Vec<[f64; 3]>, spatial_dims: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidRegister("register has no atoms".into()));
        }
        if !(2..=3).contains(&spatial_dims) {
            return Err(Error::InvalidRegister(format!(
                "unsupported dimensionality {spatial_dims}"
            )));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRegister("non-finite coordinate".into()));
        }
        let reg = Self {
            coords,
            spatial_dims,
        };
        for i in 0..reg.len() {
            for j in 0..i {
                if reg.distance_sq(i, j) == 0.0 {
                    return Err(Error::CoincidentAtoms(j, i));
                }
            }
        }
        Ok(reg)
    }

    pub fn from_2d(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| [p[0], p[1], 0.0]).collect(), 2)
    }

    pub fn from_3d(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.to_vec(), 3)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn spatial_dims(&self) -> usize {
        self.spatial_dims
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_sq(i, j).sqrt()
    }

    /// Returns a copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.coords
                .iter()
                .map(|c| [c[0] * factor, c[1] * factor, c[2] * factor])
                .collect(),
            self.spatial_dims,
        )
    }

    /// Parses the `.reg` format: one atom per line as `x y [z]` in µm.
    pub fn parse(text: &str) -> Result<Self> {
        let mut coords = Vec::new();
        let mut dims = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    Error::InvalidRegister(format!("line {}: {e}", idx + 1))
                })?;
            if !(2..=3).contains(&values.len()) {
                return Err(Error::InvalidRegister(format!(
                    "line {}: expected 'x y [z]'",
                    idx + 1
                )));
            }
            if *dims.get_or_insert(values.len()) != values.len() {
                return Err(Error::InvalidRegister(format!(
                    "line {}: mixed 2D and 3D coordinates",
                    idx + 1
                )));
            }
            coords.push([values[0], values[1], values.get(2).copied().unwrap_or(0.0)]);
        }
        Self::new(coords, dims.unwrap_or(2))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_reg_string(&self) -> String {
        let mut out = String::new();
        for c in &self.coords {
            if self.spatial_dims == 2 {
                out.push_str(&format!("{} {}\n", c[0], c[1]));
            } else {
                out.push_str(&format!("{} {} {}\n", c[0], c[1], c[2]));
            }
        }
        out
    }
}

/// `n` atoms on a circle whose nearest-neighbour chord equals `spacing`;
/// one or two atoms sit on a line.
pub fn ring_register(n: usize, spacing: f64) -> Result<Register> {
    if n == 0 {
        return Err(Error::InvalidRegister("ring needs at least one atom".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidRegister(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let points: Vec<[f64; 2]> = match n {
        1 => vec![[0.0, 0.0]],
        2 => vec![[0.0, 0.0], [spacing, 0.0]],
        _ => {
            let radius = spacing / (2.0 * (std::f64::consts::PI / n as f64).sin());
            (0..n)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [radius * a.cos(), radius * a.sin()]
                })
                .collect()
        }
    };
    Register::from_2d(&points)
}

/// Global square pulse `(Ω, δ, φ, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogParams {
    /// Rabi frequency, rad/µs.
    pub omega: f64,
    /// Detuning, rad/µs.
    pub delta: f64,
    /// Laser phase, rad.
    pub phi: f64,
    /// Pulse length, ns.
    pub duration_ns: f64,
}

impl AnalogParams {
    pub fn new(omega: f64, delta: f64, phi: f64, duration_ns: f64) -> Self {
        Self {
            omega,
            delta,
            phi,
            duration_ns,
        }
    }

    pub fn with_duration(self, duration_ns: f64) -> Self {
        Self {
            duration_ns,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_ns >= 0.0) || !self.duration_ns.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "pulse duration must be finite and non-negative, got {}",
                self.duration_ns
            )));
        }
        if ![self.omega, self.delta, self.phi].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite pulse parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    /// Van der Waals coefficient, rad·µs⁻¹·µm⁶.
    #[serde(default = "default_c6")]
    pub c6: f64,
    #[serde(default = "default_spacing")]
    pub spacing_um: f64,
}

fn default_c6() -> f64 {
    C6_LEVEL_60
}

fn default_spacing() -> f64 {
    DEFAULT_SPACING_UM
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            c6: C6_LEVEL_60,
            spacing_um: DEFAULT_SPACING_UM,
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c6 > 0.0) || !self.c6.is_finite() {
            return Err(Error::InvalidConfig(format!("c6 must be positive, got {}", self.c6)));
        }
        if !(self.spacing_um > 0.0) || !self.spacing_um.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "spacing_um must be positive, got {}",
                self.spacing_um
            )));
        }
        Ok(())
    }
}

/// `H = Σ_i (Ω/2)(cos φ X_i − sin φ Y_i) − δ N_i + Σ_{j<i} C6/r_ij⁶ N_i N_j` in rad/µs.
pub fn build_hamiltonian(reg: &Register, p: &AnalogParams, dev: &DeviceConfig) -> Result<CMatrix> {
    let n = reg.len();
    if n > MAX_ATOMS {
        return Err(Error::QubitCapExceeded {
            n_qubits: n,
            cap: MAX_ATOMS,
        });
    }
    let d = 1usize << n;
    let mut couplings = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in 0..i {
            let r2 = reg.distance_sq(i, j);
            if r2 == 0.0 {
                return Err(Error::CoincidentAtoms(j, i));
            }
            couplings.push(((1usize << i) | (1usize << j), dev.c6 / r2.powi(3)));
        }
    }
    let raise = C64::from_polar(p.omega / 2.0, -p.phi);
    let lower = raise.conj();
    let mut h = CMatrix::zeros(d, d);
    for b in 0..d {
        let occupied = b.count_ones() as f64;
        let mut diag = -p.delta * occupied;
        for &(mask, v) in &couplings {
            if b & mask == mask {
                diag += v;
            }
        }
        h[(b, b)] = C64::new(diag, 0.0);
        if p.omega != 0.0 {
            for q in 0..n {
                let bit = 1usize << q;
                let elem = if b & bit == 0 { raise } else { lower };
                h[(b ^ bit, b)] += elem;
            }
        }
    }
    Ok(h)
}

/// Spectral form of one analog Hamiltonian, reusable for any duration.
#[derive(Debug, Clone)]
pub struct AnalogPropagator {
    eigen: HermitianEigen,
    n_qubits: usize,
}

impl AnalogPropagator {
    pub fn new(reg: &Register, p: &AnalogParams, dev: &DeviceConfig) -> Result<Self> {
        let h = build_hamiltonian(reg, p, dev)?;
        Ok(Self {
            eigen: HermitianEigen::new(&h)?,
            n_qubits: reg.len(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn unitary(&self, duration_ns: f64) -> CMatrix {
        self.eigen.propagator(duration_ns / NS_PER_US)
    }

    pub fn apply(&self, psi: &StateVector, duration_ns: f64) -> Result<StateVector> {
        if psi.dim() != self.eigen.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.eigen.dim(),
                found: psi.dim(),
            });
        }
        if duration_ns == 0.0 {
            return Ok(psi.clone());
        }
        StateVector::from_amplitudes(self.eigen.propagate(psi.amplitudes(), duration_ns / NS_PER_US))
    }
}

/// `U = exp(−i H t)` with `t` taken from `p.duration_ns`.
pub fn evolution_unitary(reg: &Register, p: &AnalogParams, dev: &DeviceConfig) -> Result<CMatrix> {
    p.validate()?;
    Ok(AnalogPropagator::new(reg, p, dev)?.unitary(p.duration_ns))
}

pub fn evolve(
    psi: &StateVector,
    reg: &Register,
    p: &AnalogParams,
    dev: &DeviceConfig,
) -> Result<StateVector> {
    if psi.n_qubits() != reg.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << reg.len(),
            found: psi.dim(),
        });
    }
    let u = evolution_unitary(reg, p, dev)?;
    StateVector::from_amplitudes(crate::linalg::mat_vec(&u, psi.amplitudes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_deviation, max_abs_diff, unitarity_deviation, ONE, ZERO};
    use std::f64::consts::PI;

    fn dev() -> DeviceConfig {
        DeviceConfig::default()
    }

    #[test]
    fn single_atom_pure_drive_is_pauli_x() {
        let reg = ring_register(1, 8.0).unwrap();
        let h = build_hamiltonian(&reg, &AnalogParams::new(2.0, 0.0, 0.0, 0.0), &dev()).unwrap();
        assert!((h[(0, 1)] - ONE).norm() < 1e-15);
        assert!((h[(1, 0)] - ONE).norm() < 1e-15);
        assert_eq!(h[(0, 0)], ZERO);
        assert_eq!(h[(1, 1)], ZERO);
    }

    #[test]
    fn detuning_acts_on_rydberg_state() {
        let reg = ring_register(1, 8.0).unwrap();
        let h = build_hamiltonian(&reg, &AnalogParams::new(0.0, 1.0, 0.37, 0.0), &dev()).unwrap();
        assert_eq!(h[(0, 0)], ZERO);
        assert_eq!(h[(1, 1)], C64::new(-1.0, 0.0));
    }

    #[test]
    fn pair_interaction_only_on_doubly_occupied() {
        let reg = Register::from_2d(&[[0.0, 0.0], [7.0, 0.0]]).unwrap();
        let h = build_hamiltonian(&reg, &AnalogParams::new(0.0, 0.0, 0.0, 0.0), &dev()).unwrap();
        let v = dev().c6 / 7.0f64.powi(6);
        for b in 0..4 {
            let want = if b == 3 { v } else { 0.0 };
            assert!((h[(b, b)].re - want).abs() < 1e-9 * v.max(1.0));
        }
        assert!(hermiticity_deviation(&h) < 1e-12);
    }

    #[test]
    fn phase_convention_of_drive() {
        // φ = π/2 gives (Ω/2)(−Y): element ⟨1|H|0⟩ = −i Ω/2.
        let reg = ring_register(1, 8.0).unwrap();
        let h = build_hamiltonian(&reg, &AnalogParams::new(2.0, 0.0, PI / 2.0, 0.0), &dev()).unwrap();
        assert!((h[(1, 0)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((h[(0, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_duration_is_identity() {
        let reg = ring_register(3, 8.0).unwrap();
        let u = evolution_unitary(&reg, &AnalogParams::new(1.0, 2.0, 0.3, 0.0), &dev()).unwrap();
        assert!(max_abs_diff(&u, &crate::linalg::identity(8)) < 1e-12);
    }

    #[test]
    fn rabi_pi_pulse_equals_rx_pi() {
        let reg = ring_register(1, 8.0).unwrap();
        let u = evolution_unitary(&reg, &AnalogParams::new(PI, 0.0, 0.0, 1000.0), &dev()).unwrap();
        let want = CMatrix::from_fn(2, 2, |i, j| if i != j { C64::new(0.0, -1.0) } else { ZERO });
        assert!(max_abs_diff(&u, &want) < 1e-9);

        let psi = StateVector::zero_state(1).unwrap();
        let out = evolve(&psi, &reg, &AnalogParams::new(PI, 0.0, 0.0, 1000.0), &dev()).unwrap();
        assert!((out.amplitudes()[1] - C64::new(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn interaction_phase_on_doubly_occupied_state() {
        let reg = ring_register(2, 8.0).unwrap();
        let t_ns = 250.0;
        let u = evolution_unitary(&reg, &AnalogParams::new(0.0, 0.0, 0.0, t_ns), &dev()).unwrap();
        let phase = -(865_723.02 / 262_144.0) * (t_ns / 1000.0);
        assert!((u[(3, 3)] - C64::cis(phase)).norm() < 1e-9);
        for b in 0..3 {
            assert!((u[(b, b)] - ONE).norm() < 1e-12);
        }
        assert!(unitarity_deviation(&u) < 1e-9);
    }

    #[test]
    fn evolve_doubly_occupied_keeps_population() {
        let reg = ring_register(2, 8.0).unwrap();
        let mut amps = vec![ZERO; 4];
        amps[3] = ONE;
        let psi = StateVector::from_amplitudes(amps).unwrap();
        let out = evolve(&psi, &reg, &AnalogParams::new(0.0, 0.0, 0.0, 400.0), &dev()).unwrap();
        assert!((out.amplitudes()[3].norm() - 1.0).abs() < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_rejects_wrong_dimension() {
        let reg = ring_register(3, 8.0).unwrap();
        let psi = StateVector::zero_state(2).unwrap();
        assert!(evolve(&psi, &reg, &AnalogParams::new(1.0, 0.0, 0.0, 10.0), &dev()).is_err());
    }

    #[test]
    fn ring_geometry() {
        let r = ring_register(2, 8.0).unwrap();
        assert!((r.distance(0, 1) - 8.0).abs() < 1e-12);

        let r = ring_register(4, 8.0).unwrap();
        for k in 0..4 {
            assert!((r.distance(k, (k + 1) % 4) - 8.0).abs() < 1e-12);
        }
        assert!((r.distance(0, 2) - 8.0 * 2f64.sqrt()).abs() < 1e-12);

        let r = ring_register(6, 8.0).unwrap();
        for c in r.coords() {
            assert!(((c[0] * c[0] + c[1] * c[1]).sqrt() - 8.0).abs() < 1e-12);
        }
        assert!((r.distance(0, 1) - 8.0).abs() < 1e-12);

        assert!(ring_register(3, 0.0).is_err());
        assert!(ring_register(3, -1.0).is_err());
        assert!(ring_register(0, 8.0).is_err());
    }

    #[test]
    fn coincident_atoms_rejected() {
        assert!(matches!(
            Register::from_2d(&[[1.0, 1.0], [1.0, 1.0]]),
            Err(Error::CoincidentAtoms(0, 1))
        ));
    }

    #[test]
    fn reg_file_round_trip() {
        let reg = Register::parse("# square\n0 0\n8 0\n8 8\n0 8\n").unwrap();
        assert_eq!(reg.len(), 4);
        assert_eq!(Register::parse(&reg.to_reg_string()).unwrap(), reg);
        let reg3 = Register::parse("0 0 0\n0 0 5.5\n").unwrap();
        assert_eq!(reg3.spatial_dims(), 3);
        assert!(Register::parse("0 0\n1 1 1\n").is_err());
        assert!(Register::parse("0 zero\n").is_err());
        assert!(Register::parse("1\n").is_err());
    }

    #[test]
    fn device_validation() {
        assert!(DeviceConfig { c6: 0.0, spacing_um: 8.0 }.validate().is_err());
        assert!(DeviceConfig { c6: 1.0, spacing_um: -1.0 }.validate().is_err());
        assert!(dev().validate().is_ok());
        assert!(AnalogParams::new(1.0, 1.0, 1.0, -5.0).validate().is_err());
    }
}
