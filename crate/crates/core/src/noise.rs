//! Coherent-error models, average gate fidelity and the analog versus
//! digital fidelity sweeps.
//!
//! Fidelities use the closed-form Haar average
//! `F̄ = (d + |Tr(U†Ũ)|²) / (d + d²)`; only the noise is sampled. Every sample
//! draws from its own keyed stream, so estimates are independent of the
//! worker count.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::DriveParams;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen, C64, ONE, ZERO};
use crate::rng::{self, Domain};
use crate::rydberg::{self, ring_register, AnalogParams, DeviceConfig, Register, NS_PER_US};

const UNITARY_TOL: f64 = 1e-9;
const MAX_POSITION_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalogNoiseModel {
    /// Relative SD of the Rabi frequency, `Ω̃ = Ω·N(1, rabi_rel_sd)`.
    pub rabi_rel_sd: f64,
    /// Additive detuning SD, rad/µs.
    pub detuning_sd: f64,
    /// Per-axis coordinate SD, µm.
    pub position_sd: f64,
}

impl Default for AnalogNoiseModel {
    fn default() -> Self {
        Self {
            rabi_rel_sd: 0.01,
            detuning_sd: 0.6,
            position_sd: 0.1,
        }
    }
}

impl AnalogNoiseModel {
    pub fn zero() -> Self {
        Self {
            rabi_rel_sd: 0.0,
            detuning_sd: 0.0,
            position_sd: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rabi_rel_sd, self.detuning_sd, self.position_sd];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("noise SDs must be finite and >= 0: {self:?}")))
        }
    }
}

/// CPHASE angle distribution of each CNOT in the digital baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitalNoiseModel {
    pub cphase_angle_mean: f64,
    pub cphase_angle_sd: f64,
}

impl DigitalNoiseModel {
    pub fn new(cphase_angle_sd: f64) -> Self {
        Self {
            cphase_angle_mean: PI,
            cphase_angle_sd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl FidelityEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = samples.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            n_samples: n,
        }
    }
}

fn fidelity_from_trace(trace: C64, d: usize) -> f64 {
    let d = d as f64;
    (d + trace.norm_sqr()) / (d + d * d)
}

/// `(d + |Tr(U†Ũ)|²) / (d + d²)`.
pub fn avg_gate_fidelity(u: &CMatrix, u_tilde: &CMatrix) -> Result<f64> {
    let d = u.nrows();
    for m in [u, u_tilde] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        let deviation = linalg::unitarity_deviation(m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
    }
    if u == u_tilde {
        return Ok(1.0);
    }
    Ok(fidelity_from_trace(linalg::trace_adjoint_product(u, u_tilde), d))
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 noise samples, got {n_samples}")));
    }
    Ok(())
}

/// Draws one perturbed `(register, params)` pair.
fn perturb<R: Rng + ?Sized>(
    reg: &Register,
    p: &AnalogParams,
    nm: &AnalogNoiseModel,
    rng: &mut R,
) -> Result<(Register, AnalogParams)> {
    let rabi: f64 = rng.sample(StandardNormal);
    let det: f64 = rng.sample(StandardNormal);
    let params = AnalogParams {
        omega: p.omega * (1.0 + nm.rabi_rel_sd * rabi),
        delta: p.delta + nm.detuning_sd * det,
        ..*p
    };
    if nm.position_sd == 0.0 {
        return Ok((reg.clone(), params));
    }
    let axes = reg.spatial_dims();
    for _ in 0..MAX_POSITION_RETRIES {
        let coords = reg
            .coords()
            .iter()
            .map(|c| {
                let mut out = *c;
                for x in out.iter_mut().take(axes) {
                    *x += nm.position_sd * rng.sample::<f64, _>(StandardNormal);
                }
                out
            })
            .collect();
        match Register::new(coords, axes) {
            Ok(r) => return Ok((r, params)),
            Err(Error::CoincidentAtoms(..)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidRegister("perturbed atoms kept coinciding".into()))
}

/// One noisy evolution unitary: Rabi scale, detuning offset and per-axis
/// position jitter drawn from `nm`.
pub fn sample_noisy_analog_unitary<R: Rng + ?Sized>(
    reg: &Register,
    p: &AnalogParams,
    dev: &DeviceConfig,
    nm: &AnalogNoiseModel,
    rng: &mut R,
) -> Result<CMatrix> {
    nm.validate()?;
    let (noisy_reg, noisy_p) = perturb(reg, p, nm, rng)?;
    rydberg::evolution_unitary(&noisy_reg, &noisy_p, dev)
}

/// Analog fidelity of a single pulse, `n_samples` noise draws keyed by `seed`.
pub fn estimate_analog_fidelity(
    reg: &Register,
    p: &AnalogParams,
    dev: &DeviceConfig,
    nm: &AnalogNoiseModel,
    n_samples: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    let curve = analog_fidelity_curve(reg, &drive_of(p), dev, nm, &[p.duration_ns], n_samples, seed)?;
    Ok(curve[0])
}

fn drive_of(p: &AnalogParams) -> DriveParams {
    DriveParams {
        omega: p.omega,
        delta: p.delta,
        phi: p.phi,
    }
}

/// Analog fidelity at each duration, reusing one noise draw per sample for
/// all durations.
///
/// With `U = V e^{−iΛt} V†` and `Ũ = Ṽ e^{−iΛ̃t} Ṽ†`,
/// `Tr(U†Ũ) = Σ_jk e^{iλ_j t} e^{−iλ̃_k t} |(V†Ṽ)_jk|²`, so each sample costs one
/// eigendecomposition regardless of the number of durations.
pub fn analog_fidelity_curve(
    reg: &Register,
    drive: &DriveParams,
    dev: &DeviceConfig,
    nm: &AnalogNoiseModel,
    durations_ns: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<FidelityEstimate>> {
    check_samples(n_samples)?;
    nm.validate()?;
    let nominal = drive.with_duration(0.0);
    nominal.validate()?;
    for &t in durations_ns {
        nominal.with_duration(t).validate()?;
    }
    let d = 1usize << reg.len();
    let ideal = HermitianEigen::new(&rydberg::build_hamiltonian(reg, &nominal, dev)?)?;
    let ideal_adj = linalg::adjoint(&ideal.vectors);
    let major = reg.len() as u64;

    let per_sample: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut rng = rng::stream(seed, Domain::AnalogNoise, major, i as u64);
            let (noisy_reg, noisy_p) = perturb(reg, &nominal, nm, &mut rng)?;
            if noisy_reg == *reg && noisy_p == nominal {
                return Ok(vec![1.0; durations_ns.len()]);
            }
            let noisy = HermitianEigen::new(&rydberg::build_hamiltonian(&noisy_reg, &noisy_p, dev)?)?;
            let w = linalg::matmul(&ideal_adj, &noisy.vectors);
            let weights: Vec<f64> = (0..d)
                .flat_map(|j| (0..d).map(move |k| (j, k)))
                .map(|(j, k)| w[(j, k)].norm_sqr())
                .collect();
            Ok(durations_ns
                .iter()
                .map(|&t_ns| {
                    let t = t_ns / NS_PER_US;
                    let left: Vec<C64> = ideal.values.iter().map(|&l| C64::cis(l * t)).collect();
                    let right: Vec<C64> = noisy.values.iter().map(|&l| C64::cis(-l * t)).collect();
                    let mut trace = ZERO;
                    for (j, lj) in left.iter().enumerate() {
                        let row = &weights[j * d..(j + 1) * d];
                        let inner: C64 = row.iter().zip(&right).map(|(&wt, r)| r * wt).sum();
                        trace += lj * inner;
                    }
                    fidelity_from_trace(trace, d)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok((0..durations_ns.len())
        .map(|col| {
            let samples: Vec<f64> = per_sample.iter().map(|s| s[col]).collect();
            FidelityEstimate::from_samples(&samples)
        })
        .collect())
}

/// Applies `f` to every column of `u` in place, treating each as a state.
fn for_each_column(u: &mut CMatrix, mut f: impl FnMut(&mut [C64])) {
    let d = u.nrows();
    let mut col = vec![ZERO; d];
    for c in 0..u.ncols() {
        for r in 0..d {
            col[r] = u[(r, c)];
        }
        f(&mut col);
        for r in 0..d {
            u[(r, c)] = col[r];
        }
    }
}

fn hadamard(state: &mut [C64], qubit: usize) {
    let bit = 1usize << qubit;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i0 in 0..state.len() {
        if i0 & bit == 0 {
            let (a, b) = (state[i0], state[i0 | bit]);
            state[i0] = (a + b) * s;
            state[i0 | bit] = (a - b) * s;
        }
    }
}

fn cphase(state: &mut [C64], a: usize, b: usize, angle: f64) {
    let mask = (1usize << a) | (1usize << b);
    let phase = C64::cis(angle);
    for (i, amp) in state.iter_mut().enumerate() {
        if i & mask == mask {
            *amp *= phase;
        }
    }
}

/// CNOTs on `(0,1), (1,2), …, (n−2,n−1)`, each built as `H_t · CPHASE(angle) · H_t`.
pub fn cnot_chain_unitary(n: usize, angles: &[f64]) -> Result<CMatrix> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("a CNOT chain needs n >= 2, got {n}")));
    }
    if n > rydberg::MAX_ATOMS {
        return Err(Error::QubitCapExceeded {
            n_qubits: n,
            cap: rydberg::MAX_ATOMS,
        });
    }
    if angles.len() != n - 1 {
        return Err(Error::InvalidConfig(format!(
            "expected {} CPHASE angles, got {}",
            n - 1,
            angles.len()
        )));
    }
    let mut u = linalg::identity(1 << n);
    for_each_column(&mut u, |state| {
        for (k, &angle) in angles.iter().enumerate() {
            hadamard(state, k + 1);
            cphase(state, k, k + 1, angle);
            hadamard(state, k + 1);
        }
    });
    Ok(u)
}

/// Trace `Tr(CNOT† · CNOT(angle))` of one gate; the Hadamards cancel, leaving
/// the CPHASE diagonals `3 + e^{i(angle − π)}`.
fn single_cnot_trace(angle: f64) -> C64 {
    C64::new(3.0, 0.0) + C64::cis(angle - PI)
}

/// Common-random-number Monte-Carlo fidelity of one noisy CNOT.
fn single_cnot_mean(sigma: f64, normals: &[f64]) -> f64 {
    normals
        .iter()
        .map(|z| fidelity_from_trace(single_cnot_trace(PI + sigma * z), 4))
        .sum::<f64>()
        / normals.len() as f64
}

/// Bisection on `σ` so that the mean single-CNOT fidelity under
/// `angle ~ N(π, σ²)` hits `target_fidelity`.
pub fn calibrate_cphase_sigma(target_fidelity: f64, n_samples: usize, seed: u64) -> Result<f64> {
    if !(target_fidelity > 0.0 && target_fidelity < 1.0) {
        return Err(Error::UnreachableTarget(target_fidelity));
    }
    check_samples(n_samples)?;
    let normals: Vec<f64> = (0..n_samples)
        .map(|i| rng::stream(seed, Domain::Calibration, 0, i as u64).sample(StandardNormal))
        .collect();
    let f = |s: f64| single_cnot_mean(s, &normals);

    let mut hi = 0.05;
    while f(hi) > target_fidelity {
        hi *= 2.0;
        if hi > PI {
            return Err(Error::UnreachableTarget(target_fidelity));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = f(mid);
        if (value - target_fidelity).abs() < 1e-9 || hi - lo < 1e-14 {
            return Ok(mid);
        }
        if value > target_fidelity {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mean fidelity of an `n`-qubit CNOT chain with independent CPHASE angle errors.
pub fn estimate_digital_fidelity(
    n: usize,
    dnm: &DigitalNoiseModel,
    n_samples: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    check_samples(n_samples)?;
    if !(dnm.cphase_angle_sd >= 0.0) {
        return Err(Error::InvalidConfig("cphase_angle_sd must be >= 0".into()));
    }
    let ideal = cnot_chain_unitary(n, &vec![dnm.cphase_angle_mean; n - 1])?;
    let samples: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, Domain::DigitalNoise, n as u64, i as u64);
            let angles: Vec<f64> = (0..n - 1)
                .map(|_| dnm.cphase_angle_mean + dnm.cphase_angle_sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let noisy = cnot_chain_unitary(n, &angles)?;
            avg_gate_fidelity(&ideal, &noisy)
        })
        .collect::<Result<_>>()?;
    Ok(FidelityEstimate::from_samples(&samples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Global pulse whose duration is swept.
    pub drive: DriveParams,
    pub time_sweep_qubits: usize,
    pub times_ns: Vec<f64>,
    pub qubit_counts: Vec<usize>,
    pub qubit_sweep_time_ns: f64,
    pub n_samples: usize,
    pub target_cnot_fidelity: f64,
    pub calibration_samples: usize,
    /// Fixed CPHASE SD; calibrated from `target_cnot_fidelity` when absent.
    pub cphase_angle_sd: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            drive: DriveParams {
                omega: PI,
                delta: PI,
                phi: PI,
            },
            time_sweep_qubits: 6,
            times_ns: (1..=20).map(|k| 50.0 * k as f64).collect(),
            qubit_counts: (2..=8).collect(),
            qubit_sweep_time_ns: 250.0,
            n_samples: 500,
            target_cnot_fidelity: 0.99,
            calibration_samples: 1_000_000,
            cphase_angle_sd: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_samples(self.n_samples)?;
        if self.time_sweep_qubits < 2 || self.qubit_counts.iter().any(|&n| n < 2) {
            return Err(Error::InvalidConfig("sweeps need at least 2 qubits".into()));
        }
        if self.times_ns.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("times_ns must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub analog: FidelityEstimate,
    pub digital: FidelityEstimate,
}

impl SweepRow {
    pub fn gap(&self) -> f64 {
        self.analog.mean - self.digital.mean
    }

    pub fn gap_se(&self) -> f64 {
        self.analog.std_error.hypot(self.digital.std_error)
    }
}

/// First sign change of `analog − digital` from non-negative to negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub bracket_lo_ns: f64,
    pub bracket_hi_ns: f64,
    pub time_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cphase_angle_sd: f64,
    pub seed: u64,
    pub time_sweep_qubits: usize,
    pub qubit_sweep_time_ns: f64,
    pub time_rows: Vec<SweepRow>,
    pub qubit_rows: Vec<SweepRow>,
    pub crossing: Option<Crossing>,
}

/// Linear interpolation between the two points bracketing the first drop of
/// analog below digital.
pub fn find_crossing(rows: &[SweepRow]) -> Option<Crossing> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0].gap(), w[1].gap());
        (a >= 0.0 && b < 0.0).then(|| Crossing {
            bracket_lo_ns: w[0].sweep_var,
            bracket_hi_ns: w[1].sweep_var,
            time_ns: w[0].sweep_var + (w[1].sweep_var - w[0].sweep_var) * a / (a - b),
        })
    })
}

/// Time sweep at fixed qubit count and qubit-count sweep at fixed time, both
/// on ring registers with the device spacing.
pub fn fidelity_sweeps(
    cfg: &SweepConfig,
    dev: &DeviceConfig,
    nm: &AnalogNoiseModel,
    seed: u64,
) -> Result<SweepReport> {
    cfg.validate()?;
    dev.validate()?;
    nm.validate()?;
    let sigma = match cfg.cphase_angle_sd {
        Some(s) => s,
        None => calibrate_cphase_sigma(cfg.target_cnot_fidelity, cfg.calibration_samples, seed)?,
    };
    let dnm = DigitalNoiseModel::new(sigma);

    let n = cfg.time_sweep_qubits;
    let reg = ring_register(n, dev.spacing_um)?;
    let analog = analog_fidelity_curve(&reg, &cfg.drive, dev, nm, &cfg.times_ns, cfg.n_samples, seed)?;
    let digital = estimate_digital_fidelity(n, &dnm, cfg.n_samples, seed)?;
    let time_rows: Vec<SweepRow> = cfg
        .times_ns
        .iter()
        .zip(analog)
        .map(|(&t, analog)| SweepRow {
            sweep_var: t,
            analog,
            digital,
        })
        .collect();

    let qubit_rows = cfg
        .qubit_counts
        .iter()
        .map(|&k| {
            let reg = ring_register(k, dev.spacing_um)?;
            let analog = analog_fidelity_curve(
                &reg,
                &cfg.drive,
                dev,
                nm,
                &[cfg.qubit_sweep_time_ns],
                cfg.n_samples,
                seed,
            )?[0];
            Ok(SweepRow {
                sweep_var: k as f64,
                analog,
                digital: estimate_digital_fidelity(k, &dnm, cfg.n_samples, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepReport {
        cphase_angle_sd: sigma,
        seed,
        time_sweep_qubits: n,
        qubit_sweep_time_ns: cfg.qubit_sweep_time_ns,
        crossing: find_crossing(&time_rows),
        time_rows,
        qubit_rows,
    })
}

impl SweepReport {
    /// CSV with `#` header lines carrying σ and, for the time sweep, the crossing.
    pub fn time_csv(&self) -> Result<String> {
        let mut header = format!(
            "# time sweep, n = {} qubits, ring register\n# digital baseline = linear CNOT chain on (k, k+1)\n# cphase_angle_sd = {}\n",
            self.time_sweep_qubits, self.cphase_angle_sd
        );
        match self.crossing {
            Some(c) => header.push_str(&format!(
                "# crossing_ns = {} bracket = [{}, {}]\n",
                c.time_ns, c.bracket_lo_ns, c.bracket_hi_ns
            )),
            None => header.push_str("# crossing_ns = none\n"),
        }
        rows_csv(header, &self.time_rows, self.seed)
    }

    pub fn qubit_csv(&self) -> Result<String> {
        let header = format!(
            "# qubit sweep, t = {} ns, ring register\n# digital baseline = linear CNOT chain on (k, k+1)\n# cphase_angle_sd = {}\n",
            self.qubit_sweep_time_ns, self.cphase_angle_sd
        );
        rows_csv(header, &self.qubit_rows, self.seed)
    }
}

fn rows_csv(header: String, rows: &[SweepRow], seed: u64) -> Result<String> {
    let mut w = csv::Writer::from_writer(header.into_bytes());
    w.write_record([
        "sweep_var",
        "analog_mean",
        "analog_se",
        "digital_mean",
        "digital_se",
        "n_samples",
        "seed",
    ])?;
    for r in rows {
        w.write_record([
            r.sweep_var.to_string(),
            r.analog.mean.to_string(),
            r.analog.std_error.to_string(),
            r.digital.mean.to_string(),
            r.digital.std_error.to_string(),
            r.analog.n_samples.to_string(),
            seed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `diag(1, 1, 1, e^{iθ})` on two qubits.
pub fn cphase_matrix(angle: f64) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| match (i, j) {
        (3, 3) => C64::cis(angle),
        (i, j) if i == j => ONE,
        _ => ZERO,
    })
}
