//! Genetic search over ansatz parameters.
//!
//! Each iteration evaluates the population, keeps the lower-energy half,
//! pairs survivors top-down to breed children into the discarded half, and
//! mutates every member except (with elitism) the current best. Mutation
//! probability and strength both decay geometrically with the iteration.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzTemplate, Genome};
use crate::error::{Error, Result};
use crate::pauli::{PauliHamiltonian, SpectralResult};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateChange {
    /// Number of iterations to look back.
    pub window: usize,
    /// Stop when the best energy moved by less than this fraction over the window.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    /// Relative-error stop against the exact reference; `None` disables it.
    pub stop_error: Option<f64>,
    pub rate_change: Option<RateChange>,
    pub mutation_p0: f64,
    pub mutation_sigma_angle0: f64,
    pub mutation_sigma_time0_ns: f64,
    pub decay_gamma: f64,
    pub crossover_swap_prob: f64,
    pub elitism: bool,
    /// Taken from the experiment seed rather than the `[ga]` section.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            max_iterations: 1000,
            stop_error: Some(0.01),
            rate_change: None,
            mutation_p0: 0.3,
            mutation_sigma_angle0: 0.5,
            mutation_sigma_time0_ns: 20.0,
            decay_gamma: 0.995,
            crossover_swap_prob: 0.5,
            elitism: true,
            seed: 42,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return bad(format!(
                "population_size must be even and >= 4, got {}",
                self.population_size
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.decay_gamma > 0.0 && self.decay_gamma <= 1.0) {
            return bad(format!("decay_gamma must lie in (0, 1], got {}", self.decay_gamma));
        }
        if !(0.0..=1.0).contains(&self.mutation_p0) {
            return bad(format!("mutation_p0 must lie in [0, 1], got {}", self.mutation_p0));
        }
        if !(0.0..=1.0).contains(&self.crossover_swap_prob) {
            return bad(format!(
                "crossover_swap_prob must lie in [0, 1], got {}",
                self.crossover_swap_prob
            ));
        }
        if !(self.mutation_sigma_angle0 >= 0.0 && self.mutation_sigma_time0_ns >= 0.0) {
            return bad("mutation strengths must be non-negative".into());
        }
        if let Some(e) = self.stop_error {
            if !(e > 0.0) {
                return bad(format!("stop_error must be positive, got {e}"));
            }
        }
        if let Some(rc) = self.rate_change {
            if rc.window == 0 || !(rc.threshold >= 0.0) {
                return bad("rate_change needs window >= 1 and threshold >= 0".into());
            }
        }
        Ok(())
    }

    /// Mutation probability and strength multiplier at `iteration`.
    pub fn decay(&self, iteration: usize) -> f64 {
        self.decay_gamma.powi(iteration.min(i32::MAX as usize) as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub best_energy: f64,
    pub best_overlap: Option<f64>,
    pub error_vs_reference: Option<f64>,
    pub population_mean_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ErrorThreshold,
    MaxIterations,
    RateChange,
}

/// Operator choices recorded alongside every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPolicy {
    pub gate_layout: String,
    pub crossover: String,
    pub mutation: String,
    pub elitism: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GAResult {
    pub best_genome: Genome,
    pub best_energy: f64,
    pub best_overlap: Option<f64>,
    pub best_error: Option<f64>,
    pub reference_energy: Option<f64>,
    pub stop_reason: StopReason,
    pub policy: RunPolicy,
    pub history: Vec<IterationRecord>,
}

impl GAResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// One row per iteration; reference columns are empty without a reference.
    pub fn history_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "iteration",
            "best_energy",
            "best_overlap",
            "error_vs_reference",
            "population_mean_energy",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.history {
            w.write_record([
                r.iteration.to_string(),
                r.best_energy.to_string(),
                opt(r.best_overlap),
                opt(r.error_vs_reference),
                r.population_mean_energy.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// `|(e_ref − e_found) / e_ref|`.
pub fn error_metric(e_found: f64, e_ref: f64) -> Result<f64> {
    if e_ref == 0.0 {
        return Err(Error::ZeroReferenceEnergy);
    }
    Ok(((e_ref - e_found) / e_ref).abs())
}

/// Lowest-energy half, ascending; ties keep input order.
pub fn select(population: &[(Genome, f64)]) -> Result<Vec<(Genome, f64)>> {
    if population.len() % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "selection needs an even population, got {}",
            population.len()
        )));
    }
    let order = ranking(population.iter().map(|(_, e)| *e));
    Ok(order[..population.len() / 2]
        .iter()
        .map(|&i| population[i].clone())
        .collect())
}

fn ranking(energies: impl Iterator<Item = f64>) -> Vec<usize> {
    let energies: Vec<f64> = energies.collect();
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    order
}

/// Per-slot exchange with probability ½.
pub fn crossover<R: Rng + ?Sized>(p1: &Genome, p2: &Genome, rng: &mut R) -> Result<(Genome, Genome)> {
    crossover_with(p1, p2, 0.5, rng)
}

/// Every `rx[q]`, `ry[q]`, `rz[q]` and `t2` slot independently goes to the
/// children either as-is or swapped, with probability `swap_prob` of swapping.
pub fn crossover_with<R: Rng + ?Sized>(
    p1: &Genome,
    p2: &Genome,
    swap_prob: f64,
    rng: &mut R,
) -> Result<(Genome, Genome)> {
    let n = p1.n_qubits();
    let same_shape = [&p1.rx, &p1.ry, &p1.rz, &p2.rx, &p2.ry, &p2.rz]
        .iter()
        .all(|v| v.len() == n);
    if !same_shape {
        return Err(Error::GenomeMismatch("parents differ in shape".into()));
    }
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    for (a, b) in [(&mut c1.rx, &mut c2.rx), (&mut c1.ry, &mut c2.ry), (&mut c1.rz, &mut c2.rz)] {
        for q in 0..n {
            if rng.random::<f64>() < swap_prob {
                std::mem::swap(&mut a[q], &mut b[q]);
            }
        }
    }
    if rng.random::<f64>() < swap_prob {
        std::mem::swap(&mut c1.t2_ns, &mut c2.t2_ns);
    }
    Ok((c1, c2))
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Gaussian kicks with probability `p0·γᵏ` per slot and strength scaled by
/// `γᵏ`; angles wrap into `[0, 2π)`, `t2` is clamped to `t2_bounds`.
pub fn mutate<R: Rng + ?Sized>(
    g: &Genome,
    iteration: usize,
    cfg: &GAConfig,
    t2_bounds: (f64, f64),
    rng: &mut R,
) -> Genome {
    let decay = cfg.decay(iteration);
    let p = cfg.mutation_p0 * decay;
    let sigma_angle = cfg.mutation_sigma_angle0 * decay;
    let sigma_time = cfg.mutation_sigma_time0_ns * decay;
    let mut out = g.clone();
    if p <= 0.0 {
        return out;
    }
    for angles in [&mut out.rx, &mut out.ry, &mut out.rz] {
        for a in angles.iter_mut() {
            if rng.random::<f64>() < p {
                let kick: f64 = rng.sample(StandardNormal);
                *a = wrap_angle(*a + sigma_angle * kick);
            }
        }
    }
    if rng.random::<f64>() < p {
        let kick: f64 = rng.sample(StandardNormal);
        out.t2_ns = (out.t2_ns + sigma_time * kick).clamp(t2_bounds.0, t2_bounds.1);
    }
    out
}

pub fn run(
    h: &PauliHamiltonian,
    tpl: &AnsatzTemplate,
    cfg: &GAConfig,
    reference: Option<&SpectralResult>,
) -> Result<GAResult> {
    run_with_initial(h, tpl, cfg, reference, &[])
}

/// Like [`run`], with `initial` genomes placed at the front of the first
/// population (the remainder is random).
pub fn run_with_initial(
    h: &PauliHamiltonian,
    tpl: &AnsatzTemplate,
    cfg: &GAConfig,
    reference: Option<&SpectralResult>,
    initial: &[Genome],
) -> Result<GAResult> {
    cfg.validate()?;
    if h.n_qubits() != tpl.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: tpl.n_qubits(),
            found: h.n_qubits(),
        });
    }
    if cfg.stop_error.is_some() && reference.is_none() {
        return Err(Error::MissingReference);
    }
    if let Some(r) = reference {
        if r.ground_vector.n_qubits() != h.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: r.ground_vector.dim(),
            });
        }
        if r.ground_energy == 0.0 {
            return Err(Error::ZeroReferenceEnergy);
        }
    }
    if initial.len() > cfg.population_size {
        return Err(Error::InvalidConfig("more initial genomes than population slots".into()));
    }
    for g in initial {
        tpl.check_genome(g)?;
    }

    let size = cfg.population_size;
    let half = size / 2;
    let seed = cfg.seed;
    let bounds = tpl.t2_bounds();
    let mut population: Vec<Genome> = (0..size)
        .map(|i| match initial.get(i) {
            Some(g) => g.clone(),
            None => tpl.random_genome(&mut rng::stream(seed, Domain::Population, 0, i as u64)),
        })
        .collect();

    let mut history = Vec::new();
    let mut best: Option<(Genome, f64)> = None;
    let stop_reason = 'search: loop {
        let k = history.len();
        let energies: Vec<f64> = population
            .par_iter()
            .map(|g| tpl.evaluate(g, h))
            .collect::<Result<_>>()?;
        if let Some((candidate, &energy)) = energies.iter().enumerate().find(|(_, e)| !e.is_finite()) {
            return Err(Error::NonFiniteEnergy {
                energy,
                iteration: k,
                candidate,
            });
        }
        let order = ranking(energies.iter().copied());
        let leader = &population[order[0]];
        let leader_energy = energies[order[0]];
        let (overlap, error) = match reference {
            Some(r) => (
                Some(tpl.prepare_state(leader)?.overlap(&r.ground_vector)?),
                Some(error_metric(leader_energy, r.ground_energy)?),
            ),
            None => (None, None),
        };
        history.push(IterationRecord {
            iteration: k,
            best_energy: leader_energy,
            best_overlap: overlap,
            error_vs_reference: error,
            population_mean_energy: energies.iter().sum::<f64>() / size as f64,
        });
        if best.as_ref().map_or(true, |(_, e)| leader_energy < *e) {
            best = Some((leader.clone(), leader_energy));
        }

        if let (Some(limit), Some(err)) = (cfg.stop_error, error) {
            if err < limit {
                break 'search StopReason::ErrorThreshold;
            }
        }
        if let Some(rc) = cfg.rate_change {
            if k >= rc.window {
                let then = history[k - rc.window].best_energy;
                let change = if then == 0.0 {
                    (leader_energy - then).abs()
                } else {
                    ((leader_energy - then) / then).abs()
                };
                if change < rc.threshold {
                    break 'search StopReason::RateChange;
                }
            }
        }
        if k + 1 >= cfg.max_iterations {
            break 'search StopReason::MaxIterations;
        }

        let survivors: Vec<Genome> = order[..half].iter().map(|&i| population[i].clone()).collect();
        let mut next = survivors.clone();
        let mut pair = 0;
        while next.len() < size {
            let a = &survivors[(2 * pair) % half];
            let b = &survivors[(2 * pair + 1) % half];
            let mut rng = rng::stream(seed, Domain::Crossover, k as u64, pair as u64);
            let (c1, c2) = crossover_with(a, b, cfg.crossover_swap_prob, &mut rng)?;
            next.push(c1);
            if next.len() < size {
                next.push(c2);
            }
            pair += 1;
        }
        population = next
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                if cfg.elitism && i == 0 {
                    g
                } else {
                    let mut rng = rng::stream(seed, Domain::Mutation, k as u64, i as u64);
                    mutate(&g, k, cfg, bounds, &mut rng)
                }
            })
            .collect();
    };

    let (best_genome, best_energy) = best.expect("at least one iteration ran");
    let (best_overlap, best_error) = match reference {
        Some(r) => (
            Some(tpl.prepare_state(&best_genome)?.overlap(&r.ground_vector)?),
            Some(error_metric(best_energy, r.ground_energy)?),
        ),
        None => (None, None),
    };
    Ok(GAResult {
        best_genome,
        best_energy,
        best_overlap,
        best_error,
        reference_energy: reference.map(|r| r.ground_energy),
        stop_reason,
        policy: RunPolicy {
            gate_layout: tpl.layout_description().to_string(),
            crossover: format!(
                "per-slot exchange, swap probability {}, survivors paired top-down",
                cfg.crossover_swap_prob
            ),
            mutation: format!(
                "all non-elite members; gaussian, p = {} * {}^k, sigma_angle = {} * {}^k rad, sigma_t2 = {} * {}^k ns",
                cfg.mutation_p0,
                cfg.decay_gamma,
                cfg.mutation_sigma_angle0,
                cfg.decay_gamma,
                cfg.mutation_sigma_time0_ns,
                cfg.decay_gamma
            ),
            elitism: cfg.elitism,
        },
        history,
    })
}
