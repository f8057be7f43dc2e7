use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use daqga::genetic::{self, GAResult};
use daqga::noise;
use daqga::pauli::load_ham_file;
use daqga::pulse::{self, PulseSchedule};
use daqga::{Error, ExperimentConfig, Genome};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "daqga", version, about = "Digital-analog genetic ground-state search on emulated Rydberg arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for candidate evaluation and noise sampling.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground state of a .ham file by dense diagonalization.
    Exact {
        hamiltonian: PathBuf,
        /// Also write ground_state.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One genetic search.
    Run {
        #[command(flatten)]
        common: Common,
        /// Overrides `hamiltonian_path` from the config.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
    },
    /// Analog versus digital fidelity sweeps.
    Fidelity {
        #[command(flatten)]
        common: Common,
    },
    /// Pulse schedule of a saved genome.
    Pulses {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        genome: PathBuf,
        /// Width of the text rendering.
        #[arg(long, default_value_t = 72)]
        width: usize,
    },
    /// One genetic search per Hamiltonian file.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        hamiltonians: Vec<PathBuf>,
    },
}

#[derive(Serialize)]
struct Metadata {
    command: &'static str,
    version: &'static str,
    started_unix_s: u64,
    elapsed_s: f64,
    workers: usize,
}

struct Session {
    cfg: ExperimentConfig,
    out: PathBuf,
    started: Instant,
    started_unix_s: u64,
}

impl Session {
    fn open(common: &Common) -> Result<Self> {
        if let Some(w) = common.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build_global()
                .context("configuring the worker pool")?;
        }
        let mut cfg = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        let out = match &common.out {
            Some(dir) => dir.clone(),
            None => cfg.resolve_path(&cfg.output_dir),
        };
        fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
        Ok(Self {
            cfg,
            out,
            started: Instant::now(),
            started_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        })
    }

    fn write(&self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io { path, source: e })?;
        Ok(())
    }

    /// Resolved config and the timing sidecar, written next to every result set.
    fn finish(&self, command: &'static str) -> Result<()> {
        let mut resolved = self.cfg.clone();
        resolved.output_dir = self.out.clone();
        self.write(&self.out, "resolved_config.toml", &resolved.to_toml_string()?)?;
        let meta = Metadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            started_unix_s: self.started_unix_s,
            elapsed_s: self.started.elapsed().as_secs_f64(),
            workers: rayon::current_num_threads(),
        };
        self.write(&self.out, "metadata.json", &(serde_json::to_string_pretty(&meta)? + "\n"))
    }
}

fn cmd_exact(path: &Path, out: Option<&Path>) -> Result<()> {
    let h = load_ham_file(path)?;
    let gs = h.ground_state()?;
    println!("ground_energy {:.12}", gs.ground_energy);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
        #[derive(Serialize)]
        struct Exact<'a> {
            n_qubits: usize,
            ground_energy: f64,
            spectrum: &'a Option<Vec<f64>>,
            amplitudes: Vec<[f64; 2]>,
        }
        let doc = Exact {
            n_qubits: h.n_qubits(),
            ground_energy: gs.ground_energy,
            spectrum: &gs.full_spectrum,
            amplitudes: gs.ground_vector.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        };
        let path = dir.join("ground_state.json");
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n").map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

/// Runs one search and writes its artifacts into `dir`.
fn run_one(session: &Session, ham: &Path, dir: &Path) -> Result<GAResult> {
    let cfg = &session.cfg;
    let h = load_ham_file(ham)?;
    let reference = h.ground_state()?;
    let tpl = cfg.build_template(h.n_qubits())?;
    let ga = cfg.ga_config();
    let res = genetic::run(&h, &tpl, &ga, Some(&reference))?;
    let schedule = pulse::export_schedule_with(&res.best_genome, &tpl, cfg.pulse.rotation_ns)?;

    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    session.write(dir, "results.json", &(serde_json::to_string_pretty(&res)? + "\n"))?;
    session.write(dir, "history.csv", &res.history_csv()?)?;
    session.write(dir, "best_genome.json", &res.best_genome.to_json()?)?;
    session.write(dir, "schedule.json", &schedule.to_json()?)?;
    println!(
        "{}: E_ref {:.9} best {:.9} error {:.5} overlap {:.5} iterations {} stop {:?}",
        ham.display(),
        reference.ground_energy,
        res.best_energy,
        res.best_error.unwrap_or(f64::NAN),
        res.best_overlap.unwrap_or(f64::NAN),
        res.iterations(),
        res.stop_reason
    );
    Ok(res)
}

fn cmd_run(common: &Common, hamiltonian: Option<&Path>) -> Result<()> {
    let session = Session::open(common)?;
    let ham = match hamiltonian {
        Some(p) => p.to_path_buf(),
        None => {
            let p = session
                .cfg
                .hamiltonian_path
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("no Hamiltonian given (config or --hamiltonian)".into()))?;
            session.cfg.resolve_path(p)
        }
    };
    let mut session = session;
    session.cfg.hamiltonian_path = Some(ham.clone());
    run_one(&session, &ham, &session.out)?;
    session.finish("run")
}

fn cmd_sweep(common: &Common, hamiltonians: &[PathBuf]) -> Result<()> {
    let session = Session::open(common)?;
    let mut summary = String::from("hamiltonian,n_qubits,reference_energy,best_energy,error,overlap,iterations,stop_reason\n");
    for ham in hamiltonians {
        let stem = ham.file_stem().and_then(|s| s.to_str()).unwrap_or("hamiltonian");
        let res = run_one(&session, ham, &session.out.join(stem))?;
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            ham.display(),
            res.best_genome.n_qubits(),
            res.reference_energy.unwrap_or(f64::NAN),
            res.best_energy,
            res.best_error.unwrap_or(f64::NAN),
            res.best_overlap.unwrap_or(f64::NAN),
            res.iterations(),
            serde_json::to_value(res.stop_reason)?.as_str().unwrap_or_default()
        ));
    }
    session.write(&session.out, "summary.csv", &summary)?;
    session.finish("sweep")
}

fn cmd_fidelity(common: &Common) -> Result<()> {
    let session = Session::open(common)?;
    let cfg = &session.cfg;
    let report = noise::fidelity_sweeps(&cfg.noise.sweep, &cfg.device, &cfg.noise.analog, cfg.seed)?;
    session.write(&session.out, "time_sweep.csv", &report.time_csv()?)?;
    session.write(&session.out, "qubit_sweep.csv", &report.qubit_csv()?)?;
    session.write(&session.out, "sweep.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    println!("cphase_angle_sd {:.6}", report.cphase_angle_sd);
    match report.crossing {
        Some(c) => println!(
            "crossing {:.1} ns, bracket [{}, {}] ns",
            c.time_ns, c.bracket_lo_ns, c.bracket_hi_ns
        ),
        None => println!("crossing none"),
    }
    for r in &report.qubit_rows {
        println!("n {} gap {:.5} ± {:.5}", r.sweep_var, r.gap(), r.gap_se());
    }
    session.finish("fidelity")
}

fn cmd_pulses(common: &Common, genome: &Path, width: usize) -> Result<()> {
    let session = Session::open(common)?;
    let cfg = &session.cfg;
    let g = Genome::load(genome)?;
    let tpl = cfg.build_template(g.n_qubits())?;
    let schedule: PulseSchedule = pulse::export_schedule_with(&g, &tpl, cfg.pulse.rotation_ns)?;
    let ascii = schedule.render_ascii(width);
    session.write(&session.out, "schedule.json", &schedule.to_json()?)?;
    session.write(&session.out, "schedule.txt", &ascii)?;
    session.write(&session.out, "schedule.svg", &schedule.render_svg())?;
    print!("{ascii}");
    session.finish("pulses")
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonFiniteEnergy { .. }) | Some(Error::Eigen) => 3,
        Some(e) if e.is_input_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exact { hamiltonian, out } => cmd_exact(hamiltonian, out.as_deref()),
        Command::Run { common, hamiltonian } => cmd_run(common, hamiltonian.as_deref()),
        Command::Fidelity { common } => cmd_fidelity(common),
        Command::Pulses { common, genome, width } => cmd_pulses(common, genome, *width),
        Command::Sweep { common, hamiltonians } => cmd_sweep(common, hamiltonians),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
