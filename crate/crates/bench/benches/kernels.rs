use std::f64::consts::PI;
use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use daqga::ansatz::{AnsatzConfig, AnsatzTemplate};
use daqga::genetic::{self, GAConfig};
use daqga::pauli::load_ham_file;
use daqga::rydberg::{self, ring_register, AnalogParams, DeviceConfig};
use daqga::PauliHamiltonian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus(name: &str) -> PauliHamiltonian {
    load_ham_file(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)).unwrap()
}

fn template(n: usize) -> AnsatzTemplate {
    AnsatzTemplate::new(AnsatzConfig::default(), ring_register(n, 8.0).unwrap(), DeviceConfig::default()).unwrap()
}

fn expectation(c: &mut Criterion) {
    let mut group = c.benchmark_group("expectation");
    for name in ["h2_1.5A.ham", "lih_1.5A.ham", "beh2_1.5A.ham"] {
        let h = corpus(name);
        let tpl = template(h.n_qubits());
        let psi = tpl.prepare_state(&tpl.random_genome(&mut ChaCha8Rng::seed_from_u64(1))).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &psi, |b, psi| {
            b.iter(|| h.expectation(black_box(psi)).unwrap())
        });
    }
    group.finish();
}

fn evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for name in ["h2_1.5A.ham", "lih_1.5A.ham"] {
        let h = corpus(name);
        let tpl = template(h.n_qubits());
        let g = tpl.random_genome(&mut ChaCha8Rng::seed_from_u64(2));
        group.bench_function(name, |b| b.iter(|| tpl.evaluate(black_box(&g), &h).unwrap()));
    }
    group.finish();
}

fn evolution_unitary(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolution_unitary");
    let p = AnalogParams::new(PI, PI, PI, 250.0);
    for n in [2, 4, 6, 8] {
        let reg = ring_register(n, 8.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &reg, |b, reg| {
            b.iter(|| rydberg::evolution_unitary(black_box(reg), &p, &DeviceConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn ga_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("ga_iteration");
    group.sample_size(10);
    let h = corpus("lih_1.5A.ham");
    let tpl = template(h.n_qubits());
    let cfg = GAConfig { max_iterations: 1, stop_error: None, ..GAConfig::default() };
    group.bench_function("lih_pop200", |b| b.iter(|| genetic::run(&h, &tpl, &cfg, None).unwrap()));
    group.finish();
}

criterion_group!(benches, expectation, evaluate, evolution_unitary, ga_iteration);
criterion_main!(benches);
