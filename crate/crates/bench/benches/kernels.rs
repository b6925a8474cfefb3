use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ontic_bench::{bipartite, random_chain};
use ontic_core::channels::verify_cptp;
use ontic_core::measurement::{materialized_subject_state, simulate_measurement};
use ontic_core::ontic::{bayesian_propagation_check, conditional_probabilities, ontic_decomposition};
use ontic_core::tolerance::DEFAULT_DEGENERACY_GAP;
use ontic_core::trajectories::{enumerate_trajectory_measure, sample_trajectories};
use ontic_core::{HilbertSpace, MeasurementModel, PureState};
use std::hint::black_box;

fn ontic(c: &mut Criterion) {
    let mut group = c.benchmark_group("ontic");
    for (d1, d2) in [(2, 2), (2, 3), (3, 3)] {
        let f = bipartite(7, d1, d2);
        let id = format!("{d1}x{d2}");
        group.bench_with_input(BenchmarkId::new("decomposition", &id), &f, |b, f| {
            b.iter(|| ontic_decomposition(black_box(&f.rho), DEFAULT_DEGENERACY_GAP))
        });
        group.bench_with_input(BenchmarkId::new("conditional_table", &id), &f, |b, f| {
            b.iter(|| conditional_probabilities(&f.channel, black_box(&f.rho), &f.splits(), DEFAULT_DEGENERACY_GAP))
        });
        group.bench_with_input(BenchmarkId::new("bayesian_check", &id), &f, |b, f| {
            b.iter(|| bayesian_propagation_check(&f.channel, black_box(&f.rho), &f.splits(), DEFAULT_DEGENERACY_GAP))
        });
        group.bench_with_input(BenchmarkId::new("verify_cptp", &id), &f, |b, f| {
            b.iter(|| verify_cptp(black_box(&f.channel)))
        });
    }
    group.finish();
}

fn measurement(c: &mut Criterion) {
    let mut group = c.benchmark_group("measurement");
    let psi = PureState::normalized(
        HilbertSpace::single("s", 4).unwrap(),
        ontic_core::CVector::from_element(4, 1.0.into()),
    )
    .unwrap();
    let model = MeasurementModel::new(4, 10, 10, 0.5, 0.5, 1.0).unwrap();
    group.bench_function("closed_form_d4", |b| {
        b.iter(|| simulate_measurement(&model, black_box(&psi)))
    });
    let qubit = PureState::normalized(
        HilbertSpace::qubit("s"),
        ontic_core::CVector::from_vec(vec![0.7f64.sqrt().into(), 0.3f64.sqrt().into()]),
    )
    .unwrap();
    for n in [4, 8] {
        group.bench_with_input(BenchmarkId::new("materialized", n), &n, |b, &n| {
            b.iter(|| materialized_subject_state(black_box(&qubit), n, 0.6))
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectories");
    let chain = random_chain(3, 2, 10);
    group.bench_function("enumerate_2^10", |b| {
        b.iter(|| enumerate_trajectory_measure(black_box(&chain), 2, 0))
    });
    group.bench_function("sample_10k", |b| {
        b.iter(|| sample_trajectories(black_box(&chain), 0, 5, 10_000))
    });
    group.finish();
}

criterion_group!(benches, ontic, measurement, trajectories);
criterion_main!(benches);
