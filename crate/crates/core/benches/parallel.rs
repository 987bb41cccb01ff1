use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qretro::bb84::{self, Attack};
use qretro::hilbert::Operator;
use qretro::optics::{self, BeamSplitter, BeamSplitterUnitary, FockSpace};
use qretro::Strategy;

const STRATEGIES: [(&str, Strategy); 2] = [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)];

fn slots(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_slots");
    for (name, strategy) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, 200_000), &strategy, |b, &s| {
            b.iter(|| bb84::simulate_slots_with(s, black_box(200_000), 7, Attack::InterceptResend).unwrap())
        });
    }
    group.finish();
}

fn detector_sweep(c: &mut Criterion) {
    let space = FockSpace::new(30).unwrap();
    let points: Vec<(usize, f64)> = (0..4).flat_map(|n| (1..=6).map(move |k| (n, k as f64 / 6.0))).collect();
    let mut group = c.benchmark_group("sweep_detector");
    group.sample_size(10);
    for (name, strategy) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, points.len()), &strategy, |b, &s| {
            b.iter(|| optics::sweep_detector(black_box(&points), &space, s))
        });
    }
    group.finish();
}

fn compose(c: &mut Criterion) {
    let space = FockSpace::new(40).unwrap();
    let u = BeamSplitterUnitary::new(&BeamSplitter::from_efficiency(0.5).unwrap(), &space).unwrap();
    let d = space.dim();
    // mixed reference: every eigenvector costs a full pass
    let weights: Vec<f64> = (0..d).map(|k| 0.5f64.powi(k as i32 + 1)).collect();
    let total: f64 = weights.iter().sum();
    let rho_c = Operator::real_diagonal(&weights.iter().map(|w| w / total).collect::<Vec<_>>()).unwrap();
    let pi_b = Operator::basis_projector(d, 1).unwrap();
    let pi_c = Operator::identity(&space.mode_dims());
    let mut group = c.benchmark_group("compose_pom");
    group.sample_size(10);
    for (name, strategy) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, d), &strategy, |b, &s| {
            b.iter(|| u.compose_pom(black_box(&rho_c), &pi_b, &pi_c, s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, slots, detector_sweep, compose);
criterion_main!(benches);
