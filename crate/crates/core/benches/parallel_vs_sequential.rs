use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkp_link::channel::AmpMode;
use gkp_link::gkp::{GkpCode, Lattice};
use gkp_link::montecarlo::{run_swap_trials, SwapTrialConfig};
use gkp_link::rate::{sweep, Combine, SweepGrid};
use gkp_link::Execution;

fn policies() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn bench_sweep(c: &mut Criterion) {
    let grid = SweepGrid {
        lattices: Lattice::ALL.to_vec(),
        amps: AmpMode::ALL.to_vec(),
        combine: Combine::SingleArm,
        ns: (1..=10).collect(),
        squeezing_db: vec![f64::INFINITY, 10.0, 5.0],
        half_loss_db: (0..=30).map(|i| i as f64 * 0.1).collect(),
    };
    let mut group = c.benchmark_group("rate_sweep");
    for (name, exec) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep(&grid, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let config = SwapTrialConfig {
        code: GkpCode::new(Lattice::Square, 2).unwrap(),
        sigma2_arm: 0.05,
        n_trials: 200_000,
        seed: 1,
        combine: Combine::SumArms,
    };
    let mut group = c.benchmark_group("swap_monte_carlo");
    group.sample_size(20);
    for (name, exec) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_swap_trials(&config, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_monte_carlo);
criterion_main!(benches);
