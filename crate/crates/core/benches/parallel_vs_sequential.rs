use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ringfill::experiment::synthetic_tensor;
use ringfill::solver::{Trals, Trlrf};
use ringfill::tensor::{project, Selection};
use ringfill::{DenseTensor, Execution, ObservationMask, SeededRng, SolverConfig, TralsConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn problem(shape: &[usize], rank: usize) -> (DenseTensor, ObservationMask) {
    let mut rng = SeededRng::new(1);
    let truth = synthetic_tensor(shape, &vec![rank; shape.len()], 0.5, &mut rng).unwrap();
    let mask = ObservationMask::sample(shape.to_vec(), 0.5, &mut rng).unwrap();
    (project(&truth, &mask, Selection::Observed).unwrap(), mask)
}

fn aux_updates(c: &mut Criterion) {
    let (observed, mask) = problem(&[16, 16, 16, 16], 8);
    let mut group = c.benchmark_group("svt_aux_updates");
    for (name, exec) in MODES {
        let mut config = SolverConfig::new(vec![8; 4]);
        config.execution = exec;
        let mut solver = Trlrf::new(&observed, &mask, config).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solver.update_all_aux().unwrap()));
    }
    group.finish();
}

fn admm_iteration(c: &mut Criterion) {
    let (observed, mask) = problem(&[16, 16, 16, 16], 6);
    let mut group = c.benchmark_group("trlrf_iteration");
    group.sample_size(20);
    for (name, exec) in MODES {
        let mut config = SolverConfig::new(vec![6; 4]);
        config.execution = exec;
        config.k_max = usize::MAX;
        let mut solver = Trlrf::new(&observed, &mask, config).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solver.step().unwrap()));
    }
    group.finish();
}

fn als_sweep(c: &mut Criterion) {
    let (observed, mask) = problem(&[16, 16, 16, 16], 6);
    let mut group = c.benchmark_group("trals_sweep");
    group.sample_size(20);
    for (name, exec) in MODES {
        let mut config = TralsConfig::new(vec![6; 4]);
        config.execution = exec;
        let mut solver = Trals::new(&observed, &mask, config).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solver.step().unwrap()));
    }
    group.finish();
}

criterion_group!(benches, aux_updates, admm_iteration, als_sweep);
criterion_main!(benches);
