//! Synthetic benchmarks: rank sweeps over randomly generated tensor-ring data.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::rse;
use crate::par::{map_range, Execution};
use crate::ring::TrFactors;
use crate::rng::SeededRng;
use crate::solver::trlrf::timed;
use crate::solver::{trals_solve, trlrf_solve, SolveResult, SolverConfig, TralsConfig};
use crate::tensor::{project, DenseTensor, ObservationMask, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Trlrf,
    Trals,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Trlrf => "trlrf",
            Algorithm::Trals => "trals",
        }
    }

    fn label(self) -> u64 {
        match self {
            Algorithm::Trlrf => 1,
            Algorithm::Trals => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trlrf" => Ok(Algorithm::Trlrf),
            "trals" => Ok(Algorithm::Trals),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Runs `algorithm` with the ADMM settings in `config`. ALS uses `ranks`,
/// `k_max` (as its sweep cap), `tol`, `seed`, `init_sigma` and `execution`.
pub fn complete(
    algorithm: Algorithm,
    observed: &DenseTensor,
    mask: &ObservationMask,
    config: &SolverConfig,
) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Trlrf => trlrf_solve(observed, mask, config),
        Algorithm::Trals => {
            config.validate()?;
            let als = TralsConfig {
                ranks: config.ranks.clone(),
                max_sweeps: config.k_max,
                tol: config.tol,
                seed: config.seed,
                init_sigma: config.init_sigma,
                execution: config.execution,
                ..TralsConfig::new(config.ranks.clone())
            };
            trals_solve(observed, mask, &als)
        }
    }
}

/// Ground truth from random cores with i.i.d. `N(0, sigma^2)` entries.
pub fn synthetic_tensor(shape: &[usize], ranks: &[usize], sigma: f64, rng: &mut SeededRng) -> Result<DenseTensor> {
    Ok(TrFactors::random(shape, ranks, sigma, rng)?.full_contract())
}

/// An `height x width x 3` image built from random rank-`rank` cores and
/// min-max rescaled to 0..255.
pub fn synthetic_image(height: usize, width: usize, rank: usize, seed: u64) -> Result<DenseTensor> {
    let mut rng = SeededRng::new(seed);
    let raw = synthetic_tensor(&[height, width, 3], &[rank; 3], 1.0, &mut rng)?;
    let (lo, hi) = raw
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    DenseTensor::new(
        raw.shape().to_vec(),
        raw.data().iter().map(|v| 255.0 * (v - lo) / span).collect(),
    )
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub shape: Vec<usize>,
    pub true_rank: usize,
    pub sigma: f64,
    pub missing_rate: f64,
    pub ranks: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    pub seed: u64,
    /// Solver settings; `ranks` and `seed` are overwritten per run.
    pub solver: SolverConfig,
    /// Parallelism across runs. Each run is itself sequential.
    pub execution: Execution,
}

impl SweepSpec {
    pub fn new(shape: Vec<usize>, true_rank: usize) -> Self {
        let order = shape.len();
        let mut solver = SolverConfig::new(vec![true_rank; order]);
        solver.execution = Execution::Sequential;
        Self {
            shape,
            true_rank,
            sigma: 0.5,
            missing_rate: 0.5,
            ranks: vec![true_rank],
            algorithms: vec![Algorithm::Trlrf, Algorithm::Trals],
            repeats: 1,
            seed: 0,
            solver,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub rank: usize,
    pub repeat: usize,
    pub rse: f64,
    pub iterations: usize,
    pub seconds: f64,
}

/// The observed tensor and mask for one repeat. Only `P_Ω(T)` leaves this
/// function besides the ground truth used for scoring.
pub fn sweep_instance(spec: &SweepSpec, repeat: usize) -> Result<(DenseTensor, ObservationMask)> {
    let order = spec.shape.len();
    let mut data_rng = SeededRng::derive(spec.seed, &[0, repeat as u64]);
    let truth = synthetic_tensor(&spec.shape, &vec![spec.true_rank; order], spec.sigma, &mut data_rng)?;
    let mut mask_rng = SeededRng::derive(spec.seed, &[1, repeat as u64]);
    let mask = ObservationMask::sample(spec.shape.clone(), spec.missing_rate, &mut mask_rng)?;
    Ok((truth, mask))
}

/// Every (repeat, algorithm, rank) combination, scored by RSE against the
/// ground truth. Rows come back ordered by repeat, then algorithm, then rank.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.repeats == 0 || spec.ranks.is_empty() || spec.algorithms.is_empty() {
        return Err(Error::InvalidConfig("sweep needs repeats, ranks and algorithms".into()));
    }
    spec.solver.validate()?;
    let instances = map_range(spec.execution, spec.repeats, |r| sweep_instance(spec, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_repeat = spec.algorithms.len() * spec.ranks.len();
    let order = spec.shape.len();
    let rows = map_range(spec.execution, spec.repeats * per_repeat, |job| -> Result<SweepRow> {
        let repeat = job / per_repeat;
        let algorithm = spec.algorithms[(job % per_repeat) / spec.ranks.len()];
        let rank = spec.ranks[job % spec.ranks.len()];
        let (truth, mask) = &instances[repeat];
        let observed = project(truth, mask, Selection::Observed)?;
        let mut config = spec.solver.clone();
        config.ranks = vec![rank; order];
        config.seed = SeededRng::derive(spec.seed, &[2, repeat as u64, algorithm.label(), rank as u64]).next_u64();
        let (result, seconds) = timed(|| complete(algorithm, &observed, mask, &config));
        let result = result?;
        Ok(SweepRow {
            algorithm,
            rank,
            repeat,
            rse: rse(truth, &result.estimate)?,
            iterations: result.iterations,
            seconds,
        })
    });
    rows.into_iter().collect()
}

pub const SWEEP_HEADER: &str = "algorithm,rank,repeat,rse,iterations,seconds";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.algorithm,
            r.rank,
            r.repeat,
            crate::io::format_f64(r.rse),
            r.iterations,
            crate::io::format_f64(r.seconds)
        ));
    }
    out
}

/// Median RSE per rank for one algorithm, in rank order of first appearance.
pub fn median_rse(rows: &[SweepRow], algorithm: Algorithm) -> Vec<(usize, f64)> {
    let mut ranks: Vec<usize> = Vec::new();
    for r in rows.iter().filter(|r| r.algorithm == algorithm) {
        if !ranks.contains(&r.rank) {
            ranks.push(r.rank);
        }
    }
    ranks
        .into_iter()
        .map(|rank| {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.rank == rank)
                .map(|r| r.rse)
                .collect();
            (rank, median(&mut v))
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty set");
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}
