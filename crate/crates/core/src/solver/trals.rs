//! Alternating least squares on the observed-entry fit `‖P_Ω(T - Ψ(G))‖_F²`.
//!
//! With all cores but `n` fixed, the fit separates over the slices of core
//! `n`: row `i` of `G_n(2)` only meets observed entries whose `n`-th index is
//! `i`, through the matching rows of the subchain unfolding. Each row is the
//! solution of a small ridge-stabilized normal system.

use nalgebra::{DMatrix, DVector};

use super::{all_finite, merge_observed, prepare_inputs, relative_change, IterationRecord, SolveResult};
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::ring::{core_fold, core_unfold, CoreMode, TrFactors};
use crate::rng::SeededRng;
use crate::tensor::{DenseTensor, ObservationMask};

#[derive(Debug, Clone, PartialEq)]
pub struct TralsConfig {
    pub ranks: Vec<usize>,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
    /// Added to the diagonal of every normal system.
    pub ridge: f64,
    pub init_sigma: f64,
    pub execution: Execution,
}

impl TralsConfig {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self {
            ranks,
            max_sweeps: 300,
            tol: 1e-6,
            seed: 0,
            ridge: 1e-10,
            init_sigma: 1.0,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidConfig(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "init_sigma must be > 0, got {}",
                self.init_sigma
            )));
        }
        Ok(())
    }
}

pub struct Trals {
    observed: DenseTensor,
    mask: ObservationMask,
    config: TralsConfig,
    factors: TrFactors,
    estimate: DenseTensor,
    sweeps: usize,
}

impl Trals {
    pub fn new(observed: &DenseTensor, mask: &ObservationMask, config: TralsConfig) -> Result<Self> {
        config.validate()?;
        let observed = prepare_inputs(observed, mask, &config.ranks)?;
        let mut rng = SeededRng::new(config.seed);
        let factors = TrFactors::random(observed.shape(), &config.ranks, config.init_sigma, &mut rng)?;
        Ok(Self {
            estimate: observed.clone(),
            observed,
            mask: mask.clone(),
            config,
            factors,
            sweeps: 0,
        })
    }

    pub fn factors(&self) -> &TrFactors {
        &self.factors
    }

    pub fn estimate(&self) -> &DenseTensor {
        &self.estimate
    }

    /// `‖P_Ω(T - Ψ(G))‖_F²` at the current factors.
    pub fn observed_fit(&self) -> f64 {
        fit_on_mask(&self.observed, &self.mask, &self.factors.full_contract())
    }

    /// Exactly minimizes the observed fit over core `n`. Slices without any
    /// observed entry keep their previous values.
    pub fn update_core(&mut self, n: usize) -> Result<()> {
        let shape = self.factors.core_shape(n);
        let [left, extent, right] = shape;
        let width = left * right;
        // columns of `design_t` are rows of the subchain unfolding
        let design_t = self.factors.subchain_matrix(n)?.transpose();
        let targets = self.observed.unfold_tr(n)?;
        let flags = self.mask.unfold_tr_flags(n)?;
        let columns = targets.ncols();
        let previous = core_unfold(self.factors.core(n), CoreMode::Dimension)?;
        let ridge = self.config.ridge;

        let rows = map_range(self.config.execution, extent, |i| -> Result<Option<DVector<f64>>> {
            let observed: Vec<usize> = (0..columns).filter(|&j| flags[i + extent * j]).collect();
            if observed.is_empty() {
                return Ok(None);
            }
            let mut a_t = DMatrix::zeros(width, observed.len());
            let mut b = DVector::zeros(observed.len());
            for (k, &j) in observed.iter().enumerate() {
                a_t.set_column(k, &design_t.column(j));
                b[k] = targets[(i, j)];
            }
            let mut normal = &a_t * a_t.transpose();
            for d in 0..width {
                normal[(d, d)] += ridge;
            }
            let rhs = &a_t * b;
            let solved = match normal.clone().cholesky() {
                Some(chol) => chol.solve(&rhs),
                // rank-deficient beyond what the ridge absorbs
                None => normal
                    .svd(true, true)
                    .solve(&rhs, f64::EPSILON)
                    .map_err(|e| Error::Numerical(e.into()))?,
            };
            Ok(Some(solved))
        });

        let mut unfolded = previous;
        for (i, row) in rows.into_iter().enumerate() {
            if let Some(row) = row? {
                unfolded.set_row(i, &row.transpose());
            }
        }
        if !all_finite(unfolded.as_slice()) {
            return Err(Error::Divergence {
                iteration: self.sweeps + 1,
            });
        }
        let core = core_fold(&unfolded, CoreMode::Dimension, shape)?;
        self.factors.set_core(n, core)
    }

    pub fn step(&mut self) -> Result<IterationRecord> {
        for n in 0..self.factors.order() {
            self.update_core(n)?;
        }
        let psi = self.factors.full_contract();
        if !all_finite(psi.data()) {
            return Err(Error::Divergence {
                iteration: self.sweeps + 1,
            });
        }
        let fit = fit_on_mask(&self.observed, &self.mask, &psi);
        let next = merge_observed(&self.observed, &self.mask, &psi);
        let rel_change = relative_change(&next, &self.estimate);
        self.estimate = next;
        self.sweeps += 1;
        Ok(IterationRecord {
            k: self.sweeps,
            lagrangian: fit,
            objective: fit,
            rel_change,
            mu: 0.0,
        })
    }

    pub fn run(mut self) -> Result<SolveResult> {
        let mut history = Vec::new();
        let mut converged = false;
        while self.sweeps < self.config.max_sweeps {
            let record = self.step()?;
            history.push(record);
            if record.rel_change < self.config.tol {
                converged = true;
                break;
            }
        }
        let iterations = history.len();
        Ok(SolveResult {
            estimate: self.estimate,
            factors: self.factors,
            history,
            converged,
            iterations,
        })
    }
}

fn fit_on_mask(observed: &DenseTensor, mask: &ObservationMask, psi: &DenseTensor) -> f64 {
    observed
        .data()
        .iter()
        .zip(psi.data())
        .zip(mask.flags())
        .filter(|(_, &f)| f)
        .map(|((t, p), _)| (t - p) * (t - p))
        .sum()
}

pub fn trals_solve(
    observed: &DenseTensor,
    mask: &ObservationMask,
    config: &TralsConfig,
) -> Result<SolveResult> {
    Trals::new(observed, mask, config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rse;

    fn problem(shape: &[usize], rank: usize, missing: f64, seed: u64) -> (DenseTensor, ObservationMask) {
        let mut rng = SeededRng::derive(seed, &[0]);
        let truth = TrFactors::random(shape, &vec![rank; shape.len()], 0.5, &mut rng)
            .unwrap()
            .full_contract();
        let mask = ObservationMask::sample(shape.to_vec(), missing, &mut SeededRng::derive(seed, &[1])).unwrap();
        (truth, mask)
    }

    /// Normal-equation oracle for a single slice built from the trace route.
    #[test]
    fn slice_update_minimizes_fit() {
        let (truth, mask) = problem(&[4, 5, 4], 2, 0.3, 1);
        let mut solver = Trals::new(&truth, &mask, TralsConfig::new(vec![2, 2, 2])).unwrap();
        solver.update_core(1).unwrap();
        let base = solver.observed_fit();
        let mut rng = SeededRng::new(2);
        for _ in 0..50 {
            let mut trial = solver.factors.clone();
            let core = trial.core(1);
            let bumped = DenseTensor::from_fn(core.shape().to_vec(), |idx| {
                core.get(idx) + 1e-3 * rng.normal(1.0)
            })
            .unwrap();
            trial.set_core(1, bumped).unwrap();
            let fit = fit_on_mask(&solver.observed, &solver.mask, &trial.full_trace());
            assert!(fit >= base - 1e-9, "{fit} < {base}");
        }
    }

    #[test]
    fn full_mask_fit_decreases() {
        let (truth, _) = problem(&[5, 5, 5], 2, 0.0, 3);
        let mask = ObservationMask::full(vec![5, 5, 5]).unwrap();
        let mut solver = Trals::new(&truth, &mask, TralsConfig::new(vec![2, 2, 2])).unwrap();
        let mut last = solver.observed_fit();
        for _ in 0..15 {
            let rec = solver.step().unwrap();
            assert!(rec.objective <= last * (1.0 + 1e-9) + 1e-12, "{} > {last}", rec.objective);
            last = rec.objective;
        }
    }

    #[test]
    fn empty_slice_keeps_previous_values() {
        let (truth, _) = problem(&[3, 4, 3], 2, 0.0, 4);
        let mut flags = vec![true; 36];
        // hide every entry with i1 == 2
        for i0 in 0..3 {
            for i2 in 0..3 {
                flags[i0 + 3 * (2 + 4 * i2)] = false;
            }
        }
        let mask = ObservationMask::new(vec![3, 4, 3], flags).unwrap();
        let mut solver = Trals::new(&truth, &mask, TralsConfig::new(vec![2, 2, 2])).unwrap();
        let before = core_unfold(solver.factors.core(1), CoreMode::Dimension).unwrap();
        solver.update_core(1).unwrap();
        let after = core_unfold(solver.factors.core(1), CoreMode::Dimension).unwrap();
        assert_eq!(before.row(2), after.row(2));
        assert_ne!(before.row(0), after.row(0));
    }

    #[test]
    fn recovers_small_low_rank_tensor() {
        let (truth, mask) = problem(&[8, 8, 8], 2, 0.4, 5);
        let result = trals_solve(&truth, &mask, &TralsConfig::new(vec![2, 2, 2])).unwrap();
        for (k, f) in mask.flags().iter().enumerate() {
            if *f {
                assert_eq!(result.estimate.data()[k], truth.data()[k]);
            }
        }
        let err = rse(&truth, &result.estimate).unwrap();
        assert!(err < 0.05, "rse {err}");
    }
}
