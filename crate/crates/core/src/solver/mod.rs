//! Completion solvers: the low-rank-factor ADMM solver ([`trlrf`]) and the
//! alternating least squares baseline ([`trals`]).

pub mod trals;
pub mod trlrf;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::ring::TrFactors;
use crate::tensor::{DenseTensor, ObservationMask};

pub use trals::{trals_solve, Trals, TralsConfig};
pub use trlrf::{trlrf_solve, AdmmState, LagrangianValue, Trlrf};

/// How unobserved entries of the initial estimate are filled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum XInit {
    #[default]
    Zero,
    ObservedMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub ranks: Vec<usize>,
    /// Weight of the fit term.
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    /// Penalty growth factor, `1 < rho < 1.5`.
    pub rho: f64,
    /// Threshold on `‖X - X_last‖_F / ‖X‖_F`.
    pub tol: f64,
    pub k_max: usize,
    pub seed: u64,
    pub x_init: XInit,
    /// Standard deviation of the random initial cores.
    pub init_sigma: f64,
    pub execution: Execution,
}

impl SolverConfig {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self {
            ranks,
            lambda: 5.0,
            mu0: 1.0,
            mu_max: 1e2,
            rho: 1.01,
            tol: 1e-6,
            k_max: 300,
            seed: 0,
            x_init: XInit::Zero,
            init_sigma: 1.0,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return bad(format!("mu0 must be > 0, got {}", self.mu0));
        }
        if !(self.mu_max >= self.mu0 && self.mu_max.is_finite()) {
            return bad(format!(
                "mu_max must be >= mu0 ({}), got {}",
                self.mu0, self.mu_max
            ));
        }
        if !(self.rho > 1.0 && self.rho < 1.5) {
            return bad(format!("rho must lie in (1, 1.5), got {}", self.rho));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.k_max == 0 {
            return bad("k_max must be >= 1".into());
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) {
            return bad(format!("init_sigma must be > 0, got {}", self.init_sigma));
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub k: usize,
    /// Augmented Lagrangian after the iteration. For ALS, the observed fit
    /// `‖P_Ω(T - Ψ)‖_F²`.
    pub lagrangian: f64,
    /// Constraint-free model objective. For ALS, same as `lagrangian`.
    pub objective: f64,
    pub rel_change: f64,
    /// Penalty used during the iteration; 0 for ALS.
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub estimate: DenseTensor,
    pub factors: TrFactors,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
}

/// Shared input validation; returns `P_Ω(T)` so later stages never see
/// values outside the mask.
pub(crate) fn prepare_inputs(
    observed: &DenseTensor,
    mask: &ObservationMask,
    ranks: &[usize],
) -> Result<DenseTensor> {
    observed.check_same_shape(mask.shape())?;
    if observed.order() < 3 {
        return Err(Error::OrderTooLow(observed.order()));
    }
    if ranks.len() != observed.order() || ranks.contains(&0) {
        return Err(Error::InvalidRanks {
            ranks: ranks.to_vec(),
            order: observed.order(),
        });
    }
    if mask.observed_count() == 0 {
        return Err(Error::EmptyMask);
    }
    if observed.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    crate::tensor::project(observed, mask, crate::tensor::Selection::Observed)
}

/// `P_Ω(T) + P_Ω̄(Ψ)`, keeping observed entries bit-identical.
pub(crate) fn merge_observed(
    observed: &DenseTensor,
    mask: &ObservationMask,
    psi: &DenseTensor,
) -> DenseTensor {
    let data = observed
        .data()
        .iter()
        .zip(psi.data())
        .zip(mask.flags())
        .map(|((&t, &p), &f)| if f { t } else { p })
        .collect();
    DenseTensor::from_parts(observed.shape().to_vec(), data)
}

pub(crate) fn relative_change(current: &DenseTensor, last: &DenseTensor) -> f64 {
    let norm = current.frobenius_norm();
    if norm == 0.0 {
        return 0.0;
    }
    current.distance(last).expect("iterates share a shape") / norm
}

pub(crate) fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let c = SolverConfig::new(vec![4, 4, 4]);
        assert_eq!(c.lambda, 5.0);
        assert_eq!(c.mu0, 1.0);
        assert_eq!(c.mu_max, 100.0);
        assert_eq!(c.rho, 1.01);
        assert_eq!(c.tol, 1e-6);
        assert_eq!(c.k_max, 300);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn invalid_configs() {
        let base = SolverConfig::new(vec![2, 2, 2]);
        let cases: [fn(&mut SolverConfig); _] = [
            |c| c.lambda = 0.0,
            |c| c.mu0 = -1.0,
            |c| c.mu_max = 0.5,
            |c| c.rho = 1.0,
            |c| c.rho = 1.5,
            |c| c.tol = 0.0,
            |c| c.k_max = 0,
        ];
        for mutate in cases {
            let mut c = base.clone();
            mutate(&mut c);
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))), "{c:?}");
        }
    }

    #[test]
    fn zero_norm_iterate_has_zero_change() {
        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        assert_eq!(relative_change(&z, &z), 0.0);
    }
}
