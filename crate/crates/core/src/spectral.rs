//! Singular value thresholding and numerical rank.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Result of [`svt`]. `rank_after` counts strictly positive shrunk singular
/// values; `nuclear_norm_after` is their sum.
#[derive(Debug, Clone)]
pub struct SvtOutput {
    pub matrix: DMatrix<f64>,
    pub nuclear_norm_after: f64,
    pub rank_after: usize,
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn decompose(a: &DMatrix<f64>, vectors: bool) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    a.clone()
        .try_svd(vectors, vectors, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_finite(a)?;
    if a.is_empty() {
        return Ok(DVector::zeros(0));
    }
    Ok(decompose(a, false)?.singular_values)
}

pub fn nuclear_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(a)?.sum())
}

/// Proximal operator of `beta * ‖·‖_*`: `U max(S - beta, 0) V^T`.
pub fn svt(a: &DMatrix<f64>, beta: f64) -> Result<SvtOutput> {
    check_finite(a)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!("threshold must be >= 0, got {beta}")));
    }
    let (rows, cols) = a.shape();
    if a.is_empty() {
        return Ok(SvtOutput {
            matrix: a.clone(),
            nuclear_norm_after: 0.0,
            rank_after: 0,
        });
    }
    let svd = decompose(a, true)?;
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let shrunk: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| (s - beta).max(0.0))
        .collect();
    let kept = shrunk.iter().take_while(|&&s| s > 0.0).count();
    let mut matrix = DMatrix::zeros(rows, cols);
    if kept > 0 {
        let mut left = u.columns(0, kept).into_owned();
        for (k, mut col) in left.column_iter_mut().enumerate() {
            col *= shrunk[k];
        }
        left.mul_to(&v_t.rows(0, kept), &mut matrix);
    }
    Ok(SvtOutput {
        matrix,
        nuclear_norm_after: shrunk.iter().sum(),
        rank_after: kept,
    })
}

/// Number of singular values above `rel_tol * sigma_max`; 0 for a zero matrix.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rank tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let s = singular_values(a)?;
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
