//! Recovery quality metrics.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// `‖reference - estimate‖_F / ‖reference‖_F`.
pub fn rse(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    let norm = reference.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(reference.distance(estimate)? / norm)
}

pub fn mse(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    let d = reference.distance(estimate)?;
    Ok(d * d / reference.len() as f64)
}

/// Peak signal-to-noise ratio in dB for data on the 0..255 scale. A perfect
/// reconstruction gives `f64::INFINITY`.
pub fn psnr(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    Ok(psnr_from_mse(mse(reference, estimate)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (255.0f64 * 255.0 / mse).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub rse: f64,
    /// `None` for non-image data.
    pub psnr: Option<f64>,
    pub iterations: usize,
    pub wall_time_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(values: &[f64]) -> DenseTensor {
        DenseTensor::new(vec![values.len()], values.to_vec()).unwrap()
    }

    #[test]
    fn rse_cases() {
        let t = vector(&[3.0, 4.0]);
        assert_eq!(rse(&t, &t).unwrap(), 0.0);
        assert_eq!(rse(&t, &vector(&[0.0, 0.0])).unwrap(), 1.0);
        assert!((rse(&t, &vector(&[3.0, 0.0])).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(
            rse(&vector(&[0.0, 0.0]), &t),
            Err(Error::ZeroReference)
        ));
        assert!(rse(&t, &vector(&[1.0])).is_err());
    }

    #[test]
    fn rse_scale_invariant() {
        let t = vector(&[1.0, -2.0, 0.5, 3.0]);
        let x = vector(&[0.9, -2.2, 0.4, 3.3]);
        let base = rse(&t, &x).unwrap();
        for c in [-3.0, 0.01, 7.5] {
            assert!((rse(&t.scaled(c), &x.scaled(c)).unwrap() - base).abs() < 1e-14);
        }
    }

    #[test]
    fn psnr_cases() {
        let t = vector(&[10.0, 20.0, 30.0]);
        assert_eq!(psnr(&t, &t).unwrap(), f64::INFINITY);
        let shifted = vector(&[265.0, 275.0, 285.0]);
        assert!(psnr(&t, &shifted).unwrap().abs() < 1e-12);
        let off_by_one = vector(&[11.0, 19.0, 31.0]);
        let expected = 10.0 * 65025f64.log10();
        assert!((psnr(&t, &off_by_one).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.1308).abs() < 1e-4);
    }

    #[test]
    fn psnr_monotone_in_mse() {
        let grid: Vec<f64> = (1..200).map(|k| 0.37 * k as f64).collect();
        for w in grid.windows(2) {
            assert!(psnr_from_mse(w[1]) < psnr_from_mse(w[0]));
        }
    }
}
