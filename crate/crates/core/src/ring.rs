//! Tensor-ring factors and their contraction to a full tensor.
//!
//! Core `n` has shape `R_n x I_n x R_{n+1}` with `R_N = R_0` closing the ring.
//! Every entry of the represented tensor is
//! `trace(G_0[:, i_0, :] * G_1[:, i_1, :] * ... * G_{N-1}[:, i_{N-1}, :])`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::{increment_index, DenseTensor};

/// One of the three modes of a core. `Dimension` is the physical mode; the
/// other two are the rank modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoreMode {
    Left,
    Dimension,
    Right,
}

impl CoreMode {
    pub const ALL: [CoreMode; 3] = [CoreMode::Left, CoreMode::Dimension, CoreMode::Right];

    pub fn axis(self) -> usize {
        match self {
            CoreMode::Left => 0,
            CoreMode::Dimension => 1,
            CoreMode::Right => 2,
        }
    }
}

/// Classical unfolding of a core along `mode`. The dimension-mode unfolding is
/// `I_n x (R_n R_{n+1})` with `r_n` varying fastest across columns.
pub fn core_unfold(core: &DenseTensor, mode: CoreMode) -> Result<DMatrix<f64>> {
    if core.order() != 3 {
        return Err(Error::ShapeMismatch {
            expected: vec![0, 0, 0],
            found: core.shape().to_vec(),
        });
    }
    core.unfold_classic(mode.axis())
}

/// Inverse of [`core_unfold`] for a core of the given shape.
pub fn core_fold(matrix: &DMatrix<f64>, mode: CoreMode, shape: [usize; 3]) -> Result<DenseTensor> {
    DenseTensor::fold_classic(matrix, mode.axis(), shape.to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrFactors {
    cores: Vec<DenseTensor>,
}

fn validate_ranks(shape: &[usize], ranks: &[usize]) -> Result<()> {
    if shape.len() < 3 {
        return Err(Error::OrderTooLow(shape.len()));
    }
    if ranks.len() != shape.len() || ranks.contains(&0) {
        return Err(Error::InvalidRanks {
            ranks: ranks.to_vec(),
            order: shape.len(),
        });
    }
    if shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(())
}

impl TrFactors {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        let order = cores.len();
        if order < 3 {
            return Err(Error::OrderTooLow(order));
        }
        if let Some(bad) = cores.iter().find(|c| c.order() != 3) {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 0],
                found: bad.shape().to_vec(),
            });
        }
        for n in 0..order {
            let next = (n + 1) % order;
            if cores[n].shape()[2] != cores[next].shape()[0] {
                return Err(Error::ChainMismatch {
                    left: n,
                    right: next,
                });
            }
        }
        Ok(Self { cores })
    }

    /// Cores with i.i.d. `N(0, sigma^2)` entries.
    pub fn random(shape: &[usize], ranks: &[usize], sigma: f64, rng: &mut SeededRng) -> Result<Self> {
        validate_ranks(shape, ranks)?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
        }
        let order = shape.len();
        let cores = (0..order)
            .map(|n| {
                let core_shape = vec![ranks[n], shape[n], ranks[(n + 1) % order]];
                let len = core_shape.iter().product();
                let data = (0..len).map(|_| rng.normal(sigma)).collect();
                DenseTensor::new(core_shape, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    /// `(R_0, .., R_{N-1})`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[0]).collect()
    }

    /// Shape of the represented tensor.
    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    pub fn core(&self, n: usize) -> &DenseTensor {
        &self.cores[n]
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }

    pub fn core_shape(&self, n: usize) -> [usize; 3] {
        let s = self.cores[n].shape();
        [s[0], s[1], s[2]]
    }

    /// Replaces core `n`; the new core must have the same shape.
    pub fn set_core(&mut self, n: usize, core: DenseTensor) -> Result<()> {
        self.check_mode(n)?;
        self.cores[n].check_same_shape(core.shape())?;
        self.cores[n] = core;
        Ok(())
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Factors for the ring started at core `shift`: core `k` of the result
    /// is core `(k + shift) mod N` of `self`.
    pub fn rotated(&self, shift: usize) -> Self {
        let order = self.order();
        Self {
            cores: (0..order)
                .map(|k| self.cores[(k + shift) % order].clone())
                .collect(),
        }
    }

    /// Element-by-element evaluation as a trace of slice products.
    ///
    /// Reference route only: `O(prod(I) * N * R^3)`.
    pub fn full_trace(&self) -> DenseTensor {
        let shape = self.shape();
        let len: usize = shape.iter().product();
        let slices: Vec<Vec<DMatrix<f64>>> = self
            .cores
            .iter()
            .map(|core| {
                let [r0, extent, r1] = [core.shape()[0], core.shape()[1], core.shape()[2]];
                (0..extent)
                    .map(|i| DMatrix::from_fn(r0, r1, |a, b| core.get(&[a, i, b])))
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let mut prod = slices[0][idx[0]].clone();
            for (k, &i) in idx.iter().enumerate().skip(1) {
                prod = &prod * &slices[k][i];
            }
            data.push(prod.trace());
            increment_index(&mut idx, &shape);
        }
        DenseTensor::from_parts(shape, data)
    }

    /// Merges every core except `n` into a tensor of shape
    /// `R_{n+1} x prod_{k != n} I_k x R_n`; the merged index runs over
    /// `(i_{n+1}, .., i_{N-1}, i_0, .., i_{n-1})` with `i_{n+1}` fastest.
    pub fn subchain(&self, n: usize) -> Result<DenseTensor> {
        self.check_mode(n)?;
        let order = self.order();
        let first = &self.cores[(n + 1) % order];
        let lead = first.shape()[0];
        let mut merged = first.data().to_vec();
        let mut width = first.shape()[1];
        let mut trailing = first.shape()[2];
        for step in 2..order {
            let core = &self.cores[(n + step) % order];
            let [r0, extent, r1] = [core.shape()[0], core.shape()[1], core.shape()[2]];
            debug_assert_eq!(r0, trailing);
            // (lead * width) x r0  times  r0 x (extent * r1); column-major
            // storage of the product is already (lead, width * extent, r1).
            let left = DMatrix::from_vec(lead * width, r0, merged);
            let right = DMatrix::from_column_slice(r0, extent * r1, core.data());
            merged = (left * right).data.into();
            width *= extent;
            trailing = r1;
        }
        Ok(DenseTensor::from_parts(vec![lead, width, trailing], merged))
    }

    /// Cyclic mode-2 unfolding of [`subchain`](Self::subchain): a
    /// `prod_{k != n} I_k x (R_n R_{n+1})` matrix whose column order
    /// (`r_n` fastest) matches the dimension-mode unfolding of core `n`.
    pub fn subchain_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        self.subchain(n)?.unfold_tr(1)
    }

    /// Full tensor via one subchain and one matrix product:
    /// `X_<0> = G_0(2) * S_0^T`.
    pub fn full_contract(&self) -> DenseTensor {
        let shape = self.shape();
        let sub = self
            .subchain_matrix(0)
            .expect("mode 0 exists for any valid ring");
        let g = core_unfold(&self.cores[0], CoreMode::Dimension).expect("cores are third order");
        let unfolded = g * sub.transpose();
        // the cyclic unfolding for mode 0 is the storage order itself
        DenseTensor::from_parts(shape, unfolded.data.into())
    }
}
