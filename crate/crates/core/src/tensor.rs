//! Dense N-way tensors, matricizations and observation masks.
//!
//! Storage is first-index-fastest: entry `(i_0, ..., i_{N-1})` lives at
//! `i_0 + I_0 * (i_1 + I_1 * (i_2 + ...))`. Modes are zero-based.
//!
//! Two matricizations are provided. Both put mode `n` on the rows:
//!
//! * [`DenseTensor::unfold_classic`] orders the remaining indices as
//!   `(i_0, .., i_{n-1}, i_{n+1}, .., i_{N-1})`, first fastest.
//! * [`DenseTensor::unfold_tr`] orders them cyclically as
//!   `(i_{n+1}, .., i_{N-1}, i_0, .., i_{n-1})`, `i_{n+1}` fastest. This is the
//!   ordering under which a tensor-ring unfolding factors exactly as the
//!   dimension-mode unfolding of core `n` times the transposed subchain.
//!
//! Matrices are `nalgebra::DMatrix<f64>`, which are column-major, so an
//! unfolding is an axis permutation followed by a zero-copy reinterpretation.

use nalgebra::DMatrix;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn validate_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| Error::InvalidShape(shape.to_vec()))
}

/// Axis order whose first axis is `n`, followed by the rest in natural order.
pub(crate) fn classic_axes(order: usize, n: usize) -> Vec<usize> {
    std::iter::once(n)
        .chain((0..order).filter(move |&k| k != n))
        .collect()
}

/// Axis order `n, n+1, .., N-1, 0, .., n-1`.
pub(crate) fn cyclic_axes(order: usize, n: usize) -> Vec<usize> {
    (0..order).map(|k| (n + k) % order).collect()
}

fn inverse_axes(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Reorders first-index-fastest `data` so that output axis `k` is input axis
/// `perm[k]`.
pub(crate) fn permute_data<T: Copy>(shape: &[usize], data: &[T], perm: &[usize]) -> Vec<T> {
    let order = shape.len();
    debug_assert_eq!(perm.len(), order);
    let mut in_strides = vec![1usize; order];
    for k in 1..order {
        in_strides[k] = in_strides[k - 1] * shape[k - 1];
    }
    let out_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();

    let mut out = Vec::with_capacity(data.len());
    if data.is_empty() {
        return out;
    }
    let inner = out_shape[0];
    let inner_stride = strides[0];
    let mut counter = vec![0usize; order];
    let mut offset = 0usize;
    loop {
        out.extend((0..inner).map(|i| data[offset + i * inner_stride]));
        // advance the odometer over axes 1..order
        let mut k = 1;
        loop {
            if k == order {
                return out;
            }
            counter[k] += 1;
            offset += strides[k];
            if counter[k] < out_shape[k] {
                break;
            }
            offset -= strides[k] * out_shape[k];
            counter[k] = 0;
            k += 1;
        }
    }
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        if data.len() != len {
            return Err(Error::ElementCount {
                expected: len,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { shape, data })
    }

    /// Skips the finiteness scan; used for solver internals whose outputs are
    /// checked separately.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        Ok(Self {
            shape,
            data: vec![0.0; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = validate_shape(&shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            increment_index(&mut idx, &shape);
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order());
        index
            .iter()
            .zip(&self.shape)
            .rev()
            .fold(0, |acc, (&i, &extent)| {
                debug_assert!(i < extent);
                acc * extent + i
            })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.linear_index(index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.shape.clone(),
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other.shape())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub(crate) fn check_same_shape(&self, other: &[usize]) -> Result<()> {
        if self.shape != other {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.to_vec(),
            });
        }
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

    /// Tensor whose axis `k` is axis `perm[k]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.order()];
        if perm.len() != self.order()
            || perm
                .iter()
                .any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidConfig(format!(
                "{perm:?} is not a permutation of 0..{}",
                self.order()
            )));
        }
        let shape = perm.iter().map(|&p| self.shape[p]).collect();
        Ok(Self::from_parts(
            shape,
            permute_data(&self.shape, &self.data, perm),
        ))
    }

    /// Same entries in the same storage order, viewed with a new shape.
    pub fn reshape(&self, new_shape: Vec<usize>) -> Result<Self> {
        let len = validate_shape(&new_shape)?;
        if len != self.len() {
            return Err(Error::ElementCount {
                expected: self.len(),
                found: len,
            });
        }
        Ok(Self::from_parts(new_shape, self.data.clone()))
    }

    fn unfold_with(&self, axes: &[usize]) -> DMatrix<f64> {
        let rows = self.shape[axes[0]];
        let cols = self.len() / rows;
        DMatrix::from_vec(rows, cols, permute_data(&self.shape, &self.data, axes))
    }

    /// Classical mode-`n` unfolding `X_(n)`.
    pub fn unfold_classic(&self, n: usize) -> Result<DMatrix<f64>> {
        self.check_mode(n)?;
        Ok(self.unfold_with(&classic_axes(self.order(), n)))
    }

    /// Cyclic mode-`n` unfolding `X_<n>` used by tensor-ring algebra.
    pub fn unfold_tr(&self, n: usize) -> Result<DMatrix<f64>> {
        self.check_mode(n)?;
        Ok(self.unfold_with(&cyclic_axes(self.order(), n)))
    }

    fn fold_with(matrix: &DMatrix<f64>, axes: &[usize], shape: Vec<usize>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        let rows = shape[axes[0]];
        if matrix.nrows() != rows || matrix.nrows() * matrix.ncols() != len {
            return Err(Error::ShapeMismatch {
                expected: vec![rows, len / rows],
                found: vec![matrix.nrows(), matrix.ncols()],
            });
        }
        let permuted: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
        let data = permute_data(&permuted, matrix.as_slice(), &inverse_axes(axes));
        Ok(Self::from_parts(shape, data))
    }

    /// Inverse of [`unfold_classic`](Self::unfold_classic).
    pub fn fold_classic(matrix: &DMatrix<f64>, n: usize, shape: Vec<usize>) -> Result<Self> {
        if n >= shape.len() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                order: shape.len(),
            });
        }
        Self::fold_with(matrix, &classic_axes(shape.len(), n), shape)
    }

    /// Inverse of [`unfold_tr`](Self::unfold_tr).
    pub fn fold_tr(matrix: &DMatrix<f64>, n: usize, shape: Vec<usize>) -> Result<Self> {
        if n >= shape.len() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                order: shape.len(),
            });
        }
        Self::fold_with(matrix, &cyclic_axes(shape.len(), n), shape)
    }
}

pub(crate) fn increment_index(idx: &mut [usize], shape: &[usize]) {
    for (i, &extent) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < extent {
            return;
        }
        *i = 0;
    }
}

/// Indicator of the observed index set. `true` means observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    flags: Vec<bool>,
    observed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Observed,
    Missing,
}

impl ObservationMask {
    pub fn new(shape: Vec<usize>, flags: Vec<bool>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        if flags.len() != len {
            return Err(Error::ElementCount {
                expected: len,
                found: flags.len(),
            });
        }
        let observed = flags.iter().filter(|&&f| f).count();
        Ok(Self {
            shape,
            flags,
            observed,
        })
    }

    pub fn full(shape: Vec<usize>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        Ok(Self {
            shape,
            flags: vec![true; len],
            observed: len,
        })
    }

    /// Keeps exactly `round((1 - missing_rate) * len)` entries, drawn
    /// uniformly without replacement.
    pub fn sample(shape: Vec<usize>, missing_rate: f64, rng: &mut SeededRng) -> Result<Self> {
        if !(0.0..1.0).contains(&missing_rate) {
            return Err(Error::InvalidMissingRate(missing_rate));
        }
        let len = validate_shape(&shape)?;
        let keep = (((1.0 - missing_rate) * len as f64).round() as usize).min(len);
        let mut flags = vec![false; len];
        for i in index::sample(rng.inner_mut(), len, keep) {
            flags[i] = true;
        }
        Ok(Self {
            shape,
            flags,
            observed: keep,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn observed_count(&self) -> usize {
        self.observed
    }

    pub fn missing_rate(&self) -> f64 {
        1.0 - self.observed as f64 / self.len() as f64
    }

    pub fn is_observed(&self, linear: usize) -> bool {
        self.flags[linear]
    }

    /// Flags in the column order of [`DenseTensor::unfold_tr`] for mode `n`,
    /// column-major over `I_n x prod(others)`.
    pub fn unfold_tr_flags(&self, n: usize) -> Result<Vec<bool>> {
        if n >= self.shape.len() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                order: self.shape.len(),
            });
        }
        Ok(permute_data(
            &self.shape,
            &self.flags,
            &cyclic_axes(self.shape.len(), n),
        ))
    }
}

/// `P_Ω(x)` or `P_Ω̄(x)`: zero outside the selected index set.
pub fn project(x: &DenseTensor, mask: &ObservationMask, selection: Selection) -> Result<DenseTensor> {
    x.check_same_shape(mask.shape())?;
    let keep = selection == Selection::Observed;
    let data = x
        .data
        .iter()
        .zip(&mask.flags)
        .map(|(&v, &f)| if f == keep { v } else { 0.0 })
        .collect();
    Ok(DenseTensor::from_parts(x.shape.clone(), data))
}
