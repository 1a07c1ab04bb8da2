//! Dense 64-bit parameter vectors and the weighted-average primitive used by
//! every aggregation step.

use crate::error::{Error, Result};

/// Dense real vector holding model parameters, momentum buffers, or
/// gradients.
///
/// Entries are finite 64-bit floats; validating constructors reject NaN and
/// infinities so downstream arithmetic only has to watch for divergence at
/// the loss level.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    /// Wraps a vector of finite values. Empty or non-finite input is
    /// rejected.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "dimension must be at least 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "values",
                format!("non-finite entry at index {i}"),
            ));
        }
        Ok(ParamVector { values })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        ParamVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// Inner product, accumulated in four fixed lanes so the loop vectorizes
    /// while the summation order stays deterministic.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        dot_slices(&self.values, &other.values)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance: dimension mismatch");
        let mut acc = [0.0f64; 4];
        let (a4, atail) = self.values.split_at(self.values.len() & !3);
        let (b4, btail) = other.values.split_at(a4.len());
        for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
            for k in 0..4 {
                let d = ca[k] - cb[k];
                acc[k] += d * d;
            }
        }
        let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for (a, b) in atail.iter().zip(btail) {
            let d = a - b;
            total += d * d;
        }
        total.sqrt()
    }

    /// `self + c * other`, elementwise.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        ParamVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        ParamVector {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        ParamVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest absolute per-entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    let n4 = a.len() & !3;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..n4].chunks_exact(4).zip(b[..n4].chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in a[n4..].iter().zip(&b[n4..]) {
        total += x * y;
    }
    total
}

/// Weighted average of parameter vectors.
///
/// Accumulates `weight_i * vec_i` in the order the entries are given (callers
/// pass nodes in ascending index order) and divides by the total weight once
/// at the end, so repeated calls on the same input are bit-identical.
pub fn weighted_average(entries: &[(f64, &ParamVector)]) -> Result<ParamVector> {
    let first = entries
        .first()
        .map(|(_, vec)| *vec)
        .ok_or_else(|| Error::invalid("entries", "at least one entry required"))?;
    let mut total_weight = 0.0;
    let mut sum = vec![0.0f64; first.dim()];
    for (weight, vec) in entries {
        let weight_ok = weight.is_finite() && *weight >= 0.0;
        if !weight_ok {
            return Err(Error::invalid(
                "weight",
                format!("weights must be finite and nonnegative, got {weight}"),
            ));
        }
        first.check_dim(vec)?;
        total_weight += weight;
        for (s, v) in sum.iter_mut().zip(vec.iter()) {
            *s += weight * v;
        }
    }
    if total_weight <= 0.0 {
        return Err(Error::invalid("entries", "total weight must be positive"));
    }
    for s in &mut sum {
        *s /= total_weight;
    }
    ParamVector::from_vec(sum)
}
