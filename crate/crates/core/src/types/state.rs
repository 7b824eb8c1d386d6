use std::ops::{Deref, Index};

use crate::error::{MerbError, Result};

/// Dense real state vector with finite entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Wraps `entries`, rejecting NaN or infinite values.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries)?;
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_max(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `self += alpha * other`
    pub(crate) fn axpy(&mut self, alpha: f64, other: &[f64]) {
        for (s, o) in self.0.iter_mut().zip(other) {
            *s += alpha * o;
        }
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = MerbError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(MerbError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Max-norm distance `max_i |u_i - v_i|`.
pub fn axpy_norms(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(MerbError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(u.iter()
        .zip(v)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
