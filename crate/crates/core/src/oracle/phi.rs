use nalgebra::DMatrix;

use crate::error::{MerbError, Result};

/// Default size limit for dense oracle computations.
pub const ORACLE_DIM_LIMIT: usize = 64;

/// Highest φ index supported by [`phi_stack`].
pub const MAX_PHI: usize = 6;

/// Small dense square matrix used only by the verification oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(MerbError::InvalidArgument(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() > ORACLE_DIM_LIMIT {
            return Err(MerbError::OracleLimit {
                dim: m.nrows(),
                limit: ORACLE_DIM_LIMIT,
            });
        }
        if let Some(index) = m.iter().position(|x| !x.is_finite()) {
            return Err(MerbError::NonFinite { index });
        }
        Ok(Self(m))
    }

    pub fn from_row_slice(d: usize, entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

/// `values[k] = φ_k(Z)` for `k = 0..=K`, with `φ_0 = exp`.
#[derive(Debug, Clone)]
pub struct PhiStack {
    pub values: Vec<DMatrix<f64>>,
}

impl PhiStack {
    pub fn get(&self, k: usize) -> &DMatrix<f64> {
        &self.values[k]
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    /// Max-norm residual of `φ_{k+1}(Z) Z - (φ_k(Z) - I/k!)` over all `k < K`.
    pub fn recurrence_residual(&self, z: &DenseMatrix) -> f64 {
        let d = z.dim();
        let eye = DMatrix::<f64>::identity(d, d);
        let mut worst = 0.0_f64;
        let mut fact = 1.0;
        for k in 0..self.max_index() {
            if k > 0 {
                fact *= k as f64;
            }
            let lhs = &self.values[k + 1] * z.inner();
            let rhs = &self.values[k] - &eye / fact;
            worst = worst.max((lhs - rhs).amax());
        }
        worst
    }
}

/// φ-functions of `z` through index `k_max`, from one exponential of the
/// block matrix `[[Z, I, 0, ...], [0, 0, I, ...], ..., [0, ..., 0]]` whose
/// first block row is `[φ_0, φ_1, ..., φ_K]`.
pub fn phi_stack(z: &DenseMatrix, k_max: usize) -> Result<PhiStack> {
    if k_max > MAX_PHI {
        return Err(MerbError::PhiOrder(k_max));
    }
    let d = z.dim();
    if d > ORACLE_DIM_LIMIT {
        return Err(MerbError::OracleLimit {
            dim: d,
            limit: ORACLE_DIM_LIMIT,
        });
    }
    let n = d * (k_max + 1);
    let mut big = DMatrix::<f64>::zeros(n, n);
    big.view_mut((0, 0), (d, d)).copy_from(z.inner());
    for k in 0..k_max {
        for i in 0..d {
            big[(k * d + i, (k + 1) * d + i)] = 1.0;
        }
    }
    let e = expm_scaled_by(&big, one_norm(z.inner()));
    let values = (0..=k_max)
        .map(|k| e.view((0, k * d), (d, d)).into_owned())
        .collect();
    Ok(PhiStack { values })
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor kernel.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    expm_scaled_by(a, one_norm(a))
}

// `norm` picks the scaling power. For the φ block matrix only the Z block
// needs scaling; the nilpotent shift blocks terminate the series on their own.
fn expm_scaled_by(a: &DMatrix<f64>, norm: f64) -> DMatrix<f64> {
    let n = a.nrows();
    // ||Z/2^s||_1 <= 1/4 keeps the truncation term below 1e-20
    let mut s = 0i32;
    if norm > 0.25 {
        s = (norm / 0.25).log2().ceil() as i32;
    }
    let scaled = a / 2f64.powi(s);
    let eye = DMatrix::<f64>::identity(n, n);
    // Horner form of sum_{j=0}^{18} X^j / j!
    let mut result = eye.clone();
    for j in (1..=18).rev() {
        result = &eye + (&scaled * &result) / j as f64;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}
