use std::fmt;
use std::sync::Arc;

use crate::error::{MerbError, Result};
use crate::types::state::{check_finite, StateVector};

/// `F(t, u)` written into `out`.
pub type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// `(∂F/∂u)(t, u) · w` written into `out`.
pub type JacActionFn = Arc<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;
/// `(∂F/∂t)(t, u)` written into `out`.
pub type TimeDerivFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Exact solution at `t` written into `out`.
pub type ExactFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;
/// Nonlinear remainder difference `N(t, u) - N(t_n, u_n)` for the linearization
/// taken at `(t_n, u_n)` with the analytic Jacobian and time derivative.
/// Arguments are `(t_n, u_n, t, u, out)`.
pub type RemainderDiffFn = Arc<dyn Fn(f64, &[f64], f64, &[f64], &mut [f64]) + Send + Sync>;

/// An initial-value problem `u' = F(t, u)`, `u(t0) = u0` on `[t0, tf]`.
#[derive(Clone)]
pub struct IvpProblem {
    name: String,
    dim: usize,
    t0: f64,
    tf: f64,
    u0: StateVector,
    f: RhsFn,
    jac_action: Option<JacActionFn>,
    v_eval: Option<TimeDerivFn>,
    exact: Option<ExactFn>,
    remainder_diff: Option<RemainderDiffFn>,
}

impl fmt::Debug for IvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("t0", &self.t0)
            .field("tf", &self.tf)
            .field("jac_action", &self.jac_action.is_some())
            .field("v_eval", &self.v_eval.is_some())
            .field("exact", &self.exact.is_some())
            .field("remainder_diff", &self.remainder_diff.is_some())
            .finish()
    }
}

impl IvpProblem {
    pub fn new<F>(name: impl Into<String>, t0: f64, tf: f64, u0: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if !(t0.is_finite() && tf.is_finite() && tf >= t0) {
            return Err(MerbError::InvalidArgument(format!(
                "time span [{t0}, {tf}] is not a valid interval"
            )));
        }
        let u0 = StateVector::new(u0)?;
        Ok(Self {
            name: name.into(),
            dim: u0.dim(),
            t0,
            tf,
            u0,
            f: Arc::new(f),
            jac_action: None,
            v_eval: None,
            exact: None,
            remainder_diff: None,
        })
    }

    pub fn with_jacobian_action<J>(mut self, j: J) -> Self
    where
        J: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.jac_action = Some(Arc::new(j));
        self
    }

    pub fn with_time_derivative<V>(mut self, v: V) -> Self
    where
        V: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.v_eval = Some(Arc::new(v));
        self
    }

    pub fn with_exact<E>(mut self, e: E) -> Self
    where
        E: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(e));
        self
    }

    pub fn with_remainder_difference<D>(mut self, d: D) -> Self
    where
        D: Fn(f64, &[f64], f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.remainder_diff = Some(Arc::new(d));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.u0
    }

    pub fn has_jacobian_action(&self) -> bool {
        self.jac_action.is_some()
    }

    pub fn has_time_derivative(&self) -> bool {
        self.v_eval.is_some()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn has_remainder_difference(&self) -> bool {
        self.remainder_diff.is_some()
    }

    pub(crate) fn remainder_difference_fn(&self) -> Option<&RemainderDiffFn> {
        self.remainder_diff.as_ref()
    }

    pub(crate) fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(MerbError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn rhs_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.f)(t, u, out)
    }

    pub fn rhs(&self, t: f64, u: &[f64]) -> Result<StateVector> {
        self.check_dim(u)?;
        let mut out = vec![0.0; self.dim];
        (self.f)(t, u, &mut out);
        StateVector::new(out)
    }

    /// Analytic Jacobian action, if the problem provides one.
    pub fn jac_action(&self, t: f64, u: &[f64], w: &[f64]) -> Option<StateVector> {
        self.jac_action.as_ref().map(|j| {
            let mut out = vec![0.0; self.dim];
            j(t, u, w, &mut out);
            StateVector::from_vec_unchecked(out)
        })
    }

    pub(crate) fn jac_action_into(&self, t: f64, u: &[f64], w: &[f64], out: &mut [f64]) -> bool {
        match &self.jac_action {
            Some(j) => {
                j(t, u, w, out);
                true
            }
            None => false,
        }
    }

    /// Analytic `∂F/∂t`, if the problem provides one.
    pub fn time_derivative(&self, t: f64, u: &[f64]) -> Option<StateVector> {
        self.v_eval.as_ref().map(|v| {
            let mut out = vec![0.0; self.dim];
            v(t, u, &mut out);
            StateVector::from_vec_unchecked(out)
        })
    }

    pub fn exact(&self, t: f64) -> Option<StateVector> {
        self.exact.as_ref().map(|e| {
            let mut out = vec![0.0; self.dim];
            e(t, &mut out);
            StateVector::from_vec_unchecked(out)
        })
    }

    /// Same problem with a different initial state and time span.
    pub fn restarted(&self, t0: f64, tf: f64, u0: Vec<f64>) -> Result<Self> {
        self.check_dim(&u0)?;
        check_finite(&u0)?;
        let mut p = self.clone();
        p.t0 = t0;
        p.tf = tf;
        p.u0 = StateVector::from_vec_unchecked(u0);
        Ok(p)
    }

    /// Drops the analytic Jacobian, time derivative and remainder hook so that
    /// every derivative is finite-differenced.
    pub fn without_derivatives(&self) -> Self {
        let mut p = self.clone();
        p.jac_action = None;
        p.v_eval = None;
        p.remainder_diff = None;
        p
    }
}
