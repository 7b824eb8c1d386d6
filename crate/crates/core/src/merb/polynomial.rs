use crate::error::{MerbError, Result};
use crate::linearization::{Linearization, StageDifference};
use crate::merb::method::{MerbMethod, PolyTerm};
use crate::types::StateVector;

/// Vector-valued polynomial forcing `p(τ) = Σ_k coeffs[k] τ^k` of a modified
/// fast problem `y' = J_n y + p(τ)`.
///
/// `increment` holds the forcing of the same problem written for
/// `z = y - u_n`, i.e. `z' = J_n z + F_n + τ V_n + (stage-difference part)`,
/// which avoids forming `N_n(t_n, u_n)` and adding it back.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingPolynomial {
    pub coeffs: Vec<StateVector>,
    pub increment: Vec<StateVector>,
}

impl ForcingPolynomial {
    /// `N_n(t_n, u_n) + (t_n + τ) V_n`.
    pub fn base(lin: &Linearization<'_>) -> Self {
        let d = lin.dim();
        let t_n = lin.t_n();
        let c0: Vec<f64> = (0..d)
            .map(|i| lin.n_at_base()[i] + t_n * lin.v_n()[i])
            .collect();
        Self {
            coeffs: vec![StateVector::from_vec_unchecked(c0), lin.v_n().clone()],
            increment: vec![lin.f_n().clone(), lin.v_n().clone()],
        }
    }

    /// Plain polynomial with the same coefficients in both forms; for
    /// standalone use where no linearization point is involved.
    pub fn from_coeffs(coeffs: Vec<StateVector>) -> Result<Self> {
        let d = coeffs.first().map(|c| c.dim()).unwrap_or(0);
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != d) {
            return Err(MerbError::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self {
            increment: coeffs.clone(),
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map(|c| c.dim()).unwrap_or(0)
    }

    fn add_term(&mut self, power: usize, weight: f64, d_hat: &[f64]) {
        let d = d_hat.len();
        while self.coeffs.len() <= power {
            self.coeffs.push(StateVector::zeros(d));
            self.increment.push(StateVector::zeros(d));
        }
        self.coeffs[power].axpy(weight, d_hat);
        self.increment[power].axpy(weight, d_hat);
    }

    fn horner(coeffs: &[StateVector], tau: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for c in coeffs.iter().rev() {
            for (o, ci) in out.iter_mut().zip(c.iter()) {
                *o = *o * tau + ci;
            }
        }
    }

    /// `p(τ)` into `out`.
    pub fn eval_into(&self, tau: f64, out: &mut [f64]) {
        Self::horner(&self.coeffs, tau, out)
    }

    pub fn eval(&self, tau: f64) -> StateVector {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(tau, &mut out);
        StateVector::from_vec_unchecked(out)
    }

    /// Forcing of the increment form at `τ`.
    pub fn eval_increment_into(&self, tau: f64, out: &mut [f64]) {
        Self::horner(&self.increment, tau, out)
    }
}

fn apply_terms(
    poly: &mut ForcingPolynomial,
    terms: &[PolyTerm],
    d_hats: &[StageDifference],
    h: f64,
) -> Result<()> {
    for t in terms {
        let d = d_hats
            .iter()
            .find(|d| d.stage_index == t.stage)
            .ok_or(MerbError::MissingStageDifference(t.stage))?;
        poly.add_term(t.power, t.weight / h.powi(t.power as i32), &d.value);
    }
    Ok(())
}

/// Forcing polynomial shared by every stage of group `group`.
pub fn build_stage_polynomial(
    method: &MerbMethod,
    lin: &Linearization<'_>,
    d_hats: &[StageDifference],
    h: f64,
    group: usize,
) -> Result<ForcingPolynomial> {
    if group >= method.groups().len() {
        return Err(MerbError::InvalidArgument(format!(
            "{} has no stage group {group}",
            method.name()
        )));
    }
    let mut poly = ForcingPolynomial::base(lin);
    apply_terms(&mut poly, &method.shared_stage_terms(group)?, d_hats, h)?;
    Ok(poly)
}

/// Forcing polynomial of the final update solve over `[0, H]`.
pub fn build_update_polynomial(
    method: &MerbMethod,
    lin: &Linearization<'_>,
    d_hats: &[StageDifference],
    h: f64,
) -> Result<ForcingPolynomial> {
    let mut poly = ForcingPolynomial::base(lin);
    apply_terms(&mut poly, &method.update_terms(), d_hats, h)?;
    Ok(poly)
}
