//! Per-step dynamic linearization `F(t,u) = J u + V t + N(t,u)` about the
//! current numerical state, with finite-difference fallbacks.

use crate::error::{MerbError, Result};
use crate::types::{max_abs, CallCounters, IvpProblem, StateVector};

/// How `J` and `V` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LinearizationMode {
    /// Use the problem's analytic Jacobian action and `∂F/∂t` when present,
    /// falling back to finite differences for whichever is missing.
    #[default]
    Analytic,
    /// Always finite-difference, with increments scaled by `scale`
    /// (`σ = scale·(1+‖u‖)`, default `√ε`).
    FiniteDifference { scale: f64 },
}

impl LinearizationMode {
    pub fn finite_difference() -> Self {
        LinearizationMode::FiniteDifference {
            scale: f64::EPSILON.sqrt(),
        }
    }
}

/// Forward difference `(F(t, u + σw) - F(t, u)) / σ`.
pub fn fd_jac_action(
    problem: &IvpProblem,
    t: f64,
    u: &[f64],
    w: &[f64],
    sigma: f64,
) -> Result<StateVector> {
    problem.check_dim(u)?;
    problem.check_dim(w)?;
    if !(sigma > 0.0) {
        return Err(MerbError::InvalidIncrement(sigma));
    }
    let f0 = problem.rhs(t, u)?;
    let shifted: Vec<f64> = u.iter().zip(w).map(|(a, b)| a + sigma * b).collect();
    let f1 = problem.rhs(t, &shifted)?;
    let out = f1.iter().zip(f0.iter()).map(|(a, b)| (a - b) / sigma).collect();
    StateVector::new(out)
}

/// Forward difference `(F(t + σ, u) - F(t, u)) / σ`.
pub fn fd_v(problem: &IvpProblem, t: f64, u: &[f64], sigma: f64) -> Result<StateVector> {
    problem.check_dim(u)?;
    if !(sigma > 0.0) {
        return Err(MerbError::InvalidIncrement(sigma));
    }
    let f0 = problem.rhs(t, u)?;
    let f1 = problem.rhs(t + sigma, u)?;
    let out = f1.iter().zip(f0.iter()).map(|(a, b)| (a - b) / sigma).collect();
    StateVector::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JacobianSource {
    Analytic,
    FiniteDifference { sigma: f64 },
}

/// Frozen linearization data for one slow step.
#[derive(Debug, Clone)]
pub struct Linearization<'p> {
    problem: &'p IvpProblem,
    t_n: f64,
    u_n: StateVector,
    f_n: StateVector,
    v_n: StateVector,
    n_n: StateVector,
    jac: JacobianSource,
    exact_remainder: bool,
}

/// `D_nj = N(t_n + c_j H, U_nj) - N(t_n, u_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDifference {
    pub stage_index: usize,
    pub value: StateVector,
}

/// Linearizes `problem` at `(t_n, u_n)`.
pub fn linearize<'p>(
    problem: &'p IvpProblem,
    t_n: f64,
    u_n: &[f64],
    mode: LinearizationMode,
    counters: &mut CallCounters,
) -> Result<Linearization<'p>> {
    problem.check_dim(u_n)?;
    let d = problem.dim();
    let mut f_n = vec![0.0; d];
    problem.rhs_into(t_n, u_n, &mut f_n);
    counters.slow_calls += 1;
    if f_n.iter().any(|x| !x.is_finite()) || u_n.iter().any(|x| !x.is_finite()) {
        return Err(MerbError::InvalidLinearizationPoint { t: t_n });
    }

    let (fd_scale, force_fd) = match mode {
        LinearizationMode::Analytic => (f64::EPSILON.sqrt(), false),
        LinearizationMode::FiniteDifference { scale } => (scale, true),
    };
    let jac = if problem.has_jacobian_action() && !force_fd {
        JacobianSource::Analytic
    } else {
        JacobianSource::FiniteDifference {
            sigma: fd_scale * (1.0 + max_abs(u_n)),
        }
    };

    let v_n = match (force_fd, problem.time_derivative(t_n, u_n)) {
        (false, Some(v)) => v.into_vec(),
        _ => {
            let sigma = fd_scale * (1.0 + t_n.abs());
            let mut f1 = vec![0.0; d];
            problem.rhs_into(t_n + sigma, u_n, &mut f1);
            f1.iter().zip(&f_n).map(|(a, b)| (a - b) / sigma).collect()
        }
    };

    let exact_remainder = problem.has_remainder_difference()
        && matches!(jac, JacobianSource::Analytic)
        && !force_fd
        && problem.has_time_derivative();

    let mut lin = Linearization {
        problem,
        t_n,
        u_n: StateVector::from_vec_unchecked(u_n.to_vec()),
        f_n: StateVector::from_vec_unchecked(f_n),
        v_n: StateVector::from_vec_unchecked(v_n),
        n_n: StateVector::zeros(d),
        jac,
        exact_remainder,
    };
    // N(t_n, u_n) = F_n - J u_n - V t_n
    let mut ju = vec![0.0; d];
    lin.apply_jacobian(u_n, &mut ju, counters);
    let n_n: Vec<f64> = (0..d)
        .map(|i| lin.f_n[i] - ju[i] - lin.v_n[i] * t_n)
        .collect();
    lin.n_n = StateVector::from_vec_unchecked(n_n);
    Ok(lin)
}

impl<'p> Linearization<'p> {
    pub fn problem(&self) -> &'p IvpProblem {
        self.problem
    }

    pub fn t_n(&self) -> f64 {
        self.t_n
    }

    pub fn u_n(&self) -> &StateVector {
        &self.u_n
    }

    /// `F(t_n, u_n)`.
    pub fn f_n(&self) -> &StateVector {
        &self.f_n
    }

    /// `V_n = ∂F/∂t (t_n, u_n)`.
    pub fn v_n(&self) -> &StateVector {
        &self.v_n
    }

    /// `N_n(t_n, u_n)`.
    pub fn n_at_base(&self) -> &StateVector {
        &self.n_n
    }

    pub fn dim(&self) -> usize {
        self.u_n.dim()
    }

    pub fn uses_finite_differences(&self) -> bool {
        matches!(self.jac, JacobianSource::FiniteDifference { .. })
    }

    /// `out = J_n w`.
    pub fn apply_jacobian(&self, w: &[f64], out: &mut [f64], counters: &mut CallCounters) {
        counters.jac_action_calls += 1;
        match self.jac {
            JacobianSource::Analytic => {
                self.problem
                    .jac_action_into(self.t_n, &self.u_n, w, out);
            }
            JacobianSource::FiniteDifference { sigma } => {
                let wn = max_abs(w);
                if wn == 0.0 {
                    out.iter_mut().for_each(|x| *x = 0.0);
                    return;
                }
                let s = sigma / wn;
                let shifted: Vec<f64> = self.u_n.iter().zip(w).map(|(a, b)| a + s * b).collect();
                self.problem.rhs_into(self.t_n, &shifted, out);
                for (o, f) in out.iter_mut().zip(self.f_n.iter()) {
                    *o = (*o - f) / s;
                }
            }
        }
    }

    pub fn jac_action(&self, w: &[f64], counters: &mut CallCounters) -> StateVector {
        let mut out = vec![0.0; self.dim()];
        self.apply_jacobian(w, &mut out, counters);
        StateVector::from_vec_unchecked(out)
    }

    /// `N_n(t, u) = F(t, u) - J_n u - V_n t`, evaluated compositionally.
    pub fn n_eval(&self, t: f64, u: &[f64], counters: &mut CallCounters) -> StateVector {
        let d = self.dim();
        let mut f = vec![0.0; d];
        self.problem.rhs_into(t, u, &mut f);
        counters.slow_calls += 1;
        let mut ju = vec![0.0; d];
        self.apply_jacobian(u, &mut ju, counters);
        let out = (0..d).map(|i| f[i] - ju[i] - self.v_n[i] * t).collect();
        StateVector::from_vec_unchecked(out)
    }

    /// `D_nj` for stage `j` at node `c_j`. Counts one slow evaluation.
    pub fn stage_difference(
        &self,
        stage_index: usize,
        c_j: f64,
        h: f64,
        u_stage: &[f64],
        counters: &mut CallCounters,
    ) -> Result<StageDifference> {
        self.problem.check_dim(u_stage)?;
        if !(0.0..=1.0).contains(&c_j) || !(h > 0.0) {
            return Err(MerbError::InvalidArgument(format!(
                "stage node {c_j} / step {h} out of range"
            )));
        }
        let d = self.dim();
        if c_j == 0.0 && u_stage == self.u_n.as_slice() {
            return Ok(StageDifference {
                stage_index,
                value: StateVector::zeros(d),
            });
        }
        let t = self.t_n + c_j * h;
        let value = match (self.exact_remainder, self.problem.remainder_difference_fn()) {
            (true, Some(diff)) => {
                let mut out = vec![0.0; d];
                diff(self.t_n, &self.u_n, t, u_stage, &mut out);
                counters.slow_calls += 1;
                out
            }
            _ => {
                // F(t,U) - F_n - J (U - u_n) - V (t - t_n)
                let mut f = vec![0.0; d];
                self.problem.rhs_into(t, u_stage, &mut f);
                counters.slow_calls += 1;
                let du: Vec<f64> = u_stage.iter().zip(self.u_n.iter()).map(|(a, b)| a - b).collect();
                let mut jdu = vec![0.0; d];
                self.apply_jacobian(&du, &mut jdu, counters);
                let dt = t - self.t_n;
                (0..d)
                    .map(|i| f[i] - self.f_n[i] - jdu[i] - self.v_n[i] * dt)
                    .collect()
            }
        };
        Ok(StageDifference {
            stage_index,
            value: StateVector::from_vec_unchecked(value),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_problem() -> IvpProblem {
        IvpProblem::new("linear", 0.0, 1.0, vec![1.0, -1.0], |_, u, out| {
            out[0] = -2.0 * u[0] + u[1];
            out[1] = 0.5 * u[0] - 3.0 * u[1];
        })
        .unwrap()
        .with_jacobian_action(|_, _, w, out| {
            out[0] = -2.0 * w[0] + w[1];
            out[1] = 0.5 * w[0] - 3.0 * w[1];
        })
    }

    fn square_problem() -> IvpProblem {
        IvpProblem::new("square", 0.0, 0.5, vec![1.0], |_, u, out| out[0] = u[0] * u[0]).unwrap()
    }

    #[test]
    fn autonomous_problem_has_zero_v() {
        let p = linear_problem();
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.3, &[1.0, 2.0], LinearizationMode::Analytic, &mut c).unwrap();
        assert!(lin.v_n().norm_max() == 0.0);
    }

    #[test]
    fn linear_problem_has_zero_remainder() {
        let p = linear_problem();
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0, 2.0], LinearizationMode::Analytic, &mut c).unwrap();
        for (t, u) in [(0.0, [3.0, -1.0]), (0.7, [0.1, 0.2]), (2.0, [-5.0, 4.0])] {
            assert!(lin.n_eval(t, &u, &mut c).norm_max() < 1e-14);
        }
    }

    #[test]
    fn fd_is_exact_for_linear_maps() {
        let p = linear_problem();
        let w = [0.3, -0.7];
        for sigma in [1e-3, 1e-7, 1.0] {
            let fd = fd_jac_action(&p, 0.0, &[1.0, 2.0], &w, sigma).unwrap();
            let exact = p.jac_action(0.0, &[1.0, 2.0], &w).unwrap();
            assert!(crate::types::axpy_norms(&fd, &exact).unwrap() < 1e-8);
        }
    }

    #[test]
    fn fd_of_square() {
        let p = square_problem();
        let fd = fd_jac_action(&p, 0.0, &[1.0], &[1.0], 1e-7).unwrap();
        assert!((fd[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fd_rejects_zero_increment() {
        let p = square_problem();
        assert_eq!(
            fd_jac_action(&p, 0.0, &[1.0], &[1.0], 0.0),
            Err(MerbError::InvalidIncrement(0.0))
        );
        assert!(fd_v(&p, 0.0, &[1.0], -1.0).is_err());
    }

    #[test]
    fn fd_v_linear_in_time() {
        let beta = 0.01;
        let p = IvpProblem::new("drift", 0.0, 1.0, vec![1.0, 2.0], move |t, u, out| {
            out[0] = u[0] + beta * t;
            out[1] = u[1] + beta * t;
        })
        .unwrap();
        let v = fd_v(&p, 0.4, &[1.0, 2.0], 1e-6).unwrap();
        assert!(v.iter().all(|x| (x - beta).abs() < 1e-9));
        let auto = fd_v(&linear_problem(), 0.4, &[1.0, 2.0], 1e-6).unwrap();
        assert_eq!(auto.norm_max(), 0.0);
    }

    #[test]
    fn non_finite_point_rejected() {
        let p = IvpProblem::new("blowup", 0.0, 1.0, vec![1.0], |_, u, out| out[0] = 1.0 / u[0])
            .unwrap();
        let mut c = CallCounters::default();
        assert_eq!(
            linearize(&p, 0.0, &[0.0], LinearizationMode::Analytic, &mut c).unwrap_err(),
            MerbError::InvalidLinearizationPoint { t: 0.0 }
        );
    }

    #[test]
    fn first_stage_difference_is_zero() {
        let p = square_problem();
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c).unwrap();
        let d = lin.stage_difference(1, 0.0, 0.1, &[1.0], &mut c).unwrap();
        assert_eq!(d.value.as_slice(), &[0.0]);
    }

    #[test]
    fn closure_and_flatness() {
        let p = square_problem();
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.5], LinearizationMode::Analytic, &mut c).unwrap();
        // closure at a nearby point
        let u = [1.6];
        let n = lin.n_eval(0.05, &u, &mut c);
        let ju = lin.jac_action(&u, &mut c);
        let f = p.rhs(0.05, &u).unwrap();
        assert!((n[0] + ju[0] + lin.v_n()[0] * 0.05 - f[0]).abs() < 1e-12 * (1.0 + f[0].abs()));
        // second-order flatness: N(u_n + s w) - N(u_n) = O(s^2)
        let base = lin.n_eval(0.0, &[1.5], &mut c)[0];
        let ratios: Vec<f64> = [1e-3, 1e-4]
            .iter()
            .map(|s| (lin.n_eval(0.0, &[1.5 + s], &mut c)[0] - base).abs() / (s * s))
            .collect();
        // for F = u^2 the remainder is exactly (u - u_n)^2 up to the FD error in J
        assert!(ratios.iter().all(|r| *r < 10.0), "{ratios:?}");
    }
}
