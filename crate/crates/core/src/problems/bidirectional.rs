use crate::error::{MerbError, Result};
use crate::types::IvpProblem;

/// Parameters of the three-variable fast/slow coupling problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidirectionalConfig {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub tf: f64,
}

impl Default for BidirectionalConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 20.0,
            beta: 0.01,
            lambda: 5.0,
            sigma: 100.0,
            tf: 1.0,
        }
    }
}

/// Linear fast oscillation in `(u, v)` with frequency `σ`, driven by the slow
/// decaying variable `w`, which is in turn forced nonlinearly by `(u, v)`:
///
/// ```text
/// u' = σv - w - βt
/// v' = -σu
/// w' = -λ(w + βt) - β(u - a(w+βt)/κ)² - β(v - b(w+βt)/κ)²,   κ = aλ + bσ
/// ```
///
/// Exact solution `(cos σt + a e^{-λt}, -sin σt + b e^{-λt}, κ e^{-λt} - βt)`,
/// which requires `aσ = bλ`.
pub fn bidirectional(config: BidirectionalConfig) -> Result<IvpProblem> {
    let BidirectionalConfig {
        a,
        b,
        beta,
        lambda,
        sigma,
        tf,
    } = config;
    if (a * sigma - b * lambda).abs() > 1e-12 * (a * sigma).abs().max(1.0) {
        return Err(MerbError::InvalidArgument(format!(
            "a·σ = {} must equal b·λ = {}",
            a * sigma,
            b * lambda
        )));
    }
    let kappa = a * lambda + b * sigma;
    if !(tf > 0.0) || kappa == 0.0 {
        return Err(MerbError::InvalidArgument("degenerate bidirectional configuration".into()));
    }
    // slow-variable deviations x = u - a(w+βt)/κ, y = v - b(w+βt)/κ
    let xy = move |t: f64, u: &[f64]| {
        let s = (u[2] + beta * t) / kappa;
        (u[0] - a * s, u[1] - b * s)
    };
    let exact = move |t: f64, out: &mut [f64]| {
        let e = (-lambda * t).exp();
        out[0] = (sigma * t).cos() + a * e;
        out[1] = -(sigma * t).sin() + b * e;
        out[2] = kappa * e - beta * t;
    };
    let mut u0 = vec![0.0; 3];
    exact(0.0, &mut u0);
    let p = IvpProblem::new("bidirectional", 0.0, tf, u0, move |t, u, out| {
        let (x, y) = xy(t, u);
        out[0] = sigma * u[1] - u[2] - beta * t;
        out[1] = -sigma * u[0];
        out[2] = -lambda * (u[2] + beta * t) - beta * x * x - beta * y * y;
    })?
    .with_jacobian_action(move |t, u, w, out| {
        let (x, y) = xy(t, u);
        out[0] = sigma * w[1] - w[2];
        out[1] = -sigma * w[0];
        out[2] = -2.0 * beta * x * w[0] - 2.0 * beta * y * w[1]
            + (-lambda + 2.0 * beta * (a * x + b * y) / kappa) * w[2];
    })
    .with_time_derivative(move |t, u, out| {
        let (x, y) = xy(t, u);
        out[0] = -beta;
        out[1] = 0.0;
        out[2] = -lambda * beta + 2.0 * beta * beta * (a * x + b * y) / kappa;
    })
    .with_exact(exact)
    .with_remainder_difference(move |t_n, u_n, t, u, out| {
        // only the quadratic terms of w' survive
        let (xn, yn) = xy(t_n, u_n);
        let (x, y) = xy(t, u);
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = -beta * ((x - xn).powi(2) + (y - yn).powi(2));
    });
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::{fd_jac_action, fd_v};

    #[test]
    fn exact_initial_state() {
        let p = bidirectional(BidirectionalConfig::default()).unwrap();
        assert_eq!(p.initial_state().as_slice(), &[2.0, 20.0, 2005.0]);
        assert_eq!(p.exact(0.0).unwrap().as_slice(), &[2.0, 20.0, 2005.0]);
    }

    #[test]
    fn exact_solution_satisfies_the_ode() {
        let c = BidirectionalConfig::default();
        let p = bidirectional(c).unwrap();
        let kappa = c.a * c.lambda + c.b * c.sigma;
        for k in 0..100 {
            let t = k as f64 / 99.0;
            let e = (-c.lambda * t).exp();
            let d = [
                -c.sigma * (c.sigma * t).sin() - c.a * c.lambda * e,
                -c.sigma * (c.sigma * t).cos() - c.b * c.lambda * e,
                -kappa * c.lambda * e - c.beta,
            ];
            let f = p.rhs(t, &p.exact(t).unwrap()).unwrap();
            for i in 0..3 {
                assert!((f[i] - d[i]).abs() <= 1e-8 * (1.0 + d[i].abs()), "t={t} i={i}");
            }
        }
    }

    #[test]
    fn mismatched_parameters_rejected() {
        let c = BidirectionalConfig {
            b: 10.0,
            ..Default::default()
        };
        assert!(bidirectional(c).is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = bidirectional(BidirectionalConfig::default()).unwrap();
        let t = 0.3;
        let u = p.exact(t).unwrap();
        for w in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.6, -0.8, 0.0]] {
            let fd = fd_jac_action(&p, t, &u, &w, 1e-7).unwrap();
            let an = p.jac_action(t, &u, &w).unwrap();
            assert!(crate::types::axpy_norms(&fd, &an).unwrap() < 1e-5);
        }
        let fd = fd_v(&p, t, &u, 1e-7).unwrap();
        let an = p.time_derivative(t, &u).unwrap();
        assert!(crate::types::axpy_norms(&fd, &an).unwrap() < 1e-5);
    }
}
