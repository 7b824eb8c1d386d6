use crate::error::{MerbError, Result};
use crate::types::IvpProblem;

/// `u_t = ε u_xx + γ u²(1-u)` on `[0, x_max]` with zero-flux boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionDiffusionConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub grid_points: usize,
    pub x_max: f64,
    pub tf: f64,
}

impl Default for ReactionDiffusionConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            epsilon: 0.01,
            grid_points: 101,
            x_max: 5.0,
            tf: 5.0,
        }
    }
}

impl ReactionDiffusionConfig {
    pub fn dx(&self) -> f64 {
        self.x_max / (self.grid_points - 1) as f64
    }

    /// Front steepness of the initial profile, `½√(2γ/ε)`.
    pub fn lambda(&self) -> f64 {
        0.5 * (2.0 * self.gamma / self.epsilon).sqrt()
    }
}

// second-order centered Laplacian; the boundary rows mirror the ghost point
fn laplacian(u: &[f64], scale: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] = scale * 2.0 * (u[1] - u[0]);
    for i in 1..n - 1 {
        out[i] = scale * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
    }
    out[n - 1] = scale * 2.0 * (u[n - 2] - u[n - 1]);
}

/// Method-of-lines discretization of the bistable reaction-diffusion front.
pub fn reaction_diffusion(config: ReactionDiffusionConfig) -> Result<IvpProblem> {
    let ReactionDiffusionConfig {
        gamma,
        epsilon,
        grid_points,
        tf,
        ..
    } = config;
    if grid_points < 3 || !(gamma > 0.0) || !(epsilon > 0.0) || !(tf > 0.0) {
        return Err(MerbError::InvalidArgument(format!("invalid reaction-diffusion config {config:?}")));
    }
    let dx = config.dx();
    let lambda = config.lambda();
    let u0 = (0..grid_points)
        .map(|i| 1.0 / (1.0 + (lambda * (i as f64 * dx - 1.0)).exp()))
        .collect();
    let s = epsilon / (dx * dx);
    let p = IvpProblem::new("reaction-diffusion", 0.0, tf, u0, move |_, u, out| {
        laplacian(u, s, out);
        for (o, &ui) in out.iter_mut().zip(u) {
            *o += gamma * ui * ui * (1.0 - ui);
        }
    })?
    .with_jacobian_action(move |_, u, w, out| {
        laplacian(w, s, out);
        for ((o, &ui), &wi) in out.iter_mut().zip(u).zip(w) {
            *o += gamma * (2.0 * ui - 3.0 * ui * ui) * wi;
        }
    })
    .with_time_derivative(|_, _, out| out.iter_mut().for_each(|x| *x = 0.0))
    .with_remainder_difference(move |_, u_n, _, u, out| {
        for ((o, &un), &ui) in out.iter_mut().zip(u_n).zip(u) {
            let d = ui - un;
            *o = gamma * d * d * (1.0 - 3.0 * un - d);
        }
    });
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::fd_jac_action;

    #[test]
    fn constant_states_are_equilibria() {
        let p = reaction_diffusion(ReactionDiffusionConfig::default()).unwrap();
        for c in [0.0, 1.0] {
            let f = p.rhs(0.0, &vec![c; 101]).unwrap();
            assert_eq!(f.norm_max(), 0.0);
        }
    }

    #[test]
    fn initial_profile() {
        let cfg = ReactionDiffusionConfig::default();
        let p = reaction_diffusion(cfg).unwrap();
        assert_eq!(p.dim(), 101);
        assert!((cfg.dx() - 0.05).abs() < 1e-15);
        let u0 = p.initial_state();
        assert!((u0[20] - 0.5).abs() < 1e-15);
        assert!(u0.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn jacobian_matches_differences() {
        let p = reaction_diffusion(ReactionDiffusionConfig::default()).unwrap();
        let u = p.initial_state().clone();
        let w: Vec<f64> = (0..101).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
        let fd = fd_jac_action(&p, 0.0, &u, &w, 1e-7).unwrap();
        let an = p.jac_action(0.0, &u, &w).unwrap();
        let diff = crate::types::axpy_norms(&fd, &an).unwrap();
        assert!(diff <= 1e-5 * an.norm_max(), "{diff}");
    }

    #[test]
    fn rejects_tiny_grid() {
        let cfg = ReactionDiffusionConfig {
            grid_points: 2,
            ..Default::default()
        };
        assert!(reaction_diffusion(cfg).is_err());
    }
}
