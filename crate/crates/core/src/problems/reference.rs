use crate::error::{MerbError, Result};
use crate::inner::tableau;
use crate::types::{max_abs, ButcherTableau, IvpProblem, StateVector};

/// Fixed-step explicit RK integration of `u' = F(t, u)` itself, recording at
/// `outputs`. Steps are `h` except the last one before each output.
pub fn rk_integrate(
    problem: &IvpProblem,
    tab: &ButcherTableau,
    h: f64,
    outputs: &[f64],
) -> Result<Vec<StateVector>> {
    if !(h > 0.0) {
        return Err(MerbError::InvalidArgument(format!("step {h} must be positive")));
    }
    let d = problem.dim();
    let s = tab.stages();
    let mut u = problem.initial_state().as_slice().to_vec();
    let mut t = problem.t0();
    let mut k = vec![vec![0.0; d]; s];
    let mut stage = vec![0.0; d];
    let mut out = Vec::with_capacity(outputs.len());
    for &target in outputs {
        let n = ((target - t) / h - 1e-9).ceil().max(0.0) as usize;
        let start = t;
        for step in 0..n {
            let t_next = if step + 1 == n { target } else { start + (step + 1) as f64 * h };
            let dt = t_next - t;
            for i in 0..s {
                stage.copy_from_slice(&u);
                for (j, kj) in k.iter().enumerate().take(i) {
                    let a = tab.a(i, j);
                    if a != 0.0 {
                        stage.iter_mut().zip(kj).for_each(|(x, y)| *x += dt * a * y);
                    }
                }
                problem.rhs_into(t + tab.c()[i] * dt, &stage, &mut k[i]);
            }
            for (ki, &b) in k.iter().zip(tab.b()) {
                u.iter_mut().zip(ki).for_each(|(x, y)| *x += dt * b * y);
            }
            t = t_next;
        }
        t = target;
        out.push(StateVector::new(u.clone())?);
    }
    Ok(out)
}

/// Reference solution at `outputs`.
///
/// Problems with a closed-form solution use it directly. Otherwise the
/// order-6 tableau is run at steps `h` and `h/2`; the finer run is returned
/// if the two agree to `tolerance` in max-norm over all outputs.
pub fn reference_solution(
    problem: &IvpProblem,
    outputs: &[f64],
    h: f64,
    tolerance: f64,
) -> Result<Vec<StateVector>> {
    if problem.has_exact() {
        return Ok(outputs
            .iter()
            .map(|&t| problem.exact(t).expect("checked"))
            .collect());
    }
    let tab = tableau(6)?;
    let coarse = rk_integrate(problem, tab, h, outputs)?;
    let fine = rk_integrate(problem, tab, h / 2.0, outputs)?;
    let difference = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| {
            let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
            max_abs(&d)
        })
        .fold(0.0, f64::max);
    if !(difference <= tolerance) {
        return Err(MerbError::ReferenceNotCertified {
            difference,
            tolerance,
        });
    }
    Ok(fine)
}
