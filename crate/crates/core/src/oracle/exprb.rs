use nalgebra::{DMatrix, DVector};

use super::phi::{phi_stack, DenseMatrix, PhiStack, ORACLE_DIM_LIMIT};
use crate::error::{MerbError, Result};
use crate::linearization::{linearize, Linearization, LinearizationMode};
use crate::merb::{CoefficientFn, MerbMethod};
use crate::types::{CallCounters, IvpProblem, StateVector};

/// Output of one dense exponential Rosenbrock step.
#[derive(Debug, Clone)]
pub struct ExpRbStep {
    pub u_next: StateVector,
    /// `U_1 = u_n, U_2, ..., U_s`.
    pub stages: Vec<StateVector>,
}

/// Materializes `J_n` column by column from Jacobian actions.
pub fn dense_jacobian(lin: &Linearization<'_>, counters: &mut CallCounters) -> DMatrix<f64> {
    let d = lin.dim();
    let mut j = DMatrix::zeros(d, d);
    let mut e = vec![0.0; d];
    let mut col = vec![0.0; d];
    for c in 0..d {
        e[c] = 1.0;
        lin.apply_jacobian(&e, &mut col, counters);
        j.column_mut(c).copy_from_slice(&col);
        e[c] = 0.0;
    }
    j
}

fn combine(stack: &PhiStack, coeff: &CoefficientFn, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for t in &coeff.terms {
        m += stack.get(t.k) * t.weight;
    }
    m
}

// u + cH φ1(cHJ) F + (cH)^2 φ2(cHJ) V
fn linear_part(stack: &PhiStack, u: &DVector<f64>, f: &DVector<f64>, v: &DVector<f64>, ch: f64) -> DVector<f64> {
    u + stack.get(1) * f * ch + stack.get(2) * v * (ch * ch)
}

/// One step of the exponential Rosenbrock scheme underlying `method`, with
/// every φ-function evaluated densely.
pub fn exprb_step(
    method: &MerbMethod,
    problem: &IvpProblem,
    t_n: f64,
    u_n: &[f64],
    h: f64,
    mode: LinearizationMode,
) -> Result<ExpRbStep> {
    let d = problem.dim();
    if d > ORACLE_DIM_LIMIT {
        return Err(MerbError::OracleLimit {
            dim: d,
            limit: ORACLE_DIM_LIMIT,
        });
    }
    if !(h > 0.0) {
        return Err(MerbError::InvalidArgument(format!("step {h} must be positive")));
    }
    let mut counters = CallCounters::default();
    let lin = linearize(problem, t_n, u_n, mode, &mut counters)?;
    let z = DenseMatrix::new(dense_jacobian(&lin, &mut counters) * h)?;
    let k_max = method.max_phi_index();

    let u = DVector::from_column_slice(u_n);
    let f = DVector::from_column_slice(lin.f_n());
    let v = DVector::from_column_slice(lin.v_n());

    let nodes = method.nodes();
    let mut stages = vec![StateVector::from_vec_unchecked(u_n.to_vec())];
    let mut diffs: Vec<DVector<f64>> = vec![DVector::zeros(d)];
    for (i, &ci) in nodes.iter().enumerate().skip(1) {
        let stack = phi_stack(&z.scaled(ci), k_max)?;
        let mut ui = linear_part(&stack, &u, &f, &v, ci * h);
        for coeff in method.stage_coefficients(i) {
            let dj = diffs
                .get(coeff.stage)
                .ok_or(MerbError::MissingStageDifference(coeff.stage))?;
            ui += combine(&stack, coeff, d) * dj * h;
        }
        let ui = StateVector::new(ui.as_slice().to_vec())?;
        let dh = lin.stage_difference(i, ci, h, &ui, &mut counters)?;
        diffs.push(DVector::from_column_slice(&dh.value));
        stages.push(ui);
    }

    let stack = phi_stack(&z, k_max)?;
    let mut next = linear_part(&stack, &u, &f, &v, h);
    for coeff in method.update_coefficients() {
        let di = diffs
            .get(coeff.stage)
            .ok_or(MerbError::MissingStageDifference(coeff.stage))?;
        next += combine(&stack, coeff, d) * di * h;
    }
    Ok(ExpRbStep {
        u_next: StateVector::new(next.as_slice().to_vec())?,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::expm;

    fn linear(a: [f64; 4]) -> IvpProblem {
        IvpProblem::new("linear", 0.0, 1.0, vec![1.0, -0.5], move |_, u, out| {
            out[0] = a[0] * u[0] + a[1] * u[1];
            out[1] = a[2] * u[0] + a[3] * u[1];
        })
        .unwrap()
        .with_jacobian_action(move |_, _, w, out| {
            out[0] = a[0] * w[0] + a[1] * w[1];
            out[1] = a[2] * w[0] + a[3] * w[1];
        })
    }

    #[test]
    fn linear_step_is_matrix_exponential() {
        let a = [-2.0, 1.0, 0.5, -3.0];
        let p = linear(a);
        let h = 0.3;
        let expected = expm(&(DMatrix::from_row_slice(2, 2, &a) * h)) * DVector::from_column_slice(&[1.0, -0.5]);
        for order in 2..=6 {
            let m = MerbMethod::by_order(order).unwrap();
            let s = exprb_step(&m, &p, 0.0, &[1.0, -0.5], h, LinearizationMode::Analytic).unwrap();
            // MERB6's closely spaced nodes give update weights up to ~2e9, which
            // amplify roundoff in the (ideally zero) stage differences
            let tol = if order == 6 { 1e-9 } else { 1e-14 };
            for k in 0..2 {
                let err = (s.u_next[k] - expected[k]).abs();
                assert!(err < tol, "order {order}: {err:e}");
            }
        }
    }

    #[test]
    fn merb3_local_error_on_riccati() {
        // u' = u^2, u(0) = 1, exact 1/(1-t); local error O(H^4)
        let p = IvpProblem::new("riccati", 0.0, 0.5, vec![1.0], |_, u, out| out[0] = u[0] * u[0])
            .unwrap()
            .with_jacobian_action(|_, u, w, out| out[0] = 2.0 * u[0] * w[0]);
        let m = MerbMethod::merb3(0.5).unwrap();
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| {
                let s = exprb_step(&m, &p, 0.0, &[1.0], h, LinearizationMode::Analytic).unwrap();
                (s.u_next[0] - 1.0 / (1.0 - h)).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope > 3.7, "{errs:?}");
        }
    }

    #[test]
    fn rejects_bad_step() {
        let p = linear([0.0; 4]);
        let m = MerbMethod::merb2();
        assert!(exprb_step(&m, &p, 0.0, &[1.0, 0.0], 0.0, LinearizationMode::Analytic).is_err());
    }
}
