use nalgebra::DMatrix;

use super::phi::{phi_stack, DenseMatrix, PhiStack};
use crate::error::{MerbError, Result};
use crate::merb::{CoefficientFn, MerbMethod};

/// Stiff order conditions that apply to a method of the given order.
pub fn applicable_conditions(order: usize) -> &'static [usize] {
    match order {
        0..=2 => &[],
        3 => &[1],
        4 => &[1, 2],
        5 => &[1, 2, 3, 4],
        _ => &[1, 2, 3, 4, 5, 6, 7],
    }
}

fn combine(stack: &PhiStack, coeff: &CoefficientFn, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for t in &coeff.terms {
        m += stack.get(t.k) * t.weight;
    }
    m
}

/// Max-norm residual of each applicable stiff order condition, as
/// `(condition number, residual)` pairs.
///
/// Conditions 1, 2, 3, 5 are moment conditions `Σ b_i(Z) c_i^q = q! φ_{q+1}(Z)`;
/// 4, 6, 7 couple the update weights to stage defects through the arbitrary
/// matrices `K` and `M`.
pub fn check_order_conditions(
    method: &MerbMethod,
    z: &DenseMatrix,
    k: &DenseMatrix,
    m: &DenseMatrix,
) -> Result<Vec<(usize, f64)>> {
    let d = z.dim();
    if k.dim() != d || m.dim() != d {
        return Err(MerbError::DimensionMismatch {
            expected: d,
            found: if k.dim() != d { k.dim() } else { m.dim() },
        });
    }
    let nodes = method.nodes();
    let s = nodes.len();
    let full = phi_stack(z, 6)?;
    let scaled: Vec<PhiStack> = nodes
        .iter()
        .map(|&c| phi_stack(&z.scaled(c), 6))
        .collect::<Result<_>>()?;

    // b_i(Z) per stage (zero when absent)
    let mut b = vec![DMatrix::<f64>::zeros(d, d); s];
    for coeff in method.update_coefficients() {
        b[coeff.stage] += combine(&full, coeff, d);
    }
    // ψ_i^{(q)} = Σ_k a_ik(Z) c_k^q / q! - c_i^{q+1} φ_{q+1}(c_i Z)
    let defect = |i: usize, q: i32| -> DMatrix<f64> {
        let fact = if q == 2 { 2.0 } else { 6.0 };
        let mut out = -(scaled[i].get(q as usize + 1) * nodes[i].powi(q + 1));
        for coeff in method.stage_coefficients(i) {
            out += combine(&scaled[i], coeff, d) * (nodes[coeff.stage].powi(q) / fact);
        }
        out
    };
    let moment = |q: i32, fact: f64| -> f64 {
        let mut acc = -(full.get(q as usize + 1) * fact);
        for i in 1..s {
            acc += &b[i] * nodes[i].powi(q);
        }
        acc.amax()
    };
    let coupled = |power: i32, w: &DenseMatrix, q: i32| -> f64 {
        let mut acc = DMatrix::<f64>::zeros(d, d);
        for i in 1..s {
            acc += &b[i] * nodes[i].powi(power) * w.inner() * defect(i, q);
        }
        acc.amax()
    };

    let out = applicable_conditions(method.order())
        .iter()
        .map(|&n| {
            let r = match n {
                1 => moment(2, 2.0),
                2 => moment(3, 6.0),
                3 => moment(4, 24.0),
                4 => coupled(1, k, 2),
                5 => moment(5, 120.0),
                6 => coupled(2, m, 2),
                _ => coupled(1, k, 3),
            };
            (n, r)
        })
        .collect();
    Ok(out)
}

/// The same residuals at `Z = 0` with `K = M = I` (scalar case): the
/// classical, non-stiff form of the conditions.
pub fn check_weak_order_conditions(method: &MerbMethod) -> Result<Vec<(usize, f64)>> {
    let zero = DenseMatrix::zeros(1)?;
    let eye = DenseMatrix::from_row_slice(1, &[1.0])?;
    check_order_conditions(method, &zero, &eye, &eye)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> DenseMatrix {
        // small deterministic 4x4 matrix with entries in [-0.25, 0.25]
        let mut x = seed;
        let entries: Vec<f64> = (0..16)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.5
            })
            .collect();
        DenseMatrix::from_row_slice(4, &entries).unwrap()
    }

    #[test]
    fn merb3_condition_one_is_an_identity() {
        let m = MerbMethod::merb3_default();
        let r = check_order_conditions(&m, &sample(1), &sample(2), &sample(3)).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].1 < 1e-11, "{r:?}");
    }

    #[test]
    fn merb6_satisfies_all_seven() {
        let m = MerbMethod::merb6_default();
        let r = check_order_conditions(&m, &sample(4), &sample(5), &sample(6)).unwrap();
        assert_eq!(r.len(), 7);
        assert!(r.iter().all(|(_, x)| *x < 1e-10), "{r:?}");
    }

    #[test]
    fn weak_conditions_hold_for_every_method() {
        for p in 3..=6 {
            let m = MerbMethod::by_order(p).unwrap();
            let r = check_weak_order_conditions(&m).unwrap();
            assert!(r.iter().all(|(_, x)| *x < 1e-12), "merb{p}: {r:?}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = MerbMethod::merb3_default();
        let z = DenseMatrix::zeros(2).unwrap();
        let k = DenseMatrix::zeros(3).unwrap();
        assert!(check_order_conditions(&m, &z, &k, &z).is_err());
    }
}
