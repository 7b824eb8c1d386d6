use nalgebra::DMatrix;
use proptest::prelude::*;

use merb::bench::fit_rate;
use merb::inner::{erk_solve, tableau};
use merb::linearization::{fd_jac_action, fd_v, linearize, LinearizationMode};
use merb::oracle::{phi_stack, DenseMatrix, MAX_PHI};
use merb::{CallCounters, FastIvp, ForcingPolynomial, IvpProblem, ProblemId, ReportRow, StateVector};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn problem(id: usize) -> IvpProblem {
    [ProblemId::Bidirectional, ProblemId::ReactionDiffusion][id].build()
}

// The initial state perturbed by up to `scale` (relative) per component.
fn perturbed(p: &IvpProblem, seed: &[f64], scale: f64) -> Vec<f64> {
    p.initial_state()
        .iter()
        .enumerate()
        .map(|(i, &x)| x * (1.0 + scale * seed[i % seed.len()]) + scale * seed[(i + 1) % seed.len()])
        .collect()
}

fn unit(seed: &[f64], d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|i| seed[i % seed.len()] + 0.01 * i as f64).collect();
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter().map(|x| x / n).collect()
}

fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobian_action_is_linear(id in 0..2usize, t in 0.0..1.0f64, s in vec_strategy(),
                                 s1 in vec_strategy(), s2 in vec_strategy(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let p = problem(id);
        let u = perturbed(&p, &s, 0.1);
        let d = p.dim();
        let (w1, w2) = (unit(&s1, d), unit(&s2, d));
        let comb: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
        let lhs = p.jac_action(t, &u, &comb).unwrap();
        let j1 = p.jac_action(t, &u, &w1).unwrap();
        let j2 = p.jac_action(t, &u, &w2).unwrap();
        let rhs: Vec<f64> = j1.iter().zip(j2.iter()).map(|(x, y)| a * x + b * y).collect();
        let scale = max_abs(&rhs).max(max_abs(j1.as_slice()) + max_abs(j2.as_slice()));
        prop_assert!(diff(lhs.as_slice(), &rhs) <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences(id in 0..2usize, t in 0.0..1.0f64,
                                                     s in vec_strategy(), sw in vec_strategy()) {
        let p = problem(id);
        let u = perturbed(&p, &s, 0.05);
        let w = unit(&sw, p.dim());
        let sigma = 1e-7 * (1.0 + max_abs(&u));
        let fd = fd_jac_action(&p, t, &u, &w, sigma).unwrap();
        let an = p.jac_action(t, &u, &w).unwrap();
        prop_assert!(diff(fd.as_slice(), an.as_slice()) <= 1e-5 * (1.0 + max_abs(an.as_slice())));
        if let Some(v) = p.time_derivative(t, &u) {
            // |F| ~ 1e4 on the bidirectional problem: σ = 1e-7 would leave ~2e-5 of cancellation
            let fdv = fd_v(&p, t, &u, 1e-5).unwrap();
            prop_assert!(diff(fdv.as_slice(), v.as_slice()) <= 1e-5 * (1.0 + max_abs(v.as_slice())));
        }
    }

    #[test]
    fn linearization_closure(id in 0..2usize, tn in 0.0..0.5f64, s in vec_strategy(),
                             dt in 0.0..0.1f64, sd in vec_strategy()) {
        let p = problem(id);
        let un = perturbed(&p, &s, 0.05);
        let mut c = CallCounters::default();
        let lin = linearize(&p, tn, &un, LinearizationMode::Analytic, &mut c).unwrap();
        let u: Vec<f64> = un.iter().enumerate().map(|(i, x)| x + 0.01 * sd[i % sd.len()]).collect();
        let t = tn + dt;
        let f = p.rhs(t, &u).unwrap();
        let ju = lin.jac_action(&u, &mut c);
        let n = lin.n_eval(t, &u, &mut c);
        let split: Vec<f64> = (0..p.dim()).map(|i| ju[i] + lin.v_n()[i] * t + n[i]).collect();
        prop_assert!(diff(f.as_slice(), &split) <= 1e-12 * (1.0 + max_abs(f.as_slice())));
    }

    #[test]
    fn remainder_is_flat_at_the_linearization_point(id in 0..2usize, tn in 0.0..0.5f64,
                                                    s in vec_strategy(), sw in vec_strategy()) {
        let p = problem(id);
        let un = perturbed(&p, &s, 0.05);
        let mut c = CallCounters::default();
        let lin = linearize(&p, tn, &un, LinearizationMode::Analytic, &mut c).unwrap();
        let w = unit(&sw, p.dim());
        let n0 = lin.n_eval(tn, &un, &mut c);
        for sigma in [1e-3, 1e-4] {
            let u: Vec<f64> = un.iter().zip(&w).map(|(x, y)| x + sigma * y).collect();
            let du = lin.n_eval(tn, &u, &mut c);
            let dt = lin.n_eval(tn + sigma, &un, &mut c);
            prop_assert!(diff(du.as_slice(), n0.as_slice()) / (sigma * sigma) <= 10.0);
            prop_assert!(diff(dt.as_slice(), n0.as_slice()) / (sigma * sigma) <= 10.0);
        }
    }

    #[test]
    fn phi_recurrence(d in 1..7usize, entries in prop::collection::vec(-1.0..1.0f64, 36), norm in 0.0..4.0f64) {
        let a = DMatrix::from_fn(d, d, |i, j| entries[i * 6 + j]);
        let n1 = a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max).max(1e-300);
        let z = DenseMatrix::new(a * (norm / n1)).unwrap();
        let stack = phi_stack(&z, MAX_PHI).unwrap();
        prop_assert!(stack.recurrence_residual(&z) <= 1e-11);
    }

    #[test]
    fn scalar_phi_matches_series_integral(z in -5.0..5.0f64) {
        let stack = phi_stack(&DenseMatrix::from_row_slice(1, &[z]).unwrap(), MAX_PHI).unwrap();
        // φ_k(z) = Σ_j z^j / (j+k)!
        for k in 0..=MAX_PHI {
            let mut term: f64 = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
            let mut sum = 0.0;
            for j in 0..80 {
                sum += term;
                term *= z / (j + k + 1) as f64;
            }
            prop_assert!((stack.get(k)[(0, 0)] - sum).abs() <= 1e-9 * sum.abs().max(1.0));
        }
    }

    #[test]
    fn polynomial_forcing_is_integrated_exactly(order in 2..7usize, coeffs in prop::collection::vec(-2.0..2.0f64, 12),
                                               span in 0.01..2.0f64, n in 1..6usize) {
        let p = IvpProblem::new("flat", 0.0, 1.0, vec![0.3, -0.7], |_, _, out| out.fill(0.0))
            .unwrap()
            .with_jacobian_action(|_, _, _, out| out.fill(0.0));
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[0.3, -0.7], LinearizationMode::Analytic, &mut c).unwrap();
        // degree order-1
        let cs: Vec<StateVector> = (0..order)
            .map(|k| StateVector::new(vec![coeffs[2 * k], coeffs[2 * k + 1]]).unwrap())
            .collect();
        let exact: Vec<f64> = (0..2)
            .map(|i| [0.3, -0.7][i] + cs.iter().enumerate().map(|(k, c)| c[i] * span.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>())
            .collect();
        let poly = ForcingPolynomial::from_coeffs(cs).unwrap();
        let ivp = FastIvp::new(&lin, &poly, span, StateVector::new(vec![0.3, -0.7]).unwrap()).unwrap();
        let tab = tableau(order).unwrap();
        let mut counters = CallCounters::default();
        let y = erk_solve(&ivp, tab, n, &mut counters).unwrap();
        prop_assert!(diff(y.as_slice(), &exact) <= 1e-13 * (1.0 + max_abs(&exact)));
        prop_assert_eq!(counters.fast_calls, (tab.stages() * n) as u64);
    }

    #[test]
    fn rate_fit_recovers_power_law(c in 1e-3..1e3f64, p in 0.5..7.0f64, h0 in 0.01..1.0f64, n in 3..9usize) {
        let rows: Vec<ReportRow> = (0..n)
            .map(|k| {
                let h = h0 * 0.5f64.powi(k as i32);
                ReportRow { h, m: 1, max_error: c * h.powf(p), slow_calls: 0, total_calls: 0, wall_time: 0.0 }
            })
            .collect();
        prop_assert!((fit_rate(&rows) - p).abs() <= 1e-10);
    }
}
