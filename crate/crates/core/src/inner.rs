//! Fixed-step explicit Runge–Kutta solvers for the modified fast problems
//! `y' = J_n y + p(τ)`, and the shipped tableaus of orders 2 through 6.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{MerbError, Result};
use crate::linearization::Linearization;
use crate::merb::ForcingPolynomial;
use crate::types::{ButcherTableau, CallCounters, StateVector};

/// A modified fast problem on `[0, span]`.
#[derive(Debug, Clone)]
pub struct FastIvp<'a, 'p> {
    lin: &'a Linearization<'p>,
    forcing: &'a ForcingPolynomial,
    span: f64,
    y0: StateVector,
    increment: bool,
}

impl<'a, 'p> FastIvp<'a, 'p> {
    /// `y' = J_n y + forcing(τ)`, `y(0) = y0`.
    pub fn new(
        lin: &'a Linearization<'p>,
        forcing: &'a ForcingPolynomial,
        span: f64,
        y0: StateVector,
    ) -> Result<Self> {
        if y0.dim() != lin.dim() || forcing.dim() != lin.dim() {
            return Err(MerbError::DimensionMismatch {
                expected: lin.dim(),
                found: if y0.dim() != lin.dim() { y0.dim() } else { forcing.dim() },
            });
        }
        if !(span >= 0.0 && span.is_finite()) {
            return Err(MerbError::InvalidArgument(format!("fast span {span} is invalid")));
        }
        Ok(Self {
            lin,
            forcing,
            span,
            y0,
            increment: false,
        })
    }

    /// Problem started from the linearization point `u_n`, solved internally
    /// for the increment `y - u_n`.
    pub fn at_base(lin: &'a Linearization<'p>, forcing: &'a ForcingPolynomial, span: f64) -> Result<Self> {
        let mut ivp = Self::new(lin, forcing, span, lin.u_n().clone())?;
        ivp.increment = true;
        Ok(ivp)
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn y0(&self) -> &StateVector {
        &self.y0
    }

    fn rhs(&self, tau: f64, y: &[f64], out: &mut [f64], scratch: &mut [f64], counters: &mut CallCounters) {
        self.lin.apply_jacobian(y, out, counters);
        if self.increment {
            self.forcing.eval_increment_into(tau, scratch);
        } else {
            self.forcing.eval_into(tau, scratch);
        }
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
        counters.fast_calls += 1;
    }
}

/// Integrates `ivp` with `n_steps` uniform steps and returns `y(span)`.
pub fn erk_solve(
    ivp: &FastIvp<'_, '_>,
    tableau: &ButcherTableau,
    n_steps: usize,
    counters: &mut CallCounters,
) -> Result<StateVector> {
    if n_steps == 0 {
        return Err(MerbError::InvalidArgument("n_steps must be at least 1".into()));
    }
    let grid: Vec<f64> = (0..=n_steps)
        .map(|k| ivp.span * k as f64 / n_steps as f64)
        .collect();
    let mut out = erk_solve_sampled(ivp, tableau, &grid, &[n_steps], counters)?;
    Ok(out.pop().expect("one sample requested"))
}

/// Integrates across the step endpoints `grid` (starting at 0, increasing)
/// and returns the states at the grid indices listed in `samples`.
pub fn erk_solve_sampled(
    ivp: &FastIvp<'_, '_>,
    tableau: &ButcherTableau,
    grid: &[f64],
    samples: &[usize],
    counters: &mut CallCounters,
) -> Result<Vec<StateVector>> {
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MerbError::InvalidArgument(
            "micro-step grid must start at 0 and increase".into(),
        ));
    }
    if let Some(&bad) = samples.iter().find(|&&i| i >= grid.len()) {
        return Err(MerbError::InvalidArgument(format!("sample index {bad} outside grid")));
    }
    let d = ivp.y0.dim();
    let s = tableau.stages();
    let base = ivp.y0.as_slice();
    let mut y = if ivp.increment { vec![0.0; d] } else { base.to_vec() };
    let mut k = vec![vec![0.0; d]; s];
    let mut stage = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    let mut out = Vec::with_capacity(samples.len());
    let emit = |y: &[f64]| -> StateVector {
        if ivp.increment {
            StateVector::from_vec_unchecked(y.iter().zip(base).map(|(z, u)| z + u).collect())
        } else {
            StateVector::from_vec_unchecked(y.to_vec())
        }
    };
    let mut next_sample = 0;
    let mut push_samples = |idx: usize, y: &[f64], out: &mut Vec<StateVector>| {
        while next_sample < samples.len() && samples[next_sample] == idx {
            out.push(emit(y));
            next_sample += 1;
        }
    };
    push_samples(0, &y, &mut out);
    for step in 0..grid.len() - 1 {
        let tau = grid[step];
        let h = grid[step + 1] - tau;
        for i in 0..s {
            stage.copy_from_slice(&y);
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = tableau.a(i, j);
                if a != 0.0 {
                    for (st, kv) in stage.iter_mut().zip(kj) {
                        *st += h * a * kv;
                    }
                }
            }
            ivp.rhs(tau + tableau.c()[i] * h, &stage, &mut k[i], &mut scratch, counters);
        }
        for (i, ki) in k.iter().enumerate() {
            let b = tableau.b()[i];
            if b != 0.0 {
                for (yv, kv) in y.iter_mut().zip(ki) {
                    *yv += h * b * kv;
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(MerbError::FastSolveDiverged {
                micro_step: step,
                context: format!("span {}", ivp.span),
            });
        }
        push_samples(step + 1, &y, &mut out);
    }
    if out.len() != samples.len() {
        return Err(MerbError::InvalidArgument("sample indices must be sorted".into()));
    }
    Ok(out)
}

fn r(n: f64, d: f64) -> f64 {
    n / d
}

fn build_tableaus() -> BTreeMap<usize, ButcherTableau> {
    let mut m = BTreeMap::new();
    let heun = ButcherTableau::new(
        "heun",
        vec![vec![], vec![1.0]],
        vec![0.5, 0.5],
        vec![0.0, 1.0],
        2,
    );
    // Heun's third-order method in Nyström form
    let rk3 = ButcherTableau::new(
        "rk3-233f",
        vec![vec![], vec![r(2.0, 3.0)], vec![r(1.0, 3.0), r(1.0, 3.0)]],
        vec![0.25, 0.0, 0.75],
        vec![0.0, r(2.0, 3.0), r(2.0, 3.0)],
        3,
    );
    let rk4 = ButcherTableau::new(
        "rk4",
        vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
        vec![r(1.0, 6.0), r(1.0, 3.0), r(1.0, 3.0), r(1.0, 6.0)],
        vec![0.0, 0.5, 0.5, 1.0],
        4,
    );
    let ark5 = ButcherTableau::new(
        "ark548l2sa-erk",
        vec![
            vec![],
            vec![r(41.0, 100.0)],
            vec![r(367902744464.0, 2072280473677.0), r(677623207551.0, 8224143866563.0)],
            vec![r(1268023523408.0, 10340822734521.0), 0.0, r(1029933939417.0, 13636558850479.0)],
            vec![
                r(14463281900351.0, 6315353703477.0),
                0.0,
                r(66114435211212.0, 5879490589093.0),
                r(-54053170152839.0, 4284798021562.0),
            ],
            vec![
                r(14090043504691.0, 34967701212078.0),
                0.0,
                r(15191511035443.0, 11219624916014.0),
                r(-18461159152457.0, 12425892160975.0),
                r(-281667163811.0, 9011619295870.0),
            ],
            vec![
                r(19230459214898.0, 13134317526959.0),
                0.0,
                r(21275331358303.0, 2942455364971.0),
                r(-38145345988419.0, 4862620318723.0),
                r(-1.0, 8.0),
                r(-1.0, 8.0),
            ],
            vec![
                r(-19977161125411.0, 11928030595625.0),
                0.0,
                r(-40795976796054.0, 6384907823539.0),
                r(177454434618887.0, 12078138498510.0),
                r(782672205425.0, 8267701900261.0),
                r(-69563011059811.0, 9646580694205.0),
                r(7356628210526.0, 4942186776405.0),
            ],
        ],
        vec![
            r(-872700587467.0, 9133579230613.0),
            0.0,
            0.0,
            r(22348218063261.0, 9555858737531.0),
            r(-1143369518992.0, 8141816002931.0),
            r(-39379526789629.0, 19018526304540.0),
            r(32727382324388.0, 42900044865799.0),
            r(41.0, 200.0),
        ],
        vec![
            0.0,
            r(41.0, 100.0),
            r(2935347310677.0, 11292855782101.0),
            r(1426016391358.0, 7196633302097.0),
            r(92.0, 100.0),
            r(24.0, 100.0),
            r(3.0, 5.0),
            1.0,
        ],
        5,
    );
    let verner6 = ButcherTableau::new(
        "verner-8-5-6",
        vec![
            vec![],
            vec![r(1.0, 6.0)],
            vec![r(4.0, 75.0), r(16.0, 75.0)],
            vec![r(5.0, 6.0), r(-8.0, 3.0), r(5.0, 2.0)],
            vec![r(-165.0, 64.0), r(55.0, 6.0), r(-425.0, 64.0), r(85.0, 96.0)],
            vec![r(12.0, 5.0), -8.0, r(4015.0, 612.0), r(-11.0, 36.0), r(88.0, 255.0)],
            vec![
                r(-8263.0, 15000.0),
                r(124.0, 75.0),
                r(-643.0, 680.0),
                r(-81.0, 250.0),
                r(2484.0, 10625.0),
                0.0,
            ],
            vec![
                r(3501.0, 1720.0),
                r(-300.0, 43.0),
                r(297275.0, 52632.0),
                r(-319.0, 2322.0),
                r(24068.0, 84065.0),
                0.0,
                r(3850.0, 26703.0),
            ],
        ],
        vec![
            r(3.0, 40.0),
            0.0,
            r(875.0, 2244.0),
            r(23.0, 72.0),
            r(264.0, 1955.0),
            0.0,
            r(125.0, 11592.0),
            r(43.0, 616.0),
        ],
        vec![
            0.0,
            r(1.0, 6.0),
            r(4.0, 15.0),
            r(2.0, 3.0),
            r(5.0, 6.0),
            1.0,
            r(1.0, 15.0),
            1.0,
        ],
        6,
    );
    for t in [heun, rk3, rk4, ark5, verner6] {
        let t = t.expect("shipped tableau is well formed");
        m.insert(t.order(), t);
    }
    m
}

/// Shipped explicit tableaus keyed by order (2..=6).
pub fn shipped_tableaus() -> &'static BTreeMap<usize, ButcherTableau> {
    static TABLEAUS: OnceLock<BTreeMap<usize, ButcherTableau>> = OnceLock::new();
    TABLEAUS.get_or_init(build_tableaus)
}

/// Shipped tableau of the given order.
pub fn tableau(order: usize) -> Result<&'static ButcherTableau> {
    shipped_tableaus()
        .get(&order)
        .ok_or_else(|| MerbError::InvalidArgument(format!("no shipped tableau of order {order}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::{linearize, LinearizationMode};
    use crate::types::IvpProblem;

    fn scalar_linear(lambda: f64) -> IvpProblem {
        IvpProblem::new("scalar", 0.0, 1.0, vec![1.0], move |_, u, out| out[0] = lambda * u[0])
            .unwrap()
            .with_jacobian_action(move |_, _, w, out| out[0] = lambda * w[0])
    }

    #[test]
    fn shipped_tableaus_satisfy_their_order_conditions() {
        for (order, t) in shipped_tableaus() {
            assert_eq!(t.order(), *order);
            assert!(t.row_sum_defect() < 1e-12, "{} row sums", t.name());
            assert!(t.max_order_residual() <= 1e-12, "{}: {:e}", t.name(), t.max_order_residual());
        }
    }

    #[test]
    fn rk4_coefficients() {
        let t = tableau(4).unwrap();
        assert_eq!(t.c(), &[0.0, 0.5, 0.5, 1.0]);
        assert_eq!(t.b(), &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        assert_eq!(tableau(3).unwrap().b().iter().sum::<f64>(), 1.0);
        assert_eq!(tableau(5).unwrap().stages(), 8);
        assert_eq!(tableau(6).unwrap().stages(), 8);
    }

    #[test]
    fn constant_forcing_is_exact() {
        let p = scalar_linear(0.0);
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c).unwrap();
        let g = ForcingPolynomial::from_coeffs(vec![StateVector::new(vec![0.3]).unwrap()]).unwrap();
        let ivp = FastIvp::new(&lin, &g, 2.0, StateVector::new(vec![1.0]).unwrap()).unwrap();
        for t in shipped_tableaus().values() {
            for n in [1, 3, 7] {
                let mut counters = CallCounters::default();
                let y = erk_solve(&ivp, t, n, &mut counters).unwrap();
                assert!((y[0] - 1.6).abs() < 1e-14, "{}", t.name());
                assert_eq!(counters.fast_calls, (t.stages() * n) as u64);
            }
        }
    }

    #[test]
    fn dahlquist_orders() {
        let p = scalar_linear(-1.0);
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c).unwrap();
        let g = ForcingPolynomial::from_coeffs(vec![StateVector::zeros(1)]).unwrap();
        let ivp = FastIvp::new(&lin, &g, 1.0, StateVector::new(vec![1.0]).unwrap()).unwrap();
        let exact = (-1.0f64).exp();
        for t in shipped_tableaus().values() {
            let errs: Vec<f64> = [8usize, 16]
                .iter()
                .map(|&n| (erk_solve(&ivp, t, n, &mut c).unwrap()[0] - exact).abs())
                .collect();
            let slope = (errs[0] / errs[1]).log2();
            assert!((slope - t.order() as f64).abs() < 0.3, "{} slope {slope}", t.name());
        }
    }

    #[test]
    fn quadratic_forcing_with_rk4() {
        let p = scalar_linear(0.0);
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[0.0], LinearizationMode::Analytic, &mut c).unwrap();
        let coeffs = [1.0, -2.0, 3.0].map(|x| StateVector::new(vec![x]).unwrap()).to_vec();
        let g = ForcingPolynomial::from_coeffs(coeffs).unwrap();
        let ivp = FastIvp::new(&lin, &g, 1.5, StateVector::zeros(1)).unwrap();
        let y = erk_solve(&ivp, tableau(4).unwrap(), 3, &mut c).unwrap();
        let exact = 1.5 - 1.5f64.powi(2) + 1.5f64.powi(3);
        assert!((y[0] - exact).abs() < 1e-14);
    }

    #[test]
    fn divergence_reports_micro_step() {
        let p = scalar_linear(1e200);
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c).unwrap();
        let g = ForcingPolynomial::from_coeffs(vec![StateVector::zeros(1)]).unwrap();
        let ivp = FastIvp::new(&lin, &g, 1.0, StateVector::new(vec![1.0]).unwrap()).unwrap();
        match erk_solve(&ivp, tableau(4).unwrap(), 4, &mut c) {
            Err(MerbError::FastSolveDiverged { micro_step, .. }) => assert!(micro_step < 4),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_steps_rejected() {
        let p = scalar_linear(0.0);
        let mut c = CallCounters::default();
        let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c).unwrap();
        let g = ForcingPolynomial::from_coeffs(vec![StateVector::zeros(1)]).unwrap();
        let ivp = FastIvp::new(&lin, &g, 1.0, StateVector::new(vec![1.0]).unwrap()).unwrap();
        assert!(erk_solve(&ivp, tableau(2).unwrap(), 0, &mut c).is_err());
    }
}
