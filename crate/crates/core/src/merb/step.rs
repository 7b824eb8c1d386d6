use nalgebra::{DMatrix, DVector};

use crate::error::{MerbError, Result};
use crate::inner::{erk_solve_sampled, tableau, FastIvp};
use crate::linearization::{linearize, Linearization, LinearizationMode, StageDifference};
use crate::merb::method::MerbMethod;
use crate::merb::polynomial::{build_stage_polynomial, build_update_polynomial, ForcingPolynomial};
use crate::oracle::{dense_jacobian, phi_stack, DenseMatrix};
use crate::types::{ButcherTableau, CallCounters, IvpProblem, StateVector};

/// How the modified fast problems are solved.
#[derive(Debug, Clone, PartialEq)]
pub enum FastSolver {
    /// Explicit RK subcycling; `stage` for internal stages, `update` for the
    /// final solve.
    Erk {
        stage: ButcherTableau,
        update: ButcherTableau,
    },
    /// Exact solution through dense φ-functions (small systems only). The
    /// micro-step grid is still built, but only its sample points matter.
    Exact,
}

impl FastSolver {
    /// Shipped tableaus matching the method's inner orders.
    pub fn for_method(method: &MerbMethod, drop_stage_order: bool) -> Self {
        let (q, r) = method.inner_orders(drop_stage_order);
        FastSolver::Erk {
            stage: tableau(q).expect("orders 2..=6 are shipped").clone(),
            update: tableau(r).expect("orders 2..=6 are shipped").clone(),
        }
    }
}

/// Per-run settings for [`merb_step`] and [`integrate`](crate::merb::integrate).
#[derive(Debug, Clone, PartialEq)]
pub struct MerbConfig {
    /// Time-scale separation factor `m = H/h`.
    pub m: usize,
    pub solver: FastSolver,
    pub linearization: LinearizationMode,
}

impl MerbConfig {
    /// Method-matched inner solvers with analytic derivatives.
    pub fn new(method: &MerbMethod, m: usize) -> Self {
        Self {
            m,
            solver: FastSolver::for_method(method, false),
            linearization: LinearizationMode::Analytic,
        }
    }

    pub fn with_inner_order_drop(mut self, method: &MerbMethod) -> Self {
        self.solver = FastSolver::for_method(method, true);
        self
    }

    pub fn with_linearization(mut self, mode: LinearizationMode) -> Self {
        self.linearization = mode;
        self
    }

    pub fn exact(mut self) -> Self {
        self.solver = FastSolver::Exact;
        self
    }
}

/// One slow step's results.
#[derive(Debug, Clone)]
pub struct MerbStep {
    pub u_next: StateVector,
    /// `U_1 = u_n, U_2, ...` as read off the fast solves.
    pub stages: Vec<StateVector>,
    /// Number of fast solves performed.
    pub fast_solves: usize,
    /// Summed fast integration length, in units of `H`.
    pub fast_traversal: f64,
}

/// Uniform grid of `ceil(node·m)` steps over `[0, node·H]`, with an extra
/// endpoint inserted at each `c·H` in `samples` that misses the grid. Returns
/// the grid and the index of every sample.
pub fn micro_grid(node: f64, h: f64, m: usize, samples: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let span = node * h;
    let n = ((node * m as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| span * k as f64 / n as f64).collect();
    grid[n] = span;
    let mut extra = Vec::new();
    for &c in samples {
        let pos = c / node * n as f64;
        if (pos - pos.round()).abs() > 1e-9 * n as f64 {
            extra.push(c * h);
        }
    }
    grid.extend(extra);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * span);
    let idx = samples
        .iter()
        .map(|&c| {
            let target = c * h;
            grid.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                .map(|(i, _)| i)
                .expect("grid is non-empty")
        })
        .collect();
    (grid, idx)
}

struct Solver<'s, 'a, 'p> {
    lin: &'a Linearization<'p>,
    solver: &'s FastSolver,
    jac: Option<DMatrix<f64>>,
}

impl Solver<'_, '_, '_> {
    fn solve(
        &mut self,
        poly: &ForcingPolynomial,
        grid: &[f64],
        samples: &[usize],
        final_solve: bool,
        counters: &mut CallCounters,
    ) -> Result<Vec<StateVector>> {
        let span = *grid.last().expect("grid is non-empty");
        match self.solver {
            FastSolver::Erk { stage, update } => {
                let t = if final_solve { update } else { stage };
                let ivp = FastIvp::at_base(self.lin, poly, span)?;
                erk_solve_sampled(&ivp, t, grid, samples, counters)
            }
            FastSolver::Exact => {
                if self.jac.is_none() {
                    self.jac = Some(dense_jacobian(self.lin, counters));
                }
                let j = self.jac.as_ref().expect("just computed");
                samples
                    .iter()
                    .map(|&i| exact_increment(j, poly, grid[i], self.lin.u_n()))
                    .collect()
            }
        }
    }
}

// u_n + Σ_k g_k k! T^{k+1} φ_{k+1}(TJ), the exact solution of z' = Jz + g(τ), z(0) = 0
fn exact_increment(j: &DMatrix<f64>, poly: &ForcingPolynomial, t: f64, u_n: &[f64]) -> Result<StateVector> {
    let deg = poly.degree();
    let stack = phi_stack(&DenseMatrix::new(j * t)?, deg + 1)?;
    let mut z = DVector::from_column_slice(u_n);
    let mut fact = 1.0;
    for (k, g) in poly.increment.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        z += stack.get(k + 1) * DVector::from_column_slice(g) * (fact * t.powi(k as i32 + 1));
    }
    StateVector::new(z.as_slice().to_vec())
}

fn with_context(e: MerbError, what: &str, method: &MerbMethod, t_n: f64) -> MerbError {
    match e {
        MerbError::FastSolveDiverged { micro_step, .. } => MerbError::FastSolveDiverged {
            micro_step,
            context: format!("{} {what}, step from t = {t_n}", method.name()),
        },
        MerbError::NonFinite { .. } => MerbError::FastSolveDiverged {
            micro_step: 0,
            context: format!("{} {what}, step from t = {t_n}", method.name()),
        },
        other => other,
    }
}

/// One slow step of size `h` from `(t_n, u_n)`.
pub fn merb_step(
    method: &MerbMethod,
    problem: &IvpProblem,
    t_n: f64,
    u_n: &[f64],
    h: f64,
    config: &MerbConfig,
    counters: &mut CallCounters,
) -> Result<MerbStep> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MerbError::InvalidArgument(format!("step {h} must be positive")));
    }
    if config.m == 0 {
        return Err(MerbError::InvalidArgument("m must be at least 1".into()));
    }
    let lin = linearize(problem, t_n, u_n, config.linearization, counters)?;
    let mut solver = Solver {
        lin: &lin,
        solver: &config.solver,
        jac: None,
    };
    let nodes = method.nodes();
    let mut stages: Vec<Option<StateVector>> = vec![None; nodes.len()];
    stages[0] = Some(lin.u_n().clone());
    let mut d_hats = vec![StageDifference {
        stage_index: 0,
        value: StateVector::zeros(lin.dim()),
    }];
    let mut fast_solves = 0;
    let mut traversal = 0.0;

    for (g, group) in method.groups().iter().enumerate() {
        let what = format!("stage group {}", g + 1);
        let poly = build_stage_polynomial(method, &lin, &d_hats, h, g)?;
        let member_nodes: Vec<f64> = group.members.iter().map(|&i| nodes[i]).collect();
        let (grid, idx) = micro_grid(group.ivp_node, h, config.m, &member_nodes);
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by_key(|&k| idx[k]);
        let sorted: Vec<usize> = order.iter().map(|&k| idx[k]).collect();
        let states = solver
            .solve(&poly, &grid, &sorted, false, counters)
            .map_err(|e| with_context(e, &what, method, t_n))?;
        fast_solves += 1;
        traversal += group.ivp_node;
        for (&k, state) in order.iter().zip(states) {
            let i = group.members[k];
            let dh = lin.stage_difference(i, nodes[i], h, &state, counters)?;
            if !dh.value.is_finite() {
                return Err(with_context(
                    MerbError::NonFinite { index: 0 },
                    &what,
                    method,
                    t_n,
                ));
            }
            d_hats.push(dh);
            stages[i] = Some(state);
        }
    }

    let poly = build_update_polynomial(method, &lin, &d_hats, h)?;
    let (grid, _) = micro_grid(1.0, h, config.m, &[]);
    let last = grid.len() - 1;
    let mut out = solver
        .solve(&poly, &grid, &[last], true, counters)
        .map_err(|e| with_context(e, "update", method, t_n))?;
    fast_solves += 1;
    traversal += 1.0;
    let u_next = out.pop().expect("one sample");
    if !u_next.is_finite() {
        return Err(with_context(MerbError::NonFinite { index: 0 }, "update", method, t_n));
    }
    Ok(MerbStep {
        u_next,
        stages: stages
            .into_iter()
            .map(|s| s.expect("every stage belongs to a group"))
            .collect(),
        fast_solves,
        fast_traversal: traversal,
    })
}
