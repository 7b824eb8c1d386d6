//! Shared data model: states, problems, tableaus, counters and reports.

mod problem;
mod state;
mod tableau;

pub use problem::{ExactFn, IvpProblem, JacActionFn, RemainderDiffFn, RhsFn, TimeDerivFn};
pub use state::{axpy_norms, StateVector};
pub use tableau::ButcherTableau;

pub(crate) use state::max_abs;

use serde::{Deserialize, Serialize};

/// Function-call tallies for one integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounters {
    /// Evaluations of `F` (or the nonlinear remainder) at the slow scale.
    pub slow_calls: u64,
    /// Right-hand-side evaluations of the modified fast problems.
    pub fast_calls: u64,
    /// Jacobian-vector products, including those inside fast evaluations.
    pub jac_action_calls: u64,
}

impl CallCounters {
    pub fn total_calls(&self) -> u64 {
        self.slow_calls + self.fast_calls
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub m: usize,
    pub max_error: f64,
    pub slow_calls: u64,
    pub total_calls: u64,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
}

/// Errors and costs over a sequence of slow step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub fitted_rate: f64,
}

impl ConvergenceReport {
    /// Sorts rows by decreasing `H` and fits the rate over pre-floor rows.
    pub fn from_rows(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let fitted_rate = crate::bench::fit_rate(&rows);
        Self { rows, fitted_rate }
    }
}
