//! Multirate exponential Rosenbrock (MERB) integrators.
//!
//! Each slow step linearizes `F(t, u) = J_n u + V_n t + N_n(t, u)` about the
//! current state and replaces the exponential Rosenbrock stages by a few
//! linear "fast" problems `y' = J_n y + p(τ)` with polynomial forcing, which
//! are subcycled with an explicit Runge–Kutta method at step `H/m`. Methods
//! of orders 2 through 6 are provided, along with a dense φ-function oracle
//! for checking them and a small benchmark harness.
//!
//! ```no_run
//! use merb::{integrate, MerbConfig, MerbMethod, ProblemId};
//!
//! let problem = ProblemId::Bidirectional.build();
//! let method = MerbMethod::merb4();
//! let config = MerbConfig::new(&method, 40);
//! let traj = integrate(&method, &problem, 0.0125, &config, &[0.5, 1.0]).unwrap();
//! println!("{:?}", traj.states.last());
//! ```

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod inner;
pub mod linearization;
pub mod merb;
pub mod oracle;
pub mod problems;
pub mod types;

pub use error::{MerbError, Result};
pub use inner::{erk_solve, shipped_tableaus, FastIvp};
pub use linearization::{fd_jac_action, fd_v, linearize, Linearization, LinearizationMode};
pub use merb::{integrate, merb_step, ForcingPolynomial, MerbConfig, MerbMethod, Trajectory};
pub use problems::ProblemId;
pub use types::{ButcherTableau, CallCounters, ConvergenceReport, IvpProblem, ReportRow, StateVector};
