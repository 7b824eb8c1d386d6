//! The MERB method family: coefficient data, forcing polynomials, the
//! per-step procedure and the outer integration loop.

mod integrate;
mod method;
mod polynomial;
mod step;

pub use integrate::{evenly_spaced_outputs, integrate, IntegrateError, Trajectory};
pub use method::{CoefficientFn, MerbMethod, PhiTerm, PolyTerm, StageGroup};
pub use polynomial::{build_stage_polynomial, build_update_polynomial, ForcingPolynomial};
pub use step::{merb_step, micro_grid, FastSolver, MerbConfig, MerbStep};
