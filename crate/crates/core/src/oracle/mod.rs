//! Dense-matrix verification oracle: φ-functions, one-step exponential
//! Rosenbrock reference steps and stiff order-condition residuals.
//!
//! Everything here forms explicit matrices and is meant for small systems only.

mod exprb;
mod order_conditions;
mod phi;

pub use exprb::{dense_jacobian, exprb_step, ExpRbStep};
pub use order_conditions::{
    applicable_conditions, check_order_conditions, check_weak_order_conditions,
};
pub use phi::{expm, phi_stack, DenseMatrix, PhiStack, MAX_PHI, ORACLE_DIM_LIMIT};
