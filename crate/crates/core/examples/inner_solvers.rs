//! The shipped explicit Runge–Kutta tableaus, their order-condition
//! residuals and observed orders on y' = -y.

use merb::linearization::{linearize, LinearizationMode};
use merb::{erk_solve, shipped_tableaus, CallCounters, FastIvp, ForcingPolynomial, IvpProblem, StateVector};

fn main() -> merb::Result<()> {
    let p = IvpProblem::new("decay", 0.0, 1.0, vec![1.0], |_, u, out| out[0] = -u[0])?
        .with_jacobian_action(|_, _, w, out| out[0] = -w[0]);
    let mut c = CallCounters::default();
    let lin = linearize(&p, 0.0, &[1.0], LinearizationMode::Analytic, &mut c)?;
    let zero = ForcingPolynomial::from_coeffs(vec![StateVector::zeros(1)])?;
    let ivp = FastIvp::new(&lin, &zero, 1.0, StateVector::new(vec![1.0])?)?;
    let exact = (-1.0f64).exp();
    for (order, tab) in shipped_tableaus() {
        let err = |n| erk_solve(&ivp, tab, n, &mut CallCounters::default()).map(|y| (y[0] - exact).abs());
        let (e1, e2) = (err(8)?, err(16)?);
        println!(
            "{:<16} order {order}, {} stages, residual {:.1e}, observed {:.2}",
            tab.name(),
            tab.stages(),
            tab.max_order_residual(),
            (e1 / e2).log2()
        );
    }
    Ok(())
}
