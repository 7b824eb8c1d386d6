//! A user-defined stiff problem, u' = -k(u - cos t) + v², v' = -v + u, with
//! only the right-hand side supplied: Jacobian actions and ∂F/∂t are finite
//! differences.

use merb::{integrate, IvpProblem, LinearizationMode, MerbConfig, MerbMethod};

fn main() -> merb::Result<()> {
    let k = 200.0;
    let problem = IvpProblem::new("custom", 0.0, 2.0, vec![1.0, 0.0], move |t, u, out| {
        out[0] = -k * (u[0] - t.cos()) + u[1] * u[1];
        out[1] = -u[1] + u[0];
    })?;
    let method = MerbMethod::merb3_default();
    let config = MerbConfig::new(&method, 20).with_linearization(LinearizationMode::finite_difference());
    for h in [0.1, 0.05, 0.025] {
        let traj = integrate(&method, &problem, h, &config, &[2.0]).map_err(merb::MerbError::from)?;
        let u = &traj.states[0];
        println!("H = {h}: u(2) = [{:.10}, {:.10}], {} slow / {} fast calls", u[0], u[1], traj.counters.slow_calls, traj.counters.fast_calls);
    }
    Ok(())
}
