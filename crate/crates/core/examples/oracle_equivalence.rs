//! A MERB step converges to the dense exponential Rosenbrock step as the
//! fast problems are subcycled more finely.

use merb::linearization::LinearizationMode;
use merb::merb::merb_step;
use merb::oracle::exprb_step;
use merb::{CallCounters, MerbConfig, MerbMethod, ProblemId};

fn main() -> merb::Result<()> {
    let problem = ProblemId::Bidirectional.build();
    let u0 = problem.initial_state().clone();
    let h = 0.01;
    for order in 2..=6 {
        let method = MerbMethod::by_order(order).unwrap();
        let dense = exprb_step(&method, &problem, 0.0, &u0, h, LinearizationMode::Analytic)?;
        print!("{} (inner order {}):", method.name(), method.inner_orders(false).0);
        for m in [2, 4, 8, 16, 32] {
            let cfg = MerbConfig::new(&method, m);
            let s = merb_step(&method, &problem, 0.0, &u0, h, &cfg, &mut CallCounters::default())?;
            let diff = s.u_next.iter().zip(dense.u_next.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            print!(" {diff:.2e}");
        }
        println!();
    }
    Ok(())
}
