//! MERB4 on the bidirectional coupling problem against its exact solution.

use merb::problems::{bidirectional, BidirectionalConfig};
use merb::{integrate, MerbConfig, MerbMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = bidirectional(BidirectionalConfig::default())?;
    let method = MerbMethod::merb4();
    let config = MerbConfig::new(&method, 40);
    let outputs: Vec<f64> = (1..=5).map(|k| 0.2 * k as f64).collect();
    let traj = integrate(&method, &problem, 0.00625, &config, &outputs)?;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let exact = problem.exact(*t).unwrap();
        let err = u.iter().zip(exact.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t:.1}: u = [{:.6}, {:.6}, {:.6}], error {err:.2e}", u[0], u[1], u[2]);
    }
    println!("{} steps, {:?}", traj.steps, traj.counters);
    Ok(())
}
