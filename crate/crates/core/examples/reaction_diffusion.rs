//! A travelling front of the 1-D reaction–diffusion equation, MERB5 against
//! a certified high-order reference.

use merb::bench::{REFERENCE_STEP, REFERENCE_TOLERANCE};
use merb::problems::{reaction_diffusion, reference_solution, ReactionDiffusionConfig};
use merb::{integrate, MerbConfig, MerbMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ReactionDiffusionConfig::default();
    let problem = reaction_diffusion(config)?;
    let outputs = [1.0, 2.5, 5.0];
    let reference = reference_solution(&problem, &outputs, REFERENCE_STEP, REFERENCE_TOLERANCE)?;

    let method = MerbMethod::merb5_default();
    let traj = integrate(&method, &problem, 0.125, &MerbConfig::new(&method, 5), &outputs)?;
    for ((t, u), r) in traj.times.iter().zip(&traj.states).zip(&reference) {
        // front position: first grid point where u drops below 1/2
        let front = u.iter().position(|&x| x < 0.5).map(|i| i as f64 * config.dx());
        let err = u.iter().zip(r.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t}: front near x = {front:?}, error {err:.2e}");
    }
    Ok(())
}
