//! Separation-factor search: the smallest m whose error is within 5% of the
//! error at the largest candidate.

use merb::bench::{optimal_m_for, Benchmark, M_CANDIDATES};
use merb::{MerbConfig, MerbMethod, ProblemId};

fn main() -> merb::Result<()> {
    for (problem, order) in [(ProblemId::ReactionDiffusion, 3), (ProblemId::Bidirectional, 5), (ProblemId::Bidirectional, 6)] {
        let bench = Benchmark::for_problem(problem, problem.output_count())?;
        let method = MerbMethod::by_order(order).unwrap();
        let h = problem.default_steps()[3];
        let (m, errors) = optimal_m_for(&bench, &method, h, &M_CANDIDATES, |m| MerbConfig::new(&method, m))?;
        println!("{} on {problem}, H = {h}: m = {m} (tuned default {})", method.name(), problem.default_m(order));
        for (m, e) in errors {
            println!("  m = {m:>2}: {e:.3e}");
        }
    }
    Ok(())
}
