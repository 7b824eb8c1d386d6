//! Convergence sweep over the default slow steps, with CSV/JSON/SVG output.

use merb::bench::{emit_results, run_sweep, RunSummary, SweepSpec};
use merb::{MerbMethod, ProblemId};

fn main() -> merb::Result<()> {
    let problem = ProblemId::Bidirectional;
    let spec = SweepSpec::new(problem, MerbMethod::merb6_default());
    let result = run_sweep(&spec)?;
    for r in &result.report.rows {
        println!("H = {:.3e}  error {:.3e}  slow {:>6}  total {:>7}", r.h, r.max_error, r.slow_calls, r.total_calls);
    }
    println!("fitted rate {:.3}", result.report.fitted_rate);

    let out = std::env::temp_dir().join("merb-sweep");
    let summary = RunSummary::new(problem.name(), &spec.method, result.m, false, false);
    let files = emit_results(&result.report, &summary, &out, true)?;
    println!("wrote {} and {}", files.csv.display(), files.summary.display());
    Ok(())
}
