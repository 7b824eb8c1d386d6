use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use merb::bench::{emit_results, run_sweep, MChoice, RunSummary, SweepSpec};
use merb::{MerbMethod, ProblemId};

/// Convergence sweep of one MERB method on a benchmark problem.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Args {
    /// reaction-diffusion | bidirectional
    #[arg(long)]
    problem: ProblemId,
    /// merb2 .. merb6
    #[arg(long)]
    method: String,
    /// Comma-separated slow steps (largest first), or `default`.
    #[arg(long = "H", default_value = "default")]
    h: String,
    /// Separation factor, or `search`. Defaults to the tuned value.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG log–log plot.
    #[arg(long)]
    plot: bool,
    /// Internal-stage inner solvers one order below the method.
    #[arg(long)]
    inner_order_drop: bool,
    /// Finite-difference Jacobian actions and time derivatives.
    #[arg(long)]
    fd_jacobian: bool,
}

fn parse_steps(s: &str) -> Result<Option<Vec<f64>>, String> {
    if s == "default" {
        return Ok(None);
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad step '{x}': {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn parse_m(s: &str) -> Result<MChoice, String> {
    if s == "search" {
        return Ok(MChoice::Search);
    }
    s.parse().map(MChoice::Fixed).map_err(|e| format!("bad m '{s}': {e}"))
}

fn run(args: Args) -> Result<(), String> {
    let method = MerbMethod::by_name(&args.method).ok_or_else(|| format!("unknown method '{}' (expected merb2..merb6)", args.method))?;
    let mut spec = SweepSpec::new(args.problem, method);
    if let Some(steps) = parse_steps(&args.h)? {
        spec.steps = steps;
    }
    if let Some(m) = &args.m {
        spec.m = parse_m(m)?;
    }
    spec.inner_order_drop = args.inner_order_drop;
    spec.fd_jacobian = args.fd_jacobian;

    let result = run_sweep(&spec).map_err(|e| e.to_string())?;
    let mut summary = RunSummary::new(
        args.problem.name(),
        &spec.method,
        result.m,
        spec.inner_order_drop,
        spec.fd_jacobian,
    );
    summary.m_search = result.m_search.clone();
    let files = emit_results(&result.report, &summary, &args.out, args.plot).map_err(|e| e.to_string())?;

    println!("{} on {}, m = {}", spec.method.name(), args.problem, result.m);
    println!("{:>12} {:>12} {:>10} {:>12}", "H", "max_error", "slow", "total");
    for r in &result.report.rows {
        println!("{:>12.6e} {:>12.4e} {:>10} {:>12}", r.h, r.max_error, r.slow_calls, r.total_calls);
    }
    println!("fitted rate {:.3}", result.report.fitted_rate);
    println!("wrote {}", files.csv.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
