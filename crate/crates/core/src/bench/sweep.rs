use std::time::Instant;

use rayon::prelude::*;

use crate::error::{MerbError, Result};
use crate::linearization::LinearizationMode;
use crate::merb::{evenly_spaced_outputs, integrate, MerbConfig, MerbMethod};
use crate::problems::{reference_solution, ProblemId};
use crate::types::{max_abs, ConvergenceReport, IvpProblem, ReportRow, StateVector};

/// Reference step and certification tolerance for problems without a
/// closed-form solution.
pub const REFERENCE_STEP: f64 = 0.01;
pub const REFERENCE_TOLERANCE: f64 = 1e-11;

/// Candidate separation factors for the optimal-`m` search.
pub const M_CANDIDATES: [usize; 6] = [1, 2, 5, 10, 20, 40];

/// Separation factor choice for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MChoice {
    Fixed(usize),
    /// Search [`M_CANDIDATES`] at [`SweepSpec::search_step`] first.
    Search,
}

/// One convergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub problem: ProblemId,
    pub method: MerbMethod,
    /// Strictly decreasing slow steps.
    pub steps: Vec<f64>,
    pub m: MChoice,
    pub output_count: usize,
    pub inner_order_drop: bool,
    pub fd_jacobian: bool,
}

impl SweepSpec {
    /// Default steps, outputs and tuned `m` for `problem`.
    pub fn new(problem: ProblemId, method: MerbMethod) -> Self {
        let m = problem.default_m(method.order());
        Self {
            problem,
            steps: problem.default_steps(),
            m: MChoice::Fixed(m),
            output_count: problem.output_count(),
            inner_order_drop: false,
            fd_jacobian: false,
            method,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(MerbError::InvalidArgument("no steps to sweep".into()));
        }
        if self.steps.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(MerbError::InvalidArgument("steps must be positive".into()));
        }
        if self.steps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(MerbError::InvalidArgument("steps must be strictly decreasing".into()));
        }
        if self.output_count == 0 {
            return Err(MerbError::InvalidArgument("output_count must be positive".into()));
        }
        if let MChoice::Fixed(0) = self.m {
            return Err(MerbError::InvalidArgument("m must be at least 1".into()));
        }
        Ok(())
    }

    /// Step at which `m` is searched: the fourth default step
    /// (`0.5·2⁻³` or `0.05·2⁻³`).
    pub fn search_step(&self) -> f64 {
        self.problem.default_steps()[3]
    }

    pub fn config(&self, m: usize) -> MerbConfig {
        let mut cfg = MerbConfig::new(&self.method, m);
        if self.inner_order_drop {
            cfg = cfg.with_inner_order_drop(&self.method);
        }
        if self.fd_jacobian {
            cfg = cfg.with_linearization(LinearizationMode::finite_difference());
        }
        cfg
    }
}

/// Problem, output times and the reference states to measure against.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub problem: IvpProblem,
    pub outputs: Vec<f64>,
    pub reference: Vec<StateVector>,
}

impl Benchmark {
    pub fn new(problem: IvpProblem, output_count: usize) -> Result<Self> {
        let outputs = evenly_spaced_outputs(problem.t0(), problem.tf(), output_count);
        let reference = reference_solution(&problem, &outputs, REFERENCE_STEP, REFERENCE_TOLERANCE)?;
        Ok(Self {
            problem,
            outputs,
            reference,
        })
    }

    pub fn for_problem(id: ProblemId, output_count: usize) -> Result<Self> {
        Self::new(id.build(), output_count)
    }

    /// Integrates once and measures the max-norm error over all outputs;
    /// a failed run yields an infinite error.
    pub fn run(&self, method: &MerbMethod, h: f64, config: &MerbConfig) -> ReportRow {
        let start = Instant::now();
        let result = integrate(method, &self.problem, h, config, &self.outputs);
        let wall_time = start.elapsed().as_secs_f64();
        let (max_error, counters) = match result {
            Ok(traj) => {
                let err = traj
                    .states
                    .iter()
                    .zip(&self.reference)
                    .map(|(u, r)| {
                        let d: Vec<f64> = u.iter().zip(r.iter()).map(|(a, b)| a - b).collect();
                        max_abs(&d)
                    })
                    .fold(0.0, f64::max);
                (err, traj.counters)
            }
            Err(e) => (f64::INFINITY, e.partial.counters),
        };
        ReportRow {
            h,
            m: config.m,
            max_error,
            slow_calls: counters.slow_calls,
            total_calls: counters.total_calls(),
            wall_time,
        }
    }
}

/// Thread pool capped by the `BENCH_THREADS` environment variable.
pub fn bench_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("BENCH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| MerbError::InvalidArgument(format!("BENCH_THREADS='{v}' is not a count")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| MerbError::InvalidArgument(e.to_string()))
}

/// Smallest candidate whose error is within 5% of the error at the largest
/// candidate.
pub fn pick_optimal_m(errors: &[(usize, f64)]) -> Result<usize> {
    let &(_, best) = errors
        .last()
        .ok_or_else(|| MerbError::InvalidArgument("no m candidates".into()))?;
    Ok(errors
        .iter()
        .find(|(_, e)| *e <= 1.05 * best)
        .map(|(m, _)| *m)
        .unwrap_or(errors.last().expect("non-empty").0))
}

/// Errors for each candidate `m` at step `h`, then [`pick_optimal_m`].
pub fn optimal_m_for(
    bench: &Benchmark,
    method: &MerbMethod,
    h: f64,
    candidates: &[usize],
    config: impl Fn(usize) -> MerbConfig + Sync,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if candidates.is_empty() || candidates.windows(2).any(|w| !(w[1] > w[0])) || candidates[0] == 0 {
        return Err(MerbError::InvalidArgument("m candidates must be increasing and positive".into()));
    }
    let pool = bench_pool()?;
    let errors: Vec<(usize, f64)> = pool.install(|| {
        candidates
            .par_iter()
            .map(|&m| (m, bench.run(method, h, &config(m)).max_error))
            .collect()
    });
    Ok((pick_optimal_m(&errors)?, errors))
}

/// Optimal `m` for a shipped problem and method at step `h`.
pub fn optimal_m_search(
    problem: ProblemId,
    method: &MerbMethod,
    h: f64,
    candidates: &[usize],
) -> Result<usize> {
    let bench = Benchmark::for_problem(problem, problem.output_count())?;
    optimal_m_for(&bench, method, h, candidates, |m| MerbConfig::new(method, m)).map(|r| r.0)
}

/// Resolved `m` and the report of a sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub m: usize,
    pub report: ConvergenceReport,
    /// Errors per candidate when `m` was searched.
    pub m_search: Option<Vec<(usize, f64)>>,
}

/// Runs every step of `spec` (concurrently, at most `BENCH_THREADS` at once).
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let bench = Benchmark::for_problem(spec.problem, spec.output_count)?;
    run_sweep_on(spec, &bench)
}

/// [`run_sweep`] against an already-built benchmark.
pub fn run_sweep_on(spec: &SweepSpec, bench: &Benchmark) -> Result<SweepResult> {
    spec.validate()?;
    let (m, m_search) = match spec.m {
        MChoice::Fixed(m) => (m, None),
        MChoice::Search => {
            let (m, errs) =
                optimal_m_for(bench, &spec.method, spec.search_step(), &M_CANDIDATES, |m| spec.config(m))?;
            (m, Some(errs))
        }
    };
    let config = spec.config(m);
    let pool = bench_pool()?;
    let rows: Vec<ReportRow> = pool.install(|| {
        spec.steps
            .par_iter()
            .map(|&h| bench.run(&spec.method, h, &config))
            .collect()
    });
    Ok(SweepResult {
        m,
        report: ConvergenceReport::from_rows(rows),
        m_search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_m_rule() {
        let errs = [(1, 1.0), (2, 0.2), (5, 0.104), (10, 0.1), (20, 0.1)];
        assert_eq!(pick_optimal_m(&errs).unwrap(), 5);
        assert_eq!(pick_optimal_m(&[(1, 0.5), (2, 0.5)]).unwrap(), 1);
        assert!(pick_optimal_m(&[]).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(ProblemId::Bidirectional, MerbMethod::merb3_default());
        assert!(spec.validate().is_ok());
        spec.steps = vec![0.1, 0.2];
        assert!(spec.validate().is_err());
        spec.steps = vec![0.1];
        spec.m = MChoice::Fixed(0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn tiny_sweep_runs() {
        let mut spec = SweepSpec::new(ProblemId::Bidirectional, MerbMethod::merb3_default());
        spec.steps = vec![0.05, 0.025];
        spec.m = MChoice::Fixed(20);
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.report.rows.len(), 2);
        assert!(res.report.rows[1].max_error < res.report.rows[0].max_error);
        assert_eq!(res.report.rows[0].slow_calls, 2 * 20);
    }
}
