use std::fmt;

use crate::error::{MerbError, Result};
use crate::merb::method::MerbMethod;
use crate::merb::step::{merb_step, MerbConfig};
use crate::types::{CallCounters, IvpProblem, StateVector};

/// States recorded at the requested output times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub counters: CallCounters,
    /// Slow steps taken.
    pub steps: usize,
}

/// A failed integration with whatever was recorded before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateError {
    pub error: MerbError,
    pub partial: Trajectory,
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} steps, {} outputs recorded)",
            self.error,
            self.partial.steps,
            self.partial.times.len()
        )
    }
}

impl std::error::Error for IntegrateError {}

impl From<IntegrateError> for MerbError {
    fn from(e: IntegrateError) -> Self {
        e.error
    }
}

/// `count` evenly spaced output times ending at `tf` (excluding `t0`).
pub fn evenly_spaced_outputs(t0: f64, tf: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| if k == count { tf } else { t0 + (tf - t0) * k as f64 / count as f64 })
        .collect()
}

// Step endpoints from `start` to `target`: multiples of `h`, with the last
// step shortened (or the last multiple snapped) to land on `target`.
fn step_ends(start: f64, target: f64, h: f64) -> Vec<f64> {
    let span = target - start;
    if span <= 1e-12 * h {
        return Vec::new();
    }
    let full = (span / h + 1e-9).floor() as usize;
    let mut ends: Vec<f64> = (1..=full).map(|k| start + k as f64 * h).collect();
    if span - full as f64 * h > 1e-9 * h {
        ends.push(target);
    } else if let Some(last) = ends.last_mut() {
        *last = target;
    }
    ends
}

fn validate_outputs(problem: &IvpProblem, outputs: &[f64]) -> Result<()> {
    let (t0, tf) = (problem.t0(), problem.tf());
    for w in outputs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(MerbError::InvalidArgument("output times must increase".into()));
        }
    }
    if let Some(&t) = outputs.iter().find(|&&t| t < t0 || t > tf) {
        return Err(MerbError::InvalidArgument(format!(
            "output time {t} outside [{t0}, {tf}]"
        )));
    }
    Ok(())
}

/// Integrates from `(t0, u0)` with slow step `h`, recording at each of
/// `outputs`. The last step before each output is shortened to land on it.
pub fn integrate(
    method: &MerbMethod,
    problem: &IvpProblem,
    h: f64,
    config: &MerbConfig,
    outputs: &[f64],
) -> std::result::Result<Trajectory, IntegrateError> {
    let mut traj = Trajectory::default();
    let fail = |error: MerbError, traj: Trajectory| IntegrateError { error, partial: traj };
    if !(h > 0.0 && h.is_finite()) {
        return Err(fail(MerbError::InvalidArgument(format!("step {h} must be positive")), traj));
    }
    if let Err(e) = validate_outputs(problem, outputs) {
        return Err(fail(e, traj));
    }
    let mut t = problem.t0();
    let mut u = problem.initial_state().clone();
    let mut counters = CallCounters::default();
    for &target in outputs {
        for end in step_ends(t, target, h) {
            match merb_step(method, problem, t, &u, end - t, config, &mut counters) {
                Ok(s) => u = s.u_next,
                Err(e) => {
                    traj.counters = counters;
                    return Err(fail(e, traj));
                }
            }
            traj.steps += 1;
            t = end;
        }
        traj.times.push(target);
        traj.states.push(u.clone());
    }
    traj.counters = counters;
    Ok(traj)
}
