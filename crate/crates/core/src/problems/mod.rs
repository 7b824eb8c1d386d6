//! Benchmark problems with analytic derivatives and reference solutions.

mod bidirectional;
mod reaction_diffusion;
mod reference;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use bidirectional::{bidirectional, BidirectionalConfig};
pub use reaction_diffusion::{reaction_diffusion, ReactionDiffusionConfig};
pub use reference::{reference_solution, rk_integrate};

use crate::error::{MerbError, Result};
use crate::types::IvpProblem;

/// Shipped benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    ReactionDiffusion,
    Bidirectional,
}

impl ProblemId {
    pub fn name(self) -> &'static str {
        match self {
            ProblemId::ReactionDiffusion => "reaction-diffusion",
            ProblemId::Bidirectional => "bidirectional",
        }
    }

    /// Problem with default parameters.
    pub fn build(self) -> IvpProblem {
        match self {
            ProblemId::ReactionDiffusion => reaction_diffusion(ReactionDiffusionConfig::default()),
            ProblemId::Bidirectional => bidirectional(BidirectionalConfig::default()),
        }
        .expect("default configuration is valid")
    }

    /// Default slow step sweep, largest first.
    pub fn default_steps(self) -> Vec<f64> {
        match self {
            ProblemId::ReactionDiffusion => (0..=6).map(|k| 0.5 * 0.5f64.powi(k)).collect(),
            ProblemId::Bidirectional => (0..=7).map(|k| 0.05 * 0.5f64.powi(k)).collect(),
        }
    }

    /// Number of evenly spaced output times at which errors are measured.
    pub fn output_count(self) -> usize {
        match self {
            ProblemId::ReactionDiffusion => 10,
            ProblemId::Bidirectional => 20,
        }
    }

    /// Tuned separation factor for each method order (3..=6); MERB2 reuses
    /// the MERB3 value.
    pub fn default_m(self, order: usize) -> usize {
        match (self, order) {
            (ProblemId::ReactionDiffusion, 0..=4) => 10,
            (ProblemId::ReactionDiffusion, _) => 5,
            (ProblemId::Bidirectional, 0..=3) => 80,
            (ProblemId::Bidirectional, 4) => 40,
            (ProblemId::Bidirectional, 5) => 10,
            (ProblemId::Bidirectional, _) => 5,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = MerbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reaction-diffusion" => Ok(ProblemId::ReactionDiffusion),
            "bidirectional" => Ok(ProblemId::Bidirectional),
            other => Err(MerbError::InvalidArgument(format!("unknown problem '{other}'"))),
        }
    }
}
