//! Tunable thresholds for the pipeline.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the seed set of `most_popular` is ordered before the top-100 cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SeedOrder {
    /// By distinct-session read counts (default).
    #[default]
    Reads,
    /// By date added, newest first.
    Recency,
}

impl std::str::FromStr for SeedOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reads" => Ok(SeedOrder::Reads),
            "recency" => Ok(SeedOrder::Recency),
            other => Err(Error::Validation(format!(
                "unknown seed order {other:?} (expected \"reads\" or \"recency\")"
            ))),
        }
    }
}

/// Thresholds and caps used across the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum concordance score for linking an e-print to a journal paper.
    pub theta_conc: f64,
    /// Minimum resolution score for accepting a reference candidate.
    pub theta_ref: f64,
    /// Required margin of the best resolution candidate over the runner-up.
    pub ref_margin: f64,
    /// Sessions reading more than this many records are discarded as robots.
    pub s_max: usize,
    /// Maximum entries per ranked list / newsletter section.
    pub list_cap: usize,
    /// Size of the seed set for `most_popular`.
    pub seed_cap: usize,
    /// Ordering of the `most_popular` seed set.
    pub seed_order: SeedOrder,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            theta_conc: 0.75,
            theta_ref: 0.6,
            ref_margin: 0.05,
            s_max: 200,
            list_cap: 10,
            seed_cap: 100,
            seed_order: SeedOrder::Reads,
        }
    }
}

impl Thresholds {
    /// Check documented ranges: scores in [0, 1], margin nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta_conc", self.theta_conc), ("theta_ref", self.theta_ref)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if self.ref_margin < 0.0 {
            return Err(Error::Validation(format!(
                "ref_margin must be nonnegative, got {}",
                self.ref_margin
            )));
        }
        Ok(())
    }
}
