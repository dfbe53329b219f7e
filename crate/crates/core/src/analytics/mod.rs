//! Corpus statistics over scored sentences.

pub mod grouped;
pub mod logodds;
pub mod robustness;
pub mod stats;

use serde::{Deserialize, Serialize};

pub use grouped::{bootstrap_ci, group_mean_ci, trend, GroupedScore, PValueMethod, TrendResult};
pub use logodds::{fightin_words, fightin_words_scaled, verb_counts, verb_log_odds, LogOddsResult, VerbPool};
pub use robustness::{ablate_pronoun, entity_frequency_report, filter_by_verbs, Ablation, VerbFilterMode};
pub use stats::{chi_square_2x2, spearman, spearman_permutation, spearman_r, ChiSquare, Correlation};

use crate::error::{Error, Result};
use crate::scoring::{DEFAULT_HI, DEFAULT_LO};

pub const DEFAULT_PRIOR_BAND: f64 = 0.5;

/// Score thresholds: S↑ is A > hi, S↓ is A < lo, the prior pool is |A| < prior_band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub hi: f64,
    pub lo: f64,
    pub prior_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { hi: DEFAULT_HI, lo: DEFAULT_LO, prior_band: DEFAULT_PRIOR_BAND }
    }
}

impl Thresholds {
    /// `lo` defaults to `-hi`.
    pub fn new(hi: f64, lo: Option<f64>, prior_band: f64) -> Result<Self> {
        let t = Thresholds { hi, lo: lo.unwrap_or(-hi), prior_band };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hi > self.lo) {
            return Err(Error::InvalidThresholds { hi: self.hi, lo: self.lo });
        }
        if !(self.hi > self.prior_band && self.prior_band > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "prior_band must satisfy 0 < prior_band < hi (got {} with hi {})",
                self.prior_band, self.hi
            )));
        }
        Ok(())
    }
}
