//! Weighted log-odds with an informative Dirichlet prior ("Fightin' Words"),
//! and the verb counts it is run on.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Thresholds;
use crate::error::{Error, Result};
use crate::scoring::{band_of, Band, ScoredSentence};

pub const DEFAULT_SMOOTHING: f64 = 0.01;
/// Two-sided 5% critical value of the standard normal.
pub const Z_CRITICAL: f64 = 1.96;

pub type Counts = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogOddsResult {
    pub word: String,
    pub count_a: u64,
    pub count_b: u64,
    pub delta: f64,
    pub variance: f64,
    pub z: f64,
}

/// [`fightin_words_scaled`] with the prior taken at face value.
pub fn fightin_words(counts_a: &Counts, counts_b: &Counts, prior: &Counts, smoothing: f64) -> Result<Vec<LogOddsResult>> {
    fightin_words_scaled(counts_a, counts_b, prior, smoothing, 1.0)
}

/// Log-odds of every word in either corpus, sorted by z descending (ties by
/// word). The prior is `scale * prior[w] + smoothing` over the union of all
/// three vocabularies.
pub fn fightin_words_scaled(
    counts_a: &Counts,
    counts_b: &Counts,
    prior: &Counts,
    smoothing: f64,
    scale: f64,
) -> Result<Vec<LogOddsResult>> {
    let n_a: u64 = counts_a.values().sum();
    let n_b: u64 = counts_b.values().sum();
    if n_a == 0 || n_b == 0 {
        return Err(Error::EmptyCorpus);
    }
    if !(smoothing > 0.0) || !(scale >= 0.0) {
        return Err(Error::DegenerateInput(format!(
            "prior smoothing must be positive and scale non-negative (got {smoothing}, {scale})"
        )));
    }
    let vocab: BTreeSet<&String> = counts_a.keys().chain(counts_b.keys()).chain(prior.keys()).collect();
    if vocab.len() < 2 {
        return Err(Error::DegenerateInput("log-odds need at least two word types".into()));
    }
    let alpha = |w: &str| scale * prior.get(w).copied().unwrap_or(0) as f64 + smoothing;
    let alpha0: f64 = vocab.iter().map(|w| alpha(w)).sum();
    let (n_a, n_b) = (n_a as f64, n_b as f64);
    let mut out: Vec<LogOddsResult> = counts_a
        .keys()
        .chain(counts_b.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|w| {
            let ya = counts_a.get(w).copied().unwrap_or(0);
            let yb = counts_b.get(w).copied().unwrap_or(0);
            let aw = alpha(w);
            let (fa, fb) = (ya as f64, yb as f64);
            let delta = ((fa + aw) / (n_a + alpha0 - fa - aw)).ln() - ((fb + aw) / (n_b + alpha0 - fb - aw)).ln();
            let variance = 1.0 / (fa + aw) + 1.0 / (fb + aw);
            LogOddsResult { word: w.clone(), count_a: ya, count_b: yb, delta, variance, z: delta / variance.sqrt() }
        })
        .collect();
    out.sort_by(|a, b| b.z.total_cmp(&a.z).then_with(|| a.word.cmp(&b.word)));
    Ok(out)
}

/// Which records to count verbs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerbPool {
    /// A above the high threshold.
    High,
    /// A below the low threshold.
    Low,
    /// |A| below the prior band.
    Mid,
}

/// Verb-lemma counts over records in `pool`; records without a verb are skipped.
pub fn verb_counts(records: &[ScoredSentence], pool: VerbPool, thresholds: &Thresholds) -> Counts {
    let mut counts = Counts::new();
    for r in records {
        let Some(verb) = r.sentence.verb_lemma.as_deref() else { continue };
        let keep = match pool {
            VerbPool::High => band_of(r.score_a, thresholds.hi, thresholds.lo) == Band::High,
            VerbPool::Low => band_of(r.score_a, thresholds.hi, thresholds.lo) == Band::Low,
            VerbPool::Mid => r.score_a.abs() < thresholds.prior_band,
        };
        if keep {
            *counts.entry(verb.to_string()).or_default() += 1;
        }
    }
    counts
}

/// High-band versus low-band verbs with the mid-band prior.
pub fn verb_log_odds(records: &[ScoredSentence], thresholds: &Thresholds, scale: f64) -> Result<Vec<LogOddsResult>> {
    fightin_words_scaled(
        &verb_counts(records, VerbPool::High, thresholds),
        &verb_counts(records, VerbPool::Low, thresholds),
        &verb_counts(records, VerbPool::Mid, thresholds),
        DEFAULT_SMOOTHING,
        scale,
    )
}

/// Words with |z| above the critical value.
pub fn significant(results: &[LogOddsResult]) -> Vec<&LogOddsResult> {
    results.iter().filter(|r| r.z.abs() > Z_CRITICAL).collect()
}

/// The `k` highest-z and `k` lowest-z words (the top of each side).
pub fn top_k_verbs(results: &[LogOddsResult], k: usize) -> Vec<String> {
    let mut words: Vec<String> = results.iter().take(k).map(|r| r.word.clone()).collect();
    let bottom = results.iter().rev().take(k.min(results.len().saturating_sub(k)));
    words.extend(bottom.map(|r| r.word.clone()));
    words
}
