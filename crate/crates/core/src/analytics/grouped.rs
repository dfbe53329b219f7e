//! Grouped means with percentile-bootstrap confidence intervals, and
//! temporal trends over group means.

use std::collections::BTreeMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{spearman, spearman_permutation, MAX_PERMUTATION_N};
use crate::error::{Error, Result};
use crate::scoring::mean;

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const CI_LOW_PERCENTILE: f64 = 2.5;
pub const CI_HIGH_PERCENTILE: f64 = 97.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedScore {
    pub group_key: String,
    pub n: usize,
    pub mean_a: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Linear interpolation between closest ranks (numpy's default).
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Resample `b` draws from its own stream of `seed`, so the result does not
/// depend on how resamples are spread over threads.
fn resample_mean(values: &[f64], seed: u64, b: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    let n = values.len();
    (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Percentile bootstrap CI of the mean. The interval is widened to include
/// the sample mean when resampling noise would place it outside.
pub fn bootstrap_ci(values: &[f64], n_boot: usize, seed: u64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyGroup("no values".into()));
    }
    let m = mean(values)?;
    if n_boot == 0 {
        return Ok((m, m));
    }
    let mut means: Vec<f64> = (0..n_boot).into_par_iter().map(|b| resample_mean(values, seed, b)).collect();
    means.sort_by(f64::total_cmp);
    let lo = percentile(&means, CI_LOW_PERCENTILE).min(m);
    let hi = percentile(&means, CI_HIGH_PERCENTILE).max(m);
    Ok((lo, hi))
}

/// Groups `(key, value)` pairs and summarises each group, ordered by key.
pub fn group_mean_ci<K, I>(items: I, n_boot: usize, seed: u64) -> Result<Vec<GroupedScore>>
where
    K: Into<String>,
    I: IntoIterator<Item = (K, f64)>,
{
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k, v) in items {
        groups.entry(k.into()).or_default().push(v);
    }
    if groups.is_empty() {
        return Err(Error::EmptyGroup("no scores to group".into()));
    }
    groups
        .into_iter()
        .map(|(group_key, values)| {
            let (ci_low, ci_high) = bootstrap_ci(&values, n_boot, seed)?;
            Ok(GroupedScore { n: values.len(), mean_a: mean(&values)?, ci_low, ci_high, group_key })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    #[default]
    TApproximation,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub keys: Vec<i64>,
    pub values: Vec<f64>,
    pub spearman_r: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Spearman trend of `values` over strictly increasing `keys`.
///
/// With exactly two points r is ±1 by construction; p is reported as 1
/// and a warning is attached.
pub fn trend(points: &[(i64, f64)], method: PValueMethod) -> Result<TrendResult> {
    let mut points = points.to_vec();
    points.sort_by_key(|p| p.0);
    if points.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::DegenerateInput("trend keys must be distinct".into()));
    }
    let keys: Vec<i64> = points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    match points.len() {
        0 | 1 => Err(Error::DegenerateInput(format!("trend needs at least 2 groups, got {}", points.len()))),
        2 => {
            let r = match values[1].total_cmp(&values[0]) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Less => -1.0,
                std::cmp::Ordering::Equal => {
                    return Err(Error::DegenerateInput("both group means are equal".into()))
                }
            };
            let msg = "only two groups: rank correlation is trivially ±1 and carries no significance";
            warn!("{msg}");
            Ok(TrendResult { keys, values, spearman_r: r, p_value: 1.0, warning: Some(msg.into()) })
        }
        n => {
            let x: Vec<f64> = keys.iter().map(|&k| k as f64).collect();
            let c = match method {
                PValueMethod::Permutation if n <= MAX_PERMUTATION_N => spearman_permutation(&x, &values)?,
                _ => spearman(&x, &values)?,
            };
            Ok(TrendResult { keys, values, spearman_r: c.r, p_value: c.p, warning: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_group_has_zero_width() {
        let g = group_mean_ci((0..10).map(|_| ("a", 0.5)), 1000, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].mean_a, g[0].ci_low, g[0].ci_high), (0.5, 0.5, 0.5));
        assert_eq!(g[0].n, 10);
    }

    #[test]
    fn two_point_mean() {
        let g = group_mean_ci([("a", 1.0), ("a", -1.0)], 100, 7).unwrap();
        assert_eq!(g[0].mean_a, 0.0);
        assert!(g[0].ci_low <= 0.0 && g[0].ci_high >= 0.0);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            group_mean_ci(Vec::<(String, f64)>::new(), 10, 0),
            Err(Error::EmptyGroup(_))
        ));
    }

    #[test]
    fn ci_width_shrinks_with_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws: Vec<f64> = (0..400).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (lo100, hi100) = bootstrap_ci(&draws[..100], 1000, 9).unwrap();
        let (lo400, hi400) = bootstrap_ci(&draws, 1000, 9).unwrap();
        assert!(lo100 < 0.0 && hi100 > 0.0);
        assert!(lo400 < 0.0 && hi400 > 0.0);
        let ratio = (hi100 - lo100) / (hi400 - lo400);
        // width scales as 1/sqrt(n): expect about 2
        assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn bootstrap_is_seed_stable_across_pools() {
        let values: Vec<f64> = (0..57).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
            .install(|| bootstrap_ci(&values, 500, 3).unwrap());
        let b = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap()
            .install(|| bootstrap_ci(&values, 500, 3).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, bootstrap_ci(&values, 500, 4).unwrap());
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 50.0), 3.0);
        assert_abs_diff_eq!(percentile(&v, 2.5), 1.1, epsilon = 1e-12);
    }

    #[test]
    fn two_year_trend_is_flagged() {
        let t = trend(&[(2021, 0.5), (2020, 0.1)], PValueMethod::TApproximation).unwrap();
        assert_eq!(t.keys, [2020, 2021]);
        assert_eq!(t.spearman_r, 1.0);
        assert_eq!(t.p_value, 1.0);
        assert!(t.warning.is_some());
        assert!(trend(&[(1, 0.5), (1, 0.7)], PValueMethod::TApproximation).is_err());
    }

    #[test]
    fn longer_trend() {
        let pts: Vec<(i64, f64)> = (2015..2024).map(|y| (y, (y - 2015) as f64 * 0.1)).collect();
        let t = trend(&pts, PValueMethod::Permutation).unwrap();
        assert_eq!(t.spearman_r, 1.0);
        assert!(t.p_value < 0.001);
    }
}
