//! Rank correlation and 2×2 chi-square.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const MAX_PERMUTATION_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!("series lengths differ ({} vs {})", x.len(), y.len())));
    }
    if x.len() < min {
        return Err(Error::DegenerateInput(format!("need at least {min} points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("series contain non-finite values".into()));
    }
    Ok(())
}

/// Spearman's r only, defined for n ≥ 2.
pub fn spearman_r(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::DegenerateInput("a series is constant; rank correlation is undefined".into()))
}

/// Two-sided p-value for r from the t approximation with n − 2 df.
pub fn t_approx_p(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Spearman's r with the t-approximation p-value; needs n ≥ 3.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 3)?;
    let r = spearman_r(x, y)?;
    Ok(Correlation { r, p: t_approx_p(r, x.len()) })
}

/// Spearman's r with an exact permutation p-value (all n! orderings of y).
pub fn spearman_permutation(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 3)?;
    if x.len() > MAX_PERMUTATION_N {
        return Err(Error::DegenerateInput(format!(
            "exact permutation p supports n <= {MAX_PERMUTATION_N}, got {}",
            x.len()
        )));
    }
    let r = spearman_r(x, y)?;
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let observed = r.abs() - 1e-12;
    let (mut hits, mut total) = (0u64, 0u64);
    for_each_permutation(&mut ry, &mut |perm| {
        total += 1;
        if pearson(&rx, perm).is_some_and(|v| v.abs() >= observed) {
            hits += 1;
        }
    });
    Ok(Correlation { r, p: hits as f64 / total as f64 })
}

// Heap's algorithm, iterative.
fn for_each_permutation(items: &mut [f64], visit: &mut impl FnMut(&[f64])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub p: f64,
}

/// Pearson chi-square for a 2×2 table, no continuity correction.
pub fn chi_square_2x2(table: [[u64; 2]; 2]) -> Result<ChiSquare> {
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::ZeroMarginal);
    }
    let n = (rows[0] + rows[1]) as f64;
    let mut chi2 = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = rows[i] as f64 * cols[j] as f64 / n;
            let d = observed as f64 - expected;
            chi2 += d * d / expected;
        }
    }
    Ok(ChiSquare { chi2, p: erfc((chi2 / 2.0).sqrt()).clamp(0.0, 1.0) })
}

/// Cross-tabulates binary labels against `score > threshold`:
/// rows are label (true, false), columns are above/not above.
pub fn threshold_contingency(scores: &[f64], labels: &[bool], threshold: f64) -> Result<[[u64; 2]; 2]> {
    if scores.len() != labels.len() {
        return Err(Error::DegenerateInput("scores and labels differ in length".into()));
    }
    let mut t = [[0u64; 2]; 2];
    for (&s, &l) in scores.iter().zip(labels) {
        t[usize::from(!l)][usize::from(s <= threshold)] += 1;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn perfect_monotone() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap().r, 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap().r, -1.0);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[2.0, 2.0, 5.0, 1.0]), [2.5, 2.5, 4.0, 1.0]);
        // ranks x = 1..4, y = [2.5, 2.5, 4, 1]
        let r = spearman_r(&[1.0, 2.0, 3.0, 4.0], &[2.0, 2.0, 5.0, 1.0]).unwrap();
        let expected = -1.5 / 22.5f64.sqrt();
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(matches!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::DegenerateInput(_))));
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn t_approximation_matches_reference_value() {
        // r = 0.5, n = 10: t = 1.63299, two-sided p = 0.14111 (t tables)
        assert_abs_diff_eq!(t_approx_p(0.5, 10), 0.1411, epsilon = 1e-4);
    }

    #[test]
    fn permutation_p_small_case() {
        // n = 3, perfect order: only the identity and the full reversal reach |r| = 1
        let c = spearman_permutation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(c.p, 2.0 / 6.0, epsilon = 1e-15);
        assert!(spearman_permutation(&[0.0; 11], &[0.0; 11]).is_err());
    }

    #[test]
    fn chi_square_examples() {
        let c = chi_square_2x2([[10, 10], [10, 10]]).unwrap();
        assert_eq!((c.chi2, c.p), (0.0, 1.0));
        assert_abs_diff_eq!(chi_square_2x2([[20, 0], [0, 20]]).unwrap().chi2, 40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chi_square_2x2([[30, 10], [10, 30]]).unwrap().chi2, 20.0, epsilon = 1e-12);
        assert!(matches!(chi_square_2x2([[0, 0], [3, 4]]), Err(Error::ZeroMarginal)));
        // chi2 = 3.841459 is the 0.05 critical value for df = 1
        let p = erfc((3.841458820694124f64 / 2.0).sqrt());
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn contingency_counts() {
        let t = threshold_contingency(&[2.0, -1.0, 0.5, 3.0], &[true, true, false, false], 1.0).unwrap();
        assert_eq!(t, [[1, 1], [1, 1]]);
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_transform(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..12),
            ys in proptest::collection::vec(-100.0f64..100.0, 3..12),
        ) {
            let n = xs.len().min(ys.len());
            let (x, y) = (&xs[..n], &ys[..n]);
            if let Ok(r) = spearman_r(x, y) {
                let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
                let ty: Vec<f64> = y.iter().map(|v| v * 3.0 - 7.0).collect();
                prop_assert!((spearman_r(&tx, &ty).unwrap() - r).abs() < 1e-12);
                prop_assert!(r.abs() <= 1.0);
            }
        }

        #[test]
        fn chi_square_symmetries(a in 0u64..60, b in 0u64..60, c in 0u64..60, d in 0u64..60) {
            if let Ok(x) = chi_square_2x2([[a, b], [c, d]]) {
                let t = chi_square_2x2([[a, c], [b, d]]).unwrap();
                let s = chi_square_2x2([[d, c], [b, a]]).unwrap();
                prop_assert!((x.chi2 - t.chi2).abs() < 1e-9);
                prop_assert!((x.chi2 - s.chi2).abs() < 1e-9);
                prop_assert!((0.0..=1.0).contains(&x.p));
            }
        }
    }
}
