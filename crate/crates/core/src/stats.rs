//! Statistical tests used by the Centipede experiment analysis: exact
//! two-sided binomial test with Clopper-Pearson intervals, the classic
//! equality-of-proportions test, and Cohen's h effect size.

use alloc::vec::Vec;
use core::fmt;

use crate::fx;
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatsError {
    /// A sample size of zero (or k > n) makes the test undefined.
    DegenerateCounts,
    /// Probability argument outside [0, 1].
    BadProbability,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::DegenerateCounts => write!(f, "degenerate counts"),
            StatsError::BadProbability => write!(f, "probability outside [0, 1]"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Result of an exact binomial test.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomTest {
    pub p_value: f64,
    /// Clopper-Pearson 95% interval for the success probability.
    pub ci_low: f64,
    pub ci_high: f64,
    pub estimate: f64,
}

/// Exact two-sided binomial test of `k` successes in `n` trials against
/// null probability `p0`, with a Clopper-Pearson 95% confidence interval.
///
/// The two-sided p-value follows the minimum-likelihood convention (sum of
/// the probabilities of every outcome no more likely than the observed one).
pub fn binom_test_two_sided(k: u64, n: u64, p0: f64) -> Result<BinomTest, StatsError> {
    if n == 0 || k > n {
        return Err(StatsError::DegenerateCounts);
    }
    if !(0.0..=1.0).contains(&p0) || p0.is_nan() {
        return Err(StatsError::BadProbability);
    }

    let p_value = if p0 == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else if p0 == 1.0 {
        if k == n {
            1.0
        } else {
            0.0
        }
    } else {
        // ln pmf for every outcome; O(n) and exact enough at n ~ 10^6.
        let ln_p = fx::ln(p0);
        let ln_q = fx::ln_1p(-p0);
        let ln_pmf = |i: u64| math::ln_choose(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q;
        let ln_obs = ln_pmf(k);
        // Tolerance mirrors the common implementation: outcomes whose
        // probability exceeds the observed by less than 1e-7 relative are
        // still counted as "as extreme".
        let cutoff = ln_obs + 1e-7;
        let mut total = 0.0;
        for i in 0..=n {
            let lp = ln_pmf(i);
            if lp <= cutoff {
                total += fx::exp(lp);
            }
        }
        total.min(1.0)
    };

    let (ci_low, ci_high) = clopper_pearson(k, n, 0.95);
    Ok(BinomTest {
        p_value,
        ci_low,
        ci_high,
        estimate: k as f64 / n as f64,
    })
}

/// Clopper-Pearson (exact) two-sided interval at the given confidence level.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let alpha = 1.0 - level;
    let lo = if k == 0 {
        0.0
    } else {
        math::betai_inv(k as f64, (n - k) as f64 + 1.0, alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        math::betai_inv(k as f64 + 1.0, (n - k) as f64, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Result of a two-sided test for equality of proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct PropTest {
    pub p_value: f64,
    /// 95% interval for p1 - p2.
    pub ci_low: f64,
    pub ci_high: f64,
    pub estimate: f64,
    pub chi2: f64,
}

/// Two-sided test that two binomial proportions are equal, using the
/// chi-squared statistic with Yates continuity correction by default
/// (matching the behavior of the usual statistical packages). The interval
/// is the Wald interval for p1 - p2 widened by the same correction.
pub fn two_proportion_test(
    k1: u64,
    n1: u64,
    k2: u64,
    n2: u64,
    continuity_correction: bool,
) -> Result<PropTest, StatsError> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(StatsError::DegenerateCounts);
    }
    let (k1f, n1f, k2f, n2f) = (k1 as f64, n1 as f64, k2 as f64, n2 as f64);
    let p1 = k1f / n1f;
    let p2 = k2f / n2f;
    let total = n1f + n2f;

    // 2x2 contingency chi-squared with optional Yates correction.
    let observed = [[k1f, n1f - k1f], [k2f, n2f - k2f]];
    let col = [k1f + k2f, total - k1f - k2f];
    let cc = if continuity_correction { 0.5 } else { 0.0 };
    let mut chi2 = 0.0;
    for (r, row) in observed.iter().enumerate() {
        let row_total = if r == 0 { n1f } else { n2f };
        for (c, &o) in row.iter().enumerate() {
            let e = row_total * col[c] / total;
            if e > 0.0 {
                let d = ((o - e).abs() - cc).max(0.0);
                chi2 += d * d / e;
            }
        }
    }
    let p_value = math::chi2_sf_1df(chi2);

    let z = math::norm_ppf(0.975);
    let se = fx::sqrt(p1 * (1.0 - p1) / n1f + p2 * (1.0 - p2) / n2f);
    let width = z * se
        + if continuity_correction {
            0.5 * (1.0 / n1f + 1.0 / n2f)
        } else {
            0.0
        };
    let d = p1 - p2;
    Ok(PropTest {
        p_value,
        ci_low: (d - width).max(-1.0),
        ci_high: (d + width).min(1.0),
        estimate: d,
        chi2,
    })
}

/// Cohen's effect size for two proportions:
/// h = |2 asin(sqrt(p1)) - 2 asin(sqrt(p2))|.
pub fn cohens_h(p1: f64, p2: f64) -> f64 {
    let phi = |p: f64| 2.0 * fx::asin(fx::sqrt(p));
    (phi(p1) - phi(p2)).abs()
}

/// Empirical chi-squared statistic for observed counts against uniform
/// expectation; used by the disc-map uniformity checks.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Upper-tail critical value of the chi-squared distribution with `df`
/// degrees of freedom at tail probability `alpha` (Wilson-Hilferty cube
/// approximation, good to ~1e-3 relative for df >= 3).
pub fn chi2_critical(df: u64, alpha: f64) -> f64 {
    let z = math::norm_ppf(1.0 - alpha);
    let k = df as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * fx::sqrt(2.0 / (9.0 * k));
    k * t * t * t
}

/// Stop-round tallies turned into frequencies; shared report helper.
pub fn normalize_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return counts.iter().map(|_| 0.0).collect();
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
