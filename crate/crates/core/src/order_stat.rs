//! Distribution-free quantile intervals from order statistics.
//!
//! `[X_(l), X_(u)]` covers the `p`-th quantile of any distribution (ties and
//! atoms included) with probability at least `1 - alpha1 - alpha2`, using exact
//! binomial tail bounds on the number of observations below and above it.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::interval::{IntervalResult, Method};

fn ln_binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    let ln_p_part = if k == 0 { 0.0 } else { kf * p.ln() };
    let ln_q_part = if k == n {
        0.0
    } else {
        (nf - kf) * (-p).ln_1p()
    };
    ln_choose + ln_p_part + ln_q_part
}

/// `(P(B <= k), P(B > k))` for `B ~ Binomial(n, p)`.
///
/// The smaller tail is summed directly, starting from the term nearest the
/// mode and walking outwards with the pmf ratio recurrence.
fn binom_tails(n: u64, p: f64, k: i64) -> (f64, f64) {
    if k < 0 {
        return (0.0, 1.0);
    }
    let k = k as u64;
    if k >= n {
        return (1.0, 0.0);
    }
    let q = 1.0 - p;
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as u64;
    if k < mode {
        // lower tail: terms decrease as j falls below k < mode
        let mut term = ln_binomial_pmf(n, p, k).exp();
        let mut sum = term;
        let ratio = q / p;
        let mut j = k;
        while j > 0 {
            term *= (j as f64) / ((n - j + 1) as f64) * ratio;
            j -= 1;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        (sum, 1.0 - sum)
    } else {
        let mut j = k + 1;
        let mut term = ln_binomial_pmf(n, p, j).exp();
        let mut sum = term;
        let ratio = p / q;
        while j < n {
            term *= ((n - j) as f64) / ((j + 1) as f64) * ratio;
            j += 1;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        (1.0 - sum, sum)
    }
}

/// `P(B(n, p) <= k)`; `k < 0` gives 0 and `k >= n` gives 1.
pub fn binom_cdf(n: u64, p: f64, k: i64) -> f64 {
    binom_tails(n, p, k).0
}

/// `P(B(n, p) > k)`.
pub fn binom_sf(n: u64, p: f64, k: i64) -> f64 {
    binom_tails(n, p, k).1
}

/// Largest and smallest 1-based order-statistic index sharing each value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieIndices {
    pub i_max: Vec<usize>,
    pub i_min: Vec<usize>,
}

impl TieIndices {
    /// Tie indices of an ascending slice.
    pub fn from_sorted(sorted: &[f64]) -> Self {
        let n = sorted.len();
        let mut i_min = vec![0; n];
        let mut i_max = vec![0; n];
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end + 1 < n && sorted[end + 1] == sorted[start] {
                end += 1;
            }
            for k in start..=end {
                i_min[k] = start + 1;
                i_max[k] = end + 1;
            }
            start = end + 1;
        }
        Self { i_max, i_min }
    }

    /// All-distinct case: `I_{i,max} = I_{i,min} = i`.
    pub fn distinct(n: usize) -> Self {
        let idx: Vec<usize> = (1..=n).collect();
        Self {
            i_max: idx.clone(),
            i_min: idx,
        }
    }

    pub fn len(&self) -> usize {
        self.i_max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_max.is_empty()
    }
}

/// Length of the prefix of `1..=n` on which the monotone predicate holds.
fn prefix_len(n: usize, holds: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if holds(mid + 1) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Order-statistic indices `(l, u)` of the interval, with `0` and `n + 1`
/// standing for the infinite sentinels.
///
/// `l = sup { i : P(B(n,p) < I_{i,max}) <= alpha1 }` with `I_{0,max} = 0`, and
/// `u = inf { j : P(B(n,p) >= I_{j,min}) <= alpha2 }` with `I_{n+1,min} = n + 1`.
pub fn quantile_ci_indices(
    n: usize,
    ties: &TieIndices,
    p: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<(usize, usize)> {
    if ties.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ties.len(),
        });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1), got {p}"
        )));
    }
    for a in [alpha1, alpha2] {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!(
                "tail levels must lie in [0, 1), got {a}"
            )));
        }
    }

    let n64 = n as u64;
    // P(B < I_{i,max}) is nondecreasing in i, so the admissible lower indices
    // form a prefix of 1..=n; symmetrically the admissible upper indices form
    // a suffix. Sentinels 0 and n + 1 always qualify.
    let lower = prefix_len(n, |i| {
        binom_cdf(n64, p, ties.i_max[i - 1] as i64 - 1) <= alpha1
    });
    let upper = 1 + prefix_len(n, |j| {
        binom_sf(n64, p, ties.i_min[j - 1] as i64 - 1) > alpha2
    });
    Ok((lower, upper))
}

/// Distribution-free confidence interval for the `p`-th quantile of an i.i.d.
/// sample. An empty sample yields the whole real line.
pub fn df_quantile_ci(ys: &[f64], p: f64, alpha1: f64, alpha2: f64) -> Result<IntervalResult> {
    if ys.iter().any(|y| y.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut sorted = ys.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ties = TieIndices::from_sorted(&sorted);
    let n = sorted.len();
    let (l, u) = quantile_ci_indices(n, &ties, p, alpha1, alpha2)?;
    let lower = if l == 0 {
        f64::NEG_INFINITY
    } else {
        sorted[l - 1]
    };
    let upper = if u == n + 1 {
        f64::INFINITY
    } else {
        sorted[u - 1]
    };
    Ok(IntervalResult {
        lower,
        upper,
        method: Method::OrderStatistic,
        n_eff: n as f64,
        accepted: None,
        p_hat_lo: None,
        p_hat_hi: None,
        sigma_hat: None,
        theta_tilde: None,
    })
}
