use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Quantile level and how the miscoverage `alpha` is split between the tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSpec {
    p: f64,
    alpha: f64,
    alpha1: f64,
}

impl QuantileSpec {
    pub fn new(p: f64, alpha: f64, alpha1: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {p}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(alpha1 >= 0.0 && alpha1 <= alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha1 must lie in [0, alpha], got {alpha1}"
            )));
        }
        Ok(Self { p, alpha, alpha1 })
    }

    /// Equal-tailed split, `alpha1 = alpha / 2`.
    pub fn symmetric(p: f64, alpha: f64) -> Result<Self> {
        Self::new(p, alpha, alpha / 2.0)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    /// Upper-tail miscoverage `alpha - alpha1`.
    pub fn alpha2(&self) -> f64 {
        (self.alpha - self.alpha1).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Weighted Quantile: normal-calibrated quantiles of the reweighted ECDF.
    WeightedQuantile,
    /// Quantile Rejection: rejection sampling, then the order-statistic interval.
    QuantileRejection,
    /// Order-statistic interval on an unweighted i.i.d. sample.
    OrderStatistic,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::WeightedQuantile => "wq",
            Method::QuantileRejection => "qr",
            Method::OrderStatistic => "dfq",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wq" => Ok(Method::WeightedQuantile),
            "qr" => Ok(Method::QuantileRejection),
            "dfq" => Ok(Method::OrderStatistic),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Effective sample size below which the Weighted Quantile interval is flagged.
pub const MIN_RECOMMENDED_N_EFF: f64 = 10.0;

/// Confidence interval on the extended real line with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub n_eff: f64,
    /// Rejection-sampling acceptances (Quantile Rejection only).
    pub accepted: Option<usize>,
    pub p_hat_lo: Option<f64>,
    pub p_hat_hi: Option<f64>,
    pub sigma_hat: Option<f64>,
    /// Point estimate `Q̃_n^{-1}(p)` (Weighted Quantile only).
    pub theta_tilde: Option<f64>,
}

impl IntervalResult {
    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// True for Weighted Quantile intervals computed with `n_eff < 10`, where
    /// the asymptotic calibration is unreliable.
    pub fn low_effective_sample_size(&self) -> bool {
        self.method == Method::WeightedQuantile && self.n_eff < MIN_RECOMMENDED_N_EFF
    }
}
