//! The reweighted empirical CDF `Q̃_n(y) = Σ L_i I(Y_i <= y) / Σ L_j`, its
//! left-continuous inverse, and the effective sample size.

use crate::error::{Error, Result};
use crate::numerics::NeumaierSum;

/// Responses paired with nonnegative localization weights.
///
/// Zero-weight rows are kept so indices stay aligned with the source dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    responses: Vec<f64>,
    weights: Vec<f64>,
    weight_sum: f64,
}

impl WeightedSample {
    pub fn new(responses: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if responses.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: responses.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if responses.iter().any(|y| y.is_nan()) {
            return Err(Error::InvalidParameter("responses must not be NaN".into()));
        }
        let weight_sum = weights.iter().copied().collect::<NeumaierSum>().total();
        Ok(Self {
            responses,
            weights,
            weight_sum,
        })
    }

    /// Every row weighted 1.
    pub fn unweighted(responses: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; responses.len()];
        Self::new(responses, weights)
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Same responses with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        Self::new(
            self.responses.clone(),
            self.weights.iter().map(|w| w * c).collect(),
        )
    }

    pub(crate) fn require_mass(&self) -> Result<()> {
        if self.weight_sum > 0.0 {
            Ok(())
        } else {
            Err(Error::AllWeightsZero)
        }
    }
}

/// Quantile level `p` in the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QuantileTarget(f64);

impl QuantileTarget {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0, 1), got {p}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Sorted step function of a [`WeightedSample`]: distinct response values
/// carrying positive weight, with their normalized cumulative weights.
#[derive(Debug, Clone)]
pub struct WeightedEcdf {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WeightedEcdf {
    pub fn new(ws: &WeightedSample) -> Result<Self> {
        ws.require_mass()?;
        let mut order: Vec<usize> = (0..ws.len()).filter(|&i| ws.weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| ws.responses[a].total_cmp(&ws.responses[b]));

        let mut values = Vec::with_capacity(order.len());
        let mut prefix = Vec::with_capacity(order.len());
        let mut running = NeumaierSum::new();
        for &i in &order {
            running.add(ws.weights[i]);
            let y = ws.responses[i];
            if values.last() == Some(&y) {
                *prefix.last_mut().unwrap() = running.total();
            } else {
                values.push(y);
                prefix.push(running.total());
            }
        }
        let total = running.total();
        let mut cumulative: Vec<f64> = prefix.iter().map(|s| (s / total).min(1.0)).collect();
        *cumulative.last_mut().expect("at least one positive weight") = 1.0;
        Ok(Self { values, cumulative })
    }

    /// `Q̃_n(y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= y);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `inf { y : Q̃_n(y) >= level }`, clamped: levels at or below 0 give the
    /// smallest positively weighted response, levels at or above 1 the largest.
    pub fn quantile(&self, level: f64) -> f64 {
        if level.is_nan() {
            return f64::NAN;
        }
        let k = self.cumulative.partition_point(|&c| c < level);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Distinct support points with positive weight, ascending.
    pub fn support(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// `Q̃_n(y)`.
pub fn weighted_cdf(ws: &WeightedSample, y: f64) -> Result<f64> {
    Ok(WeightedEcdf::new(ws)?.cdf(y))
}

/// `inf { y in {Y_i} : Q̃_n(y) >= p }` for `0 < p <= 1`.
pub fn weighted_quantile(ws: &WeightedSample, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1], got {p}"
        )));
    }
    Ok(WeightedEcdf::new(ws)?.quantile(p))
}

/// `n_eff = (Σ L_i)^2 / Σ L_i^2`.
pub fn effective_sample_size(ws: &WeightedSample) -> Result<f64> {
    ws.require_mass()?;
    let sum_sq = ws
        .weights
        .iter()
        .map(|w| w * w)
        .collect::<NeumaierSum>()
        .total();
    let max = ws.weights.iter().copied().fold(0.0, f64::max);
    let s = ws.weight_sum / max;
    let s2 = if sum_sq > 0.0 && sum_sq.is_normal() {
        sum_sq / (max * max)
    } else {
        ws.weights
            .iter()
            .map(|w| (w / max) * (w / max))
            .collect::<NeumaierSum>()
            .total()
    };
    Ok(s * s / s2)
}
