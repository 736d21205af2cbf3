//! Quantile Rejection interval: thin the sample by rejection sampling with
//! acceptance probability `L_i / K_max`, which leaves i.i.d. draws from the
//! localized distribution, then apply the order-statistic interval.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::interval::{IntervalResult, Method, QuantileSpec};
use crate::kernels::{shape_weights, LocalizationSpec};
use crate::order_stat::df_quantile_ci;
use crate::rng::RngStream;
use crate::weighted::effective_sample_size;

/// Indices `i` (ascending) with `U_i <= w_i`. `U_i` is the `i`-th uniform of
/// `rng`; one is consumed per row whether or not its weight is zero.
pub fn accept_with_probabilities(probabilities: &[f64], rng: RngStream) -> Vec<usize> {
    probabilities
        .iter()
        .enumerate()
        .filter(|&(i, &w)| rng.uniform(i as u64) <= w)
        .map(|(i, _)| i)
        .collect()
}

/// Rejection-sample the rows of `data` towards the localized distribution.
pub fn rejection_sample(
    data: &Dataset,
    spec: &LocalizationSpec,
    rng: RngStream,
) -> Result<Vec<usize>> {
    let w = spec.acceptance_probabilities(data)?;
    Ok(accept_with_probabilities(&w, rng))
}

/// Quantile Rejection confidence interval. Never fails on degenerate input:
/// with no accepted rows the interval is the whole real line.
pub fn qr_interval(
    data: &Dataset,
    spec: &LocalizationSpec,
    q: &QuantileSpec,
    rng: RngStream,
) -> Result<IntervalResult> {
    let accepted = rejection_sample(data, spec, rng)?;
    let ys: Vec<f64> = accepted.iter().map(|&i| data.responses()[i]).collect();
    let mut ci = df_quantile_ci(&ys, q.p(), q.alpha1(), q.alpha2())?;
    ci.method = Method::QuantileRejection;
    ci.accepted = Some(accepted.len());
    let ws = shape_weights(data, spec)?;
    ci.n_eff = effective_sample_size(&ws).unwrap_or(0.0);
    Ok(ci)
}
