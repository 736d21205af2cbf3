//! Weighted Quantile interval: quantiles of the reweighted ECDF at levels
//! shifted by a normal calibration of its plug-in standard error.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::interval::{IntervalResult, Method, QuantileSpec};
use crate::kernels::{shape_weights, LocalizationSpec};
use crate::numerics::{normal_quantile, NeumaierSum};
use crate::weighted::{effective_sample_size, WeightedEcdf, WeightedSample};

/// Plug-in standard deviation
/// `sqrt( n^-1 Σ L_i^2 (I(Y_i <= θ̃) - p)^2 ) / ( n^-1 Σ L_i )`.
///
/// `n` counts every row, zero-weight rows included.
pub fn sigma_hat_p(ws: &WeightedSample, p: f64, theta_tilde: f64) -> Result<f64> {
    ws.require_mass()?;
    let n = ws.len() as f64;
    let max = ws.weights().iter().copied().fold(0.0, f64::max);
    let mut numerator = NeumaierSum::new();
    let mut denominator = NeumaierSum::new();
    for (&y, &w) in ws.responses().iter().zip(ws.weights()) {
        let l = w / max;
        let centered = if y <= theta_tilde { 1.0 - p } else { -p };
        numerator.add(l * l * centered * centered);
        denominator.add(l);
    }
    let mean_sq = numerator.total() / n;
    let mean = denominator.total() / n;
    Ok((mean_sq / (mean * mean)).sqrt())
}

fn shifted_level(p: f64, z: f64, step: f64) -> f64 {
    if z.is_infinite() {
        z
    } else {
        p + z * step
    }
}

/// Weighted Quantile interval for an already localized sample.
///
/// Levels `p̂₁ = p + z_{α₁} σ̂ / √n` and `p̂₂ = p + z_{1-α+α₁} σ̂ / √n` are
/// clamped to the observed support: a level at or below 0 maps to the smallest
/// positively weighted response and one at or above 1 to the largest.
pub fn wq_interval_from_sample(ws: &WeightedSample, q: &QuantileSpec) -> Result<IntervalResult> {
    let ecdf = WeightedEcdf::new(ws)?;
    let p = q.p();
    let theta_tilde = ecdf.quantile(p);
    let sigma = sigma_hat_p(ws, p, theta_tilde)?;
    let step = sigma / (ws.len() as f64).sqrt();

    let p_hat_lo = shifted_level(p, normal_quantile(q.alpha1()), step);
    let p_hat_hi = shifted_level(p, normal_quantile(1.0 - q.alpha() + q.alpha1()), step);
    // z_{α₁} < z_{1-α+α₁} whenever α < 1
    assert!(p_hat_lo <= p_hat_hi, "calibrated levels out of order");

    Ok(IntervalResult {
        lower: ecdf.quantile(p_hat_lo),
        upper: ecdf.quantile(p_hat_hi),
        method: Method::WeightedQuantile,
        n_eff: effective_sample_size(ws)?,
        accepted: None,
        p_hat_lo: Some(p_hat_lo),
        p_hat_hi: Some(p_hat_hi),
        sigma_hat: Some(sigma),
        theta_tilde: Some(theta_tilde),
    })
}

/// Weighted Quantile confidence interval for the local quantile at `spec`.
///
/// Fails with `AllWeightsZero` when no row falls inside the kernel window.
/// Intervals with `n_eff < 10` are returned but flagged through
/// [`IntervalResult::low_effective_sample_size`].
pub fn wq_interval(
    data: &Dataset,
    spec: &LocalizationSpec,
    q: &QuantileSpec,
) -> Result<IntervalResult> {
    let ws = shape_weights(data, spec)?;
    wq_interval_from_sample(&ws, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::kernels::KernelFamily;
    use crate::weighted::weighted_quantile;
    use proptest::prelude::*;

    // Straight transcription of the plug-in variance formula, no rescaling.
    fn sigma_oracle(ys: &[f64], ls: &[f64], p: f64, theta: f64) -> f64 {
        let n = ys.len() as f64;
        let num: f64 = ys
            .iter()
            .zip(ls)
            .map(|(&y, &l)| {
                let ind = if y <= theta { 1.0 } else { 0.0 };
                l * l * (ind - p) * (ind - p)
            })
            .sum::<f64>()
            / n;
        let den = (ls.iter().sum::<f64>() / n).powi(2);
        (num / den).sqrt()
    }

    #[test]
    fn sigma_examples() {
        let ws = WeightedSample::unweighted(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = sigma_hat_p(&ws, 0.5, 2.0).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!((sigma_oracle(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4], 0.5, 2.0) - 0.5).abs() < 1e-15);
        let one = WeightedSample::unweighted(vec![7.0]).unwrap();
        assert_eq!(sigma_hat_p(&one, 0.5, 7.0).unwrap(), 0.5);
        let zero = WeightedSample::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(
            sigma_hat_p(&zero, 0.5, 1.0).unwrap_err(),
            Error::AllWeightsZero
        );
    }

    #[test]
    fn symmetric_split_uses_plus_minus_z() {
        let ys: Vec<f64> = (0..101).map(f64::from).collect();
        let ws = WeightedSample::unweighted(ys).unwrap();
        let q = QuantileSpec::symmetric(0.5, 0.1).unwrap();
        let ci = wq_interval_from_sample(&ws, &q).unwrap();
        let sigma = ci.sigma_hat.unwrap();
        let z = normal_quantile(0.95);
        let half = z * sigma / (101f64).sqrt();
        assert!((ci.p_hat_lo.unwrap() - (0.5 - half)).abs() < 1e-15);
        assert!((ci.p_hat_hi.unwrap() - (0.5 + half)).abs() < 1e-15);
        assert_eq!(ci.lower, weighted_quantile(&ws, 0.5 - half).unwrap());
        assert_eq!(ci.upper, weighted_quantile(&ws, 0.5 + half).unwrap());
        assert!(ci.lower < 50.0 && ci.upper > 50.0);
    }

    #[test]
    fn clamps_levels_outside_unit_interval() {
        // a single effective point: levels fall far outside (0, 1]
        let ws = WeightedSample::new(vec![5.0, -3.0, 9.0], vec![1.0, 0.0, 0.0]).unwrap();
        let q = QuantileSpec::new(0.5, 0.1, 0.05).unwrap();
        let ci = wq_interval_from_sample(&ws, &q).unwrap();
        assert_eq!((ci.lower, ci.upper), (5.0, 5.0));
        assert!(ci.low_effective_sample_size());
        // one-sided: alpha1 = 0 gives the smallest positively weighted response
        let ws = WeightedSample::new(vec![4.0, 1.0, 2.0, 8.0], vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let q = QuantileSpec::new(0.5, 0.1, 0.0).unwrap();
        let ci = wq_interval_from_sample(&ws, &q).unwrap();
        assert_eq!(ci.lower, 1.0);
        assert_eq!(ci.p_hat_lo, Some(f64::NEG_INFINITY));
        let q = QuantileSpec::new(0.5, 0.1, 0.1).unwrap();
        let ci = wq_interval_from_sample(&ws, &q).unwrap();
        assert_eq!(ci.upper, 4.0);
    }

    #[test]
    fn empty_window_is_an_error() {
        let data = Dataset::univariate(vec![0.0, 0.1], vec![1.0, 2.0]).unwrap();
        let spec = LocalizationSpec::univariate(KernelFamily::Triangular, 0.9, 0.05).unwrap();
        let q = QuantileSpec::new(0.5, 0.1, 0.05).unwrap();
        assert_eq!(
            wq_interval(&data, &spec, &q).unwrap_err(),
            Error::AllWeightsZero
        );
    }

    proptest! {
        #[test]
        fn sigma_matches_oracle(
            ys in proptest::collection::vec(-3.0f64..3.0, 1..50),
            seed in 0u64..1000,
            p in 0.05f64..0.95,
        ) {
            let ls: Vec<f64> = (0..ys.len()).map(|i| crate::rng::RngStream::new(seed, 0).uniform(i as u64)).collect();
            let ws = WeightedSample::new(ys.clone(), ls.clone()).unwrap();
            let theta = weighted_quantile(&ws, p).unwrap();
            let got = sigma_hat_p(&ws, p, theta).unwrap();
            let want = sigma_oracle(&ys, &ls, p, theta);
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        }

        // At p = 1/2 every centred indicator squares to 1/4.
        #[test]
        fn median_identity(ls in proptest::collection::vec(0.0f64..2.0, 1..60), theta in -1.0f64..1.0) {
            prop_assume!(ls.iter().any(|&l| l > 0.0));
            let ys: Vec<f64> = (0..ls.len()).map(|i| (i as f64 * 0.37).sin()).collect();
            let ws = WeightedSample::new(ys, ls.clone()).unwrap();
            let n = ls.len() as f64;
            let closed = ((ls.iter().map(|l| l * l).sum::<f64>() / n)
                / (4.0 * (ls.iter().sum::<f64>() / n).powi(2))).sqrt();
            let got = sigma_hat_p(&ws, 0.5, theta).unwrap();
            prop_assert!((got - closed).abs() <= 1e-12 * closed);
        }

        #[test]
        fn endpoints_bracket_point_estimate_and_are_data(
            xs in proptest::collection::vec(0.0f64..1.0, 5..80),
            h in 0.05f64..0.6,
            p in 0.1f64..0.9,
            a1 in 0.0f64..0.1,
        ) {
            let ys: Vec<f64> = xs.iter().map(|x| (7.0 * x).sin()).collect();
            let data = Dataset::univariate(xs, ys.clone()).unwrap();
            let spec = LocalizationSpec::univariate(KernelFamily::Triangular, 0.5, h).unwrap();
            let q = QuantileSpec::new(p, 0.1, a1).unwrap();
            match wq_interval(&data, &spec, &q) {
                Ok(ci) => {
                    let t = ci.theta_tilde.unwrap();
                    prop_assert!(ci.lower <= t && t <= ci.upper);
                    prop_assert!(ys.contains(&ci.lower) && ys.contains(&ci.upper));
                    prop_assert!(ci.is_bounded());
                }
                Err(e) => prop_assert_eq!(e, Error::AllWeightsZero),
            }
        }

        #[test]
        fn kernel_scale_leaves_interval_bit_identical(
            xs in proptest::collection::vec(0.0f64..1.0, 5..80),
            c in 1e-3f64..1e3,
        ) {
            let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let data = Dataset::univariate(xs, ys).unwrap();
            let spec = LocalizationSpec::univariate(KernelFamily::Biweight, 0.4, 0.3).unwrap();
            let scaled = spec.clone().with_scale(c).unwrap();
            let q = QuantileSpec::new(0.5, 0.1, 0.05).unwrap();
            prop_assert_eq!(wq_interval(&data, &spec, &q), wq_interval(&data, &scaled, &q));
        }
    }
}
