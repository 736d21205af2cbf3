//! Synthetic regression models `Y = f(X) + σ(X) Z` with `X ~ U[0, 1]`, the
//! quadrature oracle for the localized quantile, and the construction of a
//! nearly indistinguishable alternative with a far-away median.

use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, LocalizationSpec};
use crate::numerics::{bisect, normal_cdf, normal_quantile, Quadrature};
use crate::rng::RngStream;

const BUMPS_T: [f64; 11] = [
    0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81,
];
const BUMPS_W: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];
const BUMPS_H: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];

const PARABOLA_TERMS: [(f64, f64); 10] = [
    (-30.0, 0.1),
    (60.0, 0.2),
    (-30.0, 0.3),
    (500.0, 0.35),
    (-1000.0, 0.37),
    (1000.0, 0.41),
    (-500.0, 0.43),
    (7.5, 0.5),
    (-15.0, 0.7),
    (7.5, 0.9),
];

/// Regression functions on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Signal {
    Step,
    Blip,
    Spikes,
    Bumps,
    Parabolas,
    Angles,
    /// Constant `c`; a sanity case where the local quantile is known in closed form.
    Flat(f64),
}

#[inline]
fn indicator(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

fn parabola_ramp(x: f64, c: f64) -> f64 {
    if x > c && x <= 1.0 {
        (x - c) * (x - c)
    } else {
        0.0
    }
}

impl Signal {
    pub const STANDARD: [Signal; 6] = [
        Signal::Step,
        Signal::Blip,
        Signal::Spikes,
        Signal::Bumps,
        Signal::Parabolas,
        Signal::Angles,
    ];

    /// Closed-form value; callers are responsible for `x` lying in `[0, 1]`.
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Signal::Step => 0.2 + 0.6 * indicator(x > 1.0 / 3.0 && x < 2.0 / 3.0),
            Signal::Blip => {
                if x > 0.0 && x <= 0.8 {
                    0.32 + 0.6 * x + 0.3 * (-100.0 * (x - 0.3) * (x - 0.3)).exp()
                } else if x > 0.8 && x <= 1.0 {
                    -0.28 + 0.6 * x + 0.3 * (-100.0 * (x - 1.3) * (x - 1.3)).exp()
                } else {
                    0.0
                }
            }
            Signal::Spikes => {
                let g = |a: f64, c: f64| (-a * (x - c) * (x - c)).exp();
                g(500.0, 0.23)
                    + 2.0 * g(2000.0, 0.33)
                    + 4.0 * g(8000.0, 0.47)
                    + 3.0 * g(16000.0, 0.69)
                    + g(32000.0, 0.83)
            }
            Signal::Bumps => (0..11)
                .map(|j| {
                    let u = ((x - BUMPS_T[j]) / BUMPS_W[j]).abs();
                    BUMPS_H[j] / (1.0 + u.powi(4))
                })
                .sum(),
            Signal::Parabolas => {
                0.8 + PARABOLA_TERMS
                    .iter()
                    .map(|&(a, c)| a * parabola_ramp(x, c))
                    .sum::<f64>()
            }
            Signal::Angles => {
                let piece = |lo: f64, hi: f64| indicator(x > lo && x <= hi);
                (2.0 * x + 0.5) * piece(0.0, 0.15)
                    + (-12.0 * (x - 0.15) + 0.8) * piece(0.15, 0.2)
                    + 0.2 * piece(0.2, 0.5)
                    + (6.0 * (x - 0.5) + 0.2) * piece(0.5, 0.6)
                    + (-10.0 * (x - 0.6) + 0.8) * piece(0.6, 0.65)
                    + (-5.0 * (x - 0.65) + 0.3) * piece(0.65, 0.85)
                    + (2.0 * (x - 0.85) + 0.2) * piece(0.85, 1.0)
            }
            Signal::Flat(c) => c,
        }
    }

    /// Discontinuities and kinks, plus the centres of narrow features, as
    /// subdivision hints for quadrature.
    pub fn breakpoints(self) -> &'static [f64] {
        match self {
            Signal::Step => &[1.0 / 3.0, 2.0 / 3.0],
            Signal::Blip => &[0.3, 0.8],
            Signal::Spikes => &[0.23, 0.33, 0.47, 0.69, 0.83],
            Signal::Bumps => &BUMPS_T,
            Signal::Parabolas => &[0.1, 0.2, 0.3, 0.35, 0.37, 0.41, 0.43, 0.5, 0.7, 0.9],
            Signal::Angles => &[0.15, 0.2, 0.5, 0.6, 0.65, 0.85],
            Signal::Flat(_) => &[],
        }
    }

    pub fn name(self) -> String {
        match self {
            Signal::Step => "step".into(),
            Signal::Blip => "blip".into(),
            Signal::Spikes => "spikes".into(),
            Signal::Bumps => "bumps".into(),
            Signal::Parabolas => "parabolas".into(),
            Signal::Angles => "angles".into(),
            Signal::Flat(c) => format!("flat:{c}"),
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix("flat") {
            let c = match rest.strip_prefix(':') {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad flat level '{v}'")))?,
                None if rest.is_empty() => 0.0,
                None => return Err(Error::InvalidParameter(format!("unknown signal '{s}'"))),
            };
            return Ok(Signal::Flat(c));
        }
        match s.as_str() {
            "step" => Ok(Signal::Step),
            "blip" => Ok(Signal::Blip),
            "spikes" => Ok(Signal::Spikes),
            "bumps" | "bump" => Ok(Signal::Bumps),
            "parabolas" => Ok(Signal::Parabolas),
            "angles" => Ok(Signal::Angles),
            other => Err(Error::InvalidParameter(format!("unknown signal '{other}'"))),
        }
    }
}

/// Checked evaluation on `[0, 1]`.
pub fn signal_eval(signal: Signal, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("signal argument {x} outside [0, 1]")));
    }
    Ok(signal.eval(x))
}

/// Noise standard deviation as a function of the covariate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseSetting {
    /// `0.3`
    S1,
    /// `0.3 (x^2 + 1)`
    S2,
    /// `0.3 (x^2 - x + 5/4)`
    S3,
}

impl NoiseSetting {
    pub const ALL: [NoiseSetting; 3] = [NoiseSetting::S1, NoiseSetting::S2, NoiseSetting::S3];

    pub fn sigma(self, x: f64) -> f64 {
        match self {
            NoiseSetting::S1 => 0.3,
            NoiseSetting::S2 => 0.3 * (x * x + 1.0),
            NoiseSetting::S3 => 0.3 * (x * x - x + 1.25),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            NoiseSetting::S1 => 1,
            NoiseSetting::S2 => 2,
            NoiseSetting::S3 => 3,
        }
    }
}

impl FromStr for NoiseSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches('s') {
            "1" => Ok(NoiseSetting::S1),
            "2" => Ok(NoiseSetting::S2),
            "3" => Ok(NoiseSetting::S3),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise setting '{other}'"
            ))),
        }
    }
}

/// `X ~ U[0, 1]`, `Y | X ~ N(f(X), σ(X)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticModel {
    pub signal: Signal,
    pub noise: NoiseSetting,
}

impl SyntheticModel {
    pub fn new(signal: Signal, noise: NoiseSetting) -> Self {
        Self { signal, noise }
    }

    /// `P(Y <= y | X = x)`.
    pub fn conditional_cdf(&self, x: f64, y: f64) -> f64 {
        normal_cdf((y - self.signal.eval(x)) / self.noise.sigma(x))
    }
}

/// `n` i.i.d. rows from `model`. Row `i` uses the uniform pair at index `i` of
/// `rng`: the first becomes `X`, the second drives the normal noise.
pub fn sample_dataset(model: &SyntheticModel, n: usize, rng: RngStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let (u, v) = rng.uniform_pair(i as u64);
        let z = normal_quantile(v);
        xs.push(u);
        ys.push(model.signal.eval(u) + model.noise.sigma(u) * z);
    }
    Dataset::univariate(xs, ys)
}

/// Absolute tolerance on `Q_Y`.
pub const ORACLE_TOLERANCE: f64 = 1e-9;
/// Root tolerance for `θ_p`.
pub const THETA_TOLERANCE: f64 = 1e-10;

/// The localized response distribution `Q_Y` of a univariate synthetic model:
/// `Q_Y(y) = ∫ Φ((y - f(x)) / σ(x)) K((x0 - x) / h) dx / ∫ K((x0 - x) / h) dx`
/// over the kernel support intersected with `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LocalizedModel {
    model: SyntheticModel,
    kernel: KernelFamily,
    x0: f64,
    h: f64,
    lo: f64,
    hi: f64,
    knots: Vec<f64>,
    normalizer: f64,
}

impl LocalizedModel {
    pub fn new(model: &SyntheticModel, spec: &LocalizationSpec) -> Result<Self> {
        if spec.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: spec.dim(),
            });
        }
        let kernel = spec.kernel();
        let (x0, h) = (spec.center()[0], spec.bandwidths()[0]);
        let radius = kernel.support_radius() * h;
        let (lo, hi) = ((x0 - radius).max(0.0), (x0 + radius).min(1.0));
        if lo >= hi {
            return Err(Error::AllWeightsZero);
        }
        let mut knots = vec![lo, hi];
        knots.extend(kernel.knots().iter().map(|u| x0 + u * h));
        knots.extend_from_slice(model.signal.breakpoints());
        knots.retain(|&k| k >= lo && k <= hi);

        let mut this = Self {
            model: *model,
            kernel,
            x0,
            h,
            lo,
            hi,
            knots,
            normalizer: 1.0,
        };
        let normalizer =
            Quadrature::new(1e-14 * (hi - lo)).integrate(|x| this.kernel_at(x), &this.knots)?;
        if normalizer.is_nan() || normalizer <= 0.0 {
            return Err(Error::AllWeightsZero);
        }
        this.normalizer = normalizer;
        Ok(this)
    }

    #[inline]
    fn kernel_at(&self, x: f64) -> f64 {
        self.kernel.eval((self.x0 - x) / self.h)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn model(&self) -> &SyntheticModel {
        &self.model
    }

    /// `∫_a^b Φ((y - f(x)) / σ(x)) K(x) dx / ∫ K` restricted to the window.
    fn partial_cdf(&self, y: f64, a: f64, b: f64) -> Result<f64> {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a >= b {
            return Ok(0.0);
        }
        let mut points = vec![a, b];
        points.extend(self.knots.iter().copied().filter(|&k| k > a && k < b));
        let raw = Quadrature::new(ORACLE_TOLERANCE * self.normalizer).integrate(
            |x| self.model.conditional_cdf(x, y) * self.kernel_at(x),
            &points,
        )?;
        Ok(raw / self.normalizer)
    }

    /// Kernel mass of `[a, b]` relative to the whole window.
    pub fn kernel_share(&self, a: f64, b: f64) -> Result<f64> {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a >= b {
            return Ok(0.0);
        }
        let mut points = vec![a, b];
        points.extend(self.knots.iter().copied().filter(|&k| k > a && k < b));
        let raw = Quadrature::new(1e-14).integrate(|x| self.kernel_at(x), &points)?;
        Ok(raw / self.normalizer)
    }

    /// `Q_Y(y)`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::InvalidParameter("y is NaN".into()));
        }
        if y == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if y == f64::INFINITY {
            return Ok(1.0);
        }
        Ok(self.partial_cdf(y, self.lo, self.hi)?.clamp(0.0, 1.0))
    }

    /// Range of `f` and the largest `σ` over the window, on a fine grid.
    fn response_envelope(&self) -> (f64, f64, f64) {
        let grid = 4000;
        let mut fmin = f64::INFINITY;
        let mut fmax = f64::NEG_INFINITY;
        let mut smax: f64 = 0.0;
        let xs = (0..=grid)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / grid as f64)
            .chain(self.knots.iter().copied());
        for x in xs {
            let f = self.model.signal.eval(x);
            fmin = fmin.min(f);
            fmax = fmax.max(f);
            smax = smax.max(self.model.noise.sigma(x));
        }
        (fmin, fmax, smax)
    }

    /// `inf { y : g(y) >= p }` for a nondecreasing continuous `g` by bisection,
    /// bracketing from the response envelope.
    fn invert<G>(&self, g: G, p: f64) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let (fmin, fmax, smax) = self.response_envelope();
        let mut lo = fmin - 6.0 * smax;
        let mut hi = fmax + 6.0 * smax;
        let mut width = hi - lo;
        let mut tries = 0;
        while !(g(lo)? < p && g(hi)? >= p) {
            tries += 1;
            if tries > 30 {
                return Err(Error::BracketFailure { lo, hi });
            }
            width *= 2.0;
            lo -= width;
            hi += width;
        }
        bisect(|y| Ok(g(y)? - p), lo, hi, THETA_TOLERANCE)
    }

    /// `θ_p = Q_Y^{-1}(p)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {p}"
            )));
        }
        self.invert(|y| self.cdf(y), p)
    }
}

/// `Q_Y(y)` for a univariate synthetic model localized by `spec`.
pub fn true_q_cdf(model: &SyntheticModel, spec: &LocalizationSpec, y: f64) -> Result<f64> {
    LocalizedModel::new(model, spec)?.cdf(y)
}

/// `θ_p`, the `p`-th quantile of `Q_Y`.
pub fn true_theta(model: &SyntheticModel, spec: &LocalizationSpec, p: f64) -> Result<f64> {
    LocalizedModel::new(model, spec)?.quantile(p)
}

/// Triangular-kernel mass of `[x0 - h0, x0 + h0]` relative to `[x0 - h, x0 + h]`:
/// `1 - ((h - h0) / h)^2`.
pub fn mixture_weight(h: f64, h0: f64) -> Result<f64> {
    if !(h > 0.0 && h0 >= 0.0 && h0 <= h) {
        return Err(Error::Domain(format!(
            "mixture weight needs 0 <= h0 <= h, got h = {h}, h0 = {h0}"
        )));
    }
    let r = (h - h0) / h;
    Ok(1.0 - r * r)
}

/// Outcome of moving the inner-window mass below `θ*` up to `θ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indistinguishability {
    /// Median of the original localized distribution.
    pub theta: f64,
    /// Median of the modified localized distribution.
    pub theta_prime: f64,
    /// Total-variation distance between the joint laws.
    pub tv_distance: f64,
    /// Kernel share of the inner window, `w(h0)`.
    pub mixture_weight: f64,
}

/// The pair of nearly indistinguishable laws: `P'` agrees with `P` except that,
/// for `|X - x0| <= h0`, response mass below `θ*` is moved to the atom `θ*`.
///
/// Decomposing `Q_Y = w F_1 + (1 - w) F_2` over the inner window and its
/// complement, the modified distribution is `w G_1 + (1 - w) F_2` with
/// `G_1(y) = F_1(y) I(y >= θ*)`.
#[derive(Debug, Clone)]
pub struct IndistinguishablePair {
    localized: LocalizedModel,
    inner: (f64, f64),
    theta_star: f64,
}

impl IndistinguishablePair {
    pub fn new(
        model: &SyntheticModel,
        spec: &LocalizationSpec,
        h0: f64,
        theta_star: f64,
    ) -> Result<Self> {
        if spec.kernel() != KernelFamily::Triangular {
            return Err(Error::Domain(
                "construction requires the triangular kernel".into(),
            ));
        }
        let localized = LocalizedModel::new(model, spec)?;
        let h = spec.bandwidths()[0];
        if !(h0 > 0.0 && h0 < h) {
            return Err(Error::Domain(format!(
                "need 0 < h0 < h, got h0 = {h0}, h = {h}"
            )));
        }
        if !theta_star.is_finite() {
            return Err(Error::InvalidParameter("theta* must be finite".into()));
        }
        let x0 = spec.center()[0];
        Ok(Self {
            localized,
            inner: (x0 - h0, x0 + h0),
            theta_star,
        })
    }

    /// `Q_Y(y)`.
    pub fn original_cdf(&self, y: f64) -> Result<f64> {
        self.localized.cdf(y)
    }

    /// `w F_1(y)`: contribution of the inner window.
    fn inner_part(&self, y: f64) -> Result<f64> {
        self.localized.partial_cdf(y, self.inner.0, self.inner.1)
    }

    /// `(1 - w) F_2(y)`: contribution outside the inner window.
    fn outer_part(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.localized.window();
        Ok(self.localized.partial_cdf(y, lo, self.inner.0)?
            + self.localized.partial_cdf(y, self.inner.1, hi)?)
    }

    /// `Q̃_Y(y) = w G_1(y) + (1 - w) F_2(y)`.
    pub fn modified_cdf(&self, y: f64) -> Result<f64> {
        let outer = self.outer_part(y)?;
        if y < self.theta_star {
            Ok(outer)
        } else {
            Ok((outer + self.inner_part(y)?).min(1.0))
        }
    }

    pub fn mixture_weight(&self) -> Result<f64> {
        self.localized.kernel_share(self.inner.0, self.inner.1)
    }

    /// Median of `Q̃_Y`.
    pub fn theta_prime(&self) -> Result<f64> {
        let p = 0.5;
        // Below θ* only the outer component contributes.
        if self.outer_part(self.theta_star)? >= p {
            return self.localized.invert(|y| self.outer_part(y), p);
        }
        if self.original_cdf(self.theta_star)? >= p {
            return Ok(self.theta_star);
        }
        self.localized.quantile(p)
    }

    /// `d_TV(P, P') = ∫_{x0-h0}^{x0+h0} P(Y < θ* | X = x) dx` with `X ~ U[0, 1]`.
    pub fn tv_distance(&self) -> Result<f64> {
        let (a, b) = (self.inner.0.max(0.0), self.inner.1.min(1.0));
        if a >= b {
            return Ok(0.0);
        }
        let model = self.localized.model();
        let mut points = vec![a, b];
        points.extend(
            model
                .signal
                .breakpoints()
                .iter()
                .copied()
                .filter(|&k| k > a && k < b),
        );
        Quadrature::new(1e-12).integrate(|x| model.conditional_cdf(x, self.theta_star), &points)
    }

    pub fn summary(&self) -> Result<Indistinguishability> {
        Ok(Indistinguishability {
            theta: self.localized.quantile(0.5)?,
            theta_prime: self.theta_prime()?,
            tv_distance: self.tv_distance()?,
            mixture_weight: self.mixture_weight()?,
        })
    }
}

/// Median of the modified distribution and `d_TV(P, P')`.
pub fn indistinguishable_pair(
    model: &SyntheticModel,
    spec: &LocalizationSpec,
    h0: f64,
    theta_star: f64,
) -> Result<(f64, f64)> {
    let pair = IndistinguishablePair::new(model, spec, h0, theta_star)?;
    Ok((pair.theta_prime()?, pair.tv_distance()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::localization_weights;
    use crate::weighted::WeightedEcdf;

    fn spikes_s1() -> SyntheticModel {
        SyntheticModel::new(Signal::Spikes, NoiseSetting::S1)
    }

    fn tri(x0: f64, h: f64) -> LocalizationSpec {
        LocalizationSpec::univariate(KernelFamily::Triangular, x0, h).unwrap()
    }

    #[test]
    fn signal_spot_values() {
        assert_eq!(signal_eval(Signal::Step, 0.5).unwrap(), 0.8);
        assert_eq!(signal_eval(Signal::Step, 0.1).unwrap(), 0.2);
        let s = signal_eval(Signal::Spikes, 0.47).unwrap();
        assert!((s - 4.000).abs() < 5e-4, "{s}");
        assert!(signal_eval(Signal::Spikes, 1.2).is_err());
        assert!(signal_eval(Signal::Step, -0.1).is_err());
    }

    fn reference(signal: Signal, x: f64) -> f64 {
        match signal {
            Signal::Step => {
                if 1.0 / 3.0 < x && x < 2.0 / 3.0 {
                    0.8
                } else {
                    0.2
                }
            }
            Signal::Blip => {
                if x <= 0.0 {
                    0.0
                } else if x <= 0.8 {
                    0.32 + 0.6 * x + 0.3 * f64::exp(-100.0 * (x - 0.3).powi(2))
                } else {
                    -0.28 + 0.6 * x + 0.3 * f64::exp(-100.0 * (x - 1.3).powi(2))
                }
            }
            Signal::Spikes => {
                f64::exp(-500.0 * (x - 0.23).powi(2))
                    + 2.0 * f64::exp(-2000.0 * (x - 0.33).powi(2))
                    + 4.0 * f64::exp(-8000.0 * (x - 0.47).powi(2))
                    + 3.0 * f64::exp(-16000.0 * (x - 0.69).powi(2))
                    + f64::exp(-32000.0 * (x - 0.83).powi(2))
            }
            Signal::Bumps => {
                let t = [
                    0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81,
                ];
                let w = [
                    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
                ];
                let h = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
                let mut s = 0.0;
                for j in 0..11 {
                    s += h[j] / (1.0 + ((x - t[j]) / w[j]).abs().powi(4));
                }
                s
            }
            Signal::Parabolas => {
                let r = |c: f64| if x > c { (x - c).powi(2) } else { 0.0 };
                0.8 - 30.0 * r(0.1) + 60.0 * r(0.2) - 30.0 * r(0.3) + 500.0 * r(0.35)
                    - 1000.0 * r(0.37)
                    + 1000.0 * r(0.41)
                    - 500.0 * r(0.43)
                    + 7.5 * r(0.5)
                    - 15.0 * r(0.7)
                    + 7.5 * r(0.9)
            }
            Signal::Angles => {
                if x <= 0.0 {
                    0.0
                } else if x <= 0.15 {
                    2.0 * x + 0.5
                } else if x <= 0.2 {
                    -12.0 * (x - 0.15) + 0.8
                } else if x <= 0.5 {
                    0.2
                } else if x <= 0.6 {
                    6.0 * (x - 0.5) + 0.2
                } else if x <= 0.65 {
                    -10.0 * (x - 0.6) + 0.8
                } else if x <= 0.85 {
                    -5.0 * (x - 0.65) + 0.3
                } else {
                    2.0 * (x - 0.85) + 0.2
                }
            }
            Signal::Flat(c) => c,
        }
    }

    #[test]
    fn signals_match_independent_transcription() {
        let rng = RngStream::new(12, 12);
        for signal in Signal::STANDARD {
            for i in 0..20 {
                let x = rng.uniform(i);
                let (a, b) = (signal.eval(x), reference(signal, x));
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "{signal} at {x}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn angles_is_continuous_on_its_first_pieces() {
        for &k in &[0.15, 0.2, 0.5, 0.6, 0.65] {
            let (l, r) = (Signal::Angles.eval(k), Signal::Angles.eval(k + 1e-12));
            assert!((l - r).abs() < 1e-9, "jump at {k}");
        }
    }

    #[test]
    fn names_parse() {
        for s in Signal::STANDARD {
            assert_eq!(s.name().parse::<Signal>().unwrap(), s);
        }
        assert_eq!("flat:1.5".parse::<Signal>().unwrap(), Signal::Flat(1.5));
        assert_eq!("flat".parse::<Signal>().unwrap(), Signal::Flat(0.0));
        assert!("wiggle".parse::<Signal>().is_err());
        assert_eq!("2".parse::<NoiseSetting>().unwrap(), NoiseSetting::S2);
        assert_eq!("s3".parse::<NoiseSetting>().unwrap(), NoiseSetting::S3);
    }

    #[test]
    fn noise_is_positive() {
        for s in NoiseSetting::ALL {
            for i in 0..=100 {
                assert!(s.sigma(i as f64 / 100.0) > 0.0);
            }
        }
        assert_eq!(NoiseSetting::S3.sigma(0.5), 0.3);
    }

    #[test]
    fn sampling_rejects_empty_and_is_deterministic() {
        let m = spikes_s1();
        assert!(sample_dataset(&m, 0, RngStream::new(0, 0)).is_err());
        assert_eq!(
            sample_dataset(&m, 1, RngStream::new(0, 0)).unwrap().len(),
            1
        );
        let a = sample_dataset(&m, 50, RngStream::new(9, 2)).unwrap();
        let b = sample_dataset(&m, 50, RngStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_moments() {
        let n = 1_000_000;
        let m = SyntheticModel::new(Signal::Bumps, NoiseSetting::S1);
        let d = sample_dataset(&m, n, RngStream::new(31, 0)).unwrap();
        let mean_x = d.covariates().iter().sum::<f64>() / n as f64;
        assert!((mean_x - 0.5).abs() < 3.0 / (12.0 * n as f64).sqrt());
        let resid: Vec<f64> = d
            .rows()
            .zip(d.responses())
            .map(|(x, y)| y - Signal::Bumps.eval(x[0]))
            .collect();
        let mu = resid.iter().sum::<f64>() / n as f64;
        let var = resid.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 0.09).abs() < 0.0009, "{var}");
    }

    #[test]
    fn flat_signal_reduces_to_normal() {
        let m = SyntheticModel::new(Signal::Flat(1.25), NoiseSetting::S1);
        let spec = tri(0.4, 0.1);
        for &y in &[0.5, 1.0, 1.25, 1.9] {
            let got = true_q_cdf(&m, &spec, y).unwrap();
            let want = normal_cdf((y - 1.25) / 0.3);
            assert!((got - want).abs() < 1e-9);
        }
        assert!((true_theta(&m, &spec, 0.5).unwrap() - 1.25).abs() < 1e-9);
        assert_eq!(true_q_cdf(&m, &spec, f64::NEG_INFINITY).unwrap(), 0.0);
        assert_eq!(true_q_cdf(&m, &spec, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn step_interior_window_is_flat() {
        let m = SyntheticModel::new(Signal::Step, NoiseSetting::S1);
        let t = true_theta(&m, &tri(0.5, 0.04), 0.5).unwrap();
        assert!((t - 0.8).abs() < 1e-6);
    }

    #[test]
    fn spikes_peak_median() {
        let m = spikes_s1();
        let spec = tri(0.47, 0.04);
        // values frozen from an independent scipy quad/brentq evaluation
        let q = true_q_cdf(&m, &spec, 1.35).unwrap();
        assert!((q - 0.500_451).abs() < 1e-5, "{q}");
        let t = true_theta(&m, &spec, 0.5).unwrap();
        assert!((t - 1.346_886_116_5).abs() < 1e-8, "{t}");
        assert!((true_q_cdf(&m, &spec, t).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn oracle_agrees_with_large_sample_weighted_cdf() {
        let m = SyntheticModel::new(Signal::Blip, NoiseSetting::S2);
        let spec = tri(0.78, 0.1);
        let d = sample_dataset(&m, 1_000_000, RngStream::new(4, 4)).unwrap();
        let ecdf = WeightedEcdf::new(&localization_weights(&d, &spec).unwrap()).unwrap();
        let local = LocalizedModel::new(&m, &spec).unwrap();
        let mut prev = 0.0;
        for i in 0..100 {
            let y = -0.5 + 2.5 * i as f64 / 99.0;
            let exact = local.cdf(y).unwrap();
            assert!(exact >= prev);
            prev = exact;
            assert!((exact - ecdf.cdf(y)).abs() < 0.005, "y={y}");
        }
    }

    #[test]
    fn window_clipped_at_domain_boundary() {
        let m = SyntheticModel::new(Signal::Flat(0.0), NoiseSetting::S2);
        let local = LocalizedModel::new(&m, &tri(0.02, 0.1)).unwrap();
        assert_eq!(local.window().0, 0.0);
        assert!(LocalizedModel::new(&m, &tri(1.5, 0.1)).is_err());
    }

    #[test]
    fn mixture_weight_examples() {
        assert_eq!(mixture_weight(0.04, 0.04).unwrap(), 1.0);
        assert_eq!(mixture_weight(0.04, 0.0).unwrap(), 0.0);
        let w = mixture_weight(0.04, 0.012).unwrap();
        assert!((w - 0.51).abs() < 1e-12);
        assert!(mixture_weight(0.04, 0.05).is_err());
        assert!(mixture_weight(0.0, 0.0).is_err());
    }

    #[test]
    fn indistinguishable_spikes_pair() {
        let pair = IndistinguishablePair::new(&spikes_s1(), &tri(0.47, 0.04), 0.012, 2.7).unwrap();
        let s = pair.summary().unwrap();
        // scipy reference: tv = 0.010015, w = 0.51
        assert!(
            (s.tv_distance - 0.010_015).abs() < 2e-6,
            "{}",
            s.tv_distance
        );
        assert!((s.mixture_weight - 0.51).abs() < 1e-9);
        assert_eq!(s.theta_prime, 2.7);
        assert!(pair.modified_cdf(2.7 - 1e-9).unwrap() < 0.5);
        assert!(pair.modified_cdf(2.7).unwrap() >= 0.5);
        let (tp, tv) = indistinguishable_pair(&spikes_s1(), &tri(0.47, 0.04), 0.012, 2.7).unwrap();
        assert_eq!((tp, tv), (s.theta_prime, s.tv_distance));
    }

    #[test]
    fn nothing_moves_below_support() {
        let (tp, tv) = indistinguishable_pair(&spikes_s1(), &tri(0.47, 0.04), 0.012, -5.0).unwrap();
        assert!(tv < 1e-12);
        assert!((tp - 1.3469).abs() < 1e-3);
    }

    #[test]
    fn construction_preconditions() {
        let m = spikes_s1();
        assert!(IndistinguishablePair::new(&m, &tri(0.47, 0.04), 0.05, 2.7).is_err());
        let bw = LocalizationSpec::univariate(KernelFamily::Biweight, 0.47, 0.04).unwrap();
        assert!(IndistinguishablePair::new(&m, &bw, 0.01, 2.7).is_err());
    }
}
