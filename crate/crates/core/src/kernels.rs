//! Localization kernels and per-sample weights `L_i = K((x0 - X_i) / h)`.
//!
//! Multivariate kernels are products of one-dimensional kernels with one
//! bandwidth per covariate, so the maximum is the product of the 1-d maxima.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::normal_cdf;
use crate::weighted::WeightedSample;

/// Half-width of the truncated Gaussian kernel's support.
pub const GAUSSIAN_TRUNCATION: f64 = 5.0;

/// Weights below this are flushed to zero.
pub const WEIGHT_FLUSH: f64 = 1e-300;

/// One-dimensional kernel shapes, each integrating to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `(1 - |u|)_+`
    Triangular,
    /// `(15/16) (1 - u^2)_+^2`
    Biweight,
    /// `1/2` on `[-1, 1]`
    Uniform,
    /// Standard normal density restricted to `|u| <= 5`, renormalized.
    GaussianTruncated,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Triangular,
        KernelFamily::Biweight,
        KernelFamily::Uniform,
        KernelFamily::GaussianTruncated,
    ];

    /// `K(u)`; zero outside the support.
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        match self {
            KernelFamily::Triangular => (1.0 - a).max(0.0),
            KernelFamily::Biweight => {
                if a < 1.0 {
                    let t = 1.0 - u * u;
                    0.9375 * t * t
                } else {
                    0.0
                }
            }
            KernelFamily::Uniform => {
                if a <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelFamily::GaussianTruncated => {
                if a <= GAUSSIAN_TRUNCATION {
                    (-0.5 * u * u).exp() * gaussian_normalizer()
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup_u K(u)`, attained at `u = 0`.
    pub fn max(self) -> f64 {
        self.eval(0.0)
    }

    /// Half-width of the support in `u` units.
    pub fn support_radius(self) -> f64 {
        match self {
            KernelFamily::GaussianTruncated => GAUSSIAN_TRUNCATION,
            _ => 1.0,
        }
    }

    /// Points where `K` is not smooth, in `u` units.
    pub fn knots(self) -> &'static [f64] {
        match self {
            KernelFamily::Triangular => &[-1.0, 0.0, 1.0],
            KernelFamily::Biweight | KernelFamily::Uniform => &[-1.0, 1.0],
            KernelFamily::GaussianTruncated => &[-GAUSSIAN_TRUNCATION, GAUSSIAN_TRUNCATION],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Triangular => "triangular",
            KernelFamily::Biweight => "biweight",
            KernelFamily::Uniform => "uniform",
            KernelFamily::GaussianTruncated => "gaussian",
        }
    }
}

// 1 / (sqrt(2 pi) (2 Phi(5) - 1))
fn gaussian_normalizer() -> f64 {
    static NORMALIZER: OnceLock<f64> = OnceLock::new();
    *NORMALIZER.get_or_init(|| {
        let mass = 2.0 * normal_cdf(GAUSSIAN_TRUNCATION) - 1.0;
        1.0 / ((2.0 * std::f64::consts::PI).sqrt() * mass)
    })
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(KernelFamily::Triangular),
            "biweight" | "bisquare" => Ok(KernelFamily::Biweight),
            "uniform" | "box" => Ok(KernelFamily::Uniform),
            "gaussian" | "gaussian-truncated" => Ok(KernelFamily::GaussianTruncated),
            other => Err(Error::InvalidParameter(format!("unknown kernel '{other}'"))),
        }
    }
}

/// `K(u)` for a 1-d kernel.
pub fn kernel_eval(kernel: KernelFamily, u: f64) -> f64 {
    kernel.eval(u)
}

/// `sup K` for a 1-d kernel.
pub fn kernel_max(kernel: KernelFamily) -> f64 {
    kernel.max()
}

/// Kernel family, center `x0` and per-dimension bandwidths defining the
/// covariate shift. `scale` multiplies the whole kernel (default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationSpec {
    kernel: KernelFamily,
    center: Vec<f64>,
    bandwidths: Vec<f64>,
    scale: f64,
}

impl LocalizationSpec {
    pub fn new(kernel: KernelFamily, center: Vec<f64>, bandwidths: Vec<f64>) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter(
                "center must have at least one coordinate".into(),
            ));
        }
        if center.len() != bandwidths.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: bandwidths.len(),
            });
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("center must be finite".into()));
        }
        if bandwidths.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter(
                "bandwidths must be positive and finite".into(),
            ));
        }
        Ok(Self {
            kernel,
            center,
            bandwidths,
            scale: 1.0,
        })
    }

    /// One-dimensional spec.
    pub fn univariate(kernel: KernelFamily, x0: f64, h: f64) -> Result<Self> {
        Self::new(kernel, vec![x0], vec![h])
    }

    /// Multiplies the kernel by `scale > 0`.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(
                "kernel scale must be positive".into(),
            ));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn kernel(&self) -> KernelFamily {
        self.kernel
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Product kernel at `x` without the scale factor.
    pub fn shape_at(&self, x: &[f64]) -> f64 {
        let w = x
            .iter()
            .zip(&self.center)
            .zip(&self.bandwidths)
            .map(|((&xi, &c), &h)| self.kernel.eval((c - xi) / h))
            .product::<f64>();
        if w < WEIGHT_FLUSH {
            0.0
        } else {
            w
        }
    }

    /// Product of per-dimension maxima, without the scale factor.
    pub fn shape_max(&self) -> f64 {
        self.kernel.max().powi(self.dim() as i32)
    }

    /// `K((x0 - x) / h)` including the scale factor.
    pub fn weight_at(&self, x: &[f64]) -> f64 {
        let w = self.scale * self.shape_at(x);
        if w < WEIGHT_FLUSH {
            0.0
        } else {
            w
        }
    }

    /// `K_max` including the scale factor.
    pub fn kernel_max(&self) -> f64 {
        self.scale * self.shape_max()
    }

    /// Acceptance probabilities `L_i / K_max` for rejection sampling. The scale
    /// cancels analytically, so it is left out of the arithmetic altogether.
    pub fn acceptance_probabilities(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data)?;
        let max = self.shape_max();
        Ok(data.rows().map(|x| self.shape_at(x) / max).collect())
    }

    pub(crate) fn check_dim(&self, data: &Dataset) -> Result<()> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        Ok(())
    }
}

/// Localization weights for every row, in row order, paired with the responses.
pub fn localization_weights(data: &Dataset, spec: &LocalizationSpec) -> Result<WeightedSample> {
    spec.check_dim(data)?;
    let weights = data.rows().map(|x| spec.weight_at(x)).collect();
    WeightedSample::new(data.responses().to_vec(), weights)
}

/// Localization weights with the kernel scale factored out; the weighted
/// estimators depend on the kernel only up to scale.
pub(crate) fn shape_weights(data: &Dataset, spec: &LocalizationSpec) -> Result<WeightedSample> {
    spec.check_dim(data)?;
    let weights = data.rows().map(|x| spec.shape_at(x)).collect();
    WeightedSample::new(data.responses().to_vec(), weights)
}
