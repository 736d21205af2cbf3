#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NeumaierSum;
use crate::error::{Error, Result};

// 15-point Kronrod abscissae with the embedded 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Adaptive Gauss–Kronrod (7/15) integration with global error control.
///
/// The worst segment is bisected until the summed error estimate falls
/// below `abs_tol` or `max_segments` is exhausted.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_segments: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[points[0], points[last]]`, seeding the
    /// partition with every interior point (kinks, discontinuities).
    /// `points` need not be sorted; duplicates are ignored.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<f64> {
        let mut knots: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        if knots.len() < 2 {
            return Ok(0.0);
        }

        let mut heap: BinaryHeap<Segment> = knots
            .windows(2)
            .map(|w| kronrod15(&f, w[0], w[1]))
            .collect();
        let mut total_error: f64 = heap.iter().map(|s| s.error).sum();

        while total_error > self.abs_tol && heap.len() < self.max_segments {
            let worst = heap.pop().expect("heap is nonempty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Segment cannot be split further in floating point.
                heap.push(Segment {
                    error: 0.0,
                    ..worst
                });
                total_error -= worst.error;
                continue;
            }
            let left = kronrod15(&f, worst.a, mid);
            let right = kronrod15(&f, mid, worst.b);
            total_error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            if heap.len().is_multiple_of(64) {
                total_error = heap.iter().map(|s| s.error).sum();
            }
        }

        let total_error: f64 = heap.iter().map(|s| s.error).sum();
        if total_error > self.abs_tol {
            return Err(Error::QuadratureFailure {
                tolerance: self.abs_tol,
                estimate: total_error,
            });
        }
        let value: NeumaierSum = heap.iter().map(|s| s.value).collect();
        Ok(value.total())
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    Quadrature::new(abs_tol).integrate(f, &[a, b])
}

/// Integrates `f` between the smallest and largest of `points`, splitting at every point.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    Quadrature::new(abs_tol).integrate(f, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree_polynomials() {
        let v = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        // [x^3 - x^2 + x] from -1 to 2 = (8 - 4 + 2) - (-1 - 1 - 1) = 9
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breakpoint() {
        // |x - 1/3| on [0, 1] = (1/9 + 4/9) / 2 = 5/18
        let v =
            integrate_with_breakpoints(|x| (x - 1.0 / 3.0).abs(), &[0.0, 1.0 / 3.0, 1.0], 1e-13)
                .unwrap();
        assert!((v - 5.0 / 18.0).abs() < 1e-13);
    }

    #[test]
    fn kinked_integrand_without_breakpoint_still_converges() {
        let v = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn sharp_gaussian_peak() {
        // 4 exp(-8000 (x - 0.47)^2) over a window far wider than the peak.
        let exact = 4.0 * (std::f64::consts::PI / 8000.0).sqrt();
        let v = integrate(
            |x| 4.0 * (-8000.0 * (x - 0.47f64).powi(2)).exp(),
            -1.0,
            2.0,
            1e-11,
        )
        .unwrap();
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn reports_failure_when_budget_is_exhausted() {
        let q = Quadrature {
            abs_tol: 1e-14,
            max_segments: 3,
        };
        let err = q
            .integrate(|x: f64| x.abs().sqrt().recip(), &[1e-300, 1.0])
            .unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn degenerate_range_is_zero() {
        assert_eq!(integrate(|x| x, 0.5, 0.5, 1e-9).unwrap(), 0.0);
    }
}
