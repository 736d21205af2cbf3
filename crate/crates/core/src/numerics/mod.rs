//! Scalar numerical building blocks: normal distribution functions,
//! compensated summation, adaptive quadrature and bisection.

mod normal;
mod quadrature;
mod root;
mod sum;

pub use normal::{normal_cdf, normal_quantile};
pub use quadrature::{integrate, integrate_with_breakpoints, Quadrature};
pub use root::bisect;
pub use sum::NeumaierSum;
