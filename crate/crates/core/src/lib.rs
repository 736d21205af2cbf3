//! Distribution-free confidence intervals for kernel-localized conditional
//! quantiles.
//!
//! Three interval constructions are provided:
//!
//! * [`wq_interval`] — the weighted-quantile interval, a normal-approximation
//!   interval around the kernel-weighted empirical quantile;
//! * [`qr_interval`] — quantile rejection, which thins the sample with
//!   acceptance probabilities `K / K_max` and applies the exact
//!   order-statistic interval to the survivors;
//! * [`df_quantile_ci`] — the finite-sample order-statistic interval for an
//!   i.i.d. sample, valid in the presence of ties.
//!
//! The [`synthetic`] module supplies the regression models, the numerical
//! oracle for the true localized quantile, and the indistinguishability
//! construction; [`experiments`] runs coverage studies over them.

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod interval;
pub mod kernels;
pub mod numerics;
pub mod order_stat;
pub mod qr;
pub mod rng;
pub mod synthetic;
pub mod weighted;
pub mod wq;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use experiments::{run_experiment, CellSummary, ExperimentConfig};
pub use interval::{IntervalResult, Method, QuantileSpec, MIN_RECOMMENDED_N_EFF};
pub use kernels::{kernel_eval, kernel_max, localization_weights, KernelFamily, LocalizationSpec};
pub use numerics::{normal_cdf, normal_quantile};
pub use order_stat::{binom_cdf, binom_sf, df_quantile_ci, quantile_ci_indices, TieIndices};
pub use qr::{qr_interval, rejection_sample};
pub use rng::RngStream;
pub use synthetic::{
    indistinguishable_pair, mixture_weight, sample_dataset, signal_eval, true_q_cdf, true_theta,
    IndistinguishablePair, LocalizedModel, NoiseSetting, Signal, SyntheticModel,
};
pub use weighted::{
    effective_sample_size, weighted_cdf, weighted_quantile, QuantileTarget, WeightedEcdf,
    WeightedSample,
};
pub use wq::{sigma_hat_p, wq_interval, wq_interval_from_sample};
