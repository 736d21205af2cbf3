//! Fixtures shared by the benchmarks.

use localq::{sample_dataset, Dataset, NoiseSetting, RngStream, Signal, SyntheticModel};

pub fn spikes_s1() -> SyntheticModel {
    SyntheticModel::new(Signal::Spikes, NoiseSetting::S1)
}

/// `n` rows from the Spikes model, setting 1.
pub fn spikes_dataset(n: usize, seed: u64) -> Dataset {
    sample_dataset(&spikes_s1(), n, RngStream::new(seed, 0)).expect("n >= 1")
}
