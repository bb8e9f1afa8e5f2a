//! Shared instance builders for the pipeline benchmarks.

use optoback_core::rng::seeded;
use optoback_core::{MaskSet, ReservoirConfig, SequencePair, StepTrace, Targets, TraceRole};
use rand::Rng;

/// Benchmark-scale reservoir: the NARMA10/VARDEL5 working point.
pub fn bench_reservoir() -> ReservoirConfig {
    ReservoirConfig::ideal(80, 1.0)
}

pub fn random_masks(n_t: usize, k: usize, p: usize, seed: u64) -> MaskSet {
    let mut rng = seeded(seed, 0);
    MaskSet {
        input_masks: (0..k)
            .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        bias_mask: (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect(),
        output_masks: (0..p)
            .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        output_bias: (0..p).map(|_| rng.gen::<f64>() - 0.5).collect(),
    }
}

pub fn random_regression_sequence(l: usize, k: usize, p: usize, seed: u64) -> SequencePair {
    let mut rng = seeded(seed, 1);
    SequencePair {
        inputs: (0..l)
            .map(|_| (0..k).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        targets: Targets::Regression(
            (0..l)
                .map(|_| (0..p).map(|_| rng.gen::<f64>() - 0.5).collect())
                .collect(),
        ),
    }
}

pub fn random_drive(steps: usize, seed: u64) -> StepTrace {
    let mut rng = seeded(seed, 2);
    StepTrace::new(
        (0..steps).map(|_| rng.gen::<f64>() - 0.5).collect(),
        TraceRole::Drive,
    )
    .expect("finite drive")
}

/// Node-state rows for readout benchmarks.
pub fn random_states(rows: usize, n_t: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = seeded(seed, 3);
    let states = (0..rows)
        .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
        .collect();
    let targets = (0..rows).map(|_| vec![rng.gen::<f64>() - 0.5]).collect();
    (states, targets)
}
