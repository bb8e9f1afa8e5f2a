//! Simulation and training of a delay-coupled electro-optical reservoir computer.
//!
//! The machine is a single nonlinear node in a delay loop: a discrete input
//! sequence is stretched into a piecewise-constant drive by periodic input
//! masks, the loop state evolves as `a = mu*sin(a_delayed + z)`, and periodic
//! output masks read the state back out as a discrete output sequence. Both
//! mask sets are trained by running the *same* delay system backwards in time
//! on an injected error signal (the adjoint pass), which yields exact cost
//! gradients for every mask value. A conventional reservoir-computing
//! baseline (random input masks, least-squares readout, grid-scanned
//! scalings) is included for comparison, together with the NARMA10, VARDEL5
//! and a synthetic multiclass benchmark.
//!
//! Two fidelities are supported: `Ideal` (exact arithmetic) and `Hardware`,
//! which models the cascaded Mach-Zehnder modulator physics and its
//! imperfections (measurement noise, modulator bias drift with two-pass
//! correction, residual nonlinearity of the backward pass, error-signal
//! scaling).

pub mod adjoint;
pub mod dynamics;
pub mod error;
pub mod hardware;
pub mod rng;
pub mod signal;
pub mod tasks;
pub mod training;

pub use adjoint::{full_gradient, GradientOutput, GradientSet};
pub use error::{Error, Result};
pub use hardware::{BiasDrift, HardwareParams, HwMeasurement};
pub use signal::{
    apply_input_mask, apply_output_mask, mask_error, time_invert, Fidelity, MaskSet,
    ReservoirConfig, SequencePair, StepTrace, Targets, TraceRole,
};
pub use tasks::{CostKind, TaskKind, TaskSpec};
pub use training::{
    evaluate_masks, finite_diff_gradient, gradcheck_instance, init_masks, lsq_readout,
    max_rel_error, rc_baseline, train_bp, BpTrainer, OptimizerState, RcGrid, RcReport,
    TrainConfig, TrainerRngs, TrainingLog,
};
