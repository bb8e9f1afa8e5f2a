//! Optimization loop (SGD with Nesterov momentum and linear learning-rate
//! decay), the reservoir-computing baseline (random masks, least-squares
//! readout, grid scan), the finite-difference gradient oracle, and
//! evaluation helpers.

use crate::adjoint::{full_gradient, GradientSet};
use crate::dynamics::simulate_forward;
use crate::error::{Error, Result};
use crate::hardware::{self, BiasDrift, HwMeasurement};
use crate::rng::{seeded, streams};
use crate::signal::{
    apply_input_mask, apply_output_mask, Fidelity, MaskSet, ReservoirConfig, SequencePair, Targets,
};
use crate::tasks::{classification_error_rate, nrmse, TaskSpec};
use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outputs earlier than this are excluded from evaluation metrics while the
/// reservoir forgets its zero initial state.
pub const EVAL_WASHOUT: usize = 50;

/// Abort training when the per-step cost exceeds this.
const DIVERGENCE_BOUND: f64 = 1e9;

/// Gradient-descent settings for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    /// Steps per training sequence drawn each iteration.
    pub seq_length: usize,
    /// Learning rate at iteration 0; decays linearly to zero.
    pub lr_initial: f64,
    pub momentum: f64,
    pub seed: u64,
    /// Held-out sequence length for the validation metric.
    pub eval_length: usize,
    /// Validation cadence in iterations (also the checkpoint cadence).
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr_initial <= 0.0 {
            return Err(Error::InvalidConfig("lr_initial must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if self.seq_length == 0 || self.eval_length == 0 || self.eval_every == 0 {
            return Err(Error::InvalidConfig(
                "seq_length, eval_length and eval_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Momentum accumulator plus iteration counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub velocity: GradientSet,
    pub iteration: usize,
}

impl OptimizerState {
    pub fn new(masks: &MaskSet) -> Self {
        OptimizerState {
            velocity: GradientSet::zeros_like(masks),
            iteration: 0,
        }
    }
}

/// Linearly decaying learning rate: `eta(it) = lr_initial * (1 - it/iterations)`.
pub fn lr_schedule(iter: usize, cfg: &TrainConfig) -> f64 {
    cfg.lr_initial * (1.0 - iter as f64 / cfg.iterations as f64)
}

/// One Nesterov update. The caller must have evaluated `grad_at_lookahead`
/// at `masks + momentum * velocity`; the update is then
/// `velocity <- momentum*velocity - eta*grad; masks <- masks + velocity`.
pub fn nesterov_step(
    masks: &mut MaskSet,
    state: &mut OptimizerState,
    grad_at_lookahead: &GradientSet,
    eta: f64,
    momentum: f64,
) {
    state.velocity.scale(momentum);
    state.velocity.add_scaled(grad_at_lookahead, -eta);
    masks.add_scaled(&state.velocity, 1.0);
    state.iteration += 1;
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub iteration: usize,
    pub lr: f64,
    /// Per-step training cost of this iteration's sequence.
    pub cost: f64,
    /// Validation metric (NRMSE or error rate), present at `eval_every`
    /// cadence.
    pub val_metric: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

/// RNG streams owned by a training run; serialized into checkpoints so a
/// resumed run is indistinguishable from an uninterrupted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerRngs {
    pub train: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub drift: ChaCha8Rng,
}

impl TrainerRngs {
    pub fn from_seed(seed: u64) -> Self {
        TrainerRngs {
            train: seeded(seed, streams::TRAIN_DRAW),
            noise: seeded(seed, streams::HW_NOISE),
            drift: seeded(seed, streams::DRIFT),
        }
    }
}

/// Replace raw targets by `(y* - offset) / scale` with the task's fixed
/// standardization constants. NRMSE is invariant under this (both output
/// and target live in standardized units); the point is that gradient
/// magnitudes become comparable across tasks.
fn standardize_targets(seq: &mut SequencePair, task: &TaskSpec) {
    let (offset, scale) = task.target_standardization();
    if offset == 0.0 && scale == 1.0 {
        return;
    }
    if let Targets::Regression(t) = &mut seq.targets {
        for row in t {
            for v in row {
                *v = (*v - offset) / scale;
            }
        }
    }
}

/// A resumable gradient-descent run.
pub struct BpTrainer {
    task: TaskSpec,
    cfg: TrainConfig,
    rcfg: ReservoirConfig,
    masks: MaskSet,
    state: OptimizerState,
    rngs: TrainerRngs,
    drift: BiasDrift,
    log: TrainingLog,
}

impl BpTrainer {
    pub fn new(
        task: TaskSpec,
        cfg: TrainConfig,
        rcfg: ReservoirConfig,
        init: MaskSet,
    ) -> Result<Self> {
        task.validate()?;
        cfg.validate()?;
        rcfg.validate()?;
        init.validate()?;
        let state = OptimizerState::new(&init);
        let rngs = TrainerRngs::from_seed(cfg.seed);
        Ok(BpTrainer {
            task,
            cfg,
            rcfg,
            masks: init,
            state,
            rngs,
            drift: BiasDrift::default(),
            log: TrainingLog::default(),
        })
    }

    /// Reassemble a trainer mid-run (checkpoint resume).
    pub fn from_parts(
        task: TaskSpec,
        cfg: TrainConfig,
        rcfg: ReservoirConfig,
        masks: MaskSet,
        state: OptimizerState,
        rngs: TrainerRngs,
        drift: BiasDrift,
    ) -> Result<Self> {
        task.validate()?;
        cfg.validate()?;
        rcfg.validate()?;
        masks.validate()?;
        Ok(BpTrainer {
            task,
            cfg,
            rcfg,
            masks,
            state,
            rngs,
            drift,
            log: TrainingLog::default(),
        })
    }

    pub fn masks(&self) -> &MaskSet {
        &self.masks
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn rngs(&self) -> &TrainerRngs {
        &self.rngs
    }

    pub fn drift(&self) -> &BiasDrift {
        &self.drift
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn take_log(&mut self) -> TrainingLog {
        std::mem::take(&mut self.log)
    }

    pub fn iteration(&self) -> usize {
        self.state.iteration
    }

    pub fn finished(&self) -> bool {
        self.state.iteration >= self.cfg.iterations
    }

    /// Run one iteration: draw a sequence, take the gradient at the
    /// momentum lookahead, step, and log. Validation runs at the
    /// `eval_every` cadence.
    pub fn step(&mut self) -> Result<&LogRow> {
        let it = self.state.iteration;
        let eta = lr_schedule(it, &self.cfg);
        let mut seq = self.task.generate(self.cfg.seq_length, &mut self.rngs.train);
        standardize_targets(&mut seq, &self.task);

        let mut lookahead = self.masks.clone();
        lookahead.add_scaled(&self.state.velocity, self.cfg.momentum);

        let hw = match self.rcfg.fidelity {
            Fidelity::Ideal => None,
            Fidelity::Hardware => {
                let drift = self
                    .drift
                    .step(self.rcfg.hardware.bias_drift_std, &mut self.rngs.drift);
                Some(HwMeasurement {
                    bias_offset: self.rcfg.hardware.bias_offset + drift,
                    rng: &mut self.rngs.noise,
                })
            }
        };
        let mut out = full_gradient(&seq, &lookahead, &self.rcfg, self.task.cost_kind(), hw)?;

        // average cost and gradient over the sequence so the learning rate
        // is sequence-length independent
        let per_step = 1.0 / self.cfg.seq_length as f64;
        out.grads.scale(per_step);
        let cost = out.cost * per_step;
        if !cost.is_finite() || cost.abs() > DIVERGENCE_BOUND {
            return Err(Error::Diverged {
                iteration: it,
                cost,
            });
        }

        nesterov_step(
            &mut self.masks,
            &mut self.state,
            &out.grads,
            eta,
            self.cfg.momentum,
        );

        let val_metric = if (it + 1) % self.cfg.eval_every == 0 || it + 1 == self.cfg.iterations {
            Some(evaluate_masks(
                &self.task,
                &self.masks,
                &self.rcfg,
                self.cfg.eval_length,
                self.cfg.seed,
            )?)
        } else {
            None
        };
        self.log.rows.push(LogRow {
            iteration: it,
            lr: eta,
            cost,
            val_metric,
        });
        Ok(self.log.rows.last().unwrap())
    }

    /// Run to completion, invoking `on_eval` after every iteration that
    /// produced a validation metric (the checkpoint hook).
    pub fn run_with(&mut self, mut on_eval: impl FnMut(&BpTrainer) -> Result<()>) -> Result<()> {
        while !self.finished() {
            let evaluated = self.step()?.val_metric.is_some();
            if evaluated {
                on_eval(self)?;
            }
        }
        Ok(())
    }
}

/// Train masks by physical backpropagation: `iterations` rounds of
/// (draw sequence, gradient at lookahead, Nesterov step). Input masks come
/// from the caller (random init); output masks start at zero.
pub fn train_bp(
    task: &TaskSpec,
    cfg: &TrainConfig,
    rcfg: &ReservoirConfig,
    init: MaskSet,
) -> Result<(MaskSet, TrainingLog)> {
    let mut trainer = BpTrainer::new(task.clone(), cfg.clone(), rcfg.clone(), init)?;
    trainer.run_with(|_| Ok(()))?;
    let log = trainer.take_log();
    Ok((trainer.masks, log))
}

/// Random mask initialization for BP runs: input and bias masks i.i.d.
/// uniform on [-0.5, 0.5], then rescaled so the masked drive has sample
/// std 0.5 on a probe sequence; output masks and biases start at zero.
pub fn init_masks(task: &TaskSpec, rcfg: &ReservoirConfig, seed: u64) -> Result<MaskSet> {
    let n_t = rcfg.n_virtual_nodes;
    let mut rng = seeded(seed, streams::MASK_INIT);
    let mut masks = MaskSet {
        input_masks: (0..task.channels)
            .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        bias_mask: (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect(),
        output_masks: vec![vec![0.0; n_t]; task.classes],
        output_bias: vec![0.0; task.classes],
    };
    let probe = task.generate(400.max(2), &mut rng);
    let z = apply_input_mask(&probe, &masks)?;
    let v = z.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let std = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64).sqrt();
    if std > 1e-12 {
        let c = 0.5 / std;
        for row in &mut masks.input_masks {
            for m in row {
                *m *= c;
            }
        }
        for m in &mut masks.bias_mask {
            *m *= c;
        }
    }
    Ok(masks)
}

/// Forward-only pass: outputs of `masks` on `seq` (standardized targets are
/// the caller's concern). Hardware fidelity draws record noise from `rng`.
fn forward_outputs(
    seq: &SequencePair,
    masks: &MaskSet,
    rcfg: &ReservoirConfig,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<Vec<Vec<f64>>> {
    let z = apply_input_mask(seq, masks)?;
    let a = match rcfg.fidelity {
        Fidelity::Ideal => simulate_forward(&z, rcfg)?,
        Fidelity::Hardware => {
            let rng = rng.ok_or_else(|| {
                Error::InvalidConfig("hardware fidelity needs a noise RNG".into())
            })?;
            hardware::forward_hardware(&z, rcfg, rng)?
        }
    };
    apply_output_mask(&a, masks)
}

/// Held-out metric of a mask set: NRMSE for regression tasks,
/// classification error rate otherwise. Data comes from the seed's
/// evaluation stream; the first [`EVAL_WASHOUT`] outputs are excluded.
pub fn evaluate_masks(
    task: &TaskSpec,
    masks: &MaskSet,
    rcfg: &ReservoirConfig,
    length: usize,
    seed: u64,
) -> Result<f64> {
    let mut data_rng = seeded(seed, streams::EVAL);
    let mut seq = task.generate(length, &mut data_rng);
    standardize_targets(&mut seq, task);
    let mut noise_rng = seeded(seed, streams::EVAL + 100);
    let outputs = forward_outputs(&seq, masks, rcfg, Some(&mut noise_rng))?;
    let washout = EVAL_WASHOUT.min(length.saturating_sub(1));
    match &seq.targets {
        Targets::Regression(t) => {
            let y: Vec<f64> = outputs[washout..].iter().map(|r| r[0]).collect();
            let t: Vec<f64> = t[washout..].iter().map(|r| r[0]).collect();
            nrmse(&y, &t)
        }
        Targets::Labels { labels, .. } => {
            classification_error_rate(&outputs[washout..], &labels[washout..])
        }
    }
}

/// Central-difference gradient of the full pipeline cost, entry by entry:
/// `(C(theta + eps) - C(theta - eps)) / (2 eps)` with
/// `eps = max(eps_base, eps_base * |theta|)`. Ideal fidelity only; this is
/// the oracle the adjoint is checked against, and it never touches the
/// backward-pass code.
pub fn finite_diff_gradient(
    seq: &SequencePair,
    masks: &MaskSet,
    rcfg: &ReservoirConfig,
    cost: crate::tasks::CostKind,
    eps_base: f64,
) -> Result<GradientSet> {
    if rcfg.fidelity != Fidelity::Ideal {
        return Err(Error::InvalidConfig(
            "finite differences need ideal fidelity".into(),
        ));
    }
    let eval = |m: &MaskSet| -> Result<f64> {
        let y = forward_outputs(seq, m, rcfg, None)?;
        Ok(crate::tasks::cost_and_error(cost, &y, &seq.targets)?.0)
    };
    let mut grads = GradientSet::zeros_like(masks);
    let mut work = masks.clone();

    // iterate over every mask entry through the same flattened order the
    // gradient uses
    let n_entries = masks.input_channels() * masks.n_nodes()
        + masks.n_nodes()
        + masks.output_channels() * masks.n_nodes()
        + masks.output_bias.len();
    for idx in 0..n_entries {
        let theta = *entry(&work, idx);
        let eps = eps_base.max(eps_base * theta.abs());
        *entry_mut(&mut work, idx) = theta + eps;
        let c_plus = eval(&work)?;
        *entry_mut(&mut work, idx) = theta - eps;
        let c_minus = eval(&work)?;
        *entry_mut(&mut work, idx) = theta;
        *grad_entry_mut(&mut grads, idx) = (c_plus - c_minus) / (2.0 * eps);
    }
    Ok(grads)
}

fn entry(m: &MaskSet, idx: usize) -> &f64 {
    m.input_masks
        .iter()
        .flatten()
        .chain(m.bias_mask.iter())
        .chain(m.output_masks.iter().flatten())
        .chain(m.output_bias.iter())
        .nth(idx)
        .expect("entry index in range")
}

fn entry_mut(m: &mut MaskSet, idx: usize) -> &mut f64 {
    m.input_masks
        .iter_mut()
        .flatten()
        .chain(m.bias_mask.iter_mut())
        .chain(m.output_masks.iter_mut().flatten())
        .chain(m.output_bias.iter_mut())
        .nth(idx)
        .expect("entry index in range")
}

fn grad_entry_mut(g: &mut GradientSet, idx: usize) -> &mut f64 {
    g.iter_mut().nth(idx).expect("entry index in range")
}

/// Random small instance for gradient checks: uniform masks in
/// [-0.5, 0.5], inputs and regression targets in [-1, 1] (or uniform random
/// labels), feedback gain 0.9.
pub fn gradcheck_instance(
    seed: u64,
    n_t: usize,
    l: usize,
    k: usize,
    p: usize,
    classify: bool,
) -> (SequencePair, MaskSet, ReservoirConfig, crate::tasks::CostKind) {
    use crate::tasks::CostKind;
    let mut rng = seeded(seed, 77);
    let masks = MaskSet {
        input_masks: (0..k)
            .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        bias_mask: (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect(),
        output_masks: (0..p)
            .map(|_| (0..n_t).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect(),
        output_bias: (0..p).map(|_| rng.gen::<f64>() - 0.5).collect(),
    };
    let inputs: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..k).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
        .collect();
    let (targets, cost) = if classify {
        (
            Targets::Labels {
                labels: (0..l).map(|_| rng.gen_range(0..p)).collect(),
                classes: p,
            },
            CostKind::SoftmaxCrossEntropy,
        )
    } else {
        (
            Targets::Regression(
                (0..l)
                    .map(|_| (0..p).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                    .collect(),
            ),
            CostKind::SquaredError,
        )
    };
    let seq = SequencePair { inputs, targets };
    let rcfg = ReservoirConfig::ideal(n_t, 0.9);
    (seq, masks, rcfg, cost)
}

/// Largest per-block relative deviation between two gradient sets. Each of
/// the four blocks is normalized by its own largest magnitude
/// (`max(|a|_inf, |b|_inf, 1e-12)`), so structurally-zero blocks compare
/// exactly and small entries are measured against the block scale.
pub fn max_rel_error(a: &GradientSet, b: &GradientSet) -> f64 {
    let block = |xa: &[&[f64]], xb: &[&[f64]]| -> f64 {
        let mut scale = 1e-12f64;
        for row in xa.iter().chain(xb.iter()) {
            for v in *row {
                scale = scale.max(v.abs());
            }
        }
        let mut worst = 0.0f64;
        for (ra, rb) in xa.iter().zip(xb.iter()) {
            for (va, vb) in ra.iter().zip(rb.iter()) {
                worst = worst.max((va - vb).abs() / scale);
            }
        }
        worst
    };
    fn rows(m: &[Vec<f64>]) -> Vec<&[f64]> {
        m.iter().map(Vec::as_slice).collect()
    }
    let mut worst = block(&rows(&a.d_input_masks), &rows(&b.d_input_masks));
    worst = worst.max(block(&[&a.d_bias_mask], &[&b.d_bias_mask]));
    worst = worst.max(block(&rows(&a.d_output_masks), &rows(&b.d_output_masks)));
    worst = worst.max(block(&[&a.d_output_bias], &[&b.d_output_bias]));
    worst
}

/// Solve the regularized least-squares readout
/// `min || [states | 1] W - targets ||^2 + ridge ||W_states||^2`
/// (bias column unregularized) via the normal equations; returns
/// `(output_masks, output_bias)` split from `W`.
pub fn lsq_readout(
    states: &[Vec<f64>],
    targets: &[Vec<f64>],
    ridge: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if states.is_empty() || states.len() != targets.len() {
        return Err(Error::dim("lsq rows", states.len(), targets.len()));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidConfig("ridge must be >= 0".into()));
    }
    let n = states[0].len();
    let p = targets[0].len();
    let rows = states.len();
    let dim = n + 1;

    // G = X^T X with X = [states | 1]; b = X^T Y
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DMatrix::<f64>::zeros(dim, p);
    for (s, t) in states.iter().zip(targets) {
        if s.len() != n || t.len() != p {
            return Err(Error::dim("lsq row width", n, s.len()));
        }
        for i in 0..n {
            for j in i..n {
                g[(i, j)] += s[i] * s[j];
            }
            g[(i, n)] += s[i];
            for l in 0..p {
                b[(i, l)] += s[i] * t[l];
            }
        }
        for l in 0..p {
            b[(n, l)] += t[l];
        }
    }
    g[(n, n)] = rows as f64;
    for i in 0..dim {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    for i in 0..n {
        g[(i, i)] += ridge;
    }

    let w = match Cholesky::new(g.clone()) {
        Some(ch) => ch.solve(&b),
        None => {
            if ridge == 0.0 {
                return Err(Error::SingularSystem);
            }
            g.lu().solve(&b).ok_or(Error::SingularSystem)?
        }
    };
    let output_masks = (0..p)
        .map(|l| (0..n).map(|i| w[(i, l)]).collect())
        .collect();
    let output_bias = (0..p).map(|l| w[(n, l)]).collect();
    Ok((output_masks, output_bias))
}

/// Grid specification for the reservoir-computing baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcGrid {
    pub mu: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub bias_scale: Vec<f64>,
    /// Ridge candidates; the best on validation is kept per cell.
    pub ridge: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Initial readout training length; doubled until validation stops
    /// improving by at least 1% or `train_len_max` is reached.
    pub train_len_initial: usize,
    pub train_len_max: usize,
    pub val_length: usize,
    pub test_length: usize,
}

impl RcGrid {
    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty()
            || self.input_scale.is_empty()
            || self.bias_scale.is_empty()
            || self.ridge.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::InvalidConfig("empty grid dimension".into()));
        }
        if self.train_len_initial == 0 || self.train_len_max < self.train_len_initial {
            return Err(Error::InvalidConfig("bad training length bounds".into()));
        }
        Ok(())
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcRow {
    pub mu: f64,
    pub input_scale: f64,
    pub bias_scale: f64,
    pub seed: u64,
    pub ridge: f64,
    pub train_len: usize,
    pub val_metric: f64,
    pub test_metric: f64,
}

/// Per-cell aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcCellSummary {
    pub mu: f64,
    pub input_scale: f64,
    pub bias_scale: f64,
    pub val_mean: f64,
    pub val_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcReport {
    /// One row per (cell, seed) with the validation-selected ridge.
    pub rows: Vec<RcRow>,
    pub summaries: Vec<RcCellSummary>,
    /// Index into `rows` of the best validation metric.
    pub best_row: usize,
}

impl RcReport {
    pub fn best(&self) -> &RcRow {
        &self.rows[self.best_row]
    }
}

/// Reservoir-computing baseline: for every grid cell and seed, draw random
/// input/bias masks at the cell's scalings, simulate, fit the readout by
/// ridge-validated least squares on growing training data, and evaluate on
/// a held-out stream. Returns the best-on-validation mask set and the full
/// table. Cells run in parallel; every cell has its own RNG stream, so the
/// result does not depend on scheduling.
pub fn rc_baseline(
    task: &TaskSpec,
    rcfg: &ReservoirConfig,
    grid: &RcGrid,
) -> Result<(MaskSet, RcReport)> {
    task.validate()?;
    rcfg.validate()?;
    grid.validate()?;

    let mut cells = Vec::new();
    for &mu in &grid.mu {
        for &input_scale in &grid.input_scale {
            for &bias_scale in &grid.bias_scale {
                cells.push((mu, input_scale, bias_scale));
            }
        }
    }
    let mut jobs = Vec::new();
    for (ci, &cell) in cells.iter().enumerate() {
        for &seed in &grid.seeds {
            jobs.push((ci, cell, seed));
        }
    }

    let results: Vec<Result<(RcRow, MaskSet)>> = jobs
        .par_iter()
        .map(|&(ci, (mu, input_scale, bias_scale), seed)| {
            let mut cfg = rcfg.clone();
            cfg.feedback_gain = mu;
            rc_cell(
                task,
                &cfg,
                grid,
                ci,
                mu,
                input_scale,
                bias_scale,
                seed,
            )
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut mask_sets = Vec::with_capacity(results.len());
    for r in results {
        let (row, masks) = r?;
        rows.push(row);
        mask_sets.push(masks);
    }

    let mut summaries = Vec::new();
    for &(mu, input_scale, bias_scale) in &cells {
        let cell_rows: Vec<&RcRow> = rows
            .iter()
            .filter(|r| r.mu == mu && r.input_scale == input_scale && r.bias_scale == bias_scale)
            .collect();
        let stats = |take: &dyn Fn(&RcRow) -> f64| -> (f64, f64) {
            let vals: Vec<f64> = cell_rows.iter().map(|r| take(r)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            (mean, var.sqrt())
        };
        let (val_mean, val_std) = stats(&|r| r.val_metric);
        let (test_mean, test_std) = stats(&|r| r.test_metric);
        summaries.push(RcCellSummary {
            mu,
            input_scale,
            bias_scale,
            val_mean,
            val_std,
            test_mean,
            test_std,
        });
    }

    let best_row = rows
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.val_metric.total_cmp(&b.val_metric))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidConfig("empty grid".into()))?;
    let best_masks = mask_sets.swap_remove(best_row);
    Ok((
        best_masks,
        RcReport {
            rows,
            summaries,
            best_row,
        },
    ))
}

/// States and standardized targets of a freshly drawn sequence, with the
/// washout rows dropped.
fn rc_states(
    task: &TaskSpec,
    cfg: &ReservoirConfig,
    masks: &MaskSet,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>)> {
    let mut seq = task.generate(length, rng);
    standardize_targets(&mut seq, task);
    let z = apply_input_mask(&seq, masks)?;
    let a = simulate_forward(&z, cfg)?;
    let n_t = cfg.n_virtual_nodes;
    let washout = EVAL_WASHOUT.min(length.saturating_sub(1));
    let states: Vec<Vec<f64>> = (washout..length)
        .map(|i| a.values()[i * n_t..(i + 1) * n_t].to_vec())
        .collect();
    let (targets, labels) = match &seq.targets {
        Targets::Regression(t) => (t[washout..].to_vec(), Vec::new()),
        Targets::Labels { labels, classes } => {
            // one-hot regression targets for the least-squares readout
            let onehot = labels[washout..]
                .iter()
                .map(|&l| {
                    let mut row = vec![0.0; *classes];
                    row[l] = 1.0;
                    row
                })
                .collect();
            (onehot, labels[washout..].to_vec())
        }
    };
    Ok((states, targets, labels))
}

fn rc_metric(
    task: &TaskSpec,
    states: &[Vec<f64>],
    targets: &[Vec<f64>],
    labels: &[usize],
    w: &(Vec<Vec<f64>>, Vec<f64>),
) -> Result<f64> {
    let outputs: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            w.0.iter()
                .zip(&w.1)
                .map(|(row, b)| b + row.iter().zip(s).map(|(w, s)| w * s).sum::<f64>())
                .collect()
        })
        .collect();
    if task.is_classification() {
        classification_error_rate(&outputs, labels)
    } else {
        let y: Vec<f64> = outputs.iter().map(|r| r[0]).collect();
        let t: Vec<f64> = targets.iter().map(|r| r[0]).collect();
        nrmse(&y, &t)
    }
}

#[allow(clippy::too_many_arguments)]
fn rc_cell(
    task: &TaskSpec,
    cfg: &ReservoirConfig,
    grid: &RcGrid,
    cell_index: usize,
    mu: f64,
    input_scale: f64,
    bias_scale: f64,
    seed: u64,
) -> Result<(RcRow, MaskSet)> {
    let n_t = cfg.n_virtual_nodes;
    let mut cell_rng = seeded(seed, streams::RC_CELL_BASE + cell_index as u64);
    let mut masks = MaskSet {
        input_masks: (0..task.channels)
            .map(|_| {
                (0..n_t)
                    .map(|_| (cell_rng.gen::<f64>() - 0.5) * input_scale)
                    .collect()
            })
            .collect(),
        bias_mask: (0..n_t)
            .map(|_| (cell_rng.gen::<f64>() - 0.5) * bias_scale)
            .collect(),
        output_masks: vec![vec![0.0; n_t]; task.classes],
        output_bias: vec![0.0; task.classes],
    };

    // common validation stream for fair cell/ridge selection
    let mut val_rng = seeded(seed, streams::RC_CELL_BASE - 1);
    let (val_states, val_targets, val_labels) =
        rc_states(task, cfg, &masks, grid.val_length, &mut val_rng)?;

    let mut train_len = grid.train_len_initial;
    let mut best: Option<(f64, f64, usize, (Vec<Vec<f64>>, Vec<f64>))> = None;
    loop {
        let (states, targets, _) = rc_states(task, cfg, &masks, train_len, &mut cell_rng)?;
        let mut round_best: Option<(f64, f64, (Vec<Vec<f64>>, Vec<f64>))> = None;
        for &ridge in &grid.ridge {
            let w = match lsq_readout(&states, &targets, ridge) {
                Ok(w) => w,
                Err(Error::SingularSystem) => continue,
                Err(e) => return Err(e),
            };
            let val = rc_metric(task, &val_states, &val_targets, &val_labels, &w)?;
            if round_best.as_ref().map_or(true, |(v, _, _)| val < *v) {
                round_best = Some((val, ridge, w));
            }
        }
        let (val, ridge, w) =
            round_best.ok_or(Error::SingularSystem)?;
        let improved = best
            .as_ref()
            .map_or(true, |(bv, _, _, _)| val < bv * 0.99);
        if improved {
            best = Some((val, ridge, train_len, w));
        }
        if !improved || train_len >= grid.train_len_max {
            break;
        }
        train_len = (train_len * 2).min(grid.train_len_max);
    }
    let (val_metric, ridge, train_len, w) = best.expect("at least one fit");
    masks.output_masks = w.0.clone();
    masks.output_bias = w.1.clone();

    // held-out test on the seed's shared evaluation stream
    let mut test_rng = seeded(seed, streams::EVAL);
    let (test_states, test_targets, test_labels) =
        rc_states(task, cfg, &masks, grid.test_length, &mut test_rng)?;
    let test_metric = rc_metric(task, &test_states, &test_targets, &test_labels, &w)?;

    Ok((
        RcRow {
            mu,
            input_scale,
            bias_scale,
            seed,
            ridge,
            train_len,
            val_metric,
            test_metric,
        },
        masks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{StepTrace, TraceRole};
    use crate::tasks::CostKind;

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            iterations: 10_000,
            seq_length: 100,
            lr_initial: 0.25,
            momentum: 0.9,
            seed: 1,
            eval_length: 500,
            eval_every: 1000,
        }
    }

    #[test]
    fn lr_schedule_endpoints() {
        let cfg = small_cfg();
        assert_eq!(lr_schedule(0, &cfg), 0.25);
        assert!((lr_schedule(5000, &cfg) - 0.125).abs() < 1e-15);
        let last = lr_schedule(9999, &cfg);
        assert!((last - 0.25 / 10_000.0).abs() < 1e-12);
        assert!(last > 0.0);
    }

    fn scalar_masks(theta: f64) -> MaskSet {
        let mut m = MaskSet::zeros(1, 1, 1);
        m.input_masks[0][0] = theta;
        m
    }

    fn scalar_grad(g: f64) -> GradientSet {
        let mut gs = GradientSet::zeros_like(&scalar_masks(0.0));
        gs.d_input_masks[0][0] = g;
        gs
    }

    #[test]
    fn nesterov_hand_example() {
        // theta=1, v=0, g=2, eta=0.1, m=0.9 -> v=-0.2, theta=0.8;
        // next g=1 -> v=-0.28, theta=0.52
        let mut masks = scalar_masks(1.0);
        let mut state = OptimizerState::new(&masks);
        nesterov_step(&mut masks, &mut state, &scalar_grad(2.0), 0.1, 0.9);
        assert!((state.velocity.d_input_masks[0][0] + 0.2).abs() < 1e-15);
        assert!((masks.input_masks[0][0] - 0.8).abs() < 1e-15);
        nesterov_step(&mut masks, &mut state, &scalar_grad(1.0), 0.1, 0.9);
        assert!((state.velocity.d_input_masks[0][0] + 0.28).abs() < 1e-15);
        assert!((masks.input_masks[0][0] - 0.52).abs() < 1e-15);
        assert_eq!(state.iteration, 2);
    }

    #[test]
    fn nesterov_zero_momentum_is_plain_sgd() {
        let mut masks = scalar_masks(0.7);
        let mut state = OptimizerState::new(&masks);
        nesterov_step(&mut masks, &mut state, &scalar_grad(3.0), 0.05, 0.0);
        assert!((masks.input_masks[0][0] - (0.7 - 0.05 * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn nesterov_quadratic_converges_in_50_steps() {
        // C = theta^2/2, gradient evaluated at the lookahead point
        let (eta, mom) = (0.2, 0.9);
        let mut masks = scalar_masks(1.0);
        let mut state = OptimizerState::new(&masks);
        for _ in 0..50 {
            let lookahead =
                masks.input_masks[0][0] + mom * state.velocity.d_input_masks[0][0];
            nesterov_step(&mut masks, &mut state, &scalar_grad(lookahead), eta, mom);
        }
        assert!(
            masks.input_masks[0][0].abs() < 1e-3,
            "theta = {}",
            masks.input_masks[0][0]
        );
    }

    #[test]
    fn adjoint_matches_finite_differences() {
        // the oracle cross-check on a batch of random small instances
        let mut worst = 0.0f64;
        for (seed, n_t, l, k, p, classify) in [
            (1u64, 8usize, 5usize, 1usize, 1usize, false),
            (2, 4, 3, 3, 2, false),
            (3, 8, 5, 2, 3, true),
            (4, 1, 1, 1, 1, false),
        ] {
            let (seq, masks, rcfg, cost) = random_instance(seed, n_t, l, k, p, classify);
            let adj = full_gradient(&seq, &masks, &rcfg, cost, None)
                .unwrap()
                .grads;
            let fd = finite_diff_gradient(&seq, &masks, &rcfg, cost, 1e-6).unwrap();
            worst = worst.max(max_rel_error(&adj, &fd));
        }
        assert!(worst < 1e-6, "max rel err {worst}");
    }

    fn random_instance(
        seed: u64,
        n_t: usize,
        l: usize,
        k: usize,
        p: usize,
        classify: bool,
    ) -> (SequencePair, MaskSet, ReservoirConfig, CostKind) {
        gradcheck_instance(seed, n_t, l, k, p, classify)
    }

    #[test]
    fn fd_zero_input_sequence_zeroes_input_gradients() {
        let (mut seq, masks, rcfg, cost) = random_instance(5, 4, 3, 2, 1, false);
        for row in &mut seq.inputs {
            row.fill(0.0);
        }
        let fd = finite_diff_gradient(&seq, &masks, &rcfg, cost, 1e-6).unwrap();
        assert!(fd.d_input_masks.iter().flatten().all(|&v| v == 0.0));
        let adj = full_gradient(&seq, &masks, &rcfg, cost, None)
            .unwrap()
            .grads;
        assert!(adj.d_input_masks.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn error_scale_round_trip_keeps_gradients() {
        // hardware full_gradient with two different error scales, noise-free
        // linear backward: identical gradients after internal unscaling
        let (seq, masks, _, cost) = random_instance(6, 6, 4, 1, 1, false);
        let mut grads = Vec::new();
        for scale in [0.1, 0.7] {
            let mut rcfg = ReservoirConfig::ideal(6, 0.9);
            rcfg.fidelity = Fidelity::Hardware;
            rcfg.hardware = crate::hardware::HardwareParams {
                error_scale: scale,
                ..crate::hardware::HardwareParams::ideal_limit()
            };
            let mut rng = seeded(9, 0);
            let out = full_gradient(
                &seq,
                &masks,
                &rcfg,
                cost,
                Some(HwMeasurement {
                    bias_offset: 0.0,
                    rng: &mut rng,
                }),
            )
            .unwrap();
            grads.push(out.grads);
        }
        assert!(max_rel_error(&grads[0], &grads[1]) < 1e-12);
    }

    #[test]
    fn lsq_exact_recovery_on_consistent_system() {
        let mut rng = seeded(21, 0);
        let (rows, n, p) = (60, 5, 2);
        let w_true: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect();
        let b_true: Vec<f64> = (0..p).map(|_| rng.gen::<f64>() - 0.5).collect();
        let states: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let targets: Vec<Vec<f64>> = states
            .iter()
            .map(|s| {
                (0..p)
                    .map(|l| {
                        b_true[l] + s.iter().zip(&w_true[l]).map(|(s, w)| s * w).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        let (wm, wb) = lsq_readout(&states, &targets, 0.0).unwrap();
        let mut resid = 0.0f64;
        for (s, t) in states.iter().zip(&targets) {
            for l in 0..p {
                let y = wb[l] + s.iter().zip(&wm[l]).map(|(s, w)| s * w).sum::<f64>();
                resid = resid.max((y - t[l]).abs());
            }
        }
        assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn lsq_zero_states_yield_target_means() {
        let states = vec![vec![0.0; 3]; 10];
        let targets: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let (wm, wb) = lsq_readout(&states, &targets, 1e-6).unwrap();
        assert!(wm[0].iter().all(|&v| v.abs() < 1e-12));
        assert!((wb[0] - 4.5).abs() < 1e-9);
        // and with ridge = 0 the normal matrix is singular
        assert!(matches!(
            lsq_readout(&states, &targets, 0.0),
            Err(Error::SingularSystem)
        ));
    }

    #[test]
    fn lsq_matches_naive_normal_equations() {
        // independent oracle: explicit normal equations solved by
        // Gauss-Jordan elimination
        let mut rng = seeded(23, 0);
        let (rows, n, p) = (40, 4, 2);
        let states: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..p).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let ridge = 1e-4;
        let dim = n + 1;
        let mut g = vec![vec![0.0; dim]; dim];
        let mut b = vec![vec![0.0; p]; dim];
        for (s, t) in states.iter().zip(&targets) {
            let mut x = s.clone();
            x.push(1.0);
            for i in 0..dim {
                for j in 0..dim {
                    g[i][j] += x[i] * x[j];
                }
                for l in 0..p {
                    b[i][l] += x[i] * t[l];
                }
            }
        }
        for i in 0..n {
            g[i][i] += ridge;
        }
        // Gauss-Jordan with partial pivoting
        for col in 0..dim {
            let piv = (col..dim)
                .max_by(|&a, &bb| g[a][col].abs().total_cmp(&g[bb][col].abs()))
                .unwrap();
            g.swap(col, piv);
            b.swap(col, piv);
            let d = g[col][col];
            for j in 0..dim {
                g[col][j] /= d;
            }
            for l in 0..p {
                b[col][l] /= d;
            }
            for row in 0..dim {
                if row != col {
                    let f = g[row][col];
                    for j in 0..dim {
                        g[row][j] -= f * g[col][j];
                    }
                    for l in 0..p {
                        b[row][l] -= f * b[col][l];
                    }
                }
            }
        }
        let (wm, wb) = lsq_readout(&states, &targets, ridge).unwrap();
        for l in 0..p {
            for i in 0..n {
                assert!((wm[l][i] - b[i][l]).abs() < 1e-9);
            }
            assert!((wb[l] - b[n][l]).abs() < 1e-9);
        }
    }

    #[test]
    fn lsq_normal_equation_residual_small() {
        let mut rng = seeded(27, 0);
        let (rows, n, p) = (50, 6, 1);
        let states: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..p).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let ridge = 1e-6;
        let (wm, wb) = lsq_readout(&states, &targets, ridge).unwrap();
        // residual of A^T (A w - y) + ridge * w~ (bias row unregularized)
        let dim = n + 1;
        let mut atay = vec![0.0; dim];
        let mut resid = vec![0.0; dim];
        for (s, t) in states.iter().zip(&targets) {
            let mut x = s.clone();
            x.push(1.0);
            let y = wb[0] + s.iter().zip(&wm[0]).map(|(s, w)| s * w).sum::<f64>();
            for i in 0..dim {
                resid[i] += x[i] * (y - t[0]);
                atay[i] += x[i] * t[0];
            }
        }
        for i in 0..n {
            resid[i] += ridge * wm[0][i];
        }
        let rn = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        let an = atay.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rn < 1e-8 * an, "residual {rn} vs {an}");
    }

    #[test]
    fn train_zero_iterations_returns_init() {
        let task = TaskSpec::vardel5();
        let rcfg = ReservoirConfig::ideal(8, 1.0);
        let init = init_masks(&task, &rcfg, 3).unwrap();
        let cfg = TrainConfig {
            iterations: 0,
            seq_length: 20,
            lr_initial: 0.01,
            momentum: 0.9,
            seed: 3,
            eval_length: 100,
            eval_every: 10,
        };
        let (masks, log) = train_bp(&task, &cfg, &rcfg, init.clone()).unwrap();
        assert_eq!(masks, init);
        assert!(log.rows.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let task = TaskSpec::vardel5();
        let rcfg = ReservoirConfig::ideal(6, 1.0);
        let cfg = TrainConfig {
            iterations: 40,
            seq_length: 30,
            lr_initial: 0.01,
            momentum: 0.9,
            seed: 7,
            eval_length: 200,
            eval_every: 20,
        };
        let run = || {
            let init = init_masks(&task, &rcfg, cfg.seed).unwrap();
            train_bp(&task, &cfg, &rcfg, init).unwrap()
        };
        let (m1, l1) = run();
        let (m2, l2) = run();
        assert_eq!(m1, m2);
        assert_eq!(l1, l2);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let task = TaskSpec::vardel5();
        let rcfg = ReservoirConfig::ideal(6, 1.0);
        let cfg = TrainConfig {
            iterations: 30,
            seq_length: 25,
            lr_initial: 0.01,
            momentum: 0.9,
            seed: 11,
            eval_length: 150,
            eval_every: 15,
        };
        let init = init_masks(&task, &rcfg, cfg.seed).unwrap();

        let (full, _) = train_bp(&task, &cfg, &rcfg, init.clone()).unwrap();

        let mut first =
            BpTrainer::new(task.clone(), cfg.clone(), rcfg.clone(), init).unwrap();
        for _ in 0..15 {
            first.step().unwrap();
        }
        let mut resumed = BpTrainer::from_parts(
            task,
            cfg,
            rcfg,
            first.masks().clone(),
            first.state().clone(),
            first.rngs().clone(),
            first.drift().clone(),
        )
        .unwrap();
        while !resumed.finished() {
            resumed.step().unwrap();
        }
        assert_eq!(resumed.masks(), &full);
    }

    #[test]
    fn hardware_training_is_deterministic_too() {
        let task = TaskSpec::vardel5();
        let mut rcfg = ReservoirConfig::ideal(6, 1.0);
        rcfg.fidelity = Fidelity::Hardware;
        let cfg = TrainConfig {
            iterations: 20,
            seq_length: 20,
            lr_initial: 0.01,
            momentum: 0.9,
            seed: 13,
            eval_length: 120,
            eval_every: 10,
        };
        let run = || {
            let init = init_masks(&task, &rcfg, cfg.seed).unwrap();
            train_bp(&task, &cfg, &rcfg, init).unwrap()
        };
        assert_eq!(run().0, run().0);
    }

    #[test]
    fn evaluate_zero_masks_scores_one() {
        // zero output masks and bias -> zero predictor -> NRMSE exactly 1
        let task = TaskSpec::narma10();
        let rcfg = ReservoirConfig::ideal(8, 1.0);
        let mut masks = init_masks(&task, &rcfg, 5).unwrap();
        for row in &mut masks.output_masks {
            row.fill(0.0);
        }
        masks.output_bias.fill(0.0);
        let m = evaluate_masks(&task, &masks, &rcfg, 400, 5).unwrap();
        assert_eq!(m, 1.0);
    }

    #[test]
    fn rc_single_cell_single_seed_one_row() {
        let task = TaskSpec::narma10();
        let rcfg = ReservoirConfig::ideal(10, 0.9);
        let grid = RcGrid {
            mu: vec![0.9],
            input_scale: vec![0.3],
            bias_scale: vec![0.3],
            ridge: vec![1e-6],
            seeds: vec![1],
            train_len_initial: 300,
            train_len_max: 600,
            val_length: 300,
            test_length: 300,
        };
        let (masks, report) = rc_baseline(&task, &rcfg, &grid).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.summaries.len(), 1);
        assert_eq!(masks.output_masks.len(), 1);
        assert!(report.best().test_metric.is_finite());
    }

    #[test]
    fn rc_report_is_deterministic_under_parallelism() {
        let task = TaskSpec::vardel5();
        let rcfg = ReservoirConfig::ideal(8, 0.9);
        let grid = RcGrid {
            mu: vec![0.7, 0.9],
            input_scale: vec![0.3, 1.0],
            bias_scale: vec![0.3],
            ridge: vec![1e-6, 1e-4],
            seeds: vec![1, 2],
            train_len_initial: 200,
            train_len_max: 400,
            val_length: 200,
            test_length: 200,
        };
        let (_, r1) = rc_baseline(&task, &rcfg, &grid).unwrap();
        let (_, r2) = rc_baseline(&task, &rcfg, &grid).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn trace_roles_are_preserved_through_the_pipeline() {
        let (seq, masks, rcfg, _) = random_instance(31, 4, 3, 1, 1, false);
        let z = apply_input_mask(&seq, &masks).unwrap();
        assert_eq!(z.role(), TraceRole::Drive);
        let a = simulate_forward(&z, &rcfg).unwrap();
        assert_eq!(a.role(), TraceRole::State);
        let _ = StepTrace::new(vec![0.0], TraceRole::Jacobian).unwrap();
    }
}
