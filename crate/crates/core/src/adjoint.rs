//! Backward (adjoint) pass through the delay system and assembly of the
//! mask gradients.
//!
//! The cost gradients are exact for the discrete model: the backward
//! recurrence is the chain rule of the forward recurrence, so the only
//! discrepancy against central finite differences is floating-point noise.
//! The multiplicative factor pairs the one-delay-old state with the current
//! drive — exactly the argument the forward nonlinearity saw at that step —
//! and the injected error enters the bracket at the current step:
//!
//! ```text
//! G[n] = mu * cos(a[n - N_D] + z[n])
//! e[n] = G[n] * (ebar[n] + e[n + N_D])        (out-of-range reads are 0)
//! ```
//!
//! `e[n]` is then `dC/dz[n]`, certified against finite differences in the
//! test suites.

use crate::error::{Error, Result};
use crate::hardware::{self, HwMeasurement};
use crate::signal::{
    apply_input_mask, apply_output_mask, mask_error, time_invert, Fidelity, MaskSet,
    ReservoirConfig, SequencePair, StepTrace, TraceRole,
};
use crate::tasks::{cost_and_error, CostKind};
use crate::dynamics;
use serde::{Deserialize, Serialize};

/// Cost gradients, shape-congruent with the [`MaskSet`] they differentiate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSet {
    pub d_input_masks: Vec<Vec<f64>>,
    pub d_bias_mask: Vec<f64>,
    pub d_output_masks: Vec<Vec<f64>>,
    pub d_output_bias: Vec<f64>,
}

impl GradientSet {
    pub fn zeros_like(masks: &MaskSet) -> Self {
        GradientSet {
            d_input_masks: vec![vec![0.0; masks.n_nodes()]; masks.input_channels()],
            d_bias_mask: vec![0.0; masks.n_nodes()],
            d_output_masks: vec![vec![0.0; masks.n_nodes()]; masks.output_channels()],
            d_output_bias: vec![0.0; masks.output_channels()],
        }
    }

    pub fn congruent_with(&self, masks: &MaskSet) -> bool {
        self.d_input_masks.len() == masks.input_channels()
            && self.d_bias_mask.len() == masks.n_nodes()
            && self.d_output_masks.len() == masks.output_channels()
            && self.d_output_bias.len() == masks.output_bias.len()
            && self
                .d_input_masks
                .iter()
                .chain(self.d_output_masks.iter())
                .all(|row| row.len() == masks.n_nodes())
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.iter_mut() {
            *v *= c;
        }
    }

    /// `self += c * other`, entry-wise.
    pub fn add_scaled(&mut self, other: &GradientSet, c: f64) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.d_input_masks
            .iter()
            .flatten()
            .chain(self.d_bias_mask.iter())
            .chain(self.d_output_masks.iter().flatten())
            .chain(self.d_output_bias.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.d_input_masks
            .iter_mut()
            .flatten()
            .chain(self.d_bias_mask.iter_mut())
            .chain(self.d_output_masks.iter_mut().flatten())
            .chain(self.d_output_bias.iter_mut())
    }
}

impl MaskSet {
    /// `self += c * g`, entry-wise. Used by the optimizer.
    pub fn add_scaled(&mut self, g: &GradientSet, c: f64) {
        for (m, d) in self
            .input_masks
            .iter_mut()
            .flatten()
            .chain(self.bias_mask.iter_mut())
            .chain(self.output_masks.iter_mut().flatten())
            .chain(self.output_bias.iter_mut())
            .zip(g.iter())
        {
            *m += c * d;
        }
    }
}

/// Multiplicative backward factor `G[n] = mu * cos(a[n - N_D] + z[n])`.
pub fn jacobian_trace(a: &StepTrace, z: &StepTrace, cfg: &ReservoirConfig) -> Result<StepTrace> {
    if a.len() != z.len() {
        return Err(Error::dim("jacobian traces", z.len(), a.len()));
    }
    let n_d = cfg.delay_steps();
    let mu = cfg.feedback_gain;
    let av = a.values();
    let g = z
        .values()
        .iter()
        .enumerate()
        .map(|(n, &zn)| {
            let prev = if n >= n_d { av[n - n_d] } else { 0.0 };
            mu * (prev + zn).cos()
        })
        .collect();
    Ok(StepTrace::new_unchecked(g, TraceRole::Jacobian))
}

/// Backward error recurrence `e[n] = G[n] * (ebar[n] + e[n + N_D])`, solved
/// from the last step down; `e` and `ebar` are zero beyond the trace. The
/// result is `dC/dz` step by step.
pub fn backward_pass(g: &StepTrace, ebar: &StepTrace, cfg: &ReservoirConfig) -> Result<StepTrace> {
    if g.len() != ebar.len() {
        return Err(Error::dim("backward traces", ebar.len(), g.len()));
    }
    let n_d = cfg.delay_steps();
    let gv = g.values();
    let bv = ebar.values();
    let total = gv.len();
    let mut e = vec![0.0; total];
    for n in (0..total).rev() {
        let ahead = if n + n_d < total { e[n + n_d] } else { 0.0 };
        e[n] = gv[n] * (bv[n] + ahead);
    }
    Ok(StepTrace::new_unchecked(e, TraceRole::BackpropError))
}

/// Input-mask gradients from the backpropagated error:
/// `dC/dm_k[r] = sum_i s_i[k] e[(i-1)N_T + r]`,
/// `dC/dm_b[r] = sum_i e[(i-1)N_T + r]`.
pub fn grad_input_masks(
    e: &StepTrace,
    seq: &SequencePair,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let l = seq.len();
    if l == 0 || e.len() % l != 0 {
        return Err(Error::dim("error trace length", l, e.len()));
    }
    let n_t = e.len() / l;
    let k = seq.channels();
    let mut dm = vec![vec![0.0; n_t]; k];
    let mut dmb = vec![0.0; n_t];
    for (i, s) in seq.inputs.iter().enumerate() {
        let seg = &e.values()[i * n_t..(i + 1) * n_t];
        for r in 0..n_t {
            dmb[r] += seg[r];
            for ch in 0..k {
                dm[ch][r] += s[ch] * seg[r];
            }
        }
    }
    Ok((dm, dmb))
}

/// Output-mask gradients from the per-output cost derivatives and the state:
/// `dC/du_l[r] = sum_i err_i[l] a[(i-1)N_T + r]`,
/// `dC/du_b[l] = sum_i err_i[l]`.
pub fn grad_output_masks(
    output_error: &[Vec<f64>],
    a: &StepTrace,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let l = output_error.len();
    if l == 0 || a.len() % l != 0 {
        return Err(Error::dim("state trace length", l, a.len()));
    }
    let n_t = a.len() / l;
    let p = output_error.first().map_or(0, Vec::len);
    let mut du = vec![vec![0.0; n_t]; p];
    let mut dub = vec![0.0; p];
    for (i, err) in output_error.iter().enumerate() {
        if err.len() != p {
            return Err(Error::dim("output error width", p, err.len()));
        }
        let seg = &a.values()[i * n_t..(i + 1) * n_t];
        for (ch, &e) in err.iter().enumerate() {
            dub[ch] += e;
            for r in 0..n_t {
                du[ch][r] += e * seg[r];
            }
        }
    }
    Ok((du, dub))
}

/// Everything the forward/backward sweep produces.
#[derive(Debug, Clone)]
pub struct GradientOutput {
    pub grads: GradientSet,
    pub cost: f64,
    /// `L x P` network outputs.
    pub outputs: Vec<Vec<f64>>,
}

/// Run the full pipeline on one sequence: mask the input, simulate, read
/// out, score, mask the error, run the backward pass, assemble gradients.
///
/// With `Hardware` fidelity the forward and backward traces come from the
/// hardware model instead: the injected error is scaled to the modulator's
/// linear regime, the backward measurement is bias-corrected by a second
/// zero-input pass at the same frozen bias offset, and the recorded error
/// is unscaled before gradient assembly. `hw` carries the per-iteration
/// measurement state (frozen offset, noise RNG) and must be given exactly
/// for hardware fidelity.
pub fn full_gradient(
    seq: &SequencePair,
    masks: &MaskSet,
    cfg: &ReservoirConfig,
    cost: CostKind,
    hw: Option<HwMeasurement<'_>>,
) -> Result<GradientOutput> {
    masks.validate()?;
    seq.validate()?;
    let z = apply_input_mask(seq, masks)?;
    match (cfg.fidelity, hw) {
        (Fidelity::Ideal, None) => {
            let a = dynamics::simulate_forward(&z, cfg)?;
            let y = apply_output_mask(&a, masks)?;
            let (cost, output_error) = cost_and_error(cost, &y, &seq.targets)?;
            let ebar = mask_error(&output_error, masks)?;
            let g = jacobian_trace(&a, &z, cfg)?;
            let e = backward_pass(&g, &ebar, cfg)?;
            assemble(seq, masks, &a, &e, &output_error, cost, y)
        }
        (Fidelity::Hardware, Some(hw)) => {
            let a = hardware::forward_hardware(&z, cfg, hw.rng)?;
            let y = apply_output_mask(&a, masks)?;
            let (cost, output_error) = cost_and_error(cost, &y, &seq.targets)?;
            let ebar = mask_error(&output_error, masks)?;
            let (ebar_scaled, factor) = hardware::scale_error(&ebar, &cfg.hardware);
            let e_inv = hardware::bias_corrected_backward(
                &time_invert(&a),
                &time_invert(&z),
                &time_invert(&ebar_scaled),
                cfg,
                hw.bias_offset,
                hw.rng,
            )?;
            let mut e = time_invert(&e_inv).into_values();
            for v in &mut e {
                *v /= factor;
            }
            let e = StepTrace::new_unchecked(e, TraceRole::BackpropError);
            assemble(seq, masks, &a, &e, &output_error, cost, y)
        }
        (Fidelity::Ideal, Some(_)) => Err(Error::InvalidConfig(
            "hardware measurement supplied for ideal fidelity".into(),
        )),
        (Fidelity::Hardware, None) => Err(Error::InvalidConfig(
            "hardware fidelity needs a measurement context".into(),
        )),
    }
}

fn assemble(
    seq: &SequencePair,
    masks: &MaskSet,
    a: &StepTrace,
    e: &StepTrace,
    output_error: &[Vec<f64>],
    cost: f64,
    outputs: Vec<Vec<f64>>,
) -> Result<GradientOutput> {
    let (d_input_masks, d_bias_mask) = grad_input_masks(e, seq)?;
    let (d_output_masks, d_output_bias) = grad_output_masks(output_error, a)?;
    let grads = GradientSet {
        d_input_masks,
        d_bias_mask,
        d_output_masks,
        d_output_bias,
    };
    if !grads.is_finite() || !cost.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    debug_assert!(grads.congruent_with(masks));
    Ok(GradientOutput {
        grads,
        cost,
        outputs,
    })
}
