//! Discretization contract: masks, step signals, and the conversions between
//! discrete task sequences and piecewise-constant step traces.
//!
//! Time is measured in masking steps. One masking period holds `N_T` steps
//! (the virtual nodes); the loop delay is `N_D = N_T + 1` steps, one more
//! than the period, which is what shifts state by one node per period and
//! mixes the nodes over time. Sequence index `i` (1-based in the math) and
//! node index `r` map to the flat step index `n = (i-1)*N_T + r`; storage is
//! 0-based throughout. All signals here are piecewise constant by
//! construction, so one sample per masking step is exact.

use crate::error::{Error, Result};
use crate::hardware::HardwareParams;
use serde::{Deserialize, Serialize};

/// What a step trace represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceRole {
    /// Masked input drive `z`.
    Drive,
    /// Reservoir state `a` (the response co-indexed with the drive).
    State,
    /// Masked cost derivative injected into the backward pass (`ebar`).
    InjectedError,
    /// Backpropagated error `e = dC/dz`.
    BackpropError,
    /// Multiplicative backward factor `G = mu*cos(.)`.
    Jacobian,
}

/// A piecewise-constant signal sampled once per masking step, covering the
/// active window `[0, L*N_T)`. The zero history before the window and the
/// zero extension after it are implicit: the recurrences treat out-of-range
/// reads as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    values: Vec<f64>,
    role: TraceRole,
}

impl StepTrace {
    pub fn new(values: Vec<f64>, role: TraceRole) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("step trace"));
        }
        Ok(StepTrace { values, role })
    }

    /// Construct without the finiteness scan. For trusted internal producers.
    pub(crate) fn new_unchecked(values: Vec<f64>, role: TraceRole) -> Self {
        StepTrace { values, role }
    }

    pub fn role(&self) -> TraceRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The trainable parameters: per-channel input masks, bias mask, per-channel
/// output masks, output biases. All four agree on the number of virtual
/// nodes `N_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSet {
    /// `K x N_T` input masks, one row per input channel.
    pub input_masks: Vec<Vec<f64>>,
    /// `N_T` bias mask.
    pub bias_mask: Vec<f64>,
    /// `P x N_T` output masks, one row per output channel.
    pub output_masks: Vec<Vec<f64>>,
    /// `P` output biases.
    pub output_bias: Vec<f64>,
}

impl MaskSet {
    /// All-zero masks with the given dimensions.
    pub fn zeros(input_channels: usize, output_channels: usize, n_nodes: usize) -> Self {
        MaskSet {
            input_masks: vec![vec![0.0; n_nodes]; input_channels],
            bias_mask: vec![0.0; n_nodes],
            output_masks: vec![vec![0.0; n_nodes]; output_channels],
            output_bias: vec![0.0; output_channels],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.bias_mask.len()
    }

    pub fn input_channels(&self) -> usize {
        self.input_masks.len()
    }

    pub fn output_channels(&self) -> usize {
        self.output_masks.len()
    }

    /// Check the shape and finiteness invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        for row in self.input_masks.iter().chain(self.output_masks.iter()) {
            if row.len() != n {
                return Err(Error::dim("mask row length", n, row.len()));
            }
        }
        if self.output_bias.len() != self.output_masks.len() {
            return Err(Error::dim(
                "output bias length",
                self.output_masks.len(),
                self.output_bias.len(),
            ));
        }
        let finite = self
            .input_masks
            .iter()
            .chain(self.output_masks.iter())
            .flatten()
            .chain(self.bias_mask.iter())
            .chain(self.output_bias.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("mask set"));
        }
        Ok(())
    }
}

/// Simulation fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    /// Exact arithmetic on the idealized delay equation.
    Ideal,
    /// Cascaded-MZM physics with configurable imperfections.
    Hardware,
}

/// Discretization and loop parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    /// Virtual nodes per masking period, `N_T`.
    pub n_virtual_nodes: usize,
    /// Total loop amplification `mu`.
    pub feedback_gain: f64,
    pub fidelity: Fidelity,
    /// Hardware model parameters; only read when `fidelity = Hardware`.
    pub hardware: HardwareParams,
}

impl ReservoirConfig {
    pub fn ideal(n_virtual_nodes: usize, feedback_gain: f64) -> Self {
        ReservoirConfig {
            n_virtual_nodes,
            feedback_gain,
            fidelity: Fidelity::Ideal,
            hardware: HardwareParams::default(),
        }
    }

    /// Loop delay in masking steps. Fixed at `N_T + 1`: the one-step
    /// desynchronization between delay and period is what couples node `r`
    /// of one period to node `r+1` of the next.
    pub fn delay_steps(&self) -> usize {
        self.n_virtual_nodes + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_virtual_nodes == 0 {
            return Err(Error::InvalidConfig(
                "n_virtual_nodes must be at least 1".into(),
            ));
        }
        if !self.feedback_gain.is_finite() {
            return Err(Error::NonFinite("feedback_gain"));
        }
        self.hardware.validate()
    }
}

/// Targets of a task instance: regression values or class labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `L x P` regression targets.
    Regression(Vec<Vec<f64>>),
    /// `L` class labels in `[0, classes)`.
    Labels { labels: Vec<usize>, classes: usize },
}

/// A discrete-time task instance: `L x K` inputs plus targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Targets,
}

impl SequencePair {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        match &self.targets {
            Targets::Regression(t) => t.first().map_or(0, Vec::len),
            Targets::Labels { classes, .. } => *classes,
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.targets, Targets::Labels { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidConfig("sequence length must be >= 1".into()));
        }
        let k = self.channels();
        for row in &self.inputs {
            if row.len() != k {
                return Err(Error::dim("input row length", k, row.len()));
            }
        }
        match &self.targets {
            Targets::Regression(t) => {
                if t.len() != self.inputs.len() {
                    return Err(Error::dim("target rows", self.inputs.len(), t.len()));
                }
                let p = self.output_dim();
                for row in t {
                    if row.len() != p {
                        return Err(Error::dim("target row length", p, row.len()));
                    }
                }
            }
            Targets::Labels { labels, classes } => {
                if labels.len() != self.inputs.len() {
                    return Err(Error::dim("label count", self.inputs.len(), labels.len()));
                }
                if labels.iter().any(|&l| l >= *classes) {
                    return Err(Error::InvalidConfig("label out of range".into()));
                }
            }
        }
        Ok(())
    }
}

/// Mask a discrete input sequence into the piecewise-constant drive:
/// `z[(i-1)*N_T + r] = sum_k s_i[k]*m_k[r] + m_b[r]`.
pub fn apply_input_mask(seq: &SequencePair, masks: &MaskSet) -> Result<StepTrace> {
    let k = masks.input_channels();
    if seq.channels() != k {
        return Err(Error::dim("input channels", k, seq.channels()));
    }
    let n_t = masks.n_nodes();
    let mut z = Vec::with_capacity(seq.len() * n_t);
    for s in &seq.inputs {
        for r in 0..n_t {
            let mut v = masks.bias_mask[r];
            for (ch, mask) in masks.input_masks.iter().enumerate() {
                v += s[ch] * mask[r];
            }
            z.push(v);
        }
    }
    StepTrace::new(z, TraceRole::Drive)
}

/// Read the state trace out through the output masks:
/// `y_i[l] = u_b[l] + sum_r a[(i-1)*N_T + r] * u_l[r]`.
///
/// The factor from the period integral is absorbed into the stored mask
/// values, so this is a plain dot product per period.
pub fn apply_output_mask(a: &StepTrace, masks: &MaskSet) -> Result<Vec<Vec<f64>>> {
    let n_t = masks.n_nodes();
    if a.len() % n_t != 0 || a.is_empty() {
        return Err(Error::dim("state trace length", n_t, a.len()));
    }
    let l = a.len() / n_t;
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let seg = &a.values()[i * n_t..(i + 1) * n_t];
        let row = masks
            .output_masks
            .iter()
            .zip(&masks.output_bias)
            .map(|(u, ub)| ub + seg.iter().zip(u).map(|(a, u)| a * u).sum::<f64>())
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Mask the per-output cost derivatives into the injected error signal:
/// `ebar[(i-1)*N_T + r] = sum_l u_l[r] * output_error[i][l]`.
///
/// The output masks are reused as input masks for the error sequence.
pub fn mask_error(output_error: &[Vec<f64>], masks: &MaskSet) -> Result<StepTrace> {
    let p = masks.output_channels();
    let n_t = masks.n_nodes();
    let mut ebar = Vec::with_capacity(output_error.len() * n_t);
    for err in output_error {
        if err.len() != p {
            return Err(Error::dim("output error width", p, err.len()));
        }
        for r in 0..n_t {
            let v = masks
                .output_masks
                .iter()
                .zip(err)
                .map(|(u, e)| u[r] * e)
                .sum();
            ebar.push(v);
        }
    }
    StepTrace::new(ebar, TraceRole::InjectedError)
}

/// Reverse a trace in time. Involutive; the role is preserved.
pub fn time_invert(t: &StepTrace) -> StepTrace {
    let mut values = t.values().to_vec();
    values.reverse();
    StepTrace::new_unchecked(values, t.role())
}
