//! Checkpoint container: versioned, self-describing JSON. Mask and
//! optimizer arrays are stored as base64 of their little-endian f64 bytes,
//! so the round trip is bit-exact; RNG states serialize through serde.

use crate::config::Experiment;
use anyhow::{bail, Context};
use base64::Engine;
use optoback_core::hardware::BiasDrift;
use optoback_core::{GradientSet, MaskSet, OptimizerState, TrainerRngs};
use serde::{Deserialize, Serialize};
use std::path::Path;

const FORMAT_VERSION: u32 = 1;
const ENDIANNESS: &str = "little";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// Byte order of the encoded f64 arrays. Always written as "little";
    /// anything else is rejected on load.
    pub endianness: String,
    pub config: Experiment,
    pub iteration: usize,
    pub masks: MaskArrays,
    #[serde(default)]
    pub velocity: Option<MaskArrays>,
    #[serde(default)]
    pub rngs: Option<TrainerRngs>,
    #[serde(default)]
    pub drift: Option<BiasDrift>,
}

/// Base64-encoded little-endian f64 arrays in mask-set shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskArrays {
    pub input_masks: Vec<String>,
    pub bias_mask: String,
    pub output_masks: Vec<String>,
    pub output_bias: String,
}

fn encode(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn decode(text: &str) -> anyhow::Result<Vec<f64>> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(text)
        .context("invalid base64 array")?;
    if bytes.len() % 8 != 0 {
        bail!("array byte length {} is not a multiple of 8", bytes.len());
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl MaskArrays {
    pub fn from_masks(m: &MaskSet) -> Self {
        MaskArrays {
            input_masks: m.input_masks.iter().map(|r| encode(r)).collect(),
            bias_mask: encode(&m.bias_mask),
            output_masks: m.output_masks.iter().map(|r| encode(r)).collect(),
            output_bias: encode(&m.output_bias),
        }
    }

    pub fn from_gradient(g: &GradientSet) -> Self {
        MaskArrays {
            input_masks: g.d_input_masks.iter().map(|r| encode(r)).collect(),
            bias_mask: encode(&g.d_bias_mask),
            output_masks: g.d_output_masks.iter().map(|r| encode(r)).collect(),
            output_bias: encode(&g.d_output_bias),
        }
    }

    pub fn to_masks(&self) -> anyhow::Result<MaskSet> {
        Ok(MaskSet {
            input_masks: self
                .input_masks
                .iter()
                .map(|r| decode(r))
                .collect::<anyhow::Result<_>>()?,
            bias_mask: decode(&self.bias_mask)?,
            output_masks: self
                .output_masks
                .iter()
                .map(|r| decode(r))
                .collect::<anyhow::Result<_>>()?,
            output_bias: decode(&self.output_bias)?,
        })
    }

    pub fn to_gradient(&self) -> anyhow::Result<GradientSet> {
        let m = self.to_masks()?;
        Ok(GradientSet {
            d_input_masks: m.input_masks,
            d_bias_mask: m.bias_mask,
            d_output_masks: m.output_masks,
            d_output_bias: m.output_bias,
        })
    }
}

impl Checkpoint {
    /// Checkpoint of a live training run.
    pub fn of_trainer(
        config: &Experiment,
        masks: &MaskSet,
        state: &OptimizerState,
        rngs: &TrainerRngs,
        drift: &BiasDrift,
    ) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            endianness: ENDIANNESS.into(),
            config: config.clone(),
            iteration: state.iteration,
            masks: MaskArrays::from_masks(masks),
            velocity: Some(MaskArrays::from_gradient(&state.velocity)),
            rngs: Some(rngs.clone()),
            drift: Some(drift.clone()),
        }
    }

    /// Checkpoint holding only masks (the RC baseline result).
    pub fn of_masks(config: &Experiment, masks: &MaskSet) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            endianness: ENDIANNESS.into(),
            config: config.clone(),
            iteration: 0,
            masks: MaskArrays::from_masks(masks),
            velocity: None,
            rngs: None,
            drift: None,
        }
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self).context("encoding checkpoint")?;
        std::fs::write(path, json)
            .with_context(|| format!("writing checkpoint {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading checkpoint {}", path.display()))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .with_context(|| format!("parsing checkpoint {}", path.display()))?;
        if ckpt.format_version != FORMAT_VERSION {
            bail!(
                "checkpoint format version {} (expected {})",
                ckpt.format_version,
                FORMAT_VERSION
            );
        }
        if ckpt.endianness != ENDIANNESS {
            bail!("checkpoint endianness '{}' unsupported", ckpt.endianness);
        }
        Ok(ckpt)
    }
}
