//! Experiment configuration files (TOML). Unknown keys are hard errors so
//! typos cannot silently fall back to defaults.

use anyhow::{bail, Context};
use optoback_core::hardware::HardwareParams;
use optoback_core::{Fidelity, RcGrid, ReservoirConfig, TaskKind, TaskSpec, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: u64,
    output_dir: PathBuf,
    task: TaskSection,
    reservoir: ReservoirSection,
    #[serde(default)]
    train: Option<TrainSection>,
    #[serde(default)]
    rc: Option<RcSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    kind: TaskKind,
    #[serde(default = "one")]
    channels: usize,
    #[serde(default = "one")]
    classes: usize,
    #[serde(default)]
    task_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReservoirSection {
    n_virtual_nodes: usize,
    feedback_gain: f64,
    #[serde(default = "ideal")]
    fidelity: Fidelity,
    #[serde(default)]
    hardware: Option<HardwareParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    iterations: usize,
    #[serde(default = "hundred")]
    seq_length: usize,
    lr_initial: f64,
    #[serde(default = "momentum_default")]
    momentum: f64,
    #[serde(default = "eval_length_default")]
    eval_length: usize,
    #[serde(default = "eval_every_default")]
    eval_every: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RcSection {
    mu: Vec<f64>,
    input_scale: Vec<f64>,
    bias_scale: Vec<f64>,
    #[serde(default = "ridge_default")]
    ridge: Vec<f64>,
    seeds: Vec<u64>,
    #[serde(default = "train_len_initial_default")]
    train_len_initial: usize,
    #[serde(default = "train_len_max_default")]
    train_len_max: usize,
    #[serde(default = "val_length_default")]
    val_length: usize,
    #[serde(default = "eval_length_default")]
    test_length: usize,
}

fn one() -> usize {
    1
}
fn hundred() -> usize {
    100
}
fn ideal() -> Fidelity {
    Fidelity::Ideal
}
fn momentum_default() -> f64 {
    0.9
}
fn eval_length_default() -> usize {
    10_000
}
fn eval_every_default() -> usize {
    1000
}
fn ridge_default() -> Vec<f64> {
    vec![0.0, 1e-8, 1e-6, 1e-4, 1e-2]
}
fn train_len_initial_default() -> usize {
    2000
}
fn train_len_max_default() -> usize {
    32_000
}
fn val_length_default() -> usize {
    4000
}

/// Fully resolved experiment description; stored verbatim in checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub task: TaskSpec,
    pub reservoir: ReservoirConfig,
    pub train: Option<TrainConfig>,
    pub rc: Option<RcGrid>,
}

impl Experiment {
    pub fn load(path: &Path, seed_override: Option<u64>) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;

        // precedence: --seed flag, OPTOBACK_SEED, config file
        let mut seed = file.seed;
        if let Ok(env_seed) = std::env::var("OPTOBACK_SEED") {
            seed = env_seed
                .parse()
                .context("OPTOBACK_SEED must be an unsigned integer")?;
        }
        if let Some(s) = seed_override {
            seed = s;
        }

        let task = TaskSpec {
            kind: file.task.kind,
            channels: file.task.channels,
            classes: file.task.classes,
            task_seed: file.task.task_seed,
        };
        task.validate()?;

        let reservoir = ReservoirConfig {
            n_virtual_nodes: file.reservoir.n_virtual_nodes,
            feedback_gain: file.reservoir.feedback_gain,
            fidelity: file.reservoir.fidelity,
            hardware: file.reservoir.hardware.unwrap_or_default(),
        };
        reservoir.validate()?;

        let train = match file.train {
            Some(t) => {
                let cfg = TrainConfig {
                    iterations: t.iterations,
                    seq_length: t.seq_length,
                    lr_initial: t.lr_initial,
                    momentum: t.momentum,
                    seed,
                    eval_length: t.eval_length,
                    eval_every: t.eval_every,
                };
                cfg.validate()?;
                Some(cfg)
            }
            None => None,
        };
        let rc = match file.rc {
            Some(r) => {
                let grid = RcGrid {
                    mu: r.mu,
                    input_scale: r.input_scale,
                    bias_scale: r.bias_scale,
                    ridge: r.ridge,
                    seeds: r.seeds,
                    train_len_initial: r.train_len_initial,
                    train_len_max: r.train_len_max,
                    val_length: r.val_length,
                    test_length: r.test_length,
                };
                grid.validate()?;
                Some(grid)
            }
            None => None,
        };

        Ok(Experiment {
            seed,
            output_dir: file.output_dir,
            task,
            reservoir,
            train,
            rc,
        })
    }

    pub fn train_config(&self) -> anyhow::Result<TrainConfig> {
        match &self.train {
            Some(t) => Ok(t.clone()),
            None => bail!("config has no [train] section"),
        }
    }

    pub fn rc_grid(&self) -> anyhow::Result<RcGrid> {
        match &self.rc {
            Some(r) => Ok(r.clone()),
            None => bail!("config has no [rc] section"),
        }
    }
}
