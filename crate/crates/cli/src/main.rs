//! Command-line harness: mask training, the reservoir-computing baseline,
//! checkpoint evaluation, the adjoint-vs-finite-difference gradient check,
//! and training-curve rendering.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 training
//! divergence, 4 unreadable checkpoint or log.

mod checkpoint;
mod config;
mod logio;
mod plot;

use checkpoint::Checkpoint;
use clap::{Parser, Subcommand, ValueEnum};
use config::Experiment;
use optoback_core::{
    evaluate_masks, finite_diff_gradient, full_gradient, gradcheck_instance, init_masks,
    max_rel_error, rc_baseline, BpTrainer, Error as CoreError, Fidelity, OptimizerState,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "optoback", version, about = "Delay-loop reservoir trainer")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityArg {
    Ideal,
    Hardware,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train input and output masks by backpropagation through the loop.
    TrainBp {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Resume from a training checkpoint (its config snapshot wins).
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Override the configured fidelity.
        #[arg(long)]
        fidelity: Option<FidelityArg>,
        /// Override the seed (also: env OPTOBACK_SEED).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Scan the reservoir-computing baseline grid and fit readouts.
    TrainRc {
        /// Experiment config (TOML).
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the grid scan (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate a checkpoint on fresh held-out data.
    Eval {
        ckpt: PathBuf,
        /// Seed of the evaluation stream (default: the checkpoint's seed).
        #[arg(long)]
        task_seed: Option<u64>,
        /// Evaluation sequence length.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Compare the adjoint gradient against central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 8)]
        nodes: usize,
        #[arg(long, default_value_t = 5)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Render a training log as an SVG figure.
    PlotLog { log: PathBuf, out: PathBuf },
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

fn usage(err: anyhow::Error) -> Failure {
    Failure { code: 2, err }
}

fn artifact(err: anyhow::Error) -> Failure {
    Failure { code: 4, err }
}

fn runtime(err: anyhow::Error) -> Failure {
    Failure { code: 1, err }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::TrainBp {
            config,
            resume,
            fidelity,
            seed,
        } => cmd_train_bp(&config, resume.as_deref(), fidelity, seed),
        Cmd::TrainRc { config, seed, jobs } => cmd_train_rc(&config, seed, jobs),
        Cmd::Eval {
            ckpt,
            task_seed,
            length,
        } => cmd_eval(&ckpt, task_seed, length),
        Cmd::Gradcheck {
            nodes,
            length,
            seed,
            tolerance,
        } => cmd_gradcheck(nodes, length, seed, tolerance),
        Cmd::PlotLog { log, out } => cmd_plot_log(&log, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_train_bp(
    config_path: &Path,
    resume: Option<&Path>,
    fidelity: Option<FidelityArg>,
    seed: Option<u64>,
) -> CmdResult {
    let (experiment, start) = match resume {
        None => {
            let mut exp = Experiment::load(config_path, seed).map_err(usage)?;
            if let Some(f) = fidelity {
                exp.reservoir.fidelity = match f {
                    FidelityArg::Ideal => Fidelity::Ideal,
                    FidelityArg::Hardware => Fidelity::Hardware,
                };
            }
            (exp, None)
        }
        Some(ckpt_path) => {
            let ckpt = Checkpoint::load(ckpt_path).map_err(artifact)?;
            let masks = ckpt.masks.to_masks().map_err(artifact)?;
            let velocity = ckpt
                .velocity
                .as_ref()
                .ok_or_else(|| artifact(anyhow::anyhow!("checkpoint has no optimizer state")))?
                .to_gradient()
                .map_err(artifact)?;
            let rngs = ckpt
                .rngs
                .clone()
                .ok_or_else(|| artifact(anyhow::anyhow!("checkpoint has no RNG state")))?;
            let drift = ckpt.drift.clone().unwrap_or_default();
            let state = OptimizerState {
                velocity,
                iteration: ckpt.iteration,
            };
            (ckpt.config.clone(), Some((masks, state, rngs, drift)))
        }
    };
    let train_cfg = experiment.train_config().map_err(usage)?;
    std::fs::create_dir_all(&experiment.output_dir)
        .map_err(|e| usage(anyhow::anyhow!("creating output dir: {e}")))?;

    let mut trainer = match start {
        None => {
            let masks = init_masks(&experiment.task, &experiment.reservoir, train_cfg.seed)
                .map_err(|e| usage(e.into()))?;
            BpTrainer::new(
                experiment.task.clone(),
                train_cfg.clone(),
                experiment.reservoir.clone(),
                masks,
            )
            .map_err(|e| usage(e.into()))?
        }
        Some((masks, state, rngs, drift)) => BpTrainer::from_parts(
            experiment.task.clone(),
            train_cfg.clone(),
            experiment.reservoir.clone(),
            masks,
            state,
            rngs,
            drift,
        )
        .map_err(|e| usage(e.into()))?,
    };

    let log_path = experiment.output_dir.join("train_log.csv");
    if resume.is_some() {
        logio::truncate_log(&log_path, trainer.iteration()).map_err(runtime)?;
    }
    let ckpt_for = |trainer: &BpTrainer| {
        Checkpoint::of_trainer(
            &experiment,
            trainer.masks(),
            trainer.state(),
            trainer.rngs(),
            trainer.drift(),
        )
    };
    let mut written = 0usize;
    let flush_rows = |trainer: &BpTrainer, written: &mut usize| -> anyhow::Result<()> {
        let rows = &trainer.log().rows[*written..];
        logio::append_log(&log_path, rows)?;
        *written += rows.len();
        Ok(())
    };

    if trainer.finished() {
        // zero-iteration run: initial checkpoint, empty log
        ckpt_for(&trainer)
            .save(&experiment.output_dir.join("checkpoint_final.json"))
            .map_err(runtime)?;
        logio::append_log(&log_path, &[]).map_err(runtime)?;
        println!("trained 0 iterations (nothing to do)");
        return Ok(());
    }

    while !trainer.finished() {
        let evaluated = match trainer.step() {
            Ok(row) => row.val_metric.is_some(),
            Err(e @ CoreError::Diverged { .. }) => {
                flush_rows(&trainer, &mut written).map_err(runtime)?;
                return Err(Failure {
                    code: 3,
                    err: e.into(),
                });
            }
            Err(e) => return Err(runtime(e.into())),
        };
        if evaluated {
            let it = trainer.iteration();
            ckpt_for(&trainer)
                .save(
                    &experiment
                        .output_dir
                        .join(format!("checkpoint_iter{it}.json")),
                )
                .map_err(runtime)?;
            flush_rows(&trainer, &mut written).map_err(runtime)?;
        }
    }
    flush_rows(&trainer, &mut written).map_err(runtime)?;
    ckpt_for(&trainer)
        .save(&experiment.output_dir.join("checkpoint_final.json"))
        .map_err(runtime)?;
    let last_val = trainer
        .log()
        .rows
        .iter()
        .rev()
        .find_map(|r| r.val_metric)
        .unwrap_or(f64::NAN);
    println!(
        "trained {} iterations, final val_metric={}",
        trainer.iteration(),
        logio::fmt_f64(last_val)
    );
    Ok(())
}

fn cmd_train_rc(config_path: &Path, seed: Option<u64>, jobs: Option<usize>) -> CmdResult {
    let experiment = Experiment::load(config_path, seed).map_err(usage)?;
    let grid = experiment.rc_grid().map_err(usage)?;
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(anyhow::anyhow!("building worker pool: {e}")))?;
    }
    std::fs::create_dir_all(&experiment.output_dir)
        .map_err(|e| usage(anyhow::anyhow!("creating output dir: {e}")))?;

    let (masks, report) = rc_baseline(&experiment.task, &experiment.reservoir, &grid)
        .map_err(|e| runtime(e.into()))?;
    logio::write_rc_table(&experiment.output_dir.join("rc_table.csv"), &report.rows)
        .map_err(runtime)?;

    // the best cell's feedback gain travels with the checkpoint so that
    // evaluation replays the same reservoir
    let best = report.best().clone();
    let mut snapshot = experiment.clone();
    snapshot.reservoir.feedback_gain = best.mu;
    Checkpoint::of_masks(&snapshot, &masks)
        .save(&experiment.output_dir.join("rc_best.ckpt.json"))
        .map_err(runtime)?;
    println!(
        "best cell: mu={} input_scale={} bias_scale={} seed={} ridge={} val={} test={}",
        best.mu,
        best.input_scale,
        best.bias_scale,
        best.seed,
        best.ridge,
        logio::fmt_f64(best.val_metric),
        logio::fmt_f64(best.test_metric),
    );
    Ok(())
}

fn cmd_eval(ckpt_path: &Path, task_seed: Option<u64>, length: Option<usize>) -> CmdResult {
    let ckpt = Checkpoint::load(ckpt_path).map_err(artifact)?;
    let masks = ckpt.masks.to_masks().map_err(artifact)?;
    let seed = task_seed.unwrap_or(ckpt.config.seed);
    let length = length
        .or_else(|| ckpt.config.train.as_ref().map(|t| t.eval_length))
        .unwrap_or(10_000);
    let metric = evaluate_masks(
        &ckpt.config.task,
        &masks,
        &ckpt.config.reservoir,
        length,
        seed,
    )
    .map_err(|e| runtime(e.into()))?;
    println!("metric={}", logio::fmt_f64(metric));
    Ok(())
}

fn cmd_gradcheck(nodes: usize, length: usize, seed: u64, tolerance: f64) -> CmdResult {
    let mut worst = 0.0f64;
    for (i, (k, p, classify)) in [(1usize, 1usize, false), (2, 2, false), (2, 3, true)]
        .into_iter()
        .enumerate()
    {
        let (seq, masks, rcfg, cost) =
            gradcheck_instance(seed + i as u64, nodes, length, k, p, classify);
        let adjoint = full_gradient(&seq, &masks, &rcfg, cost, None)
            .map_err(|e| runtime(e.into()))?
            .grads;
        let fd = finite_diff_gradient(&seq, &masks, &rcfg, cost, 1e-6)
            .map_err(|e| runtime(e.into()))?;
        worst = worst.max(max_rel_error(&adjoint, &fd));
    }
    println!("max_rel_error={}", logio::fmt_f64(worst));
    if worst < tolerance {
        Ok(())
    } else {
        Err(runtime(anyhow::anyhow!(
            "gradient mismatch {worst:e} exceeds tolerance {tolerance:e}"
        )))
    }
}

fn cmd_plot_log(log_path: &Path, out_path: &Path) -> CmdResult {
    let rows = logio::read_log(log_path).map_err(artifact)?;
    if rows.is_empty() {
        eprintln!("warning: log is empty, rendering bare axes");
    }
    plot::render_log(&rows, out_path).map_err(runtime)?;
    Ok(())
}
