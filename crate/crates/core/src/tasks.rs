//! Benchmark task generators, cost functions and evaluation metrics.

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::signal::{SequencePair, Targets};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// NARMA10 sequences whose targets exceed this bound are discarded and
/// redrawn; the recurrence blows up for a few percent of long random input
/// sequences, while stable ones stay below ~1.2.
const NARMA10_BOUND: f64 = 10.0;

/// Fraction of synthetic-classification labels replaced by a uniformly
/// random class.
const SYNTH_LABEL_NOISE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Narma10,
    Vardel5,
    SynthClass,
}

/// Cost function attached to a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// Summed squared error, `C = sum_{i,l} (y - y*)^2`.
    SquaredError,
    /// Softmax cross-entropy over class logits.
    SoftmaxCrossEntropy,
}

/// A benchmark task: what to generate and how to score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Input channels `K`.
    pub channels: usize,
    /// Output channels / classes `P`.
    pub classes: usize,
    /// Seed for the fixed generative rule of the synthetic classification
    /// task (the class projections). Sequence draws use the caller's RNG.
    pub task_seed: u64,
}

impl TaskSpec {
    pub fn narma10() -> Self {
        TaskSpec {
            kind: TaskKind::Narma10,
            channels: 1,
            classes: 1,
            task_seed: 0,
        }
    }

    pub fn vardel5() -> Self {
        TaskSpec {
            kind: TaskKind::Vardel5,
            channels: 1,
            classes: 1,
            task_seed: 0,
        }
    }

    pub fn synth_class(channels: usize, classes: usize, task_seed: u64) -> Self {
        TaskSpec {
            kind: TaskKind::SynthClass,
            channels,
            classes,
            task_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TaskKind::Narma10 | TaskKind::Vardel5 => {
                if self.channels != 1 || self.classes != 1 {
                    return Err(Error::InvalidConfig(
                        "regression benchmarks are single channel, single output".into(),
                    ));
                }
            }
            TaskKind::SynthClass => {
                if self.channels < 1 || self.classes < 2 {
                    return Err(Error::InvalidConfig(
                        "classification needs K >= 1 and P >= 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_classification(&self) -> bool {
        self.kind == TaskKind::SynthClass
    }

    pub fn cost_kind(&self) -> CostKind {
        match self.kind {
            TaskKind::SynthClass => CostKind::SoftmaxCrossEntropy,
            _ => CostKind::SquaredError,
        }
    }

    /// Draw a fresh task instance of length `l`.
    pub fn generate(&self, l: usize, rng: &mut ChaCha8Rng) -> SequencePair {
        match self.kind {
            TaskKind::Narma10 => gen_narma10(l, rng),
            TaskKind::Vardel5 => gen_vardel5(l, rng),
            TaskKind::SynthClass => {
                gen_synthclass(l, self.channels, self.classes, self.task_seed, rng)
            }
        }
    }

    /// Fixed `(offset, scale)` used to standardize regression targets in the
    /// training and evaluation pipeline: `t = (y* - offset) / scale`. The
    /// constants are the long-run target mean and standard deviation.
    /// Standardization does not change the NRMSE (the metric is invariant
    /// under a common affine rescaling of output and target) but it makes the
    /// gradient scales comparable across tasks.
    pub fn target_standardization(&self) -> (f64, f64) {
        match self.kind {
            TaskKind::Narma10 => (0.3886, 0.1095),
            TaskKind::Vardel5 => (3.0, std::f64::consts::SQRT_2),
            TaskKind::SynthClass => (0.0, 1.0),
        }
    }
}

/// NARMA10: inputs i.i.d. uniform on [0, 0.5],
/// `y*_i = 0.3 y*_{i-1} + 0.05 y*_{i-1} sum_{n=1..10} y*_{i-n}
///        + 1.5 s_i s_{i-9} + 0.1`,
/// with zero extension for indices < 1. Divergent draws (the recurrence is
/// unstable for a small fraction of input sequences) are redrawn whole from
/// the same RNG.
pub fn gen_narma10(l: usize, rng: &mut ChaCha8Rng) -> SequencePair {
    loop {
        let s: Vec<f64> = (0..l).map(|_| rng.gen::<f64>() * 0.5).collect();
        if let Some(y) = narma10_targets(&s) {
            return SequencePair {
                inputs: s.into_iter().map(|v| vec![v]).collect(),
                targets: Targets::Regression(y.into_iter().map(|v| vec![v]).collect()),
            };
        }
    }
}

fn narma10_targets(s: &[f64]) -> Option<Vec<f64>> {
    let l = s.len();
    // y[i] holds y*_i, 1-based; y[0] = y*_0 = 0
    let mut y = vec![0.0; l + 1];
    for i in 1..=l {
        let hist: f64 = (1..=10).filter(|&n| n <= i).map(|n| y[i - n]).sum();
        let s_i = s[i - 1];
        let s_i9 = if i >= 10 { s[i - 10] } else { 0.0 };
        y[i] = 0.3 * y[i - 1] + 0.05 * y[i - 1] * hist + 1.5 * s_i * s_i9 + 0.1;
        if y[i].abs() > NARMA10_BOUND {
            return None;
        }
    }
    y.remove(0);
    Some(y)
}

/// VARDEL5: inputs i.i.d. uniform on {1,...,5}, `y*_i = s_{i - s_i}` with
/// zero extension for indices < 1 (the current digit says how far back to
/// recall).
pub fn gen_vardel5(l: usize, rng: &mut ChaCha8Rng) -> SequencePair {
    let s: Vec<f64> = (0..l).map(|_| rng.gen_range(1..=5) as f64).collect();
    let y: Vec<f64> = (0..l)
        .map(|i0| {
            let i = i0 + 1; // 1-based
            let j = i as i64 - s[i0] as i64;
            if j >= 1 {
                s[(j - 1) as usize]
            } else {
                0.0
            }
        })
        .collect();
    SequencePair {
        inputs: s.into_iter().map(|v| vec![v]).collect(),
        targets: Targets::Regression(y.into_iter().map(|v| vec![v]).collect()),
    }
}

/// The fixed generative rule of the synthetic classification task: one
/// projection vector per class over the last three input frames.
pub struct SynthClassRule {
    /// `P x 3 x K`, flattened per class as `[d0 | d1 | d2]`.
    weights: Vec<Vec<f64>>,
    channels: usize,
    classes: usize,
}

impl SynthClassRule {
    /// Orthonormal random projections derived from `task_seed`.
    /// Orthonormality makes per-step class scores i.i.d. standard normal,
    /// so label marginals are uniform.
    pub fn from_seed(channels: usize, classes: usize, task_seed: u64) -> Self {
        let dim = 3 * channels;
        assert!(
            classes <= dim,
            "need P <= 3K for orthonormal class projections"
        );
        let mut prng = seeded(task_seed, 0);
        let mut w: Vec<Vec<f64>> = (0..classes)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut prng)).collect())
            .collect();
        // Gram-Schmidt
        for p in 0..classes {
            for q in 0..p {
                let dot: f64 = w[p].iter().zip(&w[q]).map(|(a, b)| a * b).sum();
                for d in 0..dim {
                    w[p][d] -= dot * w[q][d];
                }
            }
            let norm = w[p].iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut w[p] {
                *v /= norm;
            }
        }
        SynthClassRule {
            weights: w,
            channels,
            classes,
        }
    }

    /// Explicit projections, for tests with hand-built rules. Each class row
    /// is `[w(d=0) | w(d=1) | w(d=2)]` of length `3 * channels`.
    pub fn from_weights(channels: usize, weights: Vec<Vec<f64>>) -> Self {
        let classes = weights.len();
        SynthClassRule {
            weights,
            channels,
            classes,
        }
    }

    /// Noise-free class of step `i0` given the inputs so far.
    pub fn classify(&self, inputs: &[Vec<f64>], i0: usize) -> usize {
        let k = self.channels;
        let mut best = (0usize, f64::NEG_INFINITY);
        for (p, w) in self.weights.iter().enumerate() {
            let mut score = 0.0;
            for d in 0..3 {
                if i0 >= d {
                    let x = &inputs[i0 - d];
                    for ch in 0..k {
                        score += w[d * k + ch] * x[ch];
                    }
                }
            }
            // ties toward the lowest class index
            if score > best.1 {
                best = (p, score);
            }
        }
        best.0
    }

    pub fn generate(&self, l: usize, noise: f64, rng: &mut ChaCha8Rng) -> SequencePair {
        let inputs: Vec<Vec<f64>> = (0..l)
            .map(|_| {
                (0..self.channels)
                    .map(|_| StandardNormal.sample(rng))
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = (0..l)
            .map(|i0| {
                let c = self.classify(&inputs, i0);
                if noise > 0.0 && rng.gen::<f64>() < noise {
                    rng.gen_range(0..self.classes)
                } else {
                    c
                }
            })
            .collect();
        SequencePair {
            inputs,
            targets: Targets::Labels {
                labels,
                classes: self.classes,
            },
        }
    }
}

/// Synthetic multiclass stand-in for frame-wise labelling: K-channel
/// Gaussian inputs whose class is the argmax of P fixed orthonormal
/// projections of the last three frames, plus 5% label noise. Requires
/// memory (three frames) and nonlinearity (argmax) from the model.
pub fn gen_synthclass(
    l: usize,
    channels: usize,
    classes: usize,
    task_seed: u64,
    rng: &mut ChaCha8Rng,
) -> SequencePair {
    SynthClassRule::from_seed(channels, classes, task_seed).generate(
        l,
        SYNTH_LABEL_NOISE,
        rng,
    )
}

/// Export a task instance as CSV for cross-implementation checks. Header:
/// `index,in_0,...,in_{K-1},target_0,...` (or a single `label` column for
/// classification); numbers carry full round-trip precision.
pub fn write_sequence_csv<W: std::io::Write>(seq: &SequencePair, mut w: W) -> std::io::Result<()> {
    let k = seq.channels();
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((0..k).map(|c| format!("in_{c}")));
    match &seq.targets {
        Targets::Regression(t) => {
            header.extend((0..t.first().map_or(0, Vec::len)).map(|c| format!("target_{c}")));
        }
        Targets::Labels { .. } => header.push("label".into()),
    }
    writeln!(w, "{}", header.join(","))?;
    for i in 0..seq.len() {
        let mut row: Vec<String> = vec![i.to_string()];
        row.extend(seq.inputs[i].iter().map(|v| format!("{v:.16e}")));
        match &seq.targets {
            Targets::Regression(t) => row.extend(t[i].iter().map(|v| format!("{v:.16e}"))),
            Targets::Labels { labels, .. } => row.push(labels[i].to_string()),
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Import a task instance written by [`write_sequence_csv`]. The header
/// decides the interpretation: a trailing `label` column means
/// classification (class count inferred as `max label + 1` unless a larger
/// `classes` is given).
pub fn read_sequence_csv<R: std::io::BufRead>(
    r: R,
    classes: Option<usize>,
) -> Result<SequencePair> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or(Error::UndefinedMetric("empty CSV"))?
        .map_err(|_| Error::InvalidConfig("unreadable CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let k = cols.iter().filter(|c| c.starts_with("in_")).count();
    let labelled = cols.last() == Some(&"label");
    let p = cols.iter().filter(|c| c.starts_with("target_")).count();
    if k == 0 || (!labelled && p == 0) {
        return Err(Error::InvalidConfig("bad task CSV header".into()));
    }
    let mut inputs = Vec::new();
    let mut regression = Vec::new();
    let mut labels = Vec::new();
    for line in lines {
        let line = line.map_err(|_| Error::InvalidConfig("unreadable CSV".into()))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::dim("task CSV columns", cols.len(), fields.len()));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number '{s}' in task CSV")))
        };
        inputs.push(
            fields[1..1 + k]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<Vec<f64>>>()?,
        );
        if labelled {
            labels.push(
                fields[1 + k]
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidConfig("bad label in task CSV".into()))?,
            );
        } else {
            regression.push(
                fields[1 + k..1 + k + p]
                    .iter()
                    .map(|s| parse(s))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
    }
    let targets = if labelled {
        let max = labels.iter().max().copied().unwrap_or(0);
        Targets::Labels {
            labels,
            classes: classes.unwrap_or(max + 1).max(max + 1),
        }
    } else {
        Targets::Regression(regression)
    };
    let seq = SequencePair { inputs, targets };
    seq.validate()?;
    Ok(seq)
}

/// Summed squared error and its output derivative:
/// `C = sum_{i,l} (y - y*)^2`, `dC/dy = 2 (y - y*)`.
pub fn cost_sq(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
    if outputs.len() != targets.len() {
        return Err(Error::dim("cost rows", targets.len(), outputs.len()));
    }
    let mut cost = 0.0;
    let mut err = Vec::with_capacity(outputs.len());
    for (y, t) in outputs.iter().zip(targets) {
        if y.len() != t.len() {
            return Err(Error::dim("cost columns", t.len(), y.len()));
        }
        err.push(
            y.iter()
                .zip(t)
                .map(|(y, t)| {
                    let d = y - t;
                    cost += d * d;
                    2.0 * d
                })
                .collect(),
        );
    }
    Ok((cost, err))
}

/// Softmax cross-entropy over logits with integer labels:
/// `p_i = softmax(y_i)`, `C = -sum_i ln p_i[label_i]`,
/// `dC/dy_i[k] = p_i[k] - 1{k = label_i}`. Stable for all finite logits
/// (max-subtracted exponentials).
pub fn cost_softmax_xent(outputs: &[Vec<f64>], labels: &[usize]) -> Result<(f64, Vec<Vec<f64>>)> {
    if outputs.len() != labels.len() {
        return Err(Error::dim("label count", outputs.len(), labels.len()));
    }
    let mut cost = 0.0;
    let mut err = Vec::with_capacity(outputs.len());
    for (y, &label) in outputs.iter().zip(labels) {
        if label >= y.len() {
            return Err(Error::InvalidConfig("label out of range".into()));
        }
        let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = y.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        // ln p[label] = y[label] - max - ln z
        cost -= y[label] - max - z.ln();
        err.push(
            exps.iter()
                .enumerate()
                .map(|(k, e)| e / z - if k == label { 1.0 } else { 0.0 })
                .collect(),
        );
    }
    Ok((cost, err))
}

/// Dispatch on the task's cost function.
pub fn cost_and_error(
    kind: CostKind,
    outputs: &[Vec<f64>],
    targets: &Targets,
) -> Result<(f64, Vec<Vec<f64>>)> {
    match (kind, targets) {
        (CostKind::SquaredError, Targets::Regression(t)) => cost_sq(outputs, t),
        (CostKind::SoftmaxCrossEntropy, Targets::Labels { labels, .. }) => {
            cost_softmax_xent(outputs, labels)
        }
        _ => Err(Error::InvalidConfig(
            "cost kind does not match target kind".into(),
        )),
    }
}

/// Normalised root mean square error,
/// `sqrt( <(y - y*)^2> / <(y*)^2> )` — normalization by the target mean
/// square, exactly as the benchmark defines it. 0 is a perfect match; the
/// zero predictor scores exactly 1.
pub fn nrmse(y: &[f64], y_star: &[f64]) -> Result<f64> {
    if y.len() != y_star.len() {
        return Err(Error::dim("nrmse length", y_star.len(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::UndefinedMetric("nrmse of empty sequence"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (y, t) in y.iter().zip(y_star) {
        num += (y - t) * (y - t);
        den += t * t;
    }
    if den == 0.0 {
        return Err(Error::UndefinedMetric("nrmse with all-zero target"));
    }
    Ok((num / den).sqrt())
}

/// Fraction of steps whose argmax output disagrees with the label. Ties
/// break toward the lowest class index.
pub fn classification_error_rate(outputs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if outputs.len() != labels.len() {
        return Err(Error::dim("label count", outputs.len(), labels.len()));
    }
    if outputs.is_empty() {
        return Err(Error::UndefinedMetric("error rate of empty sequence"));
    }
    let mut wrong = 0usize;
    for (y, &label) in outputs.iter().zip(labels) {
        let mut arg = 0usize;
        for (k, &v) in y.iter().enumerate() {
            if v > y[arg] {
                arg = k;
            }
        }
        if arg != label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / outputs.len() as f64)
}
