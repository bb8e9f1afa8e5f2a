//! CSV writers and readers for training logs and the RC grid table.
//! Numeric fields are written with 17 significant digits so parsing them
//! back reproduces the exact f64.

use anyhow::Context;
use optoback_core::training::{LogRow, RcRow};
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const LOG_HEADER: [&str; 4] = ["iteration", "lr", "cost", "val_metric"];
pub const RC_HEADER: [&str; 7] = [
    "mu",
    "input_scale",
    "bias_scale",
    "seed",
    "ridge",
    "val_metric",
    "test_metric",
];

/// Append log rows; writes the header only when the file starts empty.
pub fn append_log(path: &Path, rows: &[LogRow]) -> anyhow::Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening log {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(LOG_HEADER)?;
    }
    for row in rows {
        w.write_record([
            row.iteration.to_string(),
            fmt_f64(row.lr),
            fmt_f64(row.cost),
            row.val_metric.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Drop log rows at or beyond `start_iteration`, keeping earlier rows
/// byte-for-byte. Used on resume so the final log matches an uninterrupted
/// run exactly.
pub fn truncate_log(path: &Path, start_iteration: usize) -> anyhow::Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading log {}", path.display()))?;
    let mut kept = String::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            kept.push_str(line);
            kept.push('\n');
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let iteration: usize = line
            .split(',')
            .next()
            .unwrap_or("")
            .parse()
            .context("bad iteration field while truncating")?;
        if iteration < start_iteration {
            kept.push_str(line);
            kept.push('\n');
        }
    }
    std::fs::write(path, kept).with_context(|| format!("rewriting log {}", path.display()))?;
    Ok(())
}

/// Parsed log for plotting: (iteration, cost, optional validation metric).
pub fn read_log(path: &Path) -> anyhow::Result<Vec<(u64, f64, Option<f64>)>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("opening log {}", path.display()))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.context("malformed CSV record")?;
        if record.len() < 3 {
            anyhow::bail!("log row has {} fields, expected >= 3", record.len());
        }
        let iteration: u64 = record[0].parse().context("bad iteration field")?;
        let cost: f64 = record[2].parse().context("bad cost field")?;
        let val = match record.get(3) {
            Some("") | None => None,
            Some(v) => Some(v.parse::<f64>().context("bad val_metric field")?),
        };
        rows.push((iteration, cost, val));
    }
    Ok(rows)
}

pub fn write_rc_table(path: &Path, rows: &[RcRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("writing table {}", path.display()))?;
    w.write_record(RC_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.mu),
            fmt_f64(r.input_scale),
            fmt_f64(r.bias_scale),
            r.seed.to_string(),
            fmt_f64(r.ridge),
            fmt_f64(r.val_metric),
            fmt_f64(r.test_metric),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            2.5e-300,
            -7.1e300,
            f64::MIN_POSITIVE,
        ] {
            let back: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v}");
        }
    }

    #[test]
    fn log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let rows = vec![
            LogRow {
                iteration: 0,
                lr: 0.01,
                cost: 1.5,
                val_metric: None,
            },
            LogRow {
                iteration: 1,
                lr: 0.009,
                cost: 0.75,
                val_metric: Some(0.33),
            },
        ];
        append_log(&path, &rows).unwrap();
        let back = read_log(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], (0, 1.5, None));
        assert_eq!(back[1], (1, 0.75, Some(0.33)));
        // appending keeps a single header
        append_log(&path, &rows[..1].to_vec()).unwrap();
        assert_eq!(read_log(&path).unwrap().len(), 3);
    }
}
