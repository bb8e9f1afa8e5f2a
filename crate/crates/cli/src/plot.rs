//! Static SVG rendering of training curves: cost per iteration plus the
//! periodic validation metric. Long logs are bucket-averaged down to a
//! bounded number of points so rendering stays fast and files stay small.

use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const MAX_POINTS: usize = 1200;

/// Mean-pool a series down to at most `MAX_POINTS` points.
fn downsample(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let bucket = points.len().div_ceil(MAX_POINTS);
    points
        .chunks(bucket)
        .map(|c| {
            let n = c.len() as f64;
            let x = c.iter().map(|p| p.0).sum::<f64>() / n;
            let y = c.iter().map(|p| p.1).sum::<f64>() / n;
            (x, y)
        })
        .collect()
}

fn polyline(points: &[(f64, f64)], map: impl Fn(f64, f64) -> (f64, f64), color: &str) -> String {
    if points.is_empty() {
        return String::new();
    }
    let mut coords = String::new();
    for &(x, y) in points {
        let (px, py) = map(x, y);
        let _ = write!(coords, "{px:.2},{py:.2} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\" points=\"{}\"/>\n",
        coords.trim_end()
    )
}

/// Render the log to an SVG file. Returns the number of plotted points;
/// an empty log still produces a valid figure with bare axes.
pub fn render_log(
    rows: &[(u64, f64, Option<f64>)],
    out: &Path,
) -> anyhow::Result<usize> {
    let cost: Vec<(f64, f64)> = rows.iter().map(|r| (r.0 as f64, r.1)).collect();
    let val: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.2.map(|v| (r.0 as f64, v)))
        .collect();
    let cost = downsample(&cost);
    let val = downsample(&val);

    let all_y = cost.iter().chain(val.iter()).map(|p| p.1);
    let y_max = all_y.clone().fold(f64::NEG_INFINITY, f64::max);
    let y_min = all_y.fold(f64::INFINITY, f64::min).min(0.0);
    let (y_min, y_max) = if y_max.is_finite() && y_max > y_min {
        (y_min, y_max)
    } else {
        (0.0, 1.0)
    };
    let x_max = cost.last().map(|p| p.0).unwrap_or(1.0).max(1.0);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let map = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_L + x / x_max * plot_w,
            MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h,
        )
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    // axes
    let (x0, y0) = (MARGIN_L, MARGIN_T + plot_h);
    let _ = write!(
        svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{MARGIN_T}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        MARGIN_L + plot_w
    );
    // ticks
    for i in 0..=5 {
        let frac = i as f64 / 5.0;
        let yv = y_min + frac * (y_max - y_min);
        let (_, py) = map(0.0, yv);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{yv:.3}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
        let xv = frac * x_max;
        let (px, _) = map(xv, 0.0);
        let _ = write!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{xv:.0}</text>\n",
            y0 + 5.0,
            y0 + 20.0
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n\
         <text x=\"18\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 18 {})\" text-anchor=\"middle\">cost / metric</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
    svg.push_str(&polyline(&cost, map, "#4878cf"));
    svg.push_str(&polyline(&val, map, "#d65f5f"));
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#4878cf\">training cost</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#d65f5f\">validation metric</text>\n",
        MARGIN_L + 10.0,
        MARGIN_T + 14.0,
        MARGIN_L + 10.0,
        MARGIN_T + 30.0
    );
    svg.push_str("</svg>\n");
    std::fs::write(out, svg)?;
    Ok(cost.len() + val.len())
}
