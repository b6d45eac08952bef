//! Hand-rolled SVG plots: per-algorithm mean curves across seeds with a
//! +/- one-standard-error band, one file per metric.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::Algorithm;
use super::RunRecord;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Renders one SVG per metric (cumulative regret, instantaneous regret,
/// model error) into `dir` and returns the files written.
pub fn render_plots(records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::invalid("cannot plot an empty record set"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let metrics: [(&str, fn(&RunRecord) -> f64); 3] = [
        ("cumulative_regret", |r| r.cumulative_regret),
        ("instant_regret", |r| r.instant_regret),
        ("model_error", |r| r.model_error),
    ];
    let mut written = Vec::new();
    for (name, getter) in metrics {
        let path = dir.join(format!("{name}.svg"));
        let svg = render_metric(records, name, getter);
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

struct Series {
    algorithm: Algorithm,
    episodes: Vec<usize>,
    mean: Vec<f64>,
    se: Vec<f64>,
}

fn collect_series(records: &[RunRecord], getter: fn(&RunRecord) -> f64) -> Vec<Series> {
    // (algorithm, episode) -> values across seeds.
    let mut grouped: BTreeMap<Algorithm, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in records {
        grouped
            .entry(r.algorithm)
            .or_default()
            .entry(r.episode)
            .or_default()
            .push(getter(r));
    }
    grouped
        .into_iter()
        .map(|(algorithm, by_episode)| {
            let mut episodes = Vec::with_capacity(by_episode.len());
            let mut mean = Vec::with_capacity(by_episode.len());
            let mut se = Vec::with_capacity(by_episode.len());
            for (ep, vals) in by_episode {
                let n = vals.len() as f64;
                let m = vals.iter().sum::<f64>() / n;
                let var = if vals.len() > 1 {
                    vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                episodes.push(ep);
                mean.push(m);
                se.push((var / n).sqrt());
            }
            Series {
                algorithm,
                episodes,
                mean,
                se,
            }
        })
        .collect()
}

fn render_metric(records: &[RunRecord], metric: &str, getter: fn(&RunRecord) -> f64) -> String {
    let series = collect_series(records, getter);
    let x_max = series
        .iter()
        .flat_map(|s| s.episodes.iter())
        .copied()
        .max()
        .unwrap_or(1) as f64;
    let x_min = 1.0;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for (m, e) in s.mean.iter().zip(&s.se) {
            y_min = y_min.min(m - e);
            y_max = y_max.max(m + e);
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min).max(1e-12) * plot_w;
    let sy = move |y: f64| MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T,
        MARGIN_L,
        MARGIN_T + plot_h
    ));

    // Ticks and labels.
    for i in 0..=5 {
        let frac = i as f64 / 5.0;
        let x = x_min + frac * (x_max - x_min);
        let px = sx(x);
        svg.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{:.0}</text>\n",
            MARGIN_T + plot_h + 20.0,
            x
        ));
        let y = y_min + frac * (y_max - y_min);
        let py = sy(y);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0,
            MARGIN_L
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 9.0,
            py + 4.0,
            format_tick(y)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">episode</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(metric)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // SE band: forward along mean+se, back along mean-se.
        let mut band = String::from("<path d=\"");
        for (j, (&ep, (m, e))) in s.episodes.iter().zip(s.mean.iter().zip(&s.se)).enumerate() {
            let cmd = if j == 0 { 'M' } else { 'L' };
            band.push_str(&format!("{cmd}{:.2},{:.2} ", sx(ep as f64), sy(m + e)));
        }
        for (&ep, (m, e)) in s.episodes.iter().zip(s.mean.iter().zip(&s.se)).rev() {
            band.push_str(&format!("L{:.2},{:.2} ", sx(ep as f64), sy(m - e)));
        }
        band.push_str(&format!(
            "Z\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"
        ));
        svg.push_str(&band);

        let mut line = String::from("<polyline fill=\"none\" points=\"");
        for (&ep, m) in s.episodes.iter().zip(&s.mean) {
            line.push_str(&format!("{:.2},{:.2} ", sx(ep as f64), sy(*m)));
        }
        line.push_str(&format!("\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"));
        svg.push_str(&line);

        // Legend entry.
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            MARGIN_L + plot_w - 150.0,
            MARGIN_L + plot_w - 120.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n",
            MARGIN_L + plot_w - 112.0,
            ly + 4.0,
            escape(s.algorithm.as_str())
        ));
    }
    let n_records = records.len();
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">mean over seeds, band = 1 SE ({n_records} rows)</text>\n",
        MARGIN_L + plot_w / 2.0,
        MARGIN_T - 10.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(y: f64) -> String {
    if y == 0.0 {
        "0".to_string()
    } else if y.abs() >= 1000.0 || y.abs() < 0.01 {
        format!("{y:.2e}")
    } else {
        format!("{y:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
