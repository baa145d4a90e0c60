use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::{RunOutput, TrialRecord};
use crate::error::Result;
use crate::rng::RNG_ALGORITHM;

pub const CSV_COLUMNS: &str = "grid_value,trial,seed,lambda_max,lambda_2,overlap,hausdorff,theory_value,theory_error_radius";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Header comment, column line, one row per record in the given order.
pub fn write_csv<W: Write>(mut w: W, master_seed: u64, config_hash: &str, records: &[TrialRecord]) -> Result<()> {
    writeln!(w, "# rng={RNG_ALGORITHM} master_seed={master_seed} config_sha256={config_hash}")?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt(r.grid_value),
            r.trial,
            r.seed,
            fmt(r.lambda_max),
            fmt_opt(r.lambda_2),
            fmt_opt(r.overlap),
            fmt_opt(r.hausdorff),
            fmt_opt(r.theory_value),
            fmt_opt(r.theory_error_radius)
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (s.len() - 1) as f64;
            let (i, f) = (pos.floor() as usize, pos.fract());
            if i + 1 < s.len() {
                s[i] * (1.0 - f) + s[i + 1] * f
            } else {
                s[i]
            }
        };
        Some(Moments { mean, std: var.sqrt(), q10: q(0.1), q50: q(0.5), q90: q(0.9) })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub grid_value: f64,
    pub trials: usize,
    pub lambda_max: Option<Moments>,
    pub lambda_2: Option<Moments>,
    pub overlap: Option<Moments>,
    pub hausdorff: Option<Moments>,
    pub theory_value: Option<f64>,
    pub theory_error_radius: Option<f64>,
    pub markers: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub points: Vec<SummaryPoint>,
}

impl Summary {
    pub fn from_records(grid: &[f64], records: &[TrialRecord], markers: Vec<Vec<(String, f64)>>) -> Self {
        let points = grid
            .iter()
            .enumerate()
            .map(|(gi, &g)| {
                let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.grid_index == gi).collect();
                let col = |f: &dyn Fn(&TrialRecord) -> Option<f64>| Moments::of(&rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
                SummaryPoint {
                    grid_value: g,
                    trials: rs.len(),
                    lambda_max: col(&|r| Some(r.lambda_max)),
                    lambda_2: col(&|r| r.lambda_2),
                    overlap: col(&|r| r.overlap),
                    hausdorff: col(&|r| r.hausdorff),
                    theory_value: rs.first().and_then(|r| r.theory_value),
                    theory_error_radius: rs.first().and_then(|r| r.theory_error_radius),
                    markers: markers.get(gi).cloned().unwrap_or_default().into_iter().collect(),
                }
            })
            .collect();
        Summary { points }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Which summary statistic is the empirical series: "lambda_max" or
    /// "overlap".
    pub statistic: String,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle { title: String::new(), x_label: "grid value".into(), y_label: "top eigenvalue".into(), statistic: "lambda_max".into() }
    }
}

/// Declarative Vega-Lite spec: the empirical mean with a 10–90% band, the
/// theory curve, and one dashed series per threshold marker.
pub fn emit_plot_script(summary: &Summary, style: &PlotStyle) -> Value {
    let mut layers = Vec::new();
    let pick = |p: &SummaryPoint| match style.statistic.as_str() {
        "overlap" => p.overlap.clone(),
        _ => p.lambda_max.clone(),
    };
    let emp: Vec<Value> = summary
        .points
        .iter()
        .filter_map(|p| pick(p).map(|m| json!({"x": p.grid_value, "y": m.mean, "lo": m.q10, "hi": m.q90, "series": "empirical"})))
        .collect();
    if !emp.is_empty() {
        layers.push(json!({
            "data": {"values": emp},
            "layer": [
                {"mark": "errorbar", "encoding": {"x": {"field": "x", "type": "quantitative"}, "y": {"field": "lo", "type": "quantitative"}, "y2": {"field": "hi"}}},
                {"mark": "point", "encoding": {"x": {"field": "x", "type": "quantitative"}, "y": {"field": "y", "type": "quantitative"}, "color": {"field": "series"}}}
            ]
        }));
    }
    let theory: Vec<Value> =
        summary.points.iter().filter_map(|p| p.theory_value.map(|t| json!({"x": p.grid_value, "y": t, "series": "theory"}))).collect();
    if !theory.is_empty() {
        layers.push(json!({
            "data": {"values": theory},
            "mark": "line",
            "encoding": {"x": {"field": "x", "type": "quantitative"}, "y": {"field": "y", "type": "quantitative"}, "color": {"field": "series"}}
        }));
    }
    let names: std::collections::BTreeSet<&String> = summary.points.iter().flat_map(|p| p.markers.keys()).collect();
    for name in names {
        let vals: Vec<Value> =
            summary.points.iter().filter_map(|p| p.markers.get(name).map(|v| json!({"x": p.grid_value, "y": v, "series": name}))).collect();
        layers.push(json!({
            "data": {"values": vals},
            "mark": {"type": "line", "strokeDash": [4, 4]},
            "encoding": {"x": {"field": "x", "type": "quantitative"}, "y": {"field": "y", "type": "quantitative"}, "color": {"field": "series"}}
        }));
    }
    json!({
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "title": style.title,
        "config": {"axisX": {"title": style.x_label}, "axisY": {"title": style.y_label}},
        "layer": layers
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// `<path>` (CSV), `<stem>.summary.json` and `<stem>.vl.json` next to it.
/// Returns the three paths.
pub fn write_outputs(out: &RunOutput, path: &Path, style: &PlotStyle) -> Result<[PathBuf; 3]> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut csv = Vec::new();
    write_csv(&mut csv, out.config.master_seed, &out.config_hash, &out.records)?;
    std::fs::write(path, csv)?;
    let summary_path = with_suffix(path, ".summary.json");
    let summary = json!({
        "config": out.config.canonical(),
        "config_sha256": out.config_hash,
        "rng": RNG_ALGORITHM,
        "points": out.summary.points,
    });
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    let plot_path = with_suffix(path, ".vl.json");
    std::fs::write(&plot_path, serde_json::to_string_pretty(&emit_plot_script(&out.summary, style))? + "\n")?;
    Ok([path.to_path_buf(), summary_path, plot_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(gi: usize, t: usize, lm: f64) -> TrialRecord {
        TrialRecord {
            config_hash: "h".into(),
            grid_index: gi,
            grid_value: gi as f64,
            trial: t,
            seed: 7,
            lambda_max: lm,
            lambda_2: None,
            overlap: Some(0.5),
            hausdorff: None,
            theory_value: Some(2.0),
            theory_error_radius: None,
            wall_time: 0.1,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, 3, "abc", &[rec(0, 0, 1.5)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# rng=chacha20 master_seed=3 config_sha256=abc");
        assert_eq!(lines[1], CSV_COLUMNS);
        assert_eq!(lines[2], "0.0000000000000000e0,0,7,1.5000000000000000e0,,5.0000000000000000e-1,,2.0000000000000000e0,");
    }

    #[test]
    fn moments_and_quantiles() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(m.mean, 3.0);
        assert!((m.std - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.q50, 3.0);
        assert!((m.q10 - 1.4).abs() < 1e-15);
        assert!(Moments::of(&[]).is_none());
    }

    #[test]
    fn plot_series() {
        let empty = emit_plot_script(&Summary::default(), &PlotStyle::default());
        assert_eq!(empty["layer"].as_array().unwrap().len(), 0);
        let recs = vec![rec(0, 0, 1.0), rec(0, 1, 2.0), rec(1, 0, 3.0)];
        let s = Summary::from_records(&[0.0, 1.0], &recs, vec![]);
        assert_eq!(emit_plot_script(&s, &PlotStyle::default())["layer"].as_array().unwrap().len(), 2);
        let markers = vec![vec![("S".to_string(), 1.0), ("H+".into(), 0.5), ("H-".into(), -0.5)]; 2];
        let s = Summary::from_records(&[0.0, 1.0], &recs, markers);
        assert_eq!(emit_plot_script(&s, &PlotStyle::default())["layer"].as_array().unwrap().len(), 5);
        assert_eq!(s.points[0].lambda_max.as_ref().unwrap().mean, 1.5);
    }
}
