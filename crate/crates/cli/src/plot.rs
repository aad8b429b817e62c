use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qsmatch_core::stats::{aggregate, read_records_csv, StatRecord};
use serde::Serialize;

use crate::config::config_hash;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// Success frequency against θ₀.
    Success,
    /// Reconstructed kept-qubit angle against θ₀.
    Theta1,
}

#[derive(Debug, Serialize)]
pub struct Marker {
    pub theta0: f64,
    pub mean: f64,
    pub std: f64,
    pub inside: bool,
}

#[derive(Debug, Serialize)]
pub struct Panel {
    pub epsilon: f64,
    /// `[θ₀, value]`
    pub theory: Vec<[f64; 2]>,
    /// `[θ₀, lo, hi]`
    pub band: Vec<[f64; 3]>,
    pub markers: Vec<Marker>,
}

#[derive(Debug, Serialize)]
pub struct PlotData {
    pub kind: PlotKind,
    pub panels: Vec<Panel>,
}

pub fn series(records: &[StatRecord], kind: PlotKind) -> PlotData {
    let mut shots: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for r in records {
        shots.entry((r.epsilon.to_bits(), r.theta0.to_bits())).or_insert(r.shots);
    }
    let mut panels: Vec<Panel> = Vec::new();
    for row in aggregate(records) {
        if panels.last().is_none_or(|p| p.epsilon != row.epsilon) {
            panels.push(Panel {
                epsilon: row.epsilon,
                theory: vec![],
                band: vec![],
                markers: vec![],
            });
        }
        let panel = panels.last_mut().unwrap();
        let (value, lo, hi, mean, std) = match kind {
            PlotKind::Success => {
                let half = 3.0 * row.sigma;
                (
                    row.p_ideal,
                    (row.p_ideal - half).max(0.0),
                    (row.p_ideal + half).min(1.0),
                    Some(row.p_est_mean),
                    Some(row.p_est_std),
                )
            }
            PlotKind::Theta1 => {
                let m = shots[&(row.epsilon.to_bits(), row.theta0.to_bits())] as f64;
                let half = 3.0 / (row.p_ideal * m).sqrt();
                (
                    row.theta1_ideal,
                    (row.theta1_ideal - half).max(0.0),
                    (row.theta1_ideal + half).min(PI),
                    row.theta1_mean,
                    row.theta1_std,
                )
            }
        };
        panel.theory.push([row.theta0, value]);
        panel.band.push([row.theta0, lo, hi]);
        if let (Some(mean), Some(std)) = (mean, std) {
            panel.markers.push(Marker {
                theta0: row.theta0,
                mean,
                std,
                inside: lo <= mean && mean <= hi,
            });
        }
    }
    PlotData { kind, panels }
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 280.0;
const LEFT: f64 = 52.0;
const RIGHT: f64 = 14.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 42.0;

pub fn render_svg(data: &PlotData) -> String {
    let cols = data.panels.len().min(2);
    let rows = data.panels.len().div_ceil(2);
    let (width, height) = (PANEL_W * cols as f64, PANEL_H * rows as f64);
    let (y_max, y_label, y_ticks): (f64, &str, [(&str, f64); 3]) = match data.kind {
        PlotKind::Success => (1.0, "success frequency", [("0", 0.0), ("0.5", 0.5), ("1", 1.0)]),
        PlotKind::Theta1 => (PI, "θ₁ (rad)", [("0", 0.0), ("π/2", PI / 2.0), ("π", PI)]),
    };
    let x_max = data
        .panels
        .iter()
        .flat_map(|p| p.theory.iter().map(|t| t[0]))
        .fold(0.0, f64::max);
    let x_max = if x_max > 0.0 { x_max } else { 1.0 };
    let (pw, ph) = (PANEL_W - LEFT - RIGHT, PANEL_H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + x / x_max * pw;
    let sy = |y: f64| TOP + (1.0 - y / y_max) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    let json = serde_json::to_string(data).expect("plot data serializes");
    writeln!(s, "<metadata id=\"series\"><![CDATA[{json}]]></metadata>").unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, panel) in data.panels.iter().enumerate() {
        let (ox, oy) = (PANEL_W * (i % 2) as f64, PANEL_H * (i / 2) as f64);
        writeln!(s, r#"<g transform="translate({ox},{oy})">"#).unwrap();
        writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        let mut pts: Vec<String> = panel.band.iter().map(|b| format!("{:.2},{:.2}", sx(b[0]), sy(b[2]))).collect();
        pts.extend(panel.band.iter().rev().map(|b| format!("{:.2},{:.2}", sx(b[0]), sy(b[1]))));
        writeln!(
            s,
            r##"<polygon class="band" points="{}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>"##,
            pts.join(" ")
        )
        .unwrap();
        let line: Vec<String> = panel.theory.iter().map(|t| format!("{:.2},{:.2}", sx(t[0]), sy(t[1]))).collect();
        writeln!(
            s,
            r##"<polyline class="theory" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
            line.join(" ")
        )
        .unwrap();
        for m in &panel.markers {
            let (x, y0, y1) = (sx(m.theta0), sy((m.mean - m.std).max(0.0)), sy((m.mean + m.std).min(y_max)));
            writeln!(
                s,
                r##"<line class="error-bar" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#b22222"/>"##
            )
            .unwrap();
            writeln!(
                s,
                r##"<circle class="marker" cx="{x:.2}" cy="{:.2}" r="2.5" fill="#b22222"/>"##,
                sy(m.mean)
            )
            .unwrap();
        }
        for (label, y) in y_ticks {
            let yy = sy(y);
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                LEFT - 4.0,
                yy + 4.0
            )
            .unwrap();
        }
        for x in [0.0, x_max / 2.0, x_max] {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.2}</text>"#,
                sx(x),
                TOP + ph + 14.0
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">θ₀ (rad)</text>"#,
            LEFT + pw / 2.0,
            TOP + ph + 32.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text transform="translate(14,{:.2}) rotate(-90)" text-anchor="middle">{y_label}</text>"#,
            TOP + ph / 2.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">ε = {}</text>"#,
            LEFT + pw / 2.0,
            panel.epsilon
        )
        .unwrap();
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

pub fn plot(csv_path: &Path, kind: PlotKind, out_dir: &Path) -> Result<PathBuf> {
    let file = std::fs::File::open(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let records = read_records_csv(file).map_err(|e| CliError::input(csv_path, e))?;
    if records.is_empty() {
        return Err(CliError::input(csv_path, "no records to plot"));
    }
    let data = series(&records, kind);
    let svg = render_svg(&data);
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join(match kind {
        PlotKind::Success => "success.svg",
        PlotKind::Theta1 => "theta1.svg",
    });
    std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
    #[derive(Serialize)]
    struct Inputs<'a> {
        csv: &'a Path,
        kind: PlotKind,
    }
    let mut manifest = RunManifest::new(
        &format!("plot-{}", kind.to_possible_value().unwrap().get_name()),
        config_hash(&Inputs { csv: csv_path, kind }),
        None,
        out_dir,
    );
    manifest.artifacts.push(path.clone());
    manifest.write()?;
    Ok(path)
}
