//! Minimal deterministic SVG line and scatter plots of CSV columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::io::Table;
use crate::{AppError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Scatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Column plotted on the y axis.
    pub column: String,
    pub label: String,
    /// CSV file holding the column; defaults to the spec input.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub input: PathBuf,
    pub x: String,
    pub series: Vec<Series>,
    pub output: PathBuf,
    pub kind: PlotKind,
    pub title: String,
}

impl PlotSpec {
    /// One series per y column, labeled by column name.
    pub fn simple(input: &Path, x: &str, ys: &[&str], output: &Path, kind: PlotKind) -> Self {
        PlotSpec {
            input: input.to_path_buf(),
            x: x.to_string(),
            series: ys
                .iter()
                .map(|y| Series {
                    column: y.to_string(),
                    label: y.to_string(),
                    input: None,
                })
                .collect(),
            output: output.to_path_buf(),
            kind,
            title: String::new(),
        }
    }
}

struct Points {
    label: String,
    xy: Vec<(f64, f64)>,
}

fn load_series(spec: &PlotSpec) -> Result<Vec<Points>> {
    let mut out = Vec::with_capacity(spec.series.len());
    for s in &spec.series {
        let path = s.input.as_deref().unwrap_or(&spec.input);
        let t = Table::read(path)?;
        let xs = t.floats(path, &spec.x)?;
        let ys = t.floats(path, &s.column)?;
        let xy: Vec<(f64, f64)> = xs
            .into_iter()
            .zip(ys)
            .filter_map(|(x, y)| Some((x?, y?)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if xy.is_empty() {
            return Err(AppError::format(path, format!("no data in `{}` against `{}`", s.column, spec.x)));
        }
        out.push(Points {
            label: s.label.clone(),
            xy,
        });
    }
    if out.is_empty() {
        return Err(AppError::Usage("plot needs at least one y column".into()));
    }
    Ok(out)
}

/// Tick positions covering `[lo, hi]` with a 1-2-5 step.
fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    let t = (0..=n).map(|i| start + i as f64 * step).collect();
    (start, end, t)
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot to an SVG string.
pub fn render(spec: &PlotSpec) -> Result<String> {
    let series = load_series(spec)?;
    let all = series.iter().flat_map(|s| s.xy.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1, xt) = ticks(x0, x1);
    let (y0, y1, yt) = ticks(y0, y1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&spec.title)
        );
    }
    for &t in &xt {
        let x = px(t);
        let _ = writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 16.0,
            tick_label(t)
        );
    }
    for &t in &yt {
        let y = py(t);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x)
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        match spec.kind {
            PlotKind::Line => {
                let _ = write!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points=""#);
                for (k, &(x, y)) in s.xy.iter().enumerate() {
                    let sep = if k == 0 { "" } else { " " };
                    let _ = write!(w, "{sep}{:.2},{:.2}", px(x), py(y));
                }
                let _ = writeln!(w, r#""/>"#);
            }
            PlotKind::Scatter => {
                let _ = writeln!(w, r#"<g fill="{color}" fill-opacity="0.5">"#);
                for &(x, y) in &s.xy {
                    let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#, px(x), py(y));
                }
                let _ = writeln!(w, "</g>");
            }
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            w,
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="3" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 10.0,
            ly - 5.0,
            LEFT + 28.0,
            ly,
            escape(&s.label)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

/// Renders and writes the plot; nothing is written on error.
pub fn plot(spec: &PlotSpec) -> Result<()> {
    let svg = render(spec)?;
    std::fs::write(&spec.output, svg).map_err(|e| AppError::io(&spec.output, e))
}
