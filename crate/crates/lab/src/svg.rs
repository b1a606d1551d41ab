//! Minimal SVG line charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::LabError;
use crate::table::ResultTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// How a table is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// First column on a linear x axis, every other numeric column a series.
    Line,
    /// As [`ChartKind::Line`] with a logarithmic x axis.
    LogX,
    /// Both axes logarithmic.
    LogLog,
    /// Phase plane: `d` on x, `a` on y, one curve per value of `series`.
    Phase,
}

impl ChartKind {
    pub fn x_log(self) -> bool {
        matches!(self, ChartKind::LogX | ChartKind::LogLog)
    }

    pub fn y_log(self) -> bool {
        matches!(self, ChartKind::LogLog)
    }
}

/// Chart used for a table by default, if any.
pub fn default_chart(t: &ResultTable) -> Option<ChartKind> {
    if t.rows.len() < 2 {
        return None;
    }
    match t.name.as_str() {
        "fig2a" | "scaling" => Some(ChartKind::LogX),
        "fig2b" => Some(ChartKind::LogLog),
        "fig3" | "deterrence_grid" => Some(ChartKind::Line),
        "trajectories" => Some(ChartKind::Phase),
        n if n.starts_with("fig1_") => Some(ChartKind::Phase),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn series_of(t: &ResultTable, kind: ChartKind) -> (String, String, Vec<Series>) {
    if kind == ChartKind::Phase {
        let (Some(sj), Some(dj), Some(aj)) = (t.column_index("series"), t.column_index("d"), t.column_index("a")) else {
            return ("d".into(), "a".into(), Vec::new());
        };
        let mut groups: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
        for row in &t.rows {
            if let (Some(s), Some(d), Some(a)) = (row[sj].num(), row[dj].num(), row[aj].num()) {
                groups.entry(s as i64).or_default().push((d, a));
            }
        }
        let label_for = |k: i64| {
            t.metadata
                .extra
                .iter()
                .find(|(key, _)| *key == format!("series.{k}"))
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| format!("series {k}"))
        };
        let series = groups
            .into_iter()
            .map(|(k, points)| Series {
                label: label_for(k),
                points,
            })
            .collect();
        return ("d".into(), "a".into(), series);
    }
    let x_name = t.columns.first().cloned().unwrap_or_default();
    let series = (1..t.columns.len())
        .filter_map(|j| {
            let points = t
                .rows
                .iter()
                .map(|r| Some((r[0].num()?, r[j].num()?)))
                .collect::<Option<Vec<_>>>()?;
            Some(Series {
                label: t.columns[j].clone(),
                points,
            })
        })
        .collect();
    (x_name, String::new(), series)
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (lo, hi) = (self.lo as i32, self.hi as i32);
            let stride = ((hi - lo) / 8).max(1);
            (lo..=hi)
                .step_by(stride as usize)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let mut v = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= self.hi + 1e-9 * step {
                out.push(((v - self.lo) / (self.hi - self.lo), tick_label(v)));
                v += step;
            }
            out
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e4 || v.abs() < 1e-3 {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the table as an SVG document.
pub fn render_svg(t: &ResultTable, kind: ChartKind) -> String {
    let (x_label, y_label, series) = series_of(t, kind);
    let xs = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), kind.x_log());
    let ys = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), kind.y_log());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |f: f64| LEFT + f * pw;
    let py = |f: f64| TOP + (1.0 - f) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&t.name)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (f, label) in xs.ticks() {
        let x = px(f);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 16.0,
            escape(&label)
        );
    }
    for (f, label) in ys.ticks() {
        let y = py(f);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&x_label),
        if kind.x_log() { " (log)" } else { "" }
    );
    if !y_label.is_empty() || kind.y_log() {
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&y_label),
            if kind.y_log() { " (log)" } else { "" }
        );
    }
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", px(xs.frac(x)?), py(ys.frac(y)?))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the table as an SVG chart to `path`.
pub fn emit_svg(t: &ResultTable, kind: ChartKind, path: &Path) -> Result<(), LabError> {
    std::fs::write(path, render_svg(t, kind)).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })
}
