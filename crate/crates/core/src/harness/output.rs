//! Trace CSV, summary JSON and convergence SVG rendering.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;
use crate::solver::TraceRow;

pub const CSV_HEADER: &str = "trial,t,eta,f_gap,grad_norm,dist_to_star,linear_envelope,sublinear_envelope,a_of_x,near_antipodal";

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn csv_row(trial: usize, row: &TraceRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        trial,
        row.t,
        num(row.eta),
        num(Some(row.f_gap)),
        num(Some(row.grad_norm)),
        num(row.dist_to_star),
        num(row.linear_envelope),
        num(row.sublinear_envelope),
        num(row.a_of_x),
        row.near_antipodal.map(|b| b.to_string()).unwrap_or_default(),
    )
}

/// Pretty JSON whose floats carry 17 significant digits.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// One curve of a convergence plot.
#[derive(Clone, Debug)]
pub struct Curve {
    pub label: String,
    pub trial: usize,
    pub dashed: bool,
    pub points: Vec<(usize, f64)>,
}

/// A log-scale panel of curves.
#[derive(Clone, Debug)]
pub struct Panel {
    pub title: String,
    pub curves: Vec<Curve>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const FLOOR: f64 = 1e-32;
const MAX_POINTS: usize = 400;
const WIDTH: f64 = 820.0;
const PANEL_HEIGHT: f64 = 380.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

fn downsample(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let stride = points.len().div_ceil(MAX_POINTS).max(1);
    let mut out: Vec<_> = points.iter().copied().step_by(stride).collect();
    if let (Some(last), Some(kept)) = (points.last(), out.last()) {
        if last.0 != kept.0 {
            out.push(*last);
        }
    }
    out
}

/// A self-contained SVG with one log₁₀-scale panel per entry. Envelopes are
/// drawn dashed. The output depends only on the input values.
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.iter().enumerate() {
        render_panel(&mut s, panel, k as f64 * PANEL_HEIGHT);
    }
    s.push_str("</svg>\n");
    s
}

fn render_panel(s: &mut String, panel: &Panel, y0: f64) {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
    let t_max = panel
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let logs: Vec<f64> = panel
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.1.max(FLOOR).log10()))
        .filter(|v| v.is_finite())
        .collect();
    let mut lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let sx = |t: f64| LEFT + plot_w * t / t_max;
    let sy = |v: f64| y0 + TOP + plot_h * (hi - v.max(FLOOR).log10()) / (hi - lo);

    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13">{}</text>"#,
        LEFT,
        y0 + TOP - 14.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444"/>"##,
        y0 + TOP
    );
    let decades = (hi - lo) as i64;
    let step = (decades / 8).max(1);
    let mut d = lo as i64;
    while d <= hi as i64 {
        let y = sy(10f64.powi(d as i32));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
        d += step;
    }
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = (t_max * frac).round();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            y0 + TOP + plot_h + 16.0,
            t as u64
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration t</text>"#,
        LEFT + plot_w / 2.0,
        y0 + PANEL_HEIGHT - 6.0
    );

    for curve in &panel.curves {
        if curve.points.is_empty() {
            continue;
        }
        let color = PALETTE[curve.trial % PALETTE.len()];
        let pts: Vec<String> = downsample(&curve.points)
            .iter()
            .map(|&(t, v)| format!("{:.2},{:.2}", sx(t as f64), sy(v)))
            .collect();
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&curve.label)
        );
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
