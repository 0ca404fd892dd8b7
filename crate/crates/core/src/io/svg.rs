//! Minimal deterministic SVG plots: stacked panels of line or scatter
//! series, optional colouring by a third variable and a dashed reference line.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Scalar;
use crate::sync::{RatioSeries, SyncErrors};

/// Longest polyline emitted per series; longer inputs are thinned by
/// keeping the minimum and maximum of each bucket.
const MAX_LINE_POINTS: usize = 4000;
const MAX_MARKERS: usize = 6000;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Line,
    Scatter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Per-point values mapped onto a colour ramp.
    pub color_by: Option<Vec<f64>>,
    pub mark: Mark,
}

impl Series {
    pub fn line(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series {
            label: label.into(),
            x,
            y,
            color_by: None,
            mark: Mark::Line,
        }
    }

    pub fn scatter(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series {
            mark: Mark::Scatter,
            ..Series::line(label, x, y)
        }
    }

    pub fn colored(mut self, values: Vec<f64>) -> Self {
        self.color_by = Some(values);
        self
    }

    fn finite_points(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.x
            .iter()
            .zip(&self.y)
            .enumerate()
            .filter(|(_, (x, y))| x.is_finite() && y.is_finite())
            .map(|(i, (x, y))| (i, *x, *y))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal dashed line at this value.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub width: f64,
    pub panel_height: f64,
    pub title: String,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            width: 720.0,
            panel_height: 300.0,
            title: String::new(),
        }
    }
}

struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn bounds(panel: &Panel) -> Option<Bounds> {
    let mut b = Bounds {
        x0: f64::INFINITY,
        x1: f64::NEG_INFINITY,
        y0: f64::INFINITY,
        y1: f64::NEG_INFINITY,
    };
    for s in &panel.series {
        for (_, x, y) in s.finite_points() {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y0 = b.y0.min(y);
            b.y1 = b.y1.max(y);
        }
    }
    if !b.x0.is_finite() {
        return None;
    }
    if let Some(r) = panel.reference.filter(|r| r.is_finite()) {
        b.y0 = b.y0.min(r);
        b.y1 = b.y1.max(r);
    }
    for (lo, hi) in [(&mut b.x0, &mut b.x1), (&mut b.y0, &mut b.y1)] {
        if *hi - *lo <= f64::EPSILON * lo.abs().max(1.0) {
            let pad = lo.abs().max(1.0) * 0.5;
            *lo -= pad;
            *hi += pad;
        } else {
            let pad = 0.04 * (*hi - *lo);
            *lo -= pad;
            *hi += pad;
        }
    }
    Some(b)
}

/// Colour ramp from dark blue through teal to yellow.
fn ramp(t: f64) -> String {
    let stops = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (a, b, f) = if t < 0.5 {
        (stops[0], stops[1], t * 2.0)
    } else {
        (stops[1], stops[2], (t - 0.5) * 2.0)
    };
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Indices kept when thinning a line: min and max of each bucket, in order.
fn thin(points: &[(usize, f64, f64)]) -> Vec<(usize, f64, f64)> {
    if points.len() <= MAX_LINE_POINTS {
        return points.to_vec();
    }
    let buckets = MAX_LINE_POINTS / 2;
    let mut out = Vec::with_capacity(MAX_LINE_POINTS);
    for b in 0..buckets {
        let chunk = &points[b * points.len() / buckets..(b + 1) * points.len() / buckets];
        if chunk.is_empty() {
            continue;
        }
        let lo = chunk.iter().min_by(|p, q| p.2.total_cmp(&q.2)).expect("nonempty");
        let hi = chunk.iter().max_by(|p, q| p.2.total_cmp(&q.2)).expect("nonempty");
        if lo.0 <= hi.0 {
            out.push(*lo);
            if hi.0 != lo.0 {
                out.push(*hi);
            }
        } else {
            out.push(*hi);
            out.push(*lo);
        }
    }
    out
}

/// Renders the panels stacked vertically into a standalone SVG document.
pub fn render_svg(panels: &[Panel], style: &Style) -> Result<String> {
    if panels.is_empty() || panels.iter().all(|p| bounds(p).is_none()) {
        return Err(Error::EmptySeries);
    }
    let top = if style.title.is_empty() { 0.0 } else { 30.0 };
    let height = top + style.panel_height * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{height:.0}" viewBox="0 0 {w:.0} {height:.0}" font-family="sans-serif" font-size="12">"#,
        w = style.width
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
            style.width / 2.0,
            escape(&style.title)
        );
    }
    for (k, panel) in panels.iter().enumerate() {
        let oy = top + k as f64 * style.panel_height;
        let (left, right, ptop, pbottom) = (
            70.0,
            style.width - 20.0,
            oy + 25.0,
            oy + style.panel_height - 45.0,
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
            (left + right) / 2.0,
            oy + 16.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{left:.1}" y="{ptop:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            right - left,
            pbottom - ptop
        );
        let Some(b) = bounds(panel) else { continue };
        let sx = |x: f64| left + (x - b.x0) / (b.x1 - b.x0) * (right - left);
        let sy = |y: f64| pbottom - (y - b.y0) / (b.y1 - b.y0) * (pbottom - ptop);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = b.x0 + f * (b.x1 - b.x0);
            let yv = b.y0 + f * (b.y1 - b.y0);
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                pbottom + 15.0,
                tick(xv)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                left - 4.0,
                sy(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            pbottom + 32.0,
            escape(&panel.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            (ptop + pbottom) / 2.0,
            (ptop + pbottom) / 2.0,
            escape(&panel.y_label)
        );
        if let Some(r) = panel.reference.filter(|r| r.is_finite()) {
            let _ = writeln!(
                svg,
                r#"<line x1="{left:.1}" y1="{y:.2}" x2="{right:.1}" y2="{y:.2}" stroke="red" stroke-dasharray="6 4"/>"#,
                y = sy(r)
            );
        }
        for (si, s) in panel.series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let pts: Vec<(usize, f64, f64)> = s.finite_points().collect();
            if pts.is_empty() {
                continue;
            }
            let scale = s.color_by.as_ref().map(|c| {
                let (lo, hi) = c
                    .iter()
                    .filter(|v| v.is_finite())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                        (a.min(*v), b.max(*v))
                    });
                (c, lo, if hi > lo { hi - lo } else { 1.0 })
            });
            match (s.mark, pts.len()) {
                (Mark::Line, n) if n > 1 && scale.is_none() => {
                    let mut d = String::new();
                    for (j, (_, x, y)) in thin(&pts).iter().enumerate() {
                        let _ = write!(
                            d,
                            "{}{:.2},{:.2}",
                            if j == 0 { "M" } else { " L" },
                            sx(*x),
                            sy(*y)
                        );
                    }
                    let _ = writeln!(
                        svg,
                        r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1"/>"#
                    );
                }
                _ => {
                    let stride = pts.len().div_ceil(MAX_MARKERS);
                    for (i, x, y) in pts.iter().step_by(stride) {
                        let fill = match &scale {
                            Some((c, lo, span)) => ramp((c.get(*i).copied().unwrap_or(f64::NAN) - lo) / span),
                            None => color.to_string(),
                        };
                        let _ = writeln!(
                            svg,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{fill}"/>"#,
                            sx(*x),
                            sy(*y)
                        );
                    }
                }
            }
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="{color}">{}</text>"#,
                right - 6.0,
                ptop + 14.0 + 14.0 * si as f64,
                escape(&s.label)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn to_f64<T: Scalar>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.as_f64()).collect()
}

/// Amplitude and phase error panels.
pub fn sync_error_panels<T: Scalar>(errors: &SyncErrors<T>, label: &str) -> Vec<Panel> {
    let t = to_f64(&errors.times);
    let phase: Vec<f64> = errors
        .phase
        .iter()
        .map(|p| p.map_or(f64::NAN, |x| x.as_f64()))
        .collect();
    vec![
        Panel {
            title: "amplitude error |alpha_2| - |alpha_1|".into(),
            x_label: "t (ns)".into(),
            y_label: "amplitude error".into(),
            series: vec![Series::line(label, t.clone(), to_f64(&errors.amplitude))],
            reference: Some(0.0),
        },
        Panel {
            title: "phase error cos(theta_2) - cos(theta_1)".into(),
            x_label: "t (ns)".into(),
            y_label: "phase error".into(),
            series: vec![Series::line(label, t, phase)],
            reference: Some(0.0),
        },
    ]
}

/// Unwrapped-phase ratio with the expected lock value as a dashed line.
pub fn ratio_panel<T: Scalar>(ratio: &RatioSeries<T>, target: f64) -> Panel {
    Panel {
        title: "phase ratio Psi_s / Psi_w".into(),
        x_label: "t (ns)".into(),
        y_label: "ratio".into(),
        series: vec![Series::line(
            "Psi_s/Psi_w",
            to_f64(&ratio.times),
            to_f64(&ratio.ratio),
        )],
        reference: Some(target),
    }
}

/// Phase portrait `(re, im)` of one cavity mode coloured by a fourth channel.
pub fn portrait_panel<T: Scalar>(traj: &Trajectory<T>, re: &str, im: &str, color: &str) -> Result<Panel> {
    Ok(Panel {
        title: format!("{re} vs {im}, colour: {color}"),
        x_label: re.into(),
        y_label: im.into(),
        series: vec![
            Series::scatter("orbit", to_f64(&traj.column(re)?), to_f64(&traj.column(im)?))
                .colored(to_f64(&traj.column(color)?)),
        ],
        reference: None,
    })
}
