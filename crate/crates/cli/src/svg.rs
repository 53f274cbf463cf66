//! Minimal self-contained SVG plots: axes, line series, heatmaps, legends.

use std::f64::consts::PI;
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 500.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 410.0;

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub ticks: Vec<(f64, String)>,
}

impl Axis {
    /// Ticks at multiples of `π/denominator`.
    pub fn in_pi(label: &str, min: f64, max: f64, denominator: u32) -> Axis {
        let step = PI / denominator as f64;
        let first = (min / step - 1e-9).ceil() as i64;
        let last = (max / step + 1e-9).floor() as i64;
        let ticks = (first..=last)
            .map(|k| (k as f64 * step, pi_fraction(k, denominator as i64)))
            .collect();
        Axis {
            label: label.to_string(),
            min,
            max,
            ticks,
        }
    }

    /// `divisions + 1` evenly spaced ticks.
    pub fn linear(label: &str, min: f64, max: f64, divisions: usize) -> Axis {
        let ticks = (0..=divisions)
            .map(|k| {
                let v = min + (max - min) * k as f64 / divisions as f64;
                (v, trim_number(v))
            })
            .collect();
        Axis {
            label: label.to_string(),
            min,
            max,
            ticks,
        }
    }

    fn span(&self) -> f64 {
        if self.max > self.min {
            self.max - self.min
        } else {
            1.0
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn pi_fraction(k: i64, d: i64) -> String {
    if k == 0 {
        return "0".into();
    }
    let g = gcd(k, d);
    let (n, d) = (k / g, d / g);
    let head = match n {
        1 => "π".to_string(),
        -1 => "-π".to_string(),
        n => format!("{n}π"),
    };
    if d == 1 {
        head
    } else {
        format!("{head}/{d}")
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dash: Option<&'static str>,
}

pub struct Heatmap {
    /// Cell centres along x, ascending.
    pub xs: Vec<f64>,
    /// Cell centres along y, ascending.
    pub ys: Vec<f64>,
    /// `values[iy][ix]`
    pub values: Vec<Vec<f64>>,
    pub label: String,
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.min) / self.x.span() * (RIGHT - LEFT)
    }

    fn py(&self, y: f64) -> f64 {
        BOTTOM - (y - self.y.min) / self.y.span() * (BOTTOM - TOP)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    for (v, label) in &frame.x.ticks {
        let x = frame.px(*v);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{BOTTOM}" x2="{x:.2}" y2="{:.1}" stroke="black"/><text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            BOTTOM + 5.0,
            BOTTOM + 20.0,
            escape(label)
        );
    }
    for (v, label) in &frame.y.ticks {
        let y = frame.py(*v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0,
        escape(&frame.x.label)
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{:.1}" text-anchor="middle" transform="rotate(-90 22 {:.1})">{}</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&frame.y.label)
    );
}

fn polyline(out: &mut String, frame: &Frame, s: &Series) {
    let pts: Vec<String> = s
        .points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let dash = s
        .dash
        .map(|d| format!(r#" stroke-dasharray="{d}""#))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        r#"<polyline class="series" fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
        s.color,
        pts.join(" ")
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (k, s) in series.iter().enumerate() {
        let y = TOP + 15.0 + 20.0 * k as f64;
        let dash = s
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            RIGHT + 10.0,
            RIGHT + 35.0,
            s.color,
            RIGHT + 40.0,
            y + 4.0,
            escape(&s.label)
        );
    }
}

pub fn line_plot(title: &str, x: Axis, y: Axis, series: &[Series]) -> String {
    let frame = Frame { x, y };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame);
    for s in series {
        polyline(&mut out, &frame, s);
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.iter().position(|s| s.0 >= t).unwrap_or(4).max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let u = (t - t0) / (t1 - t0);
    let mix = |i: usize| (c0[i] + u * (c1[i] - c0[i])).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

fn edges(centres: &[f64]) -> Vec<f64> {
    let n = centres.len();
    if n == 1 {
        return vec![centres[0] - 0.5, centres[0] + 0.5];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(centres[0] - (centres[1] - centres[0]) / 2.0);
    for w in centres.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    e.push(centres[n - 1] + (centres[n - 1] - centres[n - 2]) / 2.0);
    e
}

/// Heatmap with a colour bar and optional overlay lines.
pub fn heatmap_plot(title: &str, x: Axis, y: Axis, heat: &Heatmap, overlays: &[Series]) -> String {
    let frame = Frame { x, y };
    let mut out = String::new();
    header(&mut out, title);
    let (lo, hi) = heat
        .values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (xe, ye) = (edges(&heat.xs), edges(&heat.ys));
    let clip = |v: f64, a: &Axis| v.clamp(a.min, a.max);
    let _ = writeln!(out, r#"<g class="heatmap" shape-rendering="crispEdges">"#);
    for (iy, row) in heat.values.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            let x0 = frame.px(clip(xe[ix], &frame.x));
            let x1 = frame.px(clip(xe[ix + 1], &frame.x));
            let y0 = frame.py(clip(ye[iy + 1], &frame.y));
            let y1 = frame.py(clip(ye[iy], &frame.y));
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x1 - x0,
                y1 - y0,
                color((v - lo) / span)
            );
        }
    }
    out.push_str("</g>\n");
    axes(&mut out, &frame);
    for s in overlays {
        polyline(&mut out, &frame, s);
    }
    let bar_x = RIGHT + 20.0;
    let steps = 50;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let yk = BOTTOM - (BOTTOM - TOP) * (k + 1) as f64 / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x:.1}" y="{yk:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            (BOTTOM - TOP) / steps as f64 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}">{}</text>"#,
        bar_x + 24.0,
        TOP + 4.0,
        trim_number(hi),
        bar_x + 24.0,
        BOTTOM + 4.0,
        trim_number(lo),
        bar_x - 4.0,
        TOP - 10.0,
        escape(&heat.label)
    );
    if !overlays.is_empty() {
        let y = BOTTOM + 45.0;
        for (k, s) in overlays.iter().enumerate() {
            let x = RIGHT - 120.0 * (k + 1) as f64 + 40.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                x + 20.0,
                s.color,
                x + 24.0,
                y + 4.0,
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
