//! The five standard figures: sweep definitions and rendering.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::path::Path;

use teleport_core::channels::{BobNoise, ChannelNoise, PerOperation};
use teleport_core::protocol::AverageMeasure;

use crate::parse::{ParamKind, ParamSweep, Range};
use crate::svg::{heatmap_plot, line_plot, Axis, Heatmap, Series};
use crate::sweep::{from_csv, run_sweep, to_csv, SweepPlan, SweepRow};
use crate::CliError;

pub const FIGURES: [&str; 5] = ["fig1a", "fig1b", "fig2a", "fig2b", "fig2c"];

/// `p` with `1 − 4p/3 = δ`.
fn p_of(delta: f64) -> f64 {
    0.75 * (1.0 - delta)
}

fn range(start: f64, stop: f64, steps: usize) -> Range {
    Range { start, stop, steps }
}

/// Sweep behind each figure.
pub fn figure_plan(name: &str, nodes: usize) -> Option<SweepPlan> {
    let theta = range(0.0, FRAC_PI_4, 41);
    let z_only = BobNoise::DepolarizingPerOp(PerOperation::new(0.0, p_of(0.9), 0.0, 0.0));
    let base = SweepPlan {
        theta,
        param: None,
        channel: ChannelNoise::Pure,
        bob: BobNoise::DepolarizingPerOp(PerOperation::new(0.0, 0.0, 0.0, 0.0)),
        measure: AverageMeasure::UniformGamma,
        nodes,
        phi: FRAC_PI_4,
        phi_prime: FRAC_PI_4,
        fixed_angles: false,
    };
    let curves = |channel: ChannelNoise, stop: f64| SweepPlan {
        theta: range(0.0, FRAC_PI_4, 61),
        param: Some(ParamSweep {
            kind: ParamKind::Channel,
            range: range(0.0, stop, 3),
        }),
        channel,
        bob: z_only,
        ..base.clone()
    };
    Some(match name {
        "fig1a" => SweepPlan {
            param: Some(ParamSweep {
                kind: ParamKind::BobXyz,
                range: range(0.0, 0.75, 31),
            }),
            ..base
        },
        "fig1b" => SweepPlan {
            param: Some(ParamSweep {
                kind: ParamKind::Phi,
                range: range(0.0, FRAC_PI_2, 46),
            }),
            bob: BobNoise::DepolarizingPerOp(PerOperation::new(
                0.0,
                p_of(0.9),
                p_of(0.9),
                p_of(0.9),
            )),
            ..base
        },
        "fig2a" => curves(ChannelNoise::BitFlipEach(0.0), 0.1),
        "fig2b" => curves(ChannelNoise::SignFlipEach(0.0), 0.1),
        "fig2c" => curves(ChannelNoise::DepolarizeEach(0.0), 0.15),
        _ => return None,
    })
}

/// Distinct values in first-seen order.
fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn grid(rows: &[SweepRow]) -> (Vec<f64>, Vec<f64>) {
    (
        distinct(rows.iter().map(|r| r.theta)),
        distinct(rows.iter().filter_map(|r| r.param)),
    )
}

fn theta_axis() -> Axis {
    Axis::in_pi("θ", 0.0, FRAC_PI_4, 16)
}

fn render_fig1a(rows: &[SweepRow]) -> Result<String, CliError> {
    let (thetas, ps) = grid(rows);
    if ps.is_empty() {
        return Err(CliError::Config(
            "fig1a data has no parameter column".into(),
        ));
    }
    let deltas: Vec<f64> = ps.iter().map(|p| 1.0 - 4.0 * p / 3.0).collect();
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
    let values = order
        .iter()
        .map(|&k| {
            (0..thetas.len())
                .map(|i| rows[i * ps.len() + k].f_oracle)
                .collect()
        })
        .collect();
    let heat = Heatmap {
        xs: thetas,
        ys: order.iter().map(|&k| deltas[k]).collect(),
        values,
        label: "F_av".into(),
    };
    Ok(heatmap_plot(
        "(a) average fidelity at optimal φ, φ′ (δI = 1, δx = δy = δz)",
        theta_axis(),
        Axis::linear("δz", 0.0, 1.0, 5),
        &heat,
        &[],
    ))
}

fn render_fig1b(rows: &[SweepRow]) -> Result<String, CliError> {
    let (thetas, phis) = grid(rows);
    if phis.is_empty() {
        return Err(CliError::Config(
            "fig1b data has no parameter column".into(),
        ));
    }
    let values = (0..phis.len())
        .map(|k| {
            (0..thetas.len())
                .map(|i| rows[i * phis.len() + k].f_oracle)
                .collect()
        })
        .collect();
    let overlay = Series {
        label: "optimal φ".into(),
        points: (0..thetas.len())
            .map(|i| (thetas[i], rows[i * phis.len()].phi_star))
            .collect(),
        color: "red",
        dash: None,
    };
    let heat = Heatmap {
        xs: thetas,
        ys: phis,
        values,
        label: "F_av".into(),
    };
    Ok(heatmap_plot(
        "(b) average fidelity at optimal φ′ (δI = 1, δx = δy = δz = 0.9)",
        theta_axis(),
        Axis::in_pi("φ", 0.0, FRAC_PI_2, 8),
        &heat,
        &[overlay],
    ))
}

const STYLES: [(&str, Option<&str>); 3] = [
    ("black", None),
    ("red", Some("6 4")),
    ("green", Some("2 3")),
];

fn render_curves(name: &str, rows: &[SweepRow]) -> Result<String, CliError> {
    let (thetas, ps) = grid(rows);
    if ps.is_empty() {
        return Err(CliError::Config(format!(
            "{name} data has no parameter column"
        )));
    }
    let (title, symbol, factor): (&str, &str, fn(f64) -> (f64, &'static str)) = match name {
        "fig2a" => ("(a) optimal φ, bit flip on the resource", "p_bf", |p| {
            (1.0 - 2.0 * p, "1-2p")
        }),
        "fig2b" => ("(b) optimal φ, sign flip on the resource", "p_sf", |p| {
            (1.0 - 2.0 * p, "1-2p")
        }),
        _ => (
            "(c) optimal φ, depolarization of the resource",
            "p_d",
            |p| (1.0 - 4.0 * p / 3.0, "1-4p/3"),
        ),
    };
    let series: Vec<Series> = ps
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let (f, form) = factor(p);
            let (color, dash) = STYLES[k % STYLES.len()];
            Series {
                label: format!("{symbol} = {p:.3} ({form} = {f:.2})"),
                points: (0..thetas.len())
                    .map(|i| (thetas[i], rows[i * ps.len() + k].phi_star))
                    .collect(),
                color,
                dash,
            }
        })
        .collect();
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold((FRAC_PI_4, FRAC_PI_4), |(a, b), v| (a.min(v), b.max(v)));
    let step = std::f64::consts::PI / 16.0;
    let (lo, hi) = ((lo / step).floor() * step, (hi / step).ceil() * step);
    Ok(line_plot(
        &format!("{title} (δI = 1, δz = 0.9)"),
        theta_axis(),
        Axis::in_pi("optimal φ", lo, hi.max(lo + step), 16),
        &series,
    ))
}

pub fn render(name: &str, rows: &[SweepRow]) -> Result<String, CliError> {
    match name {
        "fig1a" => render_fig1a(rows),
        "fig1b" => render_fig1b(rows),
        _ => render_curves(name, rows),
    }
}

/// Writes `<name>.csv` (when missing) and `<name>.svg` for every figure.
pub fn write_all(dir: &Path, nodes: usize) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for name in FIGURES {
        let csv_path = dir.join(format!("{name}.csv"));
        let rows = if csv_path.exists() {
            let text = fs::read_to_string(&csv_path)
                .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
            from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", csv_path.display())))?
        } else {
            let plan = figure_plan(name, nodes).expect("known figure");
            let rows = run_sweep(&plan).map_err(CliError::Config)?;
            fs::write(&csv_path, to_csv(&rows))
                .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
            rows
        };
        let svg_path = dir.join(format!("{name}.svg"));
        fs::write(&svg_path, render(name, &rows)?)
            .map_err(|e| CliError::Io(format!("{}: {e}", svg_path.display())))?;
        written.push(svg_path.display().to_string());
    }
    Ok(written)
}
