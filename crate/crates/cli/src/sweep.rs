//! Parameter sweeps over θ and one noise or angle parameter.

use std::fmt::Write as _;

use rayon::prelude::*;
use teleport_core::analytic::{closed_form_angles, closed_form_fidelity, Convention};
use teleport_core::channels::{BobNoise, ChannelNoise, PerOperation};
use teleport_core::optimize::{maximize_by_coefficients, oracle_evaluator};
use teleport_core::protocol::{AverageMeasure, Teleporter};

use crate::parse::{BobSlot, ParamKind, ParamSweep, Range};

pub const CSV_HEADER: &str = "theta,param,f_analytic,f_oracle,phi_star,phi_prime_star";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub theta: Range,
    pub param: Option<ParamSweep>,
    pub channel: ChannelNoise,
    pub bob: BobNoise,
    pub measure: AverageMeasure,
    pub nodes: usize,
    pub phi: f64,
    pub phi_prime: f64,
    /// Evaluate at `phi`/`phi_prime` instead of at the optimum.
    pub fixed_angles: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub param: Option<f64>,
    pub f_analytic: Option<f64>,
    pub f_oracle: f64,
    pub phi_star: f64,
    pub phi_prime_star: f64,
}

struct Point {
    theta: f64,
    param: Option<f64>,
    channel: ChannelNoise,
    bob: BobNoise,
    phi: Option<f64>,
}

fn set_slot(p: PerOperation, slot: BobSlot, value: f64) -> PerOperation {
    let mut p = p;
    match slot {
        BobSlot::I => p.i = value,
        BobSlot::Z => p.z = value,
        BobSlot::X => p.x = value,
        BobSlot::Y => p.y = value,
    }
    p
}

fn apply_param(
    plan: &SweepPlan,
    kind: ParamKind,
    value: f64,
) -> Result<(ChannelNoise, BobNoise, Option<f64>), String> {
    let (mut channel, mut bob, mut phi) = (plan.channel, plan.bob, None);
    match kind {
        ParamKind::Channel => {
            if plan.channel.probability().is_none() {
                return Err("sweeping `channel` needs a noisy --channel kind".into());
            }
            channel = plan.channel.with_probability(value);
        }
        ParamKind::Bob(slot) => {
            let p = plan
                .bob
                .probabilities()
                .ok_or("sweeping Bob's probabilities needs a noisy --bob kind")?;
            bob = plan.bob.with_probabilities(set_slot(p, slot, value));
        }
        ParamKind::BobXyz => {
            let p = plan
                .bob
                .probabilities()
                .ok_or("sweeping Bob's probabilities needs a noisy --bob kind")?;
            bob = plan
                .bob
                .with_probabilities(PerOperation::new(p.i, value, value, value));
        }
        ParamKind::Phi => phi = Some(value),
    }
    channel.validate().map_err(|e| e.to_string())?;
    bob.validate().map_err(|e| e.to_string())?;
    Ok((channel, bob, phi))
}

fn points(plan: &SweepPlan) -> Result<Vec<Point>, String> {
    let mut out = Vec::new();
    for theta in plan.theta.values() {
        match &plan.param {
            None => out.push(Point {
                theta,
                param: None,
                channel: plan.channel,
                bob: plan.bob,
                phi: None,
            }),
            Some(sweep) => {
                for value in sweep.range.values() {
                    let (channel, bob, phi) = apply_param(plan, sweep.kind, value)?;
                    out.push(Point {
                        theta,
                        param: Some(value),
                        channel,
                        bob,
                        phi,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn evaluate(plan: &SweepPlan, point: &Point) -> Result<SweepRow, String> {
    let tele = Teleporter::new(point.theta, point.channel, point.bob).map_err(|e| e.to_string())?;
    let eval = oracle_evaluator(&tele, plan.measure, plan.nodes);
    let best = maximize_by_coefficients(&eval);
    let conv = Convention::SIMULATION;
    let closed = closed_form_angles(point.theta, &point.channel, &point.bob, conv).ok();

    let (oracle_at, analytic_at) = if plan.fixed_angles {
        let at = (point.phi.unwrap_or(plan.phi), plan.phi_prime);
        (at, Some(at))
    } else {
        let oracle_at = (point.phi.unwrap_or(best.phi_star), best.phi_prime_star);
        let analytic_at = closed.map(|(a, b)| (point.phi.unwrap_or(a), b));
        (oracle_at, analytic_at)
    };
    let f_analytic = match (plan.measure, analytic_at) {
        (AverageMeasure::UniformGamma, Some((a, b))) => {
            closed_form_fidelity(point.theta, a, b, &point.channel, &point.bob, conv)
        }
        _ => None,
    };
    Ok(SweepRow {
        theta: point.theta,
        param: point.param,
        f_analytic,
        f_oracle: eval(oracle_at.0, oracle_at.1),
        phi_star: best.phi_star,
        phi_prime_star: best.phi_prime_star,
    })
}

/// Row order is θ outer, parameter inner, independent of scheduling.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>, String> {
    if plan.nodes < teleport_core::protocol::MIN_NODES {
        return Err(format!(
            "--nodes must be at least {}",
            teleport_core::protocol::MIN_NODES
        ));
    }
    let pts = points(plan)?;
    pts.par_iter().map(|p| evaluate(plan, p)).collect()
}

fn field(out: &mut String, value: Option<f64>) {
    if let Some(v) = value {
        let _ = write!(out, "{v:.16e}");
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        field(&mut out, Some(r.theta));
        out.push(',');
        field(&mut out, r.param);
        out.push(',');
        field(&mut out, r.f_analytic);
        out.push(',');
        field(&mut out, Some(r.f_oracle));
        out.push(',');
        field(&mut out, Some(r.phi_star));
        out.push(',');
        field(&mut out, Some(r.phi_prime_star));
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err("unexpected CSV header".into());
    }
    let opt = |s: &str| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| format!("bad CSV number `{s}`"))
        }
    };
    let req = |s: &str| opt(s)?.ok_or_else(|| "missing CSV value".to_string());
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(format!("CSV row has {} fields", f.len()));
            }
            Ok(SweepRow {
                theta: req(f[0])?,
                param: opt(f[1])?,
                f_analytic: opt(f[2])?,
                f_oracle: req(f[3])?,
                phi_star: req(f[4])?,
                phi_prime_star: req(f[5])?,
            })
        })
        .collect()
}
