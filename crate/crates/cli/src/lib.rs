//! Command-line front end for the teleportation simulator.

pub mod figures;
pub mod parse;
pub mod svg;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use teleport_core::acceptance::{run_all_with, DEFAULT_SEED};
use teleport_core::analytic::{
    closed_form_angles, closed_form_fidelity, favg_pure, Convention, DeltaCoefficients,
};
use teleport_core::channels::{BobNoise, ChannelNoise};
use teleport_core::optimize::{maximize_by_coefficients, maximize_by_grid, oracle_evaluator};
use teleport_core::protocol::{
    average_fidelity_jittered, AverageMeasure, MeasurementBasis, MeasurementJitter, Teleporter,
    DEFAULT_NODES,
};

use parse::{
    config_tokens, measure_name, parse_angle, parse_bob, parse_channel, parse_jitter,
    parse_measure, parse_param, parse_range, ParamSweep, Range,
};
use sweep::{run_sweep, to_csv, SweepPlan};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn config_err(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

const NOISE_HELP: &str = "\
Noise grammar:
  --channel  pure | werner:pW | bitflip:p | signflip:p | depol:p
  --bob      ideal | depol:pI,pz,px,py | bitflip:pI,pz,px,py | signflip:pI,pz,px,py
             (a single probability applies to all four corrections)
Angles are radians; `pi/4`, `3pi/8` and `0.5*pi` are accepted.
A --config file holds `key = value` lines named after the flags; flags given
on the command line take precedence.";

#[derive(Debug, Parser)]
#[command(
    name = "teleport",
    version,
    about = "Teleportation fidelity with a tunable measurement basis and noisy corrections",
    after_help = NOISE_HELP,
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average fidelity at one configuration: closed form and oracle.
    Fidelity(FidelityArgs),
    /// Optimal measurement angles: closed form, coefficient fit and grid search.
    Optimize(OptimizeArgs),
    /// Sweep θ and one parameter, writing CSV.
    Sweep(SweepArgs),
    /// Render the standard figures as SVG.
    Figures(FiguresArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Resource angle θ in [0, π/4].
    #[arg(long, value_parser = parse_angle, default_value = "pi/4")]
    theta: f64,
    /// Measurement angle φ in [0, π/2].
    #[arg(long, value_parser = parse_angle, default_value = "pi/4")]
    phi: f64,
    /// Measurement angle φ′ in [0, π/2].
    #[arg(long = "phi-prime", value_parser = parse_angle, default_value = "pi/4")]
    phi_prime: f64,
    /// Noise on the shared resource.
    #[arg(long, value_parser = parse_channel, default_value = "pure")]
    channel: ChannelNoise,
    /// Noise on Bob's conditional operations.
    #[arg(long, value_parser = parse_bob, default_value = "ideal")]
    bob: BobNoise,
    /// Input-state average: uniform-gamma or haar.
    #[arg(long, value_parser = parse_measure, default_value = "uniform-gamma")]
    measure: AverageMeasure,
    /// Quadrature order (at least 8).
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FidelityArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also report closed-form and oracle-optimal angles.
    #[arg(long)]
    optimal: bool,
    /// Gaussian jitter `s_phi,s_phip,phi0,phip0` on the doubled angles.
    #[arg(long, value_parser = parse_jitter)]
    jitter: Option<MeasurementJitter>,
    /// Monte Carlo samples for --jitter.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Seed for --jitter.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Coarse grid points per axis (at least 33).
    #[arg(long = "grid", default_value_t = 65)]
    grid: usize,
    /// Refinement rounds after the coarse grid.
    #[arg(long = "refine", default_value_t = 8)]
    refine: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// θ values as start:stop:steps.
    #[arg(long = "theta-range", value_parser = parse_range, default_value = "0:pi/4:9")]
    theta_range: Range,
    /// Swept parameter as kind:start:stop:steps, kind one of channel, bob-pI,
    /// bob-pz, bob-px, bob-py, bob-pxyz, phi.
    #[arg(long, value_parser = parse_param)]
    param: Option<ParamSweep>,
    /// Evaluate at --phi/--phi-prime instead of at the optimum.
    #[arg(long = "fixed-angles")]
    fixed_angles: bool,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded for reproducibility; sweeps are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    /// Output directory for CSV and SVG files.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Quadrature order (at least 8).
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Add this constant to the closed-form fidelity (suite self-check).
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb: f64,
    #[arg(long)]
    config: Option<PathBuf>,
}

const SWITCHES: [&str; 2] = ["optimal", "fixed-angles"];

/// Splices `--config` file contents in right after the subcommand so that
/// later command-line flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    for (k, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(k + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.to_string_lossy())))?;
    let tokens = config_tokens(&text, &SWITCHES).map_err(CliError::Config)?;
    let mut out = Vec::with_capacity(args.len() + tokens.len());
    let split = 2.min(args.len());
    out.extend_from_slice(&args[..split]);
    out.extend(tokens);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

fn teleporter(m: &ModelArgs) -> Result<Teleporter, CliError> {
    Teleporter::new(m.theta, m.channel, m.bob).map_err(config_err)
}

fn describe(out: &mut String, m: &ModelArgs) {
    let _ = writeln!(out, "theta      = {:.10}", m.theta);
    let _ = writeln!(out, "channel    = {}", m.channel);
    let _ = writeln!(out, "bob        = {}", m.bob);
    let _ = writeln!(out, "measure    = {}", measure_name(m.measure));
    let _ = writeln!(out, "nodes      = {}", m.nodes);
}

fn warn(bob: &BobNoise) {
    for w in bob.warnings() {
        eprintln!("warning: {w}");
    }
}

const CONVENTION: Convention = Convention::SIMULATION;
const AGREEMENT_TOL: f64 = 1e-9;
const ANGLE_AGREEMENT: f64 = 1e-6;

fn closed_form_available(m: &ModelArgs) -> bool {
    m.measure == AverageMeasure::UniformGamma
}

fn cmd_fidelity(a: &FidelityArgs) -> Result<String, CliError> {
    let m = &a.model;
    warn(&m.bob);
    let basis = MeasurementBasis::new(m.phi, m.phi_prime).map_err(config_err)?;
    let tele = teleporter(m)?;
    let oracle = tele
        .average_fidelity(&basis, m.measure, m.nodes)
        .map_err(config_err)?;
    let analytic = closed_form_available(m)
        .then(|| closed_form_fidelity(m.theta, m.phi, m.phi_prime, &m.channel, &m.bob, CONVENTION))
        .flatten();

    let mut out = String::new();
    describe(&mut out, m);
    let _ = writeln!(out, "phi        = {:.10}", m.phi);
    let _ = writeln!(out, "phi_prime  = {:.10}", m.phi_prime);
    match analytic {
        Some(f) => {
            let _ = writeln!(out, "F_analytic = {f:.16}");
        }
        None => {
            let _ = writeln!(
                out,
                "F_analytic = n/a (no closed form for this model and measure)"
            );
        }
    }
    let _ = writeln!(out, "F_oracle   = {oracle:.16}");
    if let Some(f) = analytic {
        let diff = f - oracle;
        let flag = if diff.abs() <= AGREEMENT_TOL {
            ""
        } else {
            "  DISCREPANCY"
        };
        let _ = writeln!(out, "difference = {diff:.3e}{flag}");
    }

    if a.optimal {
        let eval = oracle_evaluator(&tele, m.measure, m.nodes);
        let best = maximize_by_coefficients(&eval);
        let _ = writeln!(
            out,
            "oracle optimum      phi* = {:.10}  phi'* = {:.10}  F* = {:.16}",
            best.phi_star, best.phi_prime_star, best.f_star
        );
        if let Ok((phi, phi_prime)) = closed_form_angles(m.theta, &m.channel, &m.bob, CONVENTION) {
            let f = eval(phi, phi_prime);
            let gap = (phi - best.phi_star)
                .abs()
                .max((phi_prime - best.phi_prime_star).abs());
            let flag = if gap <= ANGLE_AGREEMENT {
                ""
            } else {
                "  DISCREPANCY"
            };
            let _ = writeln!(
                out,
                "closed-form optimum phi* = {phi:.10}  phi'* = {phi_prime:.10}  F(oracle) = {f:.16}{flag}"
            );
            if let Ok((lp, lpp)) =
                closed_form_angles(m.theta, &m.channel, &m.bob, Convention::LITERAL)
            {
                let lgap = (lp - best.phi_star)
                    .abs()
                    .max((lpp - best.phi_prime_star).abs());
                if lgap > ANGLE_AGREEMENT {
                    let _ = writeln!(
                        out,
                        "printed-convention  phi* = {lp:.10}  phi'* = {lpp:.10}  F(oracle) = {:.16}  differs from oracle optimum by {lgap:.3e} rad",
                        eval(lp, lpp)
                    );
                }
            }
        }
    }

    if let Some(jitter) = &a.jitter {
        let est = average_fidelity_jittered(&tele, m.measure, m.nodes, jitter, a.samples, a.seed)
            .map_err(config_err)?;
        let terms = tele.extract_terms(m.measure, m.nodes).map_err(config_err)?;
        let formula = terms.gaussian_damped(jitter);
        let z = if est.stderr > 0.0 {
            (est.mean - formula).abs() / est.stderr
        } else {
            0.0
        };
        let _ = writeln!(
            out,
            "F_jitter (Monte Carlo) = {:.10} +/- {:.2e}  ({} samples, seed {})",
            est.mean, est.stderr, est.samples, a.seed
        );
        let _ = writeln!(
            out,
            "F_jitter (formula)     = {formula:.10}  ({z:.2} standard errors)"
        );
    }
    Ok(out)
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<String, CliError> {
    let m = &a.model;
    warn(&m.bob);
    let tele = teleporter(m)?;
    let eval = oracle_evaluator(&tele, m.measure, m.nodes);
    let coefficient = maximize_by_coefficients(&eval);
    let grid = maximize_by_grid(&eval, a.grid, a.refine).map_err(config_err)?;

    let mut out = String::new();
    describe(&mut out, m);
    match closed_form_angles(m.theta, &m.channel, &m.bob, CONVENTION) {
        Ok((phi, phi_prime)) => {
            let f = eval(phi, phi_prime);
            let _ = writeln!(
                out,
                "closed form            phi* = {phi:.10}  phi'* = {phi_prime:.10}  F* = {f:.16}"
            );
        }
        Err(e) => {
            let _ = writeln!(out, "closed form            n/a ({e})");
        }
    }
    for r in [&coefficient, &grid] {
        let _ = writeln!(
            out,
            "{:<22} phi* = {:.10}  phi'* = {:.10}  F* = {:.16}  ({} evaluations)",
            r.method.to_string(),
            r.phi_star,
            r.phi_prime_star,
            r.f_star,
            r.evaluations
        );
    }
    Ok(out)
}

fn cmd_sweep(a: &SweepArgs) -> Result<String, CliError> {
    let m = &a.model;
    warn(&m.bob);
    let plan = SweepPlan {
        theta: a.theta_range,
        param: a.param,
        channel: m.channel,
        bob: m.bob,
        measure: m.measure,
        nodes: m.nodes,
        phi: m.phi,
        phi_prime: m.phi_prime,
        fixed_angles: a.fixed_angles,
    };
    let csv = to_csv(&run_sweep(&plan).map_err(CliError::Config)?);
    match &a.out {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn cmd_figures(a: &FiguresArgs) -> Result<String, CliError> {
    let written = figures::write_all(&a.out, a.nodes)?;
    let mut out = String::new();
    for path in written {
        let _ = writeln!(out, "wrote {path}");
    }
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> Result<String, CliError> {
    let perturb = a.perturb;
    let formula = move |t: f64, phi: f64, phip: f64, d: &DeltaCoefficients, c: Convention| {
        favg_pure(t, phi, phip, d, c) + perturb
    };
    let report = run_all_with(a.seed, &formula);
    print!("{}", report.render());
    if report.passed() {
        Ok(String::new())
    } else {
        Err(CliError::Verification)
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figures(a) => cmd_figures(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            if !matches!(e, CliError::Verification) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}
