//! Numerical maximization of the average fidelity over `(φ, φ')`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use rayon::prelude::*;

use crate::analytic::AngularTerms;
use crate::error::{Error, Result};
use crate::protocol::{AverageMeasure, MeasurementBasis, Teleporter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    CoefficientExtraction,
    GridRefine,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::CoefficientExtraction => "coefficient-extraction",
            Method::GridRefine => "grid-refine",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub phi_star: f64,
    pub phi_prime_star: f64,
    pub f_star: f64,
    pub method: Method,
    pub evaluations: usize,
    /// Incumbent value after the coarse stage and after each accepted step.
    pub history: Vec<f64>,
}

/// Smallest grid accepted by [`maximize_by_grid`].
pub const MIN_GRID: usize = 33;
/// Width below which a line search stops.
pub const LINE_TOL: f64 = 1e-10;
const POLISH_STEP: f64 = 1e-4;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Oracle average fidelity as a function of the measurement angles.
pub fn oracle_evaluator(
    teleporter: &Teleporter,
    measure: AverageMeasure,
    nodes: usize,
) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    move |phi, phi_prime| {
        let basis = MeasurementBasis::unconstrained(phi, phi_prime).expect("finite angles");
        teleporter
            .average_fidelity(&basis, measure, nodes)
            .expect("validated quadrature order")
    }
}

/// Exact maximization for evaluators of the c-form: five samples fix the
/// angular terms, one more evaluates the optimum.
pub fn maximize_by_coefficients(evaluator: impl Fn(f64, f64) -> f64) -> OptimizationResult {
    let terms = AngularTerms::fit(&evaluator);
    let (phi_star, phi_prime_star) = terms.argmax();
    let f_star = evaluator(phi_star, phi_prime_star);
    OptimizationResult {
        phi_star,
        phi_prime_star,
        f_star,
        method: Method::CoefficientExtraction,
        evaluations: 6,
        history: vec![f_star],
    }
}

struct Search<'a, F> {
    evaluator: &'a F,
    evaluations: usize,
}

impl<F: Fn(f64, f64) -> f64> Search<'_, F> {
    fn eval(&mut self, point: [f64; 2]) -> f64 {
        self.evaluations += 1;
        (self.evaluator)(point[0], point[1])
    }

    /// Best point found along `axis` within `[lo, hi]`, endpoints included.
    fn line_max(&mut self, point: [f64; 2], axis: usize, lo: f64, hi: f64) -> ([f64; 2], f64) {
        let at = |x: f64| {
            let mut p = point;
            p[axis] = x;
            p
        };
        let mut best = (at(lo), self.eval(at(lo)));
        let f_hi = self.eval(at(hi));
        if f_hi > best.1 {
            best = (at(hi), f_hi);
        }
        let (mut a, mut b) = (lo, hi);
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let mut fc = self.eval(at(c));
        let mut fd = self.eval(at(d));
        while b - a > LINE_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = self.eval(at(c));
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = self.eval(at(d));
            }
        }
        for (x, f) in [(c, fc), (d, fd)] {
            if f > best.1 {
                best = (at(x), f);
            }
        }
        best
    }

    /// Vertex of the parabola through three points spaced `POLISH_STEP`.
    fn polish(&mut self, point: [f64; 2], f0: f64, axis: usize) -> Option<([f64; 2], f64)> {
        let x = point[axis];
        if x - POLISH_STEP < 0.0 || x + POLISH_STEP > FRAC_PI_2 {
            return None;
        }
        let mut p = point;
        p[axis] = x - POLISH_STEP;
        let fm = self.eval(p);
        p[axis] = x + POLISH_STEP;
        let fp = self.eval(p);
        let curvature = fp - 2.0 * f0 + fm;
        if curvature >= 0.0 {
            return None;
        }
        let shift = 0.5 * POLISH_STEP * (fm - fp) / curvature;
        if shift.abs() > POLISH_STEP {
            return None;
        }
        p[axis] = x + shift;
        let f = self.eval(p);
        Some((p, f))
    }
}

/// Coarse `grid_n × grid_n` scan of `[0, π/2]²` followed by `refine_iters`
/// rounds of coordinate-wise golden-section shrinking around the incumbent.
/// Grid ties go to the point nearest the Bell basis, then to the lowest
/// index.
pub fn maximize_by_grid(
    evaluator: impl Fn(f64, f64) -> f64 + Sync,
    grid_n: usize,
    refine_iters: usize,
) -> Result<OptimizationResult> {
    if grid_n < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least {MIN_GRID} points per axis, got {grid_n}"
        )));
    }
    let spacing = FRAC_PI_2 / (grid_n - 1) as f64;
    let node = |k: usize| k as f64 * spacing;
    let rows: Vec<Vec<f64>> = (0..grid_n)
        .into_par_iter()
        .map(|i| (0..grid_n).map(|j| evaluator(node(i), node(j))).collect())
        .collect();

    let bell = [FRAC_PI_4, FRAC_PI_4];
    let distance = |p: [f64; 2]| (p[0] - FRAC_PI_4).hypot(p[1] - FRAC_PI_4);
    let mut point = bell;
    let mut value = evaluator(bell[0], bell[1]);
    for (i, row) in rows.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let candidate = [node(i), node(j)];
            if f > value || (f == value && distance(candidate) < distance(point)) {
                point = candidate;
                value = f;
            }
        }
    }

    let mut search = Search {
        evaluator: &evaluator,
        evaluations: grid_n * grid_n + 1,
    };
    let mut history = vec![value];
    let mut half_width = spacing;
    for _ in 0..refine_iters {
        let mut improved = false;
        for axis in 0..2 {
            let lo = (point[axis] - half_width).max(0.0);
            let hi = (point[axis] + half_width).min(FRAC_PI_2);
            let (p, f) = search.line_max(point, axis, lo, hi);
            if f > value {
                point = p;
                value = f;
                history.push(value);
                improved = true;
            }
        }
        if !improved {
            half_width /= 10.0;
        }
    }
    for axis in 0..2 {
        if let Some((p, f)) = search.polish(point, value, axis) {
            if f >= value {
                point = p;
                value = f;
                history.push(value);
            }
        }
    }

    Ok(OptimizationResult {
        phi_star: point[0],
        phi_prime_star: point[1],
        f_star: value,
        method: Method::GridRefine,
        evaluations: search.evaluations,
        history,
    })
}
