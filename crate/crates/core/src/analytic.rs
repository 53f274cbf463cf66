//! Closed-form average fidelities and optimal measurement angles.
//!
//! Every model shares the form
//!
//! ```text
//! F = c1 + c2 cos2θ cos2φ + c3 cos2θ cos2φ' + c4 sin2θ sin2φ + c5 sin2θ sin2φ'
//! ```
//!
//! so each optimal angle is the argmax of `a cos2φ + b sin2φ` on `[0, π/2]`.
//!
//! Two details of the displayed formulas disagree with the exact simulation
//! and are exposed through [`Convention`]:
//!
//! * the `cos2θ cos2φ'` term is written with `(δx − δy)`; simulation gives
//!   `(δy − δx)` (and `p_x − p_y` instead of `p_y − p_x` for bit-flip
//!   corrections), which moves the optimal `φ'` to the other side of π/4;
//! * per-qubit depolarization of the resource is written with the factor
//!   `1 − 2p_d`; the four-operator Kraus set contracts the Bloch vector by
//!   `1 − 4p_d/3`.
//!
//! [`Convention::LITERAL`] evaluates the formulas exactly as written and
//! [`Convention::SIMULATION`] is the variant that agrees with the simulator.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::channels::{ChannelNoise, PerOperation, MAX_DEPOLARIZING};
use crate::error::{check_range, Error, Result};
use crate::protocol::MeasurementJitter;

/// Sign of the `cos2θ cos2φ'` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimedCosSign {
    /// `(δx − δy)`; bit-flip corrections use `p_y − p_x`.
    Literal,
    /// `(δy − δx)`; bit-flip corrections use `p_x − p_y`.
    Flipped,
}

/// Bloch contraction assigned to per-qubit depolarization of the resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepolarizeFactor {
    /// `1 − 2p_d`
    Literal,
    /// `1 − 4p_d/3`
    KrausContraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Convention {
    pub primed_cos: PrimedCosSign,
    pub depolarize: DepolarizeFactor,
}

impl Convention {
    pub const LITERAL: Convention = Convention {
        primed_cos: PrimedCosSign::Literal,
        depolarize: DepolarizeFactor::Literal,
    };
    pub const SIMULATION: Convention = Convention {
        primed_cos: PrimedCosSign::Flipped,
        depolarize: DepolarizeFactor::KrausContraction,
    };

    fn xy_sign(&self) -> f64 {
        match self.primed_cos {
            PrimedCosSign::Literal => 1.0,
            PrimedCosSign::Flipped => -1.0,
        }
    }

    /// Per-qubit contraction factor of resource depolarization with probability `p`.
    pub fn depolarize_eta(&self, p: f64) -> f64 {
        match self.depolarize {
            DepolarizeFactor::Literal => 1.0 - 2.0 * p,
            DepolarizeFactor::KrausContraction => 1.0 - 4.0 * p / 3.0,
        }
    }
}

impl Default for Convention {
    fn default() -> Self {
        Convention::SIMULATION
    }
}

/// `δ = 1 − 4p/3` for a depolarizing strength `p` in `[0, 3/4]`.
pub fn delta_from_p(p: f64) -> Result<f64> {
    Ok(1.0 - 4.0 * check_range("p", p, 0.0, MAX_DEPOLARIZING)? / 3.0)
}

/// Reliability of each conditional operation, `δ_ν = 1 − 4p_ν/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCoefficients {
    pub i: f64,
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl DeltaCoefficients {
    pub fn new(i: f64, z: f64, x: f64, y: f64) -> Result<Self> {
        for (name, v) in [
            ("delta_I", i),
            ("delta_z", z),
            ("delta_x", x),
            ("delta_y", y),
        ] {
            check_range(name, v, -1.0 / 3.0, 1.0)?;
        }
        Ok(Self { i, z, x, y })
    }

    pub fn ideal() -> Self {
        Self {
            i: 1.0,
            z: 1.0,
            x: 1.0,
            y: 1.0,
        }
    }

    pub fn from_probabilities(p: &PerOperation) -> Result<Self> {
        Ok(Self {
            i: delta_from_p(p.i)?,
            z: delta_from_p(p.z)?,
            x: delta_from_p(p.x)?,
            y: delta_from_p(p.y)?,
        })
    }

    pub fn sum(&self) -> f64 {
        self.i + self.z + self.x + self.y
    }
}

/// Multipliers applied by resource noise to the `Σδ`, cosine and sine groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDamping {
    pub constant: f64,
    pub cos: f64,
    pub sin: f64,
}

impl ChannelDamping {
    pub const NONE: ChannelDamping = ChannelDamping {
        constant: 1.0,
        cos: 1.0,
        sin: 1.0,
    };

    pub fn for_channel(noise: &ChannelNoise, conv: Convention) -> ChannelDamping {
        match *noise {
            ChannelNoise::Pure => Self::NONE,
            ChannelNoise::Werner(p) => ChannelDamping {
                constant: p,
                cos: p,
                sin: p,
            },
            ChannelNoise::BitFlipEach(p) => {
                let q = 1.0 - 2.0 * p;
                ChannelDamping {
                    constant: q * q,
                    cos: q,
                    sin: 1.0,
                }
            }
            ChannelNoise::SignFlipEach(p) => {
                let q = 1.0 - 2.0 * p;
                ChannelDamping {
                    constant: 1.0,
                    cos: 1.0,
                    sin: q * q,
                }
            }
            ChannelNoise::DepolarizeEach(p) => {
                let eta = conv.depolarize_eta(p);
                ChannelDamping {
                    constant: eta * eta,
                    cos: eta,
                    sin: eta * eta,
                }
            }
        }
    }
}

/// `F(φ, φ') = constant + cos_phi cos2φ + cos_phi_prime cos2φ' + sin_phi sin2φ + sin_phi_prime sin2φ'`
/// at a fixed θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularTerms {
    pub constant: f64,
    pub cos_phi: f64,
    pub cos_phi_prime: f64,
    pub sin_phi: f64,
    pub sin_phi_prime: f64,
}

/// The five sample points used by [`AngularTerms::fit`].
pub const FIT_POINTS: [(f64, f64); 5] = [
    (0.0, 0.0),
    (FRAC_PI_2, 0.0),
    (0.0, FRAC_PI_2),
    (FRAC_PI_4, 0.0),
    (0.0, FRAC_PI_4),
];

impl AngularTerms {
    pub fn evaluate(&self, phi: f64, phi_prime: f64) -> f64 {
        let (s, c) = (2.0 * phi).sin_cos();
        let (sp, cp) = (2.0 * phi_prime).sin_cos();
        self.constant
            + self.cos_phi * c
            + self.cos_phi_prime * cp
            + self.sin_phi * s
            + self.sin_phi_prime * sp
    }

    /// Solves for the five terms from values at [`FIT_POINTS`], in order.
    pub fn from_samples(values: [f64; 5]) -> AngularTerms {
        let [f00, f90, f09, f40, f04] = values;
        let cos_phi = (f00 - f90) / 2.0;
        let cos_phi_prime = (f00 - f09) / 2.0;
        let constant = (f90 + f09) / 2.0;
        AngularTerms {
            constant,
            cos_phi,
            cos_phi_prime,
            sin_phi: f40 - constant - cos_phi_prime,
            sin_phi_prime: f04 - constant - cos_phi,
        }
    }

    pub fn fit(mut evaluator: impl FnMut(f64, f64) -> f64) -> AngularTerms {
        let values = FIT_POINTS.map(|(a, b)| evaluator(a, b));
        Self::from_samples(values)
    }

    /// The maximizing `(φ, φ')`.
    pub fn argmax(&self) -> (f64, f64) {
        (
            maximizing_angle(self.cos_phi, self.sin_phi),
            maximizing_angle(self.cos_phi_prime, self.sin_phi_prime),
        )
    }
}

/// The coefficients `c1 … c5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

/// `|sin2θ|` or `|cos2θ|` below this make the matching coefficients unidentifiable.
pub const IDENTIFIABILITY_TOL: f64 = 1e-9;

impl FidelityCoefficients {
    pub fn terms(&self, theta: f64) -> AngularTerms {
        let (s, c) = (2.0 * theta).sin_cos();
        AngularTerms {
            constant: self.c1,
            cos_phi: self.c2 * c,
            cos_phi_prime: self.c3 * c,
            sin_phi: self.c4 * s,
            sin_phi_prime: self.c5 * s,
        }
    }

    pub fn evaluate(&self, theta: f64, phi: f64, phi_prime: f64) -> f64 {
        self.terms(theta).evaluate(phi, phi_prime)
    }

    /// Divides the θ factors back out of fitted terms.
    pub fn from_terms(terms: &AngularTerms, theta: f64) -> Result<FidelityCoefficients> {
        let (s, c) = (2.0 * theta).sin_cos();
        if s.abs() < IDENTIFIABILITY_TOL || c.abs() < IDENTIFIABILITY_TOL {
            return Err(Error::DegenerateTheta(theta));
        }
        Ok(FidelityCoefficients {
            c1: terms.constant,
            c2: terms.cos_phi / c,
            c3: terms.cos_phi_prime / c,
            c4: terms.sin_phi / s,
            c5: terms.sin_phi_prime / s,
        })
    }

    /// Coefficients for depolarizing corrections on a resource with `damping`.
    pub fn depolarizing_bob(
        deltas: &DeltaCoefficients,
        damping: ChannelDamping,
        conv: Convention,
    ) -> FidelityCoefficients {
        let d = deltas;
        FidelityCoefficients {
            c1: 0.5 + damping.constant * d.sum() / 16.0,
            c2: damping.cos * (d.i - d.z) / 16.0,
            c3: damping.cos * conv.xy_sign() * (d.x - d.y) / 16.0,
            c4: damping.sin * (d.i + d.z) / 16.0,
            c5: damping.sin * (d.x + d.y) / 16.0,
        }
    }
}

/// Argmax of `a cos2φ + b sin2φ` over `φ ∈ [0, π/2]`; `π/4` when both vanish.
pub fn maximizing_angle(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return FRAC_PI_4;
    }
    if b >= 0.0 {
        b.abs().atan2(a) / 2.0
    } else if a >= 0.0 {
        // unconstrained optimum below 0 or beyond π/2: pick the better endpoint
        0.0
    } else {
        FRAC_PI_2
    }
}

/// `2φ` from `tan2φ = numer/denom · tan2θ`, on the maximizing branch.
fn angle_from_tan_ratio(numer: f64, denom: f64, theta: f64) -> f64 {
    let (s, c) = (2.0 * theta).sin_cos();
    maximizing_angle(denom * c, numer * s)
}

fn bracket(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    conv: Convention,
) -> (f64, f64) {
    let (s2t, c2t) = (2.0 * theta).sin_cos();
    let cos_part = c2t
        * ((d.i - d.z) * (2.0 * phi).cos()
            + conv.xy_sign() * (d.x - d.y) * (2.0 * phi_prime).cos());
    let sin_part = s2t * ((d.i + d.z) * (2.0 * phi).sin() + (d.x + d.y) * (2.0 * phi_prime).sin());
    (cos_part, sin_part)
}

/// Pure resource, depolarizing corrections.
pub fn favg_pure(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    conv: Convention,
) -> f64 {
    let (cos_part, sin_part) = bracket(theta, phi, phi_prime, d, conv);
    0.5 + (d.sum() + cos_part + sin_part) / 16.0
}

/// Werner-like mixed resource: a global damping of everything above 1/2.
pub fn favg_werner(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    p_w: f64,
    conv: Convention,
) -> f64 {
    let (cos_part, sin_part) = bracket(theta, phi, phi_prime, d, conv);
    0.5 + p_w * (d.sum() + cos_part + sin_part) / 16.0
}

pub fn favg_channel_bitflip(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    p_bf: f64,
    conv: Convention,
) -> f64 {
    let q = 1.0 - 2.0 * p_bf;
    let (cos_part, sin_part) = bracket(theta, phi, phi_prime, d, conv);
    0.5 + (q * q * d.sum() + q * cos_part + sin_part) / 16.0
}

pub fn favg_channel_signflip(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    p_sf: f64,
    conv: Convention,
) -> f64 {
    let q = 1.0 - 2.0 * p_sf;
    let (cos_part, sin_part) = bracket(theta, phi, phi_prime, d, conv);
    0.5 + (d.sum() + cos_part + q * q * sin_part) / 16.0
}

pub fn favg_channel_depolarize(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    d: &DeltaCoefficients,
    p_d: f64,
    conv: Convention,
) -> f64 {
    let eta = conv.depolarize_eta(p_d);
    let (cos_part, sin_part) = bracket(theta, phi, phi_prime, d, conv);
    0.5 + (eta * eta * d.sum() + eta * cos_part + eta * eta * sin_part) / 16.0
}

/// Average fidelity for the models with a closed form: ideal or depolarizing
/// corrections on any resource. `None` for bit-flip and sign-flip corrections.
pub fn closed_form_fidelity(
    theta: f64,
    phi: f64,
    phi_prime: f64,
    channel: &ChannelNoise,
    bob: &crate::channels::BobNoise,
    conv: Convention,
) -> Option<f64> {
    use crate::channels::BobNoise;
    let d = match bob {
        BobNoise::Ideal => DeltaCoefficients::ideal(),
        BobNoise::DepolarizingPerOp(p) => DeltaCoefficients::from_probabilities(p).ok()?,
        _ => return None,
    };
    Some(match *channel {
        ChannelNoise::Pure => favg_pure(theta, phi, phi_prime, &d, conv),
        ChannelNoise::Werner(p) => favg_werner(theta, phi, phi_prime, &d, p, conv),
        ChannelNoise::BitFlipEach(p) => favg_channel_bitflip(theta, phi, phi_prime, &d, p, conv),
        ChannelNoise::SignFlipEach(p) => favg_channel_signflip(theta, phi, phi_prime, &d, p, conv),
        ChannelNoise::DepolarizeEach(p) => {
            favg_channel_depolarize(theta, phi, phi_prime, &d, p, conv)
        }
    })
}

fn primed_denominator(d: &DeltaCoefficients, conv: Convention) -> f64 {
    conv.xy_sign() * (d.x - d.y)
}

/// `tan2φ = (δI+δz)/(δI−δz) tan2θ`, `tan2φ' = (δx+δy)/(δx−δy) tan2θ`.
pub fn optimal_angles_pure(theta: f64, d: &DeltaCoefficients, conv: Convention) -> (f64, f64) {
    (
        angle_from_tan_ratio(d.i + d.z, d.i - d.z, theta),
        angle_from_tan_ratio(d.x + d.y, primed_denominator(d, conv), theta),
    )
}

/// Global damping leaves the optimum where it was.
pub fn optimal_angles_werner(
    theta: f64,
    d: &DeltaCoefficients,
    _p_w: f64,
    conv: Convention,
) -> (f64, f64) {
    optimal_angles_pure(theta, d, conv)
}

/// Ratios scaled by `1/(1 − 2p_bf)`.
pub fn optimal_angles_bitflip(
    theta: f64,
    d: &DeltaCoefficients,
    p_bf: f64,
    conv: Convention,
) -> (f64, f64) {
    let q = 1.0 - 2.0 * p_bf;
    (
        angle_from_tan_ratio(d.i + d.z, q * (d.i - d.z), theta),
        angle_from_tan_ratio(d.x + d.y, q * primed_denominator(d, conv), theta),
    )
}

/// Ratios scaled by `(1 − 2p_sf)²`.
pub fn optimal_angles_signflip(
    theta: f64,
    d: &DeltaCoefficients,
    p_sf: f64,
    conv: Convention,
) -> (f64, f64) {
    let q2 = (1.0 - 2.0 * p_sf).powi(2);
    (
        angle_from_tan_ratio(q2 * (d.i + d.z), d.i - d.z, theta),
        angle_from_tan_ratio(q2 * (d.x + d.y), primed_denominator(d, conv), theta),
    )
}

/// Ratios scaled by the depolarization contraction factor.
pub fn optimal_angles_depolarize(
    theta: f64,
    d: &DeltaCoefficients,
    p_d: f64,
    conv: Convention,
) -> (f64, f64) {
    let eta = conv.depolarize_eta(p_d);
    (
        angle_from_tan_ratio(eta * (d.i + d.z), d.i - d.z, theta),
        angle_from_tan_ratio(eta * (d.x + d.y), primed_denominator(d, conv), theta),
    )
}

/// Bit-flip corrections on Bob's output: `tan2φ = tan2θ/(p_z − p_I)` and
/// `tan2φ' = tan2θ/(p_y − p_x)` (literal sign), each multiplied by the
/// resource factor `damping.sin / damping.cos`.
pub fn optimal_angles_bob_bitflip(
    theta: f64,
    p: &PerOperation,
    damping: ChannelDamping,
    conv: Convention,
) -> (f64, f64) {
    let primed = match conv.primed_cos {
        PrimedCosSign::Literal => p.y - p.x,
        PrimedCosSign::Flipped => p.x - p.y,
    };
    // a zero denominator lands on atan2(b, 0) = π/2, i.e. φ = π/4
    (
        angle_from_tan_ratio(damping.sin, damping.cos * (p.z - p.i), theta),
        angle_from_tan_ratio(damping.sin, damping.cos * primed, theta),
    )
}

/// Sign-flip corrections: the Bell basis is optimal (for `p_I + p_z <= 1`
/// and `p_x + p_y <= 1`; beyond that the sine terms change sign).
pub fn optimal_angles_bob_signflip() -> (f64, f64) {
    (FRAC_PI_4, FRAC_PI_4)
}

/// Closed-form optimal angles for any resource/correction combination.
pub fn closed_form_angles(
    theta: f64,
    channel: &ChannelNoise,
    bob: &crate::channels::BobNoise,
    conv: Convention,
) -> Result<(f64, f64)> {
    use crate::channels::BobNoise;
    channel.validate()?;
    bob.validate()?;
    let d = match bob {
        BobNoise::Ideal => DeltaCoefficients::ideal(),
        BobNoise::DepolarizingPerOp(p) => DeltaCoefficients::from_probabilities(p)?,
        BobNoise::BitFlipPerOp(p) => {
            return Ok(optimal_angles_bob_bitflip(
                theta,
                p,
                ChannelDamping::for_channel(channel, conv),
                conv,
            ))
        }
        BobNoise::SignFlipPerOp(_) => return Ok(optimal_angles_bob_signflip()),
    };
    Ok(match *channel {
        ChannelNoise::Pure => optimal_angles_pure(theta, &d, conv),
        ChannelNoise::Werner(p) => optimal_angles_werner(theta, &d, p, conv),
        ChannelNoise::BitFlipEach(p) => optimal_angles_bitflip(theta, &d, p, conv),
        ChannelNoise::SignFlipEach(p) => optimal_angles_signflip(theta, &d, p, conv),
        ChannelNoise::DepolarizeEach(p) => optimal_angles_depolarize(theta, &d, p, conv),
    })
}

/// Average over Gaussian jitter of the doubled measurement angles:
/// `E[cos X] = e^{−σ²/2} cos μ` for `X ~ N(μ, σ²)`.
pub fn gaussian_damped(c: &FidelityCoefficients, theta: f64, jitter: &MeasurementJitter) -> f64 {
    c.terms(theta).gaussian_damped(jitter)
}

impl AngularTerms {
    /// [`gaussian_damped`] expressed through the angular terms directly.
    pub fn gaussian_damped(&self, jitter: &MeasurementJitter) -> f64 {
        let damp = (-jitter.sigma_phi.powi(2) / 2.0).exp();
        let damp_prime = (-jitter.sigma_phi_prime.powi(2) / 2.0).exp();
        let (s, co) = (2.0 * jitter.phi0).sin_cos();
        let (sp, cp) = (2.0 * jitter.phi0_prime).sin_cos();
        self.constant
            + damp * (self.cos_phi * co + self.sin_phi * s)
            + damp_prime * (self.cos_phi_prime * cp + self.sin_phi_prime * sp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::BobNoise;
    use std::f64::consts::FRAC_PI_8;

    const CONVS: [Convention; 2] = [Convention::LITERAL, Convention::SIMULATION];

    fn deltas(i: f64, z: f64, x: f64, y: f64) -> DeltaCoefficients {
        DeltaCoefficients::new(i, z, x, y).unwrap()
    }

    #[test]
    fn delta_conversion() {
        assert_eq!(delta_from_p(0.0).unwrap(), 1.0);
        assert_eq!(delta_from_p(0.75).unwrap(), 0.0);
        assert!((delta_from_p(0.3).unwrap() - 0.6).abs() < 1e-15);
        assert!(delta_from_p(0.8).is_err());
        assert!(delta_from_p(-0.1).is_err());
    }

    #[test]
    fn ideal_values() {
        let d = DeltaCoefficients::ideal();
        for conv in CONVS {
            assert!((favg_pure(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, &d, conv) - 1.0).abs() < 1e-15);
            let f = favg_pure(FRAC_PI_8, FRAC_PI_4, FRAC_PI_4, &d, conv);
            assert!((f - 0.926_776_695_296_636_9).abs() < 1e-15);
            assert!((f - (0.75 + (FRAC_PI_4).sin() / 4.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_delta_at_bell_point() {
        for delta in [-1.0 / 3.0, 0.0, 0.4, 1.0] {
            let d = deltas(delta, delta, delta, delta);
            let f = favg_pure(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, &d, Convention::LITERAL);
            assert!((f - (0.5 + delta / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_zero_is_one_half() {
        let d = deltas(1.0, 0.6, 0.7, 0.2);
        for (phi, phi_p) in [(0.0, 0.0), (0.4, 1.2), (FRAC_PI_2, 0.3)] {
            assert_eq!(
                favg_werner(0.3, phi, phi_p, &d, 0.0, Convention::LITERAL),
                0.5
            );
        }
    }

    #[test]
    fn channel_bitflip_half_keeps_only_sine_group() {
        let d = deltas(1.0, 0.6, 0.7, 0.2);
        let (theta, phi, phi_p) = (0.5, 0.3, 1.1);
        let got = favg_channel_bitflip(theta, phi, phi_p, &d, 0.5, Convention::LITERAL);
        let want = 0.5
            + (2.0 * theta).sin()
                * ((d.i + d.z) * (2.0 * phi).sin() + (d.x + d.y) * (2.0 * phi_p).sin())
                / 16.0;
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn channel_signflip_damps_only_sine_group() {
        let d = deltas(1.0, 0.6, 0.7, 0.2);
        let (theta, phi, phi_p) = (0.5, 0.3, 1.1);
        for conv in CONVS {
            let pure = favg_pure(theta, phi, phi_p, &d, conv);
            let flat = favg_pure(theta, FRAC_PI_2, FRAC_PI_2, &d, conv);
            let damped = favg_channel_signflip(theta, phi, phi_p, &d, 0.2, conv);
            let flat_damped = favg_channel_signflip(theta, FRAC_PI_2, FRAC_PI_2, &d, 0.2, conv);
            // sin2φ = sin2φ' = 0 at π/2: nothing left to damp
            assert!((flat - flat_damped).abs() < 1e-15);
            let q2 = 0.6f64.powi(2);
            let c = FidelityCoefficients::depolarizing_bob(&d, ChannelDamping::NONE, conv);
            let s2t = (2.0 * theta).sin();
            let sine = s2t * (c.c4 * (2.0 * phi).sin() + c.c5 * (2.0 * phi_p).sin());
            assert!(((damped - pure) - (q2 - 1.0) * sine).abs() < 1e-15);
        }
    }

    #[test]
    fn per_model_formulas_match_coefficient_form() {
        let d = deltas(0.9, 0.5, 0.8, 0.3);
        let (theta, phi, phi_p) = (0.35, 0.9, 0.2);
        for conv in CONVS {
            let cases = [
                (ChannelNoise::Pure, favg_pure(theta, phi, phi_p, &d, conv)),
                (
                    ChannelNoise::Werner(0.4),
                    favg_werner(theta, phi, phi_p, &d, 0.4, conv),
                ),
                (
                    ChannelNoise::BitFlipEach(0.1),
                    favg_channel_bitflip(theta, phi, phi_p, &d, 0.1, conv),
                ),
                (
                    ChannelNoise::SignFlipEach(0.1),
                    favg_channel_signflip(theta, phi, phi_p, &d, 0.1, conv),
                ),
                (
                    ChannelNoise::DepolarizeEach(0.1),
                    favg_channel_depolarize(theta, phi, phi_p, &d, 0.1, conv),
                ),
            ];
            for (noise, direct) in cases {
                let c = FidelityCoefficients::depolarizing_bob(
                    &d,
                    ChannelDamping::for_channel(&noise, conv),
                    conv,
                );
                assert!(
                    (c.evaluate(theta, phi, phi_p) - direct).abs() < 1e-15,
                    "{noise}"
                );
            }
        }
    }

    #[test]
    fn equal_reliabilities_select_bell_basis() {
        let d = deltas(0.7, 0.7, 0.7, 0.7);
        for theta in [0.05, 0.3, 0.7] {
            assert_eq!(
                optimal_angles_pure(theta, &d, Convention::LITERAL),
                (FRAC_PI_4, FRAC_PI_4)
            );
        }
    }

    #[test]
    fn maximal_entanglement_selects_bell_basis() {
        let d = deltas(1.0, 0.4, 0.9, 0.1);
        let (phi, phi_p) = optimal_angles_pure(FRAC_PI_4, &d, Convention::SIMULATION);
        assert!((phi - FRAC_PI_4).abs() < 1e-15);
        assert!((phi_p - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn spot_angle_from_ratio_nineteen() {
        let d = deltas(1.0, 0.9, 1.0, 1.0);
        let (phi, _) = optimal_angles_pure(FRAC_PI_8, &d, Convention::LITERAL);
        assert!((phi - 19f64.atan() / 2.0).abs() < 1e-15);
        assert!((phi - 0.759_107).abs() < 1e-6);
    }

    #[test]
    fn bob_bitflip_spot_and_degenerate() {
        let p = PerOperation::new(0.0, 0.1, 0.0, 0.0);
        let (phi, phi_p) =
            optimal_angles_bob_bitflip(FRAC_PI_8, &p, ChannelDamping::NONE, Convention::LITERAL);
        assert!((phi - 10f64.atan() / 2.0).abs() < 1e-15);
        assert!((phi - 0.735_564).abs() < 1e-6);
        assert_eq!(phi_p, FRAC_PI_4);
        let equal = PerOperation::new(0.2, 0.2, 0.3, 0.3);
        assert_eq!(
            optimal_angles_bob_bitflip(0.3, &equal, ChannelDamping::NONE, Convention::SIMULATION),
            (FRAC_PI_4, FRAC_PI_4)
        );
        let bob = BobNoise::SignFlipPerOp(PerOperation::new(0.0, 0.3, 0.1, 0.2));
        assert_eq!(
            closed_form_angles(0.3, &ChannelNoise::Pure, &bob, Convention::SIMULATION).unwrap(),
            (FRAC_PI_4, FRAC_PI_4)
        );
    }

    #[test]
    fn maximizing_angle_branches() {
        assert_eq!(maximizing_angle(0.0, 0.0), FRAC_PI_4);
        assert_eq!(maximizing_angle(1.0, 0.0), 0.0);
        assert_eq!(maximizing_angle(-1.0, 0.0), FRAC_PI_2);
        assert_eq!(maximizing_angle(-1.0, -0.0), FRAC_PI_2);
        assert_eq!(maximizing_angle(0.0, 1.0), FRAC_PI_4);
        assert_eq!(maximizing_angle(2.0, -1.0), 0.0);
        assert_eq!(maximizing_angle(-2.0, -1.0), FRAC_PI_2);
        for k in 0..=64 {
            let x = k as f64 * std::f64::consts::PI / 64.0;
            let phi = maximizing_angle(x.cos(), x.sin());
            assert!((phi - x / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn signflip_half_selects_endpoint() {
        let d = deltas(1.0, 0.8, 1.0, 1.0);
        let (phi, _) = optimal_angles_signflip(0.3, &d, 0.5, Convention::LITERAL);
        // no sine term left: cos2φ with positive weight peaks at φ = 0
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn werner_and_pure_angles_coincide() {
        let d = deltas(1.0, 0.8, 0.6, 0.9);
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(
                optimal_angles_werner(0.4, &d, p, Convention::SIMULATION),
                optimal_angles_pure(0.4, &d, Convention::SIMULATION)
            );
        }
    }

    #[test]
    fn gaussian_damping_limits() {
        let c = FidelityCoefficients {
            c1: 0.75,
            c2: 0.0,
            c3: 0.0,
            c4: 0.125,
            c5: 0.125,
        };
        let mut jitter = MeasurementJitter::new(0.0, 0.0, FRAC_PI_4, FRAC_PI_4).unwrap();
        let theta = FRAC_PI_4;
        assert!(
            (gaussian_damped(&c, theta, &jitter) - c.evaluate(theta, FRAC_PI_4, FRAC_PI_4)).abs()
                < 1e-15
        );
        jitter.sigma_phi = 1.0;
        let spot = gaussian_damped(&c, theta, &jitter);
        assert!((spot - (0.75 + 0.125 * (-0.5f64).exp() + 0.125)).abs() < 1e-15);
        assert!((spot - 0.950_82).abs() < 1e-5);
        jitter.sigma_phi = 60.0;
        jitter.sigma_phi_prime = 60.0;
        assert_eq!(gaussian_damped(&c, theta, &jitter), c.c1);
    }

    #[test]
    fn fit_recovers_terms_exactly() {
        let terms = AngularTerms {
            constant: 0.6,
            cos_phi: 0.02,
            cos_phi_prime: -0.03,
            sin_phi: 0.05,
            sin_phi_prime: 0.04,
        };
        let fitted = AngularTerms::fit(|a, b| terms.evaluate(a, b));
        for (got, want) in [
            (fitted.constant, terms.constant),
            (fitted.cos_phi, terms.cos_phi),
            (fitted.cos_phi_prime, terms.cos_phi_prime),
            (fitted.sin_phi, terms.sin_phi),
            (fitted.sin_phi_prime, terms.sin_phi_prime),
        ] {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_theta_blocks_full_extraction() {
        let terms = AngularTerms {
            constant: 0.75,
            cos_phi: 0.0,
            cos_phi_prime: 0.0,
            sin_phi: 0.125,
            sin_phi_prime: 0.125,
        };
        assert!(matches!(
            FidelityCoefficients::from_terms(&terms, 0.0),
            Err(Error::DegenerateTheta(_))
        ));
        assert!(FidelityCoefficients::from_terms(&terms, FRAC_PI_4).is_err());
        assert!(FidelityCoefficients::from_terms(&terms, 0.3).is_ok());
    }
}
