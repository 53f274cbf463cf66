//! Exact density-matrix simulation of teleportation with a tunable
//! measurement basis, and the numeric average-fidelity oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analytic::{AngularTerms, FidelityCoefficients};
use crate::channels::{noisy_correction, noisy_resource, BobNoise, ChannelNoise, KrausChannel};
use crate::error::{check_range, Error, Result, ANGLE_SLACK};
use crate::linalg::{
    fidelity_pure, outer, partial_trace_operator, DensityMatrix, Ket, Operator, Pauli, Tensor, C64,
};

/// `|ψ> = cos γ |0> + e^{iλ} sin γ |1>`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputState {
    pub gamma: f64,
    pub phase: f64,
}

impl InputState {
    pub fn new(gamma: f64, phase: f64) -> Result<Self> {
        if !gamma.is_finite() || !phase.is_finite() {
            return Err(Error::NonFinite("input angle"));
        }
        Ok(Self { gamma, phase })
    }

    pub fn ket(&self) -> Ket {
        let (s, c) = self.gamma.sin_cos();
        Ket::new(vec![C64::new(c, 0.0), C64::from_polar(s, self.phase)]).expect("finite amplitudes")
    }
}

/// The four kets of the generalized Bell measurement on (T, A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    phi: f64,
    phi_prime: f64,
}

impl MeasurementBasis {
    /// `φ, φ' ∈ [0, π/2]`.
    pub fn new(phi: f64, phi_prime: f64) -> Result<Self> {
        Ok(Self {
            phi: check_range("phi", phi, 0.0, FRAC_PI_2 + ANGLE_SLACK)?,
            phi_prime: check_range("phi_prime", phi_prime, 0.0, FRAC_PI_2 + ANGLE_SLACK)?,
        })
    }

    /// Any finite angles. The kets stay orthonormal outside `[0, π/2]`, which
    /// jittered measurements need.
    pub fn unconstrained(phi: f64, phi_prime: f64) -> Result<Self> {
        if !phi.is_finite() || !phi_prime.is_finite() {
            return Err(Error::NonFinite("measurement angle"));
        }
        Ok(Self { phi, phi_prime })
    }

    pub fn bell() -> Self {
        Self {
            phi: std::f64::consts::FRAC_PI_4,
            phi_prime: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phi_prime(&self) -> f64 {
        self.phi_prime
    }

    fn real_amplitudes(&self) -> [[f64; 4]; 4] {
        let (s, c) = self.phi.sin_cos();
        let (sp, cp) = self.phi_prime.sin_cos();
        [
            [c, 0.0, 0.0, s],
            [s, 0.0, 0.0, -c],
            [0.0, cp, sp, 0.0],
            [0.0, sp, -cp, 0.0],
        ]
    }
}

/// Kets in the order Φ̃⁺, Φ̃⁻, Ψ̃⁺, Ψ̃⁻.
pub fn basis_kets(basis: &MeasurementBasis) -> [Ket; 4] {
    basis
        .real_amplitudes()
        .map(|a| Ket::from_real(&a).expect("dim 4"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::PhiPlus,
        Outcome::PhiMinus,
        Outcome::PsiPlus,
        Outcome::PsiMinus,
    ];

    /// Bob's correction for this result.
    pub fn correction(self) -> Pauli {
        match self {
            Outcome::PhiPlus => Pauli::I,
            Outcome::PhiMinus => Pauli::Z,
            Outcome::PsiPlus => Pauli::X,
            Outcome::PsiMinus => Pauli::Y,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::PhiPlus => "Phi+",
            Outcome::PhiMinus => "Phi-",
            Outcome::PsiPlus => "Psi+",
            Outcome::PsiMinus => "Psi-",
        }
    }
}

/// Outcomes with probability at or below this are reported as degenerate.
pub const DEGENERATE_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReport {
    pub outcome: Outcome,
    pub probability: f64,
    /// Bob's state after the (noisy) correction; `I/2` for degenerate outcomes.
    pub bob_state: DensityMatrix,
    pub conditional_fidelity: f64,
    pub degenerate: bool,
}

/// Runs the protocol for one input state, one report per measurement outcome.
pub fn run_protocol(
    input: &InputState,
    resource: &DensityMatrix,
    basis: &MeasurementBasis,
    bob: &BobNoise,
) -> Result<[OutcomeReport; 4]> {
    bob.validate()?;
    if resource.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: resource.dim(),
        });
    }
    let psi = input.ket();
    let total = DensityMatrix::pure(&psi).tensor(resource)?;
    let id = Operator::identity(2)?;
    let kets = basis_kets(basis);
    let mut reports = Vec::with_capacity(4);
    for (outcome, ket) in Outcome::ALL.into_iter().zip(&kets) {
        let projector = outer(ket).tensor(&id)?;
        let projected = projector.matmul(total.as_operator())?.matmul(&projector)?;
        let bob_unnormalized = partial_trace_operator(&projected, &[2])?;
        let probability = bob_unnormalized.trace().re;
        let report = if probability <= DEGENERATE_PROBABILITY {
            OutcomeReport {
                outcome,
                probability: probability.max(0.0),
                bob_state: DensityMatrix::maximally_mixed(2)?,
                conditional_fidelity: 0.0,
                degenerate: true,
            }
        } else {
            let conditional = DensityMatrix::from_operator_unchecked(
                bob_unnormalized.scale_real(1.0 / probability),
            );
            let bob_state = noisy_correction(outcome.correction(), bob, &conditional)?;
            let conditional_fidelity = fidelity_pure(&psi, &bob_state)?;
            OutcomeReport {
                outcome,
                probability,
                bob_state,
                conditional_fidelity,
                degenerate: false,
            }
        };
        reports.push(report);
    }
    Ok(reports.try_into().expect("four outcomes"))
}

/// How input states are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AverageMeasure {
    /// γ uniform on `[0, 2π)` with real amplitudes.
    UniformGamma,
    /// Uniform on the Bloch sphere.
    Haar,
}

/// Minimum quadrature order accepted by the averaging routines.
pub const MIN_NODES: usize = 8;
/// Quadrature order used when a caller does not choose one.
pub const DEFAULT_NODES: usize = 16;

/// Resource and correction model prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Teleporter {
    resource: DensityMatrix,
    corrections: [(Operator, KrausChannel); 4],
}

impl Teleporter {
    pub fn new(theta: f64, channel: ChannelNoise, bob: BobNoise) -> Result<Self> {
        Self::from_resource(noisy_resource(theta, channel)?, bob)
    }

    pub fn from_resource(resource: DensityMatrix, bob: BobNoise) -> Result<Self> {
        bob.validate()?;
        if resource.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: resource.dim(),
            });
        }
        let corrections = Outcome::ALL
            .map(|o| -> Result<(Operator, KrausChannel)> {
                Ok((o.correction().matrix(), bob.error_channel(o.correction())?))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .try_into()
            .expect("four outcomes");
        Ok(Self {
            resource,
            corrections,
        })
    }

    pub fn resource(&self) -> &DensityMatrix {
        &self.resource
    }

    /// `Σ_k p_k F_k` for one input state.
    pub fn weighted_fidelity(&self, input: &InputState, basis: &MeasurementBasis) -> f64 {
        let psi = input.ket();
        let amps = basis.real_amplitudes();
        let a = psi.amplitudes();
        let mut total = 0.0;
        for (ket, (unitary, channel)) in amps.iter().zip(&self.corrections) {
            // <ket|_{TA} (ψψ† ⊗ ρ_AB) |ket>_{TA}, left unnormalized
            let mut m = [C64::new(0.0, 0.0); 4];
            for (mi, &bm) in ket.iter().enumerate() {
                if bm == 0.0 {
                    continue;
                }
                let (mt, ma) = (mi >> 1, mi & 1);
                for (ni, &bn) in ket.iter().enumerate() {
                    if bn == 0.0 {
                        continue;
                    }
                    let (nt, na) = (ni >> 1, ni & 1);
                    let w = a[mt] * a[nt].conj() * (bm * bn);
                    for i in 0..2 {
                        for j in 0..2 {
                            m[2 * i + j] += w * self.resource.get(2 * ma + i, 2 * na + j);
                        }
                    }
                }
            }
            let unnormalized = Operator::new(2, m.to_vec()).expect("dim 2");
            let corrected =
                channel.apply_to_qubit_operator(&unitary.conjugate(&unnormalized).expect("dim 2"));
            total += corrected.expectation(&psi).expect("dim 2").re;
        }
        total
    }

    /// Average over input states drawn from `measure`.
    pub fn average_fidelity(
        &self,
        basis: &MeasurementBasis,
        measure: AverageMeasure,
        nodes: usize,
    ) -> Result<f64> {
        check_nodes(nodes)?;
        match measure {
            AverageMeasure::UniformGamma => self.average_fidelity_at_phase(basis, 0.0, nodes),
            AverageMeasure::Haar => {
                let (u, w) = gauss_legendre(nodes);
                let mut total = 0.0;
                for (&u, &w) in u.iter().zip(&w) {
                    let gamma = u.acos() / 2.0;
                    let mut ring = 0.0;
                    for j in 0..nodes {
                        let phase = 2.0 * PI * j as f64 / nodes as f64;
                        ring += self.weighted_fidelity(&InputState { gamma, phase }, basis);
                    }
                    total += w / 2.0 * ring / nodes as f64;
                }
                Ok(total)
            }
        }
    }

    /// γ-uniform average with a fixed relative phase λ.
    pub fn average_fidelity_at_phase(
        &self,
        basis: &MeasurementBasis,
        phase: f64,
        nodes: usize,
    ) -> Result<f64> {
        check_nodes(nodes)?;
        let sum: f64 = (0..nodes)
            .map(|j| {
                let gamma = 2.0 * PI * j as f64 / nodes as f64;
                self.weighted_fidelity(&InputState { gamma, phase }, basis)
            })
            .sum();
        Ok(sum / nodes as f64)
    }

    /// Fits the angular terms of the average fidelity at this resource.
    pub fn extract_terms(&self, measure: AverageMeasure, nodes: usize) -> Result<AngularTerms> {
        check_nodes(nodes)?;
        let mut failure = None;
        let terms = AngularTerms::fit(|phi, phi_prime| {
            let basis = MeasurementBasis { phi, phi_prime };
            match self.average_fidelity(&basis, measure, nodes) {
                Ok(f) => f,
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(terms),
        }
    }
}

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes < MIN_NODES {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    Ok(())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub fn average_fidelity_numeric(
    theta: f64,
    channel: ChannelNoise,
    basis: &MeasurementBasis,
    bob: BobNoise,
    measure: AverageMeasure,
    nodes: usize,
) -> Result<f64> {
    Teleporter::new(theta, channel, bob)?.average_fidelity(basis, measure, nodes)
}

/// Gaussian error on Alice's measurement angles. The standard deviations
/// refer to the doubled angles 2φ̃ and 2φ̃'.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementJitter {
    pub sigma_phi: f64,
    pub sigma_phi_prime: f64,
    pub phi0: f64,
    pub phi0_prime: f64,
}

impl MeasurementJitter {
    pub fn new(sigma_phi: f64, sigma_phi_prime: f64, phi0: f64, phi0_prime: f64) -> Result<Self> {
        let jitter = Self {
            sigma_phi,
            sigma_phi_prime,
            phi0,
            phi0_prime,
        };
        jitter.validate()?;
        Ok(jitter)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("sigma_phi", self.sigma_phi, 0.0, f64::MAX)?;
        check_range("sigma_phi_prime", self.sigma_phi_prime, 0.0, f64::MAX)?;
        if !self.phi0.is_finite() || !self.phi0_prime.is_finite() {
            return Err(Error::NonFinite("nominal measurement angle"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

pub const MIN_JITTER_SAMPLES: usize = 100;
const JITTER_CHUNK: usize = 1024;

/// Monte Carlo average over jittered measurement bases. Deterministic in
/// `seed`: chunk `k` draws from ChaCha stream `k`, and chunks are reduced in
/// index order.
pub fn average_fidelity_jittered(
    teleporter: &Teleporter,
    measure: AverageMeasure,
    nodes: usize,
    jitter: &MeasurementJitter,
    samples: usize,
    seed: u64,
) -> Result<JitterEstimate> {
    jitter.validate()?;
    check_nodes(nodes)?;
    if samples < MIN_JITTER_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "jitter averaging needs at least {MIN_JITTER_SAMPLES} samples, got {samples}"
        )));
    }
    if jitter.sigma_phi == 0.0 && jitter.sigma_phi_prime == 0.0 {
        let basis = MeasurementBasis::unconstrained(jitter.phi0, jitter.phi0_prime)?;
        return Ok(JitterEstimate {
            mean: teleporter.average_fidelity(&basis, measure, nodes)?,
            stderr: 0.0,
            samples,
        });
    }
    let chunks = samples.div_ceil(JITTER_CHUNK);
    let partials: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = JITTER_CHUNK.min(samples - k * JITTER_CHUNK);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let z: f64 = StandardNormal.sample(&mut rng);
                let zp: f64 = StandardNormal.sample(&mut rng);
                let basis = MeasurementBasis::unconstrained(
                    jitter.phi0 + jitter.sigma_phi * z / 2.0,
                    jitter.phi0_prime + jitter.sigma_phi_prime * zp / 2.0,
                )?;
                let f = teleporter.average_fidelity(&basis, measure, nodes)?;
                sum += f;
                sum_sq += f * f;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for part in partials {
        let (s, sq) = part?;
        sum += s;
        sum_sq += sq;
    }
    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(JitterEstimate {
        mean,
        stderr: (variance / n).sqrt(),
        samples,
    })
}

/// Angular terms of the numeric average fidelity at `theta`.
pub fn extract_terms(
    theta: f64,
    channel: ChannelNoise,
    bob: BobNoise,
    measure: AverageMeasure,
) -> Result<AngularTerms> {
    Teleporter::new(theta, channel, bob)?.extract_terms(measure, DEFAULT_NODES)
}

/// `c1 … c5` from five oracle evaluations. Fails when `sin2θ` or `cos2θ`
/// vanish; [`extract_terms`] still works there.
pub fn extract_coefficients(
    theta: f64,
    channel: ChannelNoise,
    bob: BobNoise,
    measure: AverageMeasure,
) -> Result<FidelityCoefficients> {
    FidelityCoefficients::from_terms(&extract_terms(theta, channel, bob, measure)?, theta)
}

/// Literal reference for one outcome: the corrected Bob operator, unnormalized.
#[cfg(test)]
pub(crate) fn literal_branch(
    psi: &Ket,
    resource: &DensityMatrix,
    ket: &Ket,
    outcome: Outcome,
    bob: &BobNoise,
) -> Result<Operator> {
    let total = DensityMatrix::pure(psi).tensor(resource)?;
    let projector = outer(ket).tensor(&Operator::identity(2)?)?;
    let projected = projector.matmul(total.as_operator())?.matmul(&projector)?;
    crate::channels::correct_operator(
        outcome.correction(),
        bob,
        &partial_trace_operator(&projected, &[2])?,
    )
}
