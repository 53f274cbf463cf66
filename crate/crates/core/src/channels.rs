//! Kraus noise channels, noisy shared resources and Bob's unreliable
//! conditional operations.

use std::fmt;

use crate::error::{check_range, Error, Result, ANGLE_SLACK};
use crate::linalg::{lift, DensityMatrix, Ket, Operator, Pauli, C64};

/// Completeness tolerance for `sum K^dagger K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// A completely positive trace-preserving map on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<Operator>,
    label: String,
}

impl KrausChannel {
    pub fn new(operators: Vec<Operator>, label: impl Into<String>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidParameter(
                "a channel needs at least one operator".into(),
            ));
        }
        for k in &operators {
            if k.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: k.dim(),
                });
            }
        }
        let channel = Self {
            operators,
            label: label.into(),
        };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus(defect));
        }
        Ok(channel)
    }

    pub fn identity() -> Self {
        Self {
            operators: vec![Pauli::I.matrix()],
            label: "identity".into(),
        }
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest entry of `|sum K^dagger K - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = Operator::zeros(2).expect("dim 2");
        for k in &self.operators {
            sum = sum
                .add(&k.dagger().matmul(k).expect("dim 2"))
                .expect("dim 2");
        }
        sum.max_abs_diff(&Operator::identity(2).expect("dim 2"))
            .expect("dim 2")
    }

    /// Single-qubit application to a possibly unnormalized operator.
    pub(crate) fn apply_to_qubit_operator(&self, rho: &Operator) -> Operator {
        let mut out = Operator::zeros(2).expect("dim 2");
        for k in &self.operators {
            out = out.add(&k.conjugate(rho).expect("dim 2")).expect("dim 2");
        }
        out
    }
}

fn probability(name: &'static str, p: f64) -> Result<f64> {
    check_range(name, p, 0.0, 1.0)
}

/// `{sqrt(1-p) I, sqrt(p/3) Z, sqrt(p/3) X, sqrt(p/3) Y}`
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    let p = probability("p", p)?;
    let w = (p / 3.0).sqrt();
    KrausChannel::new(
        vec![
            Pauli::I.matrix().scale_real((1.0 - p).sqrt()),
            Pauli::Z.matrix().scale_real(w),
            Pauli::X.matrix().scale_real(w),
            Pauli::Y.matrix().scale_real(w),
        ],
        format!("depolarizing({p})"),
    )
}

/// `{sqrt(1-p) I, sqrt(p) X}`
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    let p = probability("p", p)?;
    KrausChannel::new(
        vec![
            Pauli::I.matrix().scale_real((1.0 - p).sqrt()),
            Pauli::X.matrix().scale_real(p.sqrt()),
        ],
        format!("bit-flip({p})"),
    )
}

/// `{sqrt(1-p) I, sqrt(p) Z}`
pub fn sign_flip(p: f64) -> Result<KrausChannel> {
    let p = probability("p", p)?;
    KrausChannel::new(
        vec![
            Pauli::I.matrix().scale_real((1.0 - p).sqrt()),
            Pauli::Z.matrix().scale_real(p.sqrt()),
        ],
        format!("sign-flip({p})"),
    )
}

pub(crate) fn apply_channel_operator(
    channel: &KrausChannel,
    rho: &Operator,
    target: usize,
) -> Result<Operator> {
    let n = rho.qubits();
    if target >= n {
        return Err(Error::InvalidQubitSelection {
            keep: vec![target],
            qubits: n,
        });
    }
    if n == 1 {
        return Ok(channel.apply_to_qubit_operator(rho));
    }
    let mut out = Operator::zeros(rho.dim())?;
    for k in channel.operators() {
        out = out.add(&lift(k, target, n)?.conjugate(rho)?)?;
    }
    Ok(out)
}

/// `sum_mu K_mu rho K_mu^dagger` with each `K_mu` acting on qubit `target`.
pub fn apply_channel(
    channel: &KrausChannel,
    rho: &DensityMatrix,
    target: usize,
) -> Result<DensityMatrix> {
    apply_channel_operator(channel, rho.as_operator(), target)
        .map(DensityMatrix::from_operator_unchecked)
}

/// `p_w rho + (1 - p_w) I / 4`
pub fn werner_mix(rho: &DensityMatrix, p_w: f64) -> Result<DensityMatrix> {
    let p_w = probability("p_W", p_w)?;
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let mixed = Operator::identity(4)?.scale_real((1.0 - p_w) / 4.0);
    Ok(DensityMatrix::from_operator_unchecked(
        rho.as_operator().scale_real(p_w).add(&mixed)?,
    ))
}

/// Noise acting on the shared two-qubit resource. Variants are exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelNoise {
    Pure,
    /// Weight of the pure entangled state in the Werner-like mixture.
    Werner(f64),
    /// Independent bit flip on A and on B.
    BitFlipEach(f64),
    /// Independent sign flip on A and on B.
    SignFlipEach(f64),
    /// Independent depolarization on A and on B.
    DepolarizeEach(f64),
}

impl ChannelNoise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelNoise::Pure => Ok(()),
            ChannelNoise::Werner(p) => probability("p_W", p).map(|_| ()),
            ChannelNoise::BitFlipEach(p) => probability("p_bf", p).map(|_| ()),
            ChannelNoise::SignFlipEach(p) => probability("p_sf", p).map(|_| ()),
            ChannelNoise::DepolarizeEach(p) => probability("p_d", p).map(|_| ()),
        }
    }

    /// The noise probability, if the variant carries one.
    pub fn probability(&self) -> Option<f64> {
        match *self {
            ChannelNoise::Pure => None,
            ChannelNoise::Werner(p)
            | ChannelNoise::BitFlipEach(p)
            | ChannelNoise::SignFlipEach(p)
            | ChannelNoise::DepolarizeEach(p) => Some(p),
        }
    }

    /// Same variant with a different probability. `Pure` is unchanged.
    pub fn with_probability(&self, p: f64) -> ChannelNoise {
        match self {
            ChannelNoise::Pure => ChannelNoise::Pure,
            ChannelNoise::Werner(_) => ChannelNoise::Werner(p),
            ChannelNoise::BitFlipEach(_) => ChannelNoise::BitFlipEach(p),
            ChannelNoise::SignFlipEach(_) => ChannelNoise::SignFlipEach(p),
            ChannelNoise::DepolarizeEach(_) => ChannelNoise::DepolarizeEach(p),
        }
    }

    fn local_channel(&self) -> Result<Option<KrausChannel>> {
        match *self {
            ChannelNoise::Pure | ChannelNoise::Werner(_) => Ok(None),
            ChannelNoise::BitFlipEach(p) => bit_flip(p).map(Some),
            ChannelNoise::SignFlipEach(p) => sign_flip(p).map(Some),
            ChannelNoise::DepolarizeEach(p) => depolarizing(p).map(Some),
        }
    }
}

impl fmt::Display for ChannelNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelNoise::Pure => write!(f, "pure"),
            ChannelNoise::Werner(p) => write!(f, "werner:{p}"),
            ChannelNoise::BitFlipEach(p) => write!(f, "bitflip:{p}"),
            ChannelNoise::SignFlipEach(p) => write!(f, "signflip:{p}"),
            ChannelNoise::DepolarizeEach(p) => write!(f, "depol:{p}"),
        }
    }
}

/// One probability per conditional operation, indexed by the correction label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerOperation {
    pub i: f64,
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl PerOperation {
    pub fn new(i: f64, z: f64, x: f64, y: f64) -> Self {
        Self { i, z, x, y }
    }

    pub fn uniform(p: f64) -> Self {
        Self::new(p, p, p, p)
    }

    pub fn get(&self, op: Pauli) -> f64 {
        match op {
            Pauli::I => self.i,
            Pauli::Z => self.z,
            Pauli::X => self.x,
            Pauli::Y => self.y,
        }
    }

    fn check(&self, max: f64) -> Result<()> {
        check_range("p_I", self.i, 0.0, max)?;
        check_range("p_z", self.z, 0.0, max)?;
        check_range("p_x", self.x, 0.0, max)?;
        check_range("p_y", self.y, 0.0, max)?;
        Ok(())
    }
}

/// Largest depolarizing strength for a conditional operation (`delta >= 0`).
pub const MAX_DEPOLARIZING: f64 = 0.75;

/// Error model for Bob's conditional operations. The error channel acts after
/// the ideal correction unitary, with a strength selected by that correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BobNoise {
    Ideal,
    DepolarizingPerOp(PerOperation),
    BitFlipPerOp(PerOperation),
    SignFlipPerOp(PerOperation),
}

impl BobNoise {
    pub fn validate(&self) -> Result<()> {
        match self {
            BobNoise::Ideal => Ok(()),
            BobNoise::DepolarizingPerOp(p) => p.check(MAX_DEPOLARIZING),
            BobNoise::BitFlipPerOp(p) | BobNoise::SignFlipPerOp(p) => p.check(1.0),
        }
    }

    /// Non-fatal findings: the closed-form bit-flip angles presume
    /// `p_I <= p_z` and `p_x <= p_y`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let BobNoise::BitFlipPerOp(p) = self {
            if p.i > p.z {
                out.push(format!("bit-flip p_I = {} exceeds p_z = {}", p.i, p.z));
            }
            if p.x > p.y {
                out.push(format!("bit-flip p_x = {} exceeds p_y = {}", p.x, p.y));
            }
        }
        out
    }

    pub fn probabilities(&self) -> Option<PerOperation> {
        match self {
            BobNoise::Ideal => None,
            BobNoise::DepolarizingPerOp(p)
            | BobNoise::BitFlipPerOp(p)
            | BobNoise::SignFlipPerOp(p) => Some(*p),
        }
    }

    pub fn with_probabilities(&self, p: PerOperation) -> BobNoise {
        match self {
            BobNoise::Ideal => BobNoise::Ideal,
            BobNoise::DepolarizingPerOp(_) => BobNoise::DepolarizingPerOp(p),
            BobNoise::BitFlipPerOp(_) => BobNoise::BitFlipPerOp(p),
            BobNoise::SignFlipPerOp(_) => BobNoise::SignFlipPerOp(p),
        }
    }

    /// The error channel that follows correction `op`.
    pub fn error_channel(&self, op: Pauli) -> Result<KrausChannel> {
        match self {
            BobNoise::Ideal => Ok(KrausChannel::identity()),
            BobNoise::DepolarizingPerOp(p) => {
                depolarizing(check_range("p", p.get(op), 0.0, MAX_DEPOLARIZING)?)
            }
            BobNoise::BitFlipPerOp(p) => bit_flip(p.get(op)),
            BobNoise::SignFlipPerOp(p) => sign_flip(p.get(op)),
        }
    }
}

impl fmt::Display for BobNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, p) = match self {
            BobNoise::Ideal => return write!(f, "ideal"),
            BobNoise::DepolarizingPerOp(p) => ("depol", p),
            BobNoise::BitFlipPerOp(p) => ("bitflip", p),
            BobNoise::SignFlipPerOp(p) => ("signflip", p),
        };
        write!(f, "{kind}:{},{},{},{}", p.i, p.z, p.x, p.y)
    }
}

/// `cos(theta)|00> + sin(theta)|11>`
pub fn entangled_ket(theta: f64) -> Result<Ket> {
    let theta = check_range(
        "theta",
        theta,
        0.0,
        std::f64::consts::FRAC_PI_4 + ANGLE_SLACK,
    )?;
    Ket::from_real(&[theta.cos(), 0.0, 0.0, theta.sin()])
}

/// The shared resource after the configured channel noise.
pub fn noisy_resource(theta: f64, noise: ChannelNoise) -> Result<DensityMatrix> {
    noise.validate()?;
    let pure = DensityMatrix::pure(&entangled_ket(theta)?);
    match noise {
        ChannelNoise::Pure => Ok(pure),
        ChannelNoise::Werner(p) => werner_mix(&pure, p),
        _ => {
            let local = noise.local_channel()?.expect("local variant");
            let on_a = apply_channel(&local, &pure, 0)?;
            apply_channel(&local, &on_a, 1)
        }
    }
}

pub(crate) fn correct_operator(op: Pauli, spec: &BobNoise, rho: &Operator) -> Result<Operator> {
    let corrected = op.matrix().conjugate(rho)?;
    Ok(spec.error_channel(op)?.apply_to_qubit_operator(&corrected))
}

/// Ideal correction `op`, then the error channel selected by `op`.
pub fn noisy_correction(op: Pauli, spec: &BobNoise, rho: &DensityMatrix) -> Result<DensityMatrix> {
    spec.validate()?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    correct_operator(op, spec, rho.as_operator()).map(DensityMatrix::from_operator_unchecked)
}

/// The depolarizing action written out: `(1 - 4p/3) rho + (2p/3) tr(rho) I`.
pub fn depolarizing_closed_form(rho: &Operator, p: f64) -> Result<Operator> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let tr = rho.trace();
    Operator::identity(2)?
        .scale(tr * C64::new(2.0 * p / 3.0, 0.0))
        .add(&rho.scale_real(1.0 - 4.0 * p / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, partial_trace};
    use std::f64::consts::FRAC_PI_4;

    fn rho_from(a: f64, re_c: f64, im_c: f64) -> DensityMatrix {
        let op = Operator::new(
            2,
            vec![
                C64::new(a, 0.0),
                C64::new(re_c, -im_c),
                C64::new(re_c, im_c),
                C64::new(1.0 - a, 0.0),
            ],
        )
        .unwrap();
        DensityMatrix::new(op).unwrap()
    }

    #[test]
    fn constructed_channels_are_complete() {
        for p in [0.0, 0.3, 0.75, 1.0] {
            assert!(depolarizing(p).unwrap().completeness_defect() < 1e-15);
            assert!(bit_flip(p).unwrap().completeness_defect() < 1e-15);
            assert!(sign_flip(p).unwrap().completeness_defect() < 1e-15);
        }
        assert!(depolarizing(1.1).is_err());
        assert!(bit_flip(-0.1).is_err());
    }

    #[test]
    fn incomplete_kraus_set_is_rejected() {
        let half = Pauli::I.matrix().scale_real(0.5);
        assert!(matches!(
            KrausChannel::new(vec![half], "bad"),
            Err(Error::IncompleteKraus(_))
        ));
    }

    #[test]
    fn depolarizing_zero_is_identity_and_three_quarters_is_full() {
        let ch = depolarizing(0.0).unwrap();
        for k in &ch.operators()[1..] {
            assert_eq!(k, &Operator::zeros(2).unwrap());
        }
        let rho = rho_from(0.8, 0.2, -0.1);
        let out = apply_channel(&depolarizing(0.75).unwrap(), &rho, 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(out.max_abs_diff(&mixed).unwrap() < 1e-15);
    }

    #[test]
    fn depolarizing_matches_table_form() {
        let rho = rho_from(0.7, 0.1, 0.3);
        for step in 0..=7 {
            let p = step as f64 / 10.0;
            let kraus = apply_channel(&depolarizing(p).unwrap(), &rho, 0).unwrap();
            let table = depolarizing_closed_form(rho.as_operator(), p).unwrap();
            assert!(kraus.as_operator().max_abs_diff(&table).unwrap() < 1e-13);
        }
    }

    #[test]
    fn flip_channels_on_simple_states() {
        let rho = rho_from(0.65, 0.2, 0.1);
        let out = apply_channel(&bit_flip(0.0).unwrap(), &rho, 0).unwrap();
        assert!(out.max_abs_diff(&rho).unwrap() < 1e-16);

        let zero = rho_from(1.0, 0.0, 0.0);
        let out = apply_channel(&bit_flip(0.5).unwrap(), &zero, 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(out.max_abs_diff(&mixed).unwrap() < 1e-15);

        let diag = rho_from(0.3, 0.0, 0.0);
        for p in [0.1, 0.5, 0.9] {
            let out = apply_channel(&sign_flip(p).unwrap(), &diag, 0).unwrap();
            assert!(out.max_abs_diff(&diag).unwrap() < 1e-15);
        }
    }

    #[test]
    fn depolarizing_on_bob_of_product_state() {
        let rho = DensityMatrix::pure(&crate::linalg::Ket::basis(4, 0).unwrap());
        let out = apply_channel(&depolarizing(0.75).unwrap(), &rho, 1).unwrap();
        let expected = DensityMatrix::pure(&crate::linalg::Ket::basis(2, 0).unwrap())
            .tensor(&DensityMatrix::maximally_mixed(2).unwrap())
            .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn apply_channel_rejects_bad_target() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(apply_channel(&bit_flip(0.1).unwrap(), &rho, 2).is_err());
    }

    #[test]
    fn bit_flip_each_on_bell_state_is_bell_diagonal() {
        let rho = noisy_resource(FRAC_PI_4, ChannelNoise::BitFlipEach(0.5)).unwrap();
        rho.validate().unwrap();
        // p = 1/2 on both qubits mixes Phi+ with Psi+ equally.
        let phi_plus = Ket::from_real(&[0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()]).unwrap();
        let psi_plus = Ket::from_real(&[0.0, 0.5f64.sqrt(), 0.5f64.sqrt(), 0.0]).unwrap();
        let expected = outer(&phi_plus)
            .scale_real(0.5)
            .add(&outer(&psi_plus).scale_real(0.5))
            .unwrap();
        assert!(rho.as_operator().max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn werner_mixture_spectrum() {
        let bell = noisy_resource(FRAC_PI_4, ChannelNoise::Pure).unwrap();
        assert_eq!(werner_mix(&bell, 1.0).unwrap(), bell);
        let mixed = werner_mix(&bell, 0.0).unwrap();
        assert!(
            mixed
                .max_abs_diff(&DensityMatrix::maximally_mixed(4).unwrap())
                .unwrap()
                < 1e-16
        );
        let eig = werner_mix(&bell, 0.6).unwrap().eigenvalues();
        for (got, want) in eig.iter().zip([0.1, 0.1, 0.1, 0.7]) {
            assert!((got - want).abs() < 1e-12, "{eig:?}");
        }
        assert!(werner_mix(&bell, 1.5).is_err());
        assert!(
            noisy_resource(FRAC_PI_4, ChannelNoise::Werner(0.0))
                .unwrap()
                .max_abs_diff(&DensityMatrix::maximally_mixed(4).unwrap())
                .unwrap()
                < 1e-16
        );
    }

    #[test]
    fn pure_resource_reduces_to_schmidt_weights() {
        for theta in [0.0, 0.2, 0.6, FRAC_PI_4] {
            let rho = noisy_resource(theta, ChannelNoise::Pure).unwrap();
            let b = partial_trace(&rho, &[1]).unwrap();
            let want = Operator::diagonal(&[theta.cos().powi(2), theta.sin().powi(2)]).unwrap();
            assert!(b.as_operator().max_abs_diff(&want).unwrap() < 1e-15);
        }
        let bell = noisy_resource(FRAC_PI_4, ChannelNoise::Pure).unwrap();
        let b = partial_trace(&bell, &[1]).unwrap();
        assert!(
            b.max_abs_diff(&DensityMatrix::maximally_mixed(2).unwrap())
                .unwrap()
                < 1e-15
        );
        assert!(noisy_resource(1.0, ChannelNoise::Pure).is_err());
        assert!(noisy_resource(0.3, ChannelNoise::BitFlipEach(2.0)).is_err());
    }

    #[test]
    fn noisy_corrections() {
        let rho = rho_from(0.7, 0.2, -0.3);
        assert_eq!(
            noisy_correction(Pauli::I, &BobNoise::Ideal, &rho).unwrap(),
            rho
        );

        let depol = BobNoise::DepolarizingPerOp(PerOperation::new(0.0, 0.75, 0.0, 0.0));
        let out = noisy_correction(Pauli::Z, &depol, &rho).unwrap();
        assert!(
            out.max_abs_diff(&DensityMatrix::maximally_mixed(2).unwrap())
                .unwrap()
                < 1e-15
        );

        let flip = BobNoise::BitFlipPerOp(PerOperation::new(0.0, 0.0, 1.0, 0.0));
        let out = noisy_correction(Pauli::X, &flip, &rho).unwrap();
        assert!(out.max_abs_diff(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn bob_noise_validation_and_warnings() {
        let too_strong = BobNoise::DepolarizingPerOp(PerOperation::new(0.0, 0.8, 0.0, 0.0));
        assert!(too_strong.validate().is_err());
        assert!(BobNoise::BitFlipPerOp(PerOperation::uniform(1.0))
            .validate()
            .is_ok());
        let unordered = BobNoise::BitFlipPerOp(PerOperation::new(0.2, 0.1, 0.3, 0.1));
        assert_eq!(unordered.warnings().len(), 2);
        let ordered = BobNoise::BitFlipPerOp(PerOperation::new(0.0, 0.1, 0.0, 0.1));
        assert!(ordered.warnings().is_empty());
    }

    #[test]
    fn display_round_trips_grammar() {
        assert_eq!(ChannelNoise::BitFlipEach(0.1).to_string(), "bitflip:0.1");
        assert_eq!(
            BobNoise::DepolarizingPerOp(PerOperation::new(0.0, 0.075, 0.075, 0.075)).to_string(),
            "depol:0,0.075,0.075,0.075"
        );
    }

    #[test]
    fn channels_commute_on_disjoint_qubits() {
        let ket = Ket::from_real(&[0.5, 0.5, -0.5, 0.5]).unwrap();
        let rho = DensityMatrix::pure(&ket)
            .tensor(&DensityMatrix::maximally_mixed(2).unwrap())
            .unwrap();
        let a = depolarizing(0.3).unwrap();
        let b = bit_flip(0.2).unwrap();
        let ab = apply_channel(&b, &apply_channel(&a, &rho, 0).unwrap(), 2).unwrap();
        let ba = apply_channel(&a, &apply_channel(&b, &rho, 2).unwrap(), 0).unwrap();
        assert!(ab.max_abs_diff(&ba).unwrap() < 1e-13);
    }
}
