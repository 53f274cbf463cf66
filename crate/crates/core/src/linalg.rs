//! Dense complex linear algebra for one to three qubits.
//!
//! Qubit 0 is the most significant bit of a basis index, so for the
//! teleportation register the ordering is T (0), A (1), B (2) and
//! `|t a b>` lives at index `4t + 2a + b`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may have after round-off.
pub const PSD_TOL: f64 = -1e-10;

fn check_dim(dim: usize) -> Result<usize> {
    match dim {
        2 | 4 | 8 => Ok(dim),
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

fn qubit_count(dim: usize) -> usize {
    dim.trailing_zeros() as usize
}

/// Identity and Pauli labels. `Y = [[0, -i], [i, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Operator {
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        Operator {
            dim: 2,
            entries: entries.to_vec(),
        }
    }
}

pub fn pauli(which: Pauli) -> Operator {
    which.matrix()
}

/// State vector of 1 to 3 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("ket amplitude"));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis ket `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Square complex matrix of dimension 2, 4 or 8, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("operator entry"));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            entries: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut op = Self::zeros(dim)?;
        for k in 0..dim {
            op.entries[k * dim + k] = ONE;
        }
        Ok(op)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut op = Self::zeros(values.len())?;
        for (k, &v) in values.iter().enumerate() {
            op.entries[k * values.len() + k] = C64::new(v, 0.0);
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> usize {
        qubit_count(self.dim)
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Operator {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_dim(other)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn dagger(&self) -> Operator {
        let dim = self.dim;
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[c * dim + r] = self.get(r, c).conj();
            }
        }
        Operator { dim, entries }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.same_dim(other)?;
        let dim = self.dim;
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..dim {
                    entries[r * dim + c] += a * other.get(k, c);
                }
            }
        }
        Ok(Operator { dim, entries })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if ket.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: ket.dim(),
            });
        }
        let amplitudes = (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.get(r, c) * ket.amplitudes[c])
                    .sum()
            })
            .collect();
        Ok(Ket { amplitudes })
    }

    /// `self * rho * self^dagger`
    pub fn conjugate(&self, rho: &Operator) -> Result<Operator> {
        self.matmul(rho)?.matmul(&self.dagger())
    }

    /// Real part of `<psi| self |psi>`, and its imaginary residue.
    pub fn expectation(&self, psi: &Ket) -> Result<C64> {
        psi.inner(&self.apply(psi)?)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c));
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    fn same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

pub fn matmul(a: &Operator, b: &Operator) -> Result<Operator> {
    a.matmul(b)
}

pub fn apply(a: &Operator, ket: &Ket) -> Result<Ket> {
    a.apply(ket)
}

/// Projector `|k><k|`.
pub fn outer(ket: &Ket) -> Operator {
    let dim = ket.dim();
    let mut entries = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            entries.push(ket.amplitudes[r] * ket.amplitudes[c].conj());
        }
    }
    Operator { dim, entries }
}

/// Kronecker product. The left factor owns the most significant index.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Ket) -> Result<Ket> {
        let dim = self.dim() * other.dim();
        if dim > 8 {
            return Err(Error::DimensionOverflow(dim));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(Ket { amplitudes })
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Operator) -> Result<Operator> {
        let dim = self.dim * other.dim;
        if dim > 8 {
            return Err(Error::DimensionOverflow(dim));
        }
        let mut entries = vec![ZERO; dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        let r = r1 * other.dim + r2;
                        let c = c1 * other.dim + c2;
                        entries[r * dim + c] = a * other.get(r2, c2);
                    }
                }
            }
        }
        Ok(Operator { dim, entries })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Partial trace of an arbitrary operator, keeping `keep` in the given order.
pub fn partial_trace_operator(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = op.qubits();
    let invalid = || Error::InvalidQubitSelection {
        keep: keep.to_vec(),
        qubits: n,
    };
    if keep.is_empty() || keep.len() >= n + 1 || keep.iter().any(|&q| q >= n) {
        return Err(invalid());
    }
    for (i, q) in keep.iter().enumerate() {
        if keep[..i].contains(q) {
            return Err(invalid());
        }
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let bit = |q: usize| 1usize << (n - 1 - q);
    // Spread a kept-register index (first kept qubit most significant) onto full indices.
    let spread = |idx: usize, qubits: &[usize]| -> usize {
        let m = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(j, _)| idx & (1 << (m - 1 - j)) != 0)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let out_dim = 1usize << keep.len();
    let mut entries = vec![ZERO; out_dim * out_dim];
    for r in 0..out_dim {
        let full_r = spread(r, keep);
        for c in 0..out_dim {
            let full_c = spread(c, keep);
            let mut acc = ZERO;
            for t in 0..(1usize << traced.len()) {
                let off = spread(t, &traced);
                acc += op.get(full_r | off, full_c | off);
            }
            entries[r * out_dim + c] = acc;
        }
    }
    Ok(Operator {
        dim: out_dim,
        entries,
    })
}

/// Lift a single-qubit operator to act on `target` of an `n`-qubit register.
pub fn lift(op: &Operator, target: usize, qubits: usize) -> Result<Operator> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.dim(),
        });
    }
    if target >= qubits {
        return Err(Error::InvalidQubitSelection {
            keep: vec![target],
            qubits,
        });
    }
    let id = Operator::identity(2)?;
    let mut out: Option<Operator> = None;
    for q in 0..qubits {
        let factor = if q == target { op } else { &id };
        out = Some(match out {
            None => factor.clone(),
            Some(acc) => acc.tensor(factor)?,
        });
    }
    Ok(out.expect("at least one qubit"))
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(op: Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {defect:e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min_eig = op.hermitian_eigenvalues()[0];
        if min_eig < PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(op))
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn pure(ket: &Ket) -> Self {
        Self(outer(ket))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(Self(Operator::identity(dim)?.scale_real(1.0 / dim as f64)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn qubits(&self) -> usize {
        self.0.qubits()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.hermitian_eigenvalues()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self(self.0.tensor(&other.0)?))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        self.0.max_abs_diff(&other.0)
    }

    /// Re-checks every invariant; useful after long operation chains.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.0.clone()).map(|_| ())
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix(partial_trace_operator(
        rho.as_operator(),
        keep,
    )?))
}

/// `<psi| rho |psi>` for a single qubit.
pub fn fidelity_pure(psi: &Ket, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != 2 || rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if psi.dim() != 2 { psi.dim() } else { rho.dim() },
        });
    }
    let value = rho.as_operator().expectation(psi)?;
    debug_assert!(value.im.abs() <= 1e-12, "imaginary fidelity {}", value.im);
    Ok(value.re)
}
