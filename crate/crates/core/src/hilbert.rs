//! Dense operator algebra over labelled composite Hilbert spaces.
//!
//! A [`SpaceLayout`] fixes the Kronecker ordering of the subsystems; every
//! [`Operator`], [`DensityMatrix`] and [`StateVector`] carries the layout it
//! lives on so that embeddings, partial traces and expectation values can be
//! checked for consistency.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerances used when validating a [`DensityMatrix`].
pub const RHO_HERMITIAN_TOL: f64 = 1e-10;
pub const RHO_TRACE_TOL: f64 = 1e-9;
pub const RHO_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled subsystems. The first subsystem is the most
/// significant factor of the Kronecker product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLayout {
    subsystems: Vec<Subsystem>,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut subsystems: Vec<Subsystem> = Vec::new();
        for (label, dim) in parts {
            let label = label.into();
            if dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "subsystem `{label}` has zero dimension"
                )));
            }
            if subsystems.iter().any(|s| s.label == label) {
                return Err(Error::DuplicateLabel(label));
            }
            subsystems.push(Subsystem { label, dim });
        }
        if subsystems.is_empty() {
            return Err(Error::InvalidParameter("empty layout".into()));
        }
        Ok(Self { subsystems })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.index_of(label)?].dim)
    }

    /// Flat index of a product basis state given one local index per subsystem.
    pub fn flat_index(&self, local: &[usize]) -> Result<usize> {
        if local.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                found: local.len(),
            });
        }
        let mut idx = 0;
        for (s, &k) in self.subsystems.iter().zip(local) {
            if k >= s.dim {
                return Err(Error::DimensionMismatch { expected: s.dim, found: k + 1 });
            }
            idx = idx * s.dim + k;
        }
        Ok(idx)
    }

    /// Inverse of [`Self::flat_index`].
    pub fn local_indices(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            out[k] = flat % s.dim;
            flat /= s.dim;
        }
        out
    }

    pub(crate) fn check_same(&self, other: &SpaceLayout) -> Result<()> {
        if self != other {
            return Err(Error::LayoutMismatch(format!("{self} vs {other}")));
        }
        Ok(())
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subsystems
            .iter()
            .map(|s| format!("{}:{}", s.label, s.dim))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Relative Frobenius distance from Hermiticity, `‖A − A†‖ / max(‖A‖, 1e-300)`.
pub fn hermiticity_error(m: &Array2<C64>) -> f64 {
    let diff = m - &dagger(m);
    let scale = frobenius(m).max(1e-300);
    frobenius(&diff) / scale
}

pub fn frobenius(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(a, b)
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, ONE)
}

/// Outer product `|i⟩⟨j|` on a space of dimension `n`.
pub fn ket_bra(n: usize, i: usize, j: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    m[[i, j]] = ONE;
    m
}

/// Truncated bosonic lowering operator on Fock states `0..=cutoff`.
pub fn annihilation(cutoff: usize) -> Result<Array2<C64>> {
    if cutoff < 1 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    let n = cutoff + 1;
    let mut a = Array2::zeros((n, n));
    for k in 1..n {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Embeds local operators into `layout`, filling unnamed subsystems with the
/// identity.
pub fn tensor(ops: &[(&str, &Array2<C64>)], layout: &SpaceLayout) -> Result<Operator> {
    let mut slots: Vec<Option<&Array2<C64>>> = vec![None; layout.subsystems.len()];
    for (label, m) in ops {
        let idx = layout.index_of(label)?;
        if slots[idx].is_some() {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        let dim = layout.subsystems[idx].dim;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
        }
        slots[idx] = Some(m);
    }
    let mut acc: Option<Array2<C64>> = None;
    for (slot, sub) in slots.iter().zip(&layout.subsystems) {
        let local = match slot {
            Some(m) => (*m).clone(),
            None => identity(sub.dim),
        };
        acc = Some(match acc {
            None => local,
            Some(prev) => kron(&prev, &local),
        });
    }
    Operator::new(layout.clone(), acc.expect("layout is nonempty"))
}

/// Dense operator on a labelled composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: Array2<C64>,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: Array2<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.dim();
        Self { layout: layout.clone(), matrix: Array2::zeros((d, d)) }
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        Self { layout: layout.clone(), matrix: identity(layout.dim()) }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: dagger(&self.matrix) }
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.mapv(|z| z * c) }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        self.layout.check_same(&rhs.layout)?;
        Ok(Self { layout: self.layout.clone(), matrix: self.matrix.dot(&rhs.matrix) })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.layout.check_same(&psi.layout)?;
        Ok(StateVector { layout: psi.layout.clone(), amplitudes: self.matrix.dot(&psi.amplitudes) })
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Self> {
        self.layout.check_same(&rhs.layout)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix + &rhs.matrix })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator layouts differ")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator { layout: self.layout.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-ONE)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, c: C64) -> Operator {
        self.scale(c)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }
}

/// Pure state on a labelled space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    amplitudes: Array1<C64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes without normalizing.
    pub fn from_amplitudes(layout: SpaceLayout, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: amplitudes.len() });
        }
        Ok(Self { layout, amplitudes })
    }

    /// Builds a normalized state; fails on a zero vector.
    pub fn normalized(layout: SpaceLayout, amplitudes: Array1<C64>) -> Result<Self> {
        let mut s = Self::from_amplitudes(layout, amplitudes)?;
        let n = s.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("zero-norm state".into()));
        }
        s.amplitudes.mapv_inplace(|z| z / n);
        Ok(s)
    }

    /// Product basis state with one local index per subsystem.
    pub fn basis(layout: &SpaceLayout, local: &[usize]) -> Result<Self> {
        let idx = layout.flat_index(local)?;
        let mut amps = Array1::zeros(layout.dim());
        amps[idx] = ONE;
        Ok(Self { layout: layout.clone(), amplitudes: amps })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.layout.check_same(&other.layout)?;
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Tensor product `self ⊗ other`, concatenating layouts.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = SpaceLayout::new(
            self.layout
                .subsystems
                .iter()
                .chain(other.layout.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )?;
        let mut amps = Array1::zeros(layout.dim());
        let nb = other.amplitudes.len();
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                amps[i * nb + j] = a * b;
            }
        }
        Ok(StateVector { layout, amplitudes: amps })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.amplitudes.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { layout: self.layout.clone(), matrix: m }
    }
}

/// Mixed state on a labelled space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    matrix: Array2<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix without checking the state invariants; see [`Self::validate`].
    pub fn from_matrix(layout: SpaceLayout, matrix: Array2<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { layout, matrix })
    }

    /// Wraps a matrix and checks Hermiticity, unit trace and positivity.
    pub fn new(layout: SpaceLayout, matrix: Array2<C64>) -> Result<Self> {
        let rho = Self::from_matrix(layout, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    pub fn maximally_mixed(layout: &SpaceLayout) -> Self {
        let d = layout.dim();
        Self { layout: layout.clone(), matrix: identity(d).mapv(|z| z / d as f64) }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.matrix);
        if herm > RHO_HERMITIAN_TOL {
            return Err(Error::Invariant(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > RHO_TRACE_TOL {
            return Err(Error::Invariant(format!("density matrix trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -RHO_POSITIVITY_TOL {
            return Err(Error::Invariant(format!("density matrix eigenvalue {min:e} < 0")));
        }
        Ok(())
    }

    /// Replaces the matrix by `(ρ + ρ†)/2 / Tr ρ`.
    pub fn hermitize_normalize(&mut self) {
        let h = (&self.matrix + &dagger(&self.matrix)).mapv(|z| z * 0.5);
        let tr = h.diag().sum();
        self.matrix = h.mapv(|z| z / tr);
    }
}

/// Anything an expectation value can be taken on.
pub trait QuantumState {
    fn layout(&self) -> &SpaceLayout;
    fn expect_matrix(&self, op: &Array2<C64>) -> C64;
}

impl QuantumState for DensityMatrix {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn expect_matrix(&self, op: &Array2<C64>) -> C64 {
        // Tr(A ρ) = Σ_ij A_ij ρ_ji
        let n = self.matrix.nrows();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += op[[i, j]] * self.matrix[[j, i]];
            }
        }
        acc
    }
}

impl QuantumState for StateVector {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn expect_matrix(&self, op: &Array2<C64>) -> C64 {
        let v = op.dot(&self.amplitudes);
        self.amplitudes.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `Tr(op ρ)` or `⟨ψ|op|ψ⟩`.
pub fn expect<S: QuantumState + ?Sized>(op: &Operator, state: &S) -> Result<C64> {
    op.layout.check_same(state.layout())?;
    Ok(state.expect_matrix(&op.matrix))
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems retain
/// their original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one subsystem".into()));
    }
    for label in keep {
        rho.layout.index_of(label)?;
    }
    let subs = &rho.layout.subsystems;
    let kept: Vec<bool> = subs.iter().map(|s| keep.contains(&s.label.as_str())).collect();
    let out_layout = SpaceLayout::new(
        subs.iter().zip(&kept).filter(|(_, k)| **k).map(|(s, _)| (s.label.clone(), s.dim)),
    )?;
    let d = rho.layout.dim();
    let dk = out_layout.dim();

    // For every full index, split into (kept flat index, traced flat index).
    let split: Vec<(usize, usize)> = (0..d)
        .map(|mut idx| {
            let mut kept_idx = 0;
            let mut kept_stride = 1;
            let mut traced_idx = 0;
            let mut traced_stride = 1;
            for (s, &k) in subs.iter().zip(&kept).rev() {
                let local = idx % s.dim;
                idx /= s.dim;
                if k {
                    kept_idx += local * kept_stride;
                    kept_stride *= s.dim;
                } else {
                    traced_idx += local * traced_stride;
                    traced_stride *= s.dim;
                }
            }
            (kept_idx, traced_idx)
        })
        .collect();

    let mut out = Array2::zeros((dk, dk));
    for i in 0..d {
        let (ki, ti) = split[i];
        for j in 0..d {
            let (kj, tj) = split[j];
            if ti == tj {
                out[[ki, kj]] += rho.matrix[[i, j]];
            }
        }
    }
    DensityMatrix::from_matrix(out_layout, out)
}
