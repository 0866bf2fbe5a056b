//! Two-qubit observables: singlet/triplet populations, fidelity to the target
//! dark state, and the reduction of full-tier states to the qubit subspace.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::dynamics::Probes;
use crate::hilbert::{
    annihilation, dagger, identity, partial_trace, tensor, DensityMatrix, SpaceLayout, StateVector, ONE, ZERO,
};
use crate::model::{EffectiveParams, NV_LABELS, PAIR_LABEL};

/// Largest `|e⟩` population [`reduce_to_qubits`] accepts by default.
pub const LEAKAGE_THRESHOLD: f64 = 0.05;

/// `NV1(2) ⊗ NV2(2)` in the product basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn qubit_layout() -> SpaceLayout {
    SpaceLayout::new([(NV_LABELS[0], 2), (NV_LABELS[1], 2)]).expect("static layout")
}

/// The singlet/triplet basis `(|00⟩, |T⟩, |11⟩, |S⟩)` expressed in the
/// two-qubit product basis.
#[derive(Clone, Debug)]
pub struct CollectiveBasis {
    vectors: [Array1<C64>; 4],
}

impl CollectiveBasis {
    pub const IDX_00: usize = 0;
    pub const IDX_T: usize = 1;
    pub const IDX_11: usize = 2;
    pub const IDX_S: usize = 3;
    pub const NAMES: [&'static str; 4] = ["00", "T", "11", "S"];

    pub fn new() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = |a: [C64; 4]| Array1::from(a.to_vec());
        Self {
            vectors: [
                v([ONE, ZERO, ZERO, ZERO]),
                v([ZERO, h, h, ZERO]),
                v([ZERO, ZERO, ZERO, ONE]),
                v([ZERO, h, -h, ZERO]),
            ],
        }
    }

    pub fn vector(&self, idx: usize) -> &Array1<C64> {
        &self.vectors[idx]
    }

    pub fn state(&self, idx: usize) -> StateVector {
        StateVector::from_amplitudes(qubit_layout(), self.vectors[idx].clone()).expect("dim 4")
    }

    /// Unitary whose columns are the collective states; maps collective
    /// coordinates to product coordinates.
    pub fn change_of_basis(&self) -> Array2<C64> {
        Array2::from_shape_fn((4, 4), |(i, k)| self.vectors[k][i])
    }

    /// `max |⟨v_i|v_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let u = self.change_of_basis();
        let g = dagger(&u).dot(&u);
        g.indexed_iter()
            .map(|((i, j), z)| (z - if i == j { ONE } else { ZERO }).norm())
            .fold(0.0, f64::max)
    }
}

impl Default for CollectiveBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// Target state `(Δ̃|11⟩ + √2Θ*|S⟩)/√(2|Θ|² + Δ̃²)` on the qubit layout, the
/// joint dark state of the collective drive and jump (`Θ* = Θ` for real drives).
pub fn psi_s(eff: &EffectiveParams) -> Result<StateVector> {
    psi_s_from(eff.theta, eff.delta_tilde)
}

pub fn psi_s_from(theta: C64, delta_tilde: f64) -> Result<StateVector> {
    let norm = (2.0 * theta.norm_sqr() + delta_tilde * delta_tilde).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidParameter("target state needs Θ or Δ̃ nonzero".into()));
    }
    let b = CollectiveBasis::new();
    let amps = b.vector(CollectiveBasis::IDX_11).mapv(|z| z * delta_tilde / norm)
        + b.vector(CollectiveBasis::IDX_S).mapv(|z| z * theta.conj() * std::f64::consts::SQRT_2 / norm);
    StateVector::from_amplitudes(qubit_layout(), amps)
}

fn require_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.layout() != &qubit_layout() {
        return Err(Error::LayoutMismatch(format!("{} is not the two-qubit layout", rho.layout())));
    }
    Ok(())
}

fn sandwich(v: &Array1<C64>, m: &Array2<C64>) -> C64 {
    let mv = m.dot(v);
    v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `F = ⟨ψ_S|ϱ_N|ψ_S⟩`.
pub fn fidelity(rho: &DensityMatrix, eff: &EffectiveParams) -> Result<f64> {
    require_qubits(rho)?;
    let psi = psi_s(eff)?;
    Ok(sandwich(psi.amplitudes(), rho.matrix()).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Populations {
    pub p00: f64,
    pub p11: f64,
    pub pt: f64,
    pub ps: f64,
}

impl Populations {
    pub fn sum(&self) -> f64 {
        self.p00 + self.p11 + self.pt + self.ps
    }
}

/// Diagonal of `ϱ_N` in the collective basis.
pub fn populations(rho: &DensityMatrix) -> Result<Populations> {
    require_qubits(rho)?;
    let b = CollectiveBasis::new();
    let p = |idx| sandwich(b.vector(idx), rho.matrix()).re;
    Ok(Populations {
        p00: p(CollectiveBasis::IDX_00),
        p11: p(CollectiveBasis::IDX_11),
        pt: p(CollectiveBasis::IDX_T),
        ps: p(CollectiveBasis::IDX_S),
    })
}

/// Embeds a two-qubit operator (product basis) into `layout`, acting as the
/// identity on every bosonic mode and as zero on any `|e⟩` level. A `pair`
/// layout receives the operator in the collective basis.
pub fn embed_qubit_operator(op: &Array2<C64>, layout: &SpaceLayout) -> Result<Array2<C64>> {
    if op.dim() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: op.nrows() });
    }
    if layout.contains(PAIR_LABEL) {
        let u = CollectiveBasis::new().change_of_basis();
        let local = dagger(&u).dot(op).dot(&u);
        return Ok(tensor(&[(PAIR_LABEL, &local)], layout)?.into_matrix());
    }
    let k1 = layout.index_of(NV_LABELS[0])?;
    let k2 = layout.index_of(NV_LABELS[1])?;
    let d = layout.dim();
    let locals: Vec<Vec<usize>> = (0..d).map(|i| layout.local_indices(i)).collect();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        let (a1, a2) = (locals[i][k1], locals[i][k2]);
        if a1 > 1 || a2 > 1 {
            continue;
        }
        for j in 0..d {
            let (b1, b2) = (locals[j][k1], locals[j][k2]);
            if b1 > 1 || b2 > 1 {
                continue;
            }
            let rest_equal = locals[i]
                .iter()
                .zip(&locals[j])
                .enumerate()
                .all(|(k, (x, y))| k == k1 || k == k2 || x == y);
            if rest_equal {
                out[[i, j]] = op[[2 * a1 + a2, 2 * b1 + b2]];
            }
        }
    }
    Ok(out)
}

/// Lifts a two-qubit state to `layout` with every bosonic mode in vacuum.
pub fn embed_qubit_state(psi: &StateVector, layout: &SpaceLayout) -> Result<StateVector> {
    if psi.layout() != &qubit_layout() {
        return Err(Error::LayoutMismatch(format!("{} is not the two-qubit layout", psi.layout())));
    }
    if layout.contains(PAIR_LABEL) {
        let u = CollectiveBasis::new().change_of_basis();
        let amps = dagger(&u).dot(psi.amplitudes());
        return StateVector::from_amplitudes(layout.clone(), amps);
    }
    let k1 = layout.index_of(NV_LABELS[0])?;
    let k2 = layout.index_of(NV_LABELS[1])?;
    let mut amps = Array1::zeros(layout.dim());
    for a in 0..4 {
        let mut local = vec![0; layout.subsystems().len()];
        local[k1] = a / 2;
        local[k2] = a % 2;
        amps[layout.flat_index(&local)?] = psi.amplitudes()[a];
    }
    StateVector::from_amplitudes(layout.clone(), amps)
}

/// Qubit-subspace state together with the excited-level population removed
/// by the projection.
#[derive(Clone, Debug)]
pub struct ReducedState {
    pub rho: DensityMatrix,
    pub leakage: f64,
}

/// `ϱ_N`: traces out every bosonic mode, projects each center onto
/// `span{|0⟩, |1⟩}` and renormalizes. Fails when the discarded `|e⟩`
/// population exceeds `threshold`.
pub fn reduce_to_qubits(rho: &DensityMatrix, threshold: f64) -> Result<ReducedState> {
    let total = rho.trace().re;
    if layout_is_pair(rho.layout()) {
        let u = CollectiveBasis::new().change_of_basis();
        let m = u.dot(rho.matrix()).dot(&dagger(&u)).mapv(|z| z / total);
        return Ok(ReducedState { rho: DensityMatrix::from_matrix(qubit_layout(), m)?, leakage: 0.0 });
    }
    let nv = partial_trace(rho, &NV_LABELS)?;
    let d2 = nv.layout().dim_of(NV_LABELS[1])?;
    let mut block = Array2::zeros((4, 4));
    for a in 0..4 {
        for b in 0..4 {
            block[[a, b]] = nv.matrix()[[(a / 2) * d2 + a % 2, (b / 2) * d2 + b % 2]];
        }
    }
    let kept = block.diag().sum().re;
    let leakage = 1.0 - kept / total;
    if leakage > threshold {
        return Err(Error::Leakage { leakage, threshold });
    }
    let rho = DensityMatrix::from_matrix(qubit_layout(), block.mapv(|z| z / kept))?;
    Ok(ReducedState { rho, leakage })
}

fn layout_is_pair(layout: &SpaceLayout) -> bool {
    layout.subsystems().len() == 1 && layout.contains(PAIR_LABEL)
}

/// Column names of the qubit observables, in output order.
pub const QUBIT_OBSERVABLES: [&str; 5] = ["F", "P00", "P11", "PT", "PS"];
/// Column holding the population outside the qubit subspace.
pub const LEAKAGE_COLUMN: &str = "leakage";

/// Observables sampled during a run on `layout`: the five qubit columns,
/// `⟨n⟩` for each `(column, mode label)` in `modes`, and the leakage.
///
/// Qubit observables are evaluated as `Tr(A ρ) / Tr(P_q ρ)` with `P_q` the
/// projector onto the qubit subspace, which equals their value on the
/// renormalized [`reduce_to_qubits`] output while staying linear in `ρ` for
/// trajectory averaging.
pub fn standard_probes(layout: &SpaceLayout, eff: &EffectiveParams, modes: &[(&str, &str)]) -> Result<Probes> {
    let b = CollectiveBasis::new();
    let psi = psi_s(eff)?;
    let proj = |v: &Array1<C64>| Array2::from_shape_fn((4, 4), |(i, j)| v[i] * v[j].conj());
    let targets = [
        proj(psi.amplitudes()),
        proj(b.vector(CollectiveBasis::IDX_00)),
        proj(b.vector(CollectiveBasis::IDX_11)),
        proj(b.vector(CollectiveBasis::IDX_T)),
        proj(b.vector(CollectiveBasis::IDX_S)),
    ];
    let mut probes = Probes::new(layout.dim());
    let pq = embed_qubit_operator(&identity(4), layout)?;
    let outside = &identity(layout.dim()) - &pq;
    let q = probes.add_op(&pq);
    for (name, target) in QUBIT_OBSERVABLES.iter().zip(&targets) {
        let k = probes.add_op(&embed_qubit_operator(target, layout)?);
        probes.add_ratio(*name, k, q);
    }
    for (name, label) in modes {
        let a = annihilation(layout.dim_of(label)? - 1)?;
        let n = dagger(&a).dot(&a);
        probes.add_expectation(*name, tensor(&[(*label, &n)], layout)?.matrix());
    }
    probes.add_expectation(LEAKAGE_COLUMN, &outside);
    Ok(probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{effective_params, presets};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fig4_eff() -> EffectiveParams {
        effective_params(&presets::fig4()).unwrap()
    }

    fn dm(psi: &StateVector) -> DensityMatrix {
        psi.to_density()
    }

    #[test]
    fn collective_basis_is_orthonormal() {
        assert!(CollectiveBasis::new().orthonormality_error() < 1e-14);
    }

    #[test]
    fn psi_s_fig4_populations() {
        let psi = psi_s(&fig4_eff()).unwrap();
        let p = populations(&dm(&psi)).unwrap();
        assert_abs_diff_eq!(p.p11, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.ps, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.p00 + p.pt, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn psi_s_limits() {
        let b = CollectiveBasis::new();
        let s = psi_s_from(C64::new(-0.01, 0.0), 0.0).unwrap();
        let ov = s.inner(&b.state(CollectiveBasis::IDX_S)).unwrap().norm();
        assert_abs_diff_eq!(ov, 1.0, epsilon = 1e-15);
        let s = psi_s_from(ZERO, 0.3).unwrap();
        assert_eq!(s.amplitudes(), b.vector(CollectiveBasis::IDX_11));
        assert!(psi_s_from(ZERO, 0.0).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let eff = fig4_eff();
        let psi = psi_s(&eff).unwrap();
        assert_abs_diff_eq!(fidelity(&dm(&psi), &eff).unwrap(), 1.0, epsilon = 1e-14);
        let t = CollectiveBasis::new().state(CollectiveBasis::IDX_T);
        assert_abs_diff_eq!(fidelity(&dm(&t), &eff).unwrap(), 0.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(&qubit_layout());
        assert_abs_diff_eq!(fidelity(&mixed, &eff).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn population_examples() {
        let q = qubit_layout();
        let p = populations(&dm(&StateVector::basis(&q, &[0, 0]).unwrap())).unwrap();
        assert_eq!((p.p00, p.p11, p.pt, p.ps), (1.0, 0.0, 0.0, 0.0));
        let p = populations(&dm(&StateVector::basis(&q, &[0, 1]).unwrap())).unwrap();
        assert_abs_diff_eq!(p.pt, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.ps, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p00 + p.p11, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wrong_layout_rejected() {
        let l = SpaceLayout::new([("NV1", 3), ("NV2", 3)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(&l);
        assert!(matches!(fidelity(&rho, &fig4_eff()), Err(Error::LayoutMismatch(_))));
        assert!(populations(&rho).is_err());
    }

    #[test]
    fn reduce_product_with_vacuum() {
        let full = SpaceLayout::new([("NV1", 3), ("NV2", 3), ("c", 2), ("c1", 2)]).unwrap();
        let psi = psi_s(&fig4_eff()).unwrap();
        let lifted = embed_qubit_state(&psi, &full).unwrap();
        let red = reduce_to_qubits(&lifted.to_density(), LEAKAGE_THRESHOLD).unwrap();
        assert_eq!(red.leakage, 0.0);
        let diff = &red.rho.matrix().clone() - dm(&psi).matrix();
        assert!(crate::hilbert::frobenius(&diff) < 1e-15);
        assert_abs_diff_eq!(red.rho.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn reduce_reports_and_rejects_leakage() {
        let l = SpaceLayout::new([("NV1", 3), ("NV2", 3), ("c", 2)]).unwrap();
        let mut m = Array2::zeros((18, 18));
        let i00 = l.flat_index(&[0, 0, 0]).unwrap();
        let ie0 = l.flat_index(&[2, 0, 0]).unwrap();
        m[[i00, i00]] = C64::new(0.97, 0.0);
        m[[ie0, ie0]] = C64::new(0.03, 0.0);
        let rho = DensityMatrix::from_matrix(l, m).unwrap();
        let red = reduce_to_qubits(&rho, LEAKAGE_THRESHOLD).unwrap();
        assert_abs_diff_eq!(red.leakage, 0.03, epsilon = 1e-15);
        assert_abs_diff_eq!(red.rho.matrix()[[0, 0]].re, 1.0, epsilon = 1e-15);
        assert!(matches!(reduce_to_qubits(&rho, 0.02), Err(Error::Leakage { .. })));
    }

    #[test]
    fn pair_layout_round_trip() {
        let pair = SpaceLayout::new([(PAIR_LABEL, 4)]).unwrap();
        let psi = psi_s(&fig4_eff()).unwrap();
        let lifted = embed_qubit_state(&psi, &pair).unwrap();
        // |ψ_S⟩ only has |11⟩ and |S⟩ components in the collective basis
        let a = lifted.amplitudes();
        assert!(a[CollectiveBasis::IDX_00].norm() < 1e-15 && a[CollectiveBasis::IDX_T].norm() < 1e-15);
        let red = reduce_to_qubits(&lifted.to_density(), LEAKAGE_THRESHOLD).unwrap();
        assert_abs_diff_eq!(fidelity(&red.rho, &fig4_eff()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn probes_match_reduced_state() {
        let l = SpaceLayout::new([("NV1", 3), ("NV2", 3), ("c", 2)]).unwrap();
        let eff = fig4_eff();
        let probes = standard_probes(&l, &eff, &[("n_c", "c")]).unwrap();
        assert_eq!(probes.names(), ["F", "P00", "P11", "PT", "PS", "n_c", "leakage"]);
        // arbitrary normalized vector with some |e⟩ and photon weight
        let amps = Array1::from_shape_fn(18, |i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
        let psi = StateVector::normalized(l.clone(), amps).unwrap();
        let rho = psi.to_density();
        let red = reduce_to_qubits(&rho, 1.0).unwrap();
        let flat: Vec<C64> = rho.matrix().iter().copied().collect();
        let mut raw = vec![0.0; probes.n_ops()];
        probes.raw_density(&flat, &mut raw);
        let v = probes.values(&raw);
        let p = populations(&red.rho).unwrap();
        assert_abs_diff_eq!(v[0], fidelity(&red.rho, &eff).unwrap(), epsilon = 1e-13);
        assert_abs_diff_eq!(v[1], p.p00, epsilon = 1e-13);
        assert_abs_diff_eq!(v[2], p.p11, epsilon = 1e-13);
        assert_abs_diff_eq!(v[3], p.pt, epsilon = 1e-13);
        assert_abs_diff_eq!(v[4], p.ps, epsilon = 1e-13);
        assert_abs_diff_eq!(v[6], red.leakage, epsilon = 1e-13);
        let mut raw_ket = vec![0.0; probes.n_ops()];
        probes.raw_ket(psi.amplitudes().as_slice().unwrap(), &mut raw_ket);
        for (a, b) in probes.values(&raw_ket).iter().zip(&v) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    fn random_qubit_rho(seed: &[f64]) -> DensityMatrix {
        // ρ = A A† / Tr for a 4×4 A filled from the seed
        let a = Array2::from_shape_fn((4, 4), |(i, j)| C64::new(seed[4 * i + j], seed[16 + 4 * i + j]));
        let m = a.dot(&dagger(&a));
        let tr = m.diag().sum();
        DensityMatrix::from_matrix(qubit_layout(), m.mapv(|z| z / tr)).unwrap()
    }

    proptest! {
        #[test]
        fn fidelity_is_linear(
            s1 in proptest::collection::vec(-1.0f64..1.0, 32),
            s2 in proptest::collection::vec(-1.0f64..1.0, 32),
            alpha in 0.0f64..1.0,
        ) {
            let eff = fig4_eff();
            let (r1, r2) = (random_qubit_rho(&s1), random_qubit_rho(&s2));
            let mix = r1.matrix().mapv(|z| z * alpha) + r2.matrix().mapv(|z| z * (1.0 - alpha));
            let mix = DensityMatrix::from_matrix(qubit_layout(), mix).unwrap();
            let lhs = fidelity(&mix, &eff).unwrap();
            let rhs = alpha * fidelity(&r1, &eff).unwrap() + (1.0 - alpha) * fidelity(&r2, &eff).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn fidelity_plus_complement_is_trace(
            s in proptest::collection::vec(-1.0f64..1.0, 32),
            theta in -1.0f64..1.0,
            dt in -1.0f64..1.0,
        ) {
            prop_assume!(theta.abs() + dt.abs() > 1e-3);
            let rho = random_qubit_rho(&s);
            let psi = psi_s_from(C64::new(theta, 0.0), dt).unwrap();
            // orthogonal complement: |00⟩, |T⟩ and the partner of ψ_S in span{|11⟩, |S⟩}
            let b = CollectiveBasis::new();
            let n = (2.0 * theta * theta + dt * dt).sqrt();
            let perp = b.vector(CollectiveBasis::IDX_11).mapv(|z| z * (-std::f64::consts::SQRT_2 * theta / n))
                + b.vector(CollectiveBasis::IDX_S).mapv(|z| z * (dt / n));
            let f = sandwich(psi.amplitudes(), rho.matrix()).re;
            let rest = sandwich(b.vector(CollectiveBasis::IDX_00), rho.matrix()).re
                + sandwich(b.vector(CollectiveBasis::IDX_T), rho.matrix()).re
                + sandwich(&perp, rho.matrix()).re;
            prop_assert!((f + rest - rho.trace().re).abs() < 1e-10);
        }

        #[test]
        fn populations_ignore_basis_phases(
            s in proptest::collection::vec(-1.0f64..1.0, 32),
            phases in proptest::collection::vec(0.0f64..6.3, 4),
        ) {
            let rho = random_qubit_rho(&s);
            let p = populations(&rho).unwrap();
            prop_assert!((p.sum() - rho.trace().re).abs() < 1e-10);
            // rephase the collective basis states: ρ → D ρ D† in collective coordinates
            let u = CollectiveBasis::new().change_of_basis();
            let d = Array2::from_diag(&Array1::from_iter(phases.iter().map(|ph| C64::from_polar(1.0, *ph))));
            let w = u.dot(&d).dot(&dagger(&u));
            let rotated = w.dot(rho.matrix()).dot(&dagger(&w));
            let q = populations(&DensityMatrix::from_matrix(qubit_layout(), rotated).unwrap()).unwrap();
            prop_assert!((p.p00 - q.p00).abs() < 1e-12);
            prop_assert!((p.p11 - q.p11).abs() < 1e-12);
            prop_assert!((p.pt - q.pt).abs() < 1e-12);
            prop_assert!((p.ps - q.ps).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_identity_is_qubit_projector() {
        let l = SpaceLayout::new([("NV1", 3), ("NV2", 2), ("c", 3)]).unwrap();
        let p = embed_qubit_operator(&identity(4), &l).unwrap();
        assert_abs_diff_eq!(p.diag().sum().re, 12.0, epsilon = 1e-15);
        assert!(crate::hilbert::frobenius(&(&p.dot(&p) - &p)) < 1e-15);
    }
}
