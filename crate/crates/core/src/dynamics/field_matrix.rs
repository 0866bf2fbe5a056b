//! Equations of motion for the field-matrix elements `ρ_mn` of the resonant
//! mode, truncated to photon numbers `{0, 1}`.
//!
//! With `S = Σ_j |1⟩_j⟨0|`, `F x = −i[H_d, x]` and `ρ10 = ρ01†`:
//!
//! ```text
//! ρ̇00 = Fρ00 − i g ρ01 S + i g* S† ρ10 + κ ρ11
//! ρ̇11 = Fρ11 − i g* ρ10 S† + i g S ρ01 − κ ρ11
//! ρ̇01 = Fρ01 − i g* ρ00 S† + i g* S† ρ11 − κ/2 ρ01
//! ```
//!
//! `κ` is the rate of the standard-form dissipator `κ(cρc† − ½{c†c, ρ})`.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use super::generator::check_grid;
use super::ode::{Dp45, StepControl};
use super::probes::Probes;
use super::series::{SolverMeta, TimeSeries};
use crate::analysis::qubit_layout;
use crate::error::{Error, Result};
use crate::hilbert::{dagger, ket_bra, tensor, DensityMatrix, I};
use crate::model::{EffectiveParams, LEVEL_0, LEVEL_1, NV_LABELS};

/// Trace tolerance of `ρ00 + ρ11`.
pub const FIELD_TRACE_TOL: f64 = 1e-8;
/// Column appended to the probes holding the photon number `Tr ρ11`.
pub const PHOTON_COLUMN: &str = "n_c";

#[derive(Clone, Debug)]
pub struct FieldMatrixModel {
    /// Drive Hamiltonian on the two-qubit product basis.
    pub h_d: Array2<C64>,
    pub g_eff: C64,
    pub kappa: f64,
}

fn qubit_op(j: usize, to: usize, from: usize) -> Array2<C64> {
    tensor(&[(NV_LABELS[j], &ket_bra(2, to, from))], &qubit_layout()).expect("static layout").into_matrix()
}

impl FieldMatrixModel {
    /// `H_d = −Σ_j [Δ̃_j |1⟩_j⟨1| + Θ |1⟩_j⟨0| + Θ* |0⟩_j⟨1|]`; `kappa` is
    /// the standard-form decay rate of the resonant mode.
    pub fn from_effective(eff: &EffectiveParams, kappa: f64) -> Self {
        let mut h = Array2::<C64>::zeros((4, 4));
        let shifts = [eff.delta_tilde_1, eff.delta_tilde_2];
        for j in 0..2 {
            h.scaled_add(C64::new(-shifts[j], 0.0), &qubit_op(j, LEVEL_1, LEVEL_1));
            h.scaled_add(-eff.theta, &qubit_op(j, LEVEL_1, LEVEL_0));
            h.scaled_add(-eff.theta.conj(), &qubit_op(j, LEVEL_0, LEVEL_1));
        }
        Self { h_d: h, g_eff: eff.g_eff, kappa }
    }

    fn raising(&self) -> Array2<C64> {
        qubit_op(0, LEVEL_1, LEVEL_0) + qubit_op(1, LEVEL_1, LEVEL_0)
    }
}

/// Blocks `ρ00, ρ01, ρ11` of the two-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldBlocks {
    pub rho00: Array2<C64>,
    pub rho01: Array2<C64>,
    pub rho11: Array2<C64>,
}

impl FieldBlocks {
    /// Qubit state with the mode in vacuum.
    pub fn vacuum(rho: &DensityMatrix) -> Result<Self> {
        if rho.layout() != &qubit_layout() {
            return Err(Error::LayoutMismatch(format!("{} is not the two-qubit layout", rho.layout())));
        }
        let z = Array2::zeros((4, 4));
        Ok(Self { rho00: rho.matrix().clone(), rho01: z.clone(), rho11: z })
    }

    fn check(&self) -> Result<()> {
        for b in [&self.rho00, &self.rho01, &self.rho11] {
            if b.dim() != (4, 4) {
                return Err(Error::DimensionMismatch { expected: 4, found: b.nrows() });
            }
        }
        Ok(())
    }

    fn pack(&self) -> Vec<C64> {
        self.rho00.iter().chain(self.rho01.iter()).chain(self.rho11.iter()).copied().collect()
    }

    fn unpack(y: &[C64]) -> Self {
        let b = |k: usize| Array2::from_shape_vec((4, 4), y[16 * k..16 * (k + 1)].to_vec()).expect("16");
        Self { rho00: b(0), rho01: b(1), rho11: b(2) }
    }

    /// `ϱ_N = ρ00 + ρ11`.
    pub fn reduced(&self) -> Array2<C64> {
        &self.rho00 + &self.rho11
    }
}

fn rhs(model: &FieldMatrixModel, sp: &Array2<C64>, sm: &Array2<C64>, y: &[C64], dy: &mut [C64]) {
    let b = FieldBlocks::unpack(y);
    let h = &model.h_d;
    let f = |x: &Array2<C64>| (h.dot(x) - x.dot(h)).mapv(|z| -I * z);
    let g = model.g_eff;
    let gc = g.conj();
    let k = model.kappa;
    let rho10 = dagger(&b.rho01);
    let d00 = f(&b.rho00) + b.rho01.dot(sp).mapv(|z| -I * g * z) + sm.dot(&rho10).mapv(|z| I * gc * z)
        + b.rho11.mapv(|z| k * z);
    let d11 = f(&b.rho11) + rho10.dot(sm).mapv(|z| -I * gc * z) + sp.dot(&b.rho01).mapv(|z| I * g * z)
        - b.rho11.mapv(|z| k * z);
    let d01 = f(&b.rho01) + b.rho00.dot(sm).mapv(|z| -I * gc * z) + sm.dot(&b.rho11).mapv(|z| I * gc * z)
        - b.rho01.mapv(|z| 0.5 * k * z);
    let mut out = Array2::<C64>::zeros((12, 4));
    out.slice_mut(s![0..4, ..]).assign(&d00);
    out.slice_mut(s![4..8, ..]).assign(&d01);
    out.slice_mut(s![8..12, ..]).assign(&d11);
    dy.iter_mut().zip(out.iter()).for_each(|(a, b)| *a = *b);
}

/// Integrates the block equations and samples `probes` (on the two-qubit
/// layout) on `ϱ_N = ρ00 + ρ11`, followed by the [`PHOTON_COLUMN`].
pub fn integrate_field_matrix(
    model: &FieldMatrixModel,
    init: &FieldBlocks,
    grid: &[f64],
    probes: &Probes,
    ctrl: &StepControl,
) -> Result<TimeSeries> {
    check_grid(grid)?;
    ctrl.validate()?;
    init.check()?;
    if model.h_d.dim() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: model.h_d.nrows() });
    }
    if probes.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: probes.dim() });
    }
    let sp = model.raising();
    let sm = dagger(&sp);
    let mut y = init.pack();
    let mut dp = Dp45::new(y.len(), *ctrl);
    let mut f = |_t: f64, x: &[C64], dx: &mut [C64]| rhs(model, &sp, &sm, x, dx);
    let meta = SolverMeta {
        solver: "field_matrix".into(),
        rtol: Some(ctrl.rtol),
        atol: Some(ctrl.atol),
        ..SolverMeta::default()
    };
    let mut names = probes.names();
    names.push(PHOTON_COLUMN.to_string());
    let mut series = TimeSeries::new(grid.to_vec(), names, meta);
    let mut raw = vec![0.0; probes.n_ops()];
    let mut t = grid[0];
    let mut drift: f64 = 0.0;
    for &ts in grid {
        dp.integrate(&mut f, &mut t, &mut y, ts)?;
        let blocks = FieldBlocks::unpack(&y);
        let rho_n = blocks.reduced();
        let tr = rho_n.diag().sum().re;
        drift = drift.max((tr - 1.0).abs());
        if !(drift <= FIELD_TRACE_TOL) {
            return Err(Error::Invariant(format!("Tr(ρ00 + ρ11) drift {drift:e} at t = {ts}")));
        }
        let flat: Vec<C64> = rho_n.iter().copied().collect();
        probes.raw_density(&flat, &mut raw);
        let mut row = probes.values(&raw);
        row.push(blocks.rho11.diag().sum().re);
        series.push_row(&row);
    }
    let rho_n = FieldBlocks::unpack(&y).reduced();
    series.states.push((t, DensityMatrix::from_matrix(qubit_layout(), rho_n)?));
    series.meta.steps = dp.stats();
    series.meta.trace_drift = drift;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::series::uniform_grid;
    use crate::hilbert::{frobenius, StateVector};

    fn model(g: f64, kappa: f64) -> FieldMatrixModel {
        let eff = EffectiveParams {
            theta: C64::new(-0.05, 0.0),
            g_eff: C64::new(g, 0.0),
            delta_tilde_1: 0.03,
            delta_tilde_2: -0.03,
            delta_tilde: 0.03,
            kappa_eff: 0.0,
        };
        FieldMatrixModel::from_effective(&eff, kappa)
    }

    fn trace_probe() -> Probes {
        let mut p = Probes::new(4);
        p.add_expectation("P00", &ket_bra(4, 0, 0));
        p
    }

    #[test]
    fn decoupled_blocks_at_zero_coupling() {
        let m = model(0.0, 0.4);
        let q = qubit_layout();
        let a = StateVector::basis(&q, &[0, 0]).unwrap().to_density().into_matrix().mapv(|z| z * 0.7);
        let b = StateVector::basis(&q, &[1, 0]).unwrap().to_density().into_matrix().mapv(|z| z * 0.3);
        let init = FieldBlocks { rho00: a.clone(), rho01: Array2::zeros((4, 4)), rho11: b.clone() };
        let t_end = 5.0;
        let grid = uniform_grid(t_end, 6).unwrap();
        let s = integrate_field_matrix(&m, &init, &grid, &trace_probe(), &StepControl::default()).unwrap();
        // ρ11 only feeds ρ00, so ρ00 + ρ11 evolves unitarily under H_d
        let u = crate::linalg::unitary(&m.h_d, t_end);
        let want = u.dot(&(&a + &b)).dot(&dagger(&u));
        let got = s.final_state().unwrap().matrix();
        assert!(frobenius(&(got - &want)) < 1e-8);
    }

    #[test]
    fn trace_conserved_with_coupling() {
        let m = model(0.1, 1.0);
        let rho = StateVector::basis(&qubit_layout(), &[0, 0]).unwrap().to_density();
        let grid = uniform_grid(50.0, 26).unwrap();
        let s =
            integrate_field_matrix(&m, &FieldBlocks::vacuum(&rho).unwrap(), &grid, &trace_probe(), &StepControl::default())
                .unwrap();
        assert!(s.meta.trace_drift < 1e-8);
        let n = s.get(PHOTON_COLUMN).unwrap();
        assert_eq!(n[0], 0.0);
        assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(n.iter().any(|x| *x > 1e-6));
    }

    #[test]
    fn bad_block_dimension() {
        let m = model(0.1, 1.0);
        let init = FieldBlocks { rho00: Array2::zeros((3, 3)), rho01: Array2::zeros((4, 4)), rho11: Array2::zeros((4, 4)) };
        let r = integrate_field_matrix(&m, &init, &[0.0, 1.0], &trace_probe(), &StepControl::default());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
