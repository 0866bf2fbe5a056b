use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::generator::{check_grid, Generator};
use super::ode::{Dp45, StepControl};
use super::probes::Probes;
use super::series::{SolverMeta, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Operator};
use crate::model::Hamiltonian;

/// Largest tolerated `|Tr ρ − 1|` at any sample.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;
/// Most negative tolerated eigenvalue of the final state.
pub const POSITIVITY_TOL: f64 = 1e-7;

/// Which states a density-matrix run keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Snapshots {
    Final,
    All,
    /// Every `n`-th sample plus the final one.
    Every(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct MeOptions {
    pub ctrl: StepControl,
    pub snapshots: Snapshots,
    pub check_positivity: bool,
}

impl Default for MeOptions {
    fn default() -> Self {
        Self { ctrl: StepControl::default(), snapshots: Snapshots::Final, check_positivity: true }
    }
}

fn to_density(layout: &crate::hilbert::SpaceLayout, y: &[C64]) -> Result<DensityMatrix> {
    let d = layout.dim();
    DensityMatrix::from_matrix(layout.clone(), Array2::from_shape_vec((d, d), y.to_vec()).expect("d*d"))
}

/// Integrates the Lindblad equation from `rho0` at `grid[0]`, sampling
/// `probes` at every grid point.
pub fn integrate_me(
    h: &Hamiltonian,
    collapse: &[Operator],
    rho0: &DensityMatrix,
    grid: &[f64],
    probes: &Probes,
    opts: &MeOptions,
) -> Result<TimeSeries> {
    check_grid(grid)?;
    opts.ctrl.validate()?;
    if rho0.layout() != h.layout() {
        return Err(Error::LayoutMismatch(format!("{} vs {}", rho0.layout(), h.layout())));
    }
    if probes.dim() != h.layout().dim() {
        return Err(Error::DimensionMismatch { expected: h.layout().dim(), found: probes.dim() });
    }
    rho0.validate()?;
    let mut gen = Generator::new(h, collapse)?;
    let layout = h.layout().clone();
    let mut y: Vec<C64> = rho0.matrix().iter().copied().collect();
    let mut dp = Dp45::new(y.len(), opts.ctrl);
    let meta = SolverMeta {
        solver: "me".into(),
        rtol: Some(opts.ctrl.rtol),
        atol: Some(opts.ctrl.atol),
        ..SolverMeta::default()
    };
    let mut series = TimeSeries::new(grid.to_vec(), probes.names(), meta);
    let mut raw = vec![0.0; probes.n_ops()];
    let mut rhs = |t: f64, x: &[C64], dx: &mut [C64]| gen.lindblad(t, x, dx);
    let mut t = grid[0];
    let d = layout.dim();
    let mut drift: f64 = 0.0;
    for (s, &ts) in grid.iter().enumerate() {
        dp.integrate(&mut rhs, &mut t, &mut y, ts)?;
        probes.raw_density(&y, &mut raw);
        let tr: f64 = (0..d).map(|i| y[i * d + i].re).sum();
        if !tr.is_finite() {
            return Err(Error::Invariant(format!("non-finite state at t = {ts}")));
        }
        drift = drift.max((tr - 1.0).abs());
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::Invariant(format!("trace drift {drift:e} at t = {ts}")));
        }
        series.push_row(&probes.values(&raw));
        let keep = match opts.snapshots {
            Snapshots::All => true,
            Snapshots::Every(n) => n > 0 && s % n == 0,
            Snapshots::Final => false,
        };
        if keep && s + 1 < grid.len() {
            series.states.push((ts, to_density(&layout, &y)?));
        }
    }
    let last = to_density(&layout, &y)?;
    if opts.check_positivity {
        let min = last.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Invariant(format!("final state eigenvalue {min:e}")));
        }
    }
    series.states.push((t, last));
    series.meta.steps = dp.stats();
    series.meta.trace_drift = drift;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::series::uniform_grid;
    use crate::hilbert::{annihilation, dagger, ket_bra, tensor, SpaceLayout, StateVector};
    use crate::model::Harmonic;

    #[test]
    fn damped_mode_number_decay() {
        let kappa = 0.3;
        let l = SpaceLayout::new([("c", 4)]).unwrap();
        let a = tensor(&[("c", &annihilation(3).unwrap())], &l).unwrap();
        let n = dagger(a.matrix()).dot(a.matrix());
        let h = Hamiltonian::constant(Operator::zeros(&l));
        let rho0 = StateVector::basis(&l, &[1]).unwrap().to_density();
        let mut probes = Probes::new(4);
        probes.add_expectation("n", &n);
        let grid = uniform_grid(10.0, 101).unwrap();
        let jump = a.scale(C64::new((2.0_f64 * kappa).sqrt(), 0.0));
        let s = integrate_me(&h, &[jump], &rho0, &grid, &probes, &MeOptions::default()).unwrap();
        for (t, v) in s.times.iter().zip(s.get("n").unwrap()) {
            assert!((v - (-2.0 * kappa * t).exp()).abs() < 1e-6);
        }
        assert!(s.meta.trace_drift < 1e-12);
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 0.7;
        let l = SpaceLayout::new([("q", 2)]).unwrap();
        let x = &ket_bra(2, 0, 1) + &ket_bra(2, 1, 0);
        let h = Hamiltonian::constant(Operator::new(l.clone(), x.mapv(|z| z * omega)).unwrap());
        let rho0 = StateVector::basis(&l, &[0]).unwrap().to_density();
        let mut probes = Probes::new(2);
        probes.add_expectation("Pe", &ket_bra(2, 1, 1));
        let grid = uniform_grid(20.0, 201).unwrap();
        let opts = MeOptions { ctrl: StepControl::with_tolerances(1e-10, 1e-12), ..MeOptions::default() };
        let s = integrate_me(&h, &[], &rho0, &grid, &probes, &opts).unwrap();
        for (t, v) in s.times.iter().zip(s.get("Pe").unwrap()) {
            assert!((v - (omega * t).sin().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn unitary_time_dependent_preserves_purity() {
        let l = SpaceLayout::new([("q", 3)]).unwrap();
        let op = &ket_bra(3, 2, 0) + &ket_bra(3, 2, 1).mapv(|z| z * 0.4);
        let h = Hamiltonian::new(
            l.clone(),
            ket_bra(3, 1, 1).mapv(|z| z * 0.3),
            vec![Harmonic { freq: 5.0, op }, Harmonic { freq: -2.0, op: ket_bra(3, 1, 0) }],
        )
        .unwrap();
        let rho0 = StateVector::basis(&l, &[0]).unwrap().to_density();
        let mut probes = Probes::new(3);
        probes.add_expectation("p0", &ket_bra(3, 0, 0));
        let grid = uniform_grid(10.0, 11).unwrap();
        let opts = MeOptions {
            ctrl: StepControl::with_tolerances(1e-10, 1e-12),
            snapshots: Snapshots::All,
            ..MeOptions::default()
        };
        let s = integrate_me(&h, &[], &rho0, &grid, &probes, &opts).unwrap();
        assert_eq!(s.states.len(), 11);
        for (_, rho) in &s.states {
            assert!((rho.purity() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn layout_mismatch_rejected() {
        let l = SpaceLayout::new([("q", 2)]).unwrap();
        let m = SpaceLayout::new([("m", 2)]).unwrap();
        let h = Hamiltonian::constant(Operator::zeros(&l));
        let rho0 = DensityMatrix::maximally_mixed(&m);
        let probes = Probes::new(2);
        let r = integrate_me(&h, &[], &rho0, &[0.0, 1.0], &probes, &MeOptions::default());
        assert!(matches!(r, Err(Error::LayoutMismatch(_))));
    }
}
