//! Stationary states from the kernel of the dense Liouvillian.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{dagger, frobenius, identity, DensityMatrix, Operator, I};
use crate::linalg::svd;
use crate::model::{check_layout, Hamiltonian};

/// Largest Hilbert-space dimension for the dense construction by default.
pub const DEFAULT_DIM_CAP: usize = 64;
/// Singular values below `KERNEL_TOL · σ_max` count as zero.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct SteadyOptions {
    pub dim_cap: usize,
    pub kernel_tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { dim_cap: DEFAULT_DIM_CAP, kernel_tol: KERNEL_TOL }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho_ss: DensityMatrix,
    /// Dimension of the numerical kernel.
    pub null_dim: usize,
    /// `‖L[ρ_ss]‖_F`.
    pub residual: f64,
    /// Smallest singular values, ascending (at most eight).
    pub smallest_singular_values: Vec<f64>,
}

impl SteadyStateResult {
    pub fn is_unique(&self) -> bool {
        self.null_dim == 1
    }
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    crate::hilbert::kron(a, b)
}

/// Row-major vectorized Liouvillian:
/// `−i(H⊗1 − 1⊗Hᵀ) + Σ_k [L_k⊗L̄_k − ½(L_k†L_k)⊗1 − ½ 1⊗(L_k†L_k)ᵀ]`.
pub fn liouvillian(h: &Operator, collapse: &[Operator]) -> Result<Array2<C64>> {
    check_layout(collapse, h.layout())?;
    let d = h.dim();
    let id = identity(d);
    let hm = h.matrix();
    let mut l = (kron(hm, &id) - kron(&id, &hm.t().to_owned())).mapv(|z| -I * z);
    for op in collapse {
        let m = op.matrix();
        let ll = dagger(m).dot(m);
        l += &kron(m, &m.mapv(|z| z.conj()));
        l -= &(kron(&ll, &id) + kron(&id, &ll.t().to_owned())).mapv(|z| 0.5 * z);
    }
    Ok(l)
}

/// Stationary state of a time-independent generator.
pub fn steady_state(h: &Hamiltonian, collapse: &[Operator], opts: &SteadyOptions) -> Result<SteadyStateResult> {
    if !h.is_time_independent() {
        return Err(Error::InvalidParameter("steady state needs a time-independent Hamiltonian".into()));
    }
    let d = h.layout().dim();
    if d > opts.dim_cap {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} exceeds the dense Liouvillian cap {}",
            opts.dim_cap
        )));
    }
    let hop = h.at(0.0);
    let lv = liouvillian(&hop, collapse)?;
    let dec = svd(&lv);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let threshold = opts.kernel_tol * smax;
    let null_dim = dec.singular_values.iter().filter(|s| **s <= threshold).count();
    let mut tail: Vec<f64> = dec.singular_values.iter().rev().take(8).copied().collect();
    tail.sort_by(|a, b| a.partial_cmp(b).expect("finite singular values"));
    if null_dim == 0 {
        return Err(Error::NoKernel { smallest: tail.first().copied().unwrap_or(0.0), threshold });
    }
    let n = dec.singular_values.len();
    // Among kernel vectors, take the one with the largest trace.
    let trace_of = |v: &Array1<C64>| (0..d).map(|i| v[i * d + i]).sum::<C64>();
    let v = dec.right_vectors[n - null_dim..]
        .iter()
        .max_by(|a, b| trace_of(a).norm().partial_cmp(&trace_of(b).norm()).expect("finite"))
        .expect("nonempty kernel");
    let tr = trace_of(v);
    if tr.norm() == 0.0 {
        return Err(Error::Invariant("kernel vector with zero trace".into()));
    }
    let m = Array2::from_shape_vec((d, d), v.iter().map(|z| z / tr).collect()).expect("d*d");
    let mut rho = DensityMatrix::from_matrix(h.layout().clone(), m)?;
    rho.hermitize_normalize();
    let vec_rho = Array1::from_iter(rho.matrix().iter().copied());
    let residual = lv.dot(&vec_rho).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(SteadyStateResult { rho_ss: rho, null_dim, residual, smallest_singular_values: tail })
}

/// `‖ρ(a) − ρ(b)‖_F`, used as the stationarity measure of a trajectory.
pub fn state_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    frobenius(&(a.matrix() - b.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, tensor, SpaceLayout};

    #[test]
    fn damped_mode_relaxes_to_vacuum() {
        let l = SpaceLayout::new([("c", 4)]).unwrap();
        let a = tensor(&[("c", &annihilation(3).unwrap())], &l).unwrap();
        let n = dagger(a.matrix()).dot(a.matrix());
        let h = Hamiltonian::constant(Operator::new(l.clone(), n.mapv(|z| z * 0.3)).unwrap());
        let r = steady_state(&h, &[a.scale(C64::new(0.8, 0.0))], &SteadyOptions::default()).unwrap();
        assert_eq!(r.null_dim, 1);
        assert!((r.rho_ss.matrix()[[0, 0]].re - 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn liouvillian_matches_matrix_form() {
        let l = SpaceLayout::new([("q", 3)]).unwrap();
        let hm = Array2::from_shape_fn((3, 3), |(i, j)| C64::new((i + j) as f64, i as f64 - j as f64));
        let h = Operator::new(l.clone(), hm.clone()).unwrap();
        let lm = Array2::from_shape_fn((3, 3), |(i, j)| C64::new((i * j) as f64 * 0.3, 0.1 * i as f64));
        let jump = Operator::new(l, lm.clone()).unwrap();
        let lv = liouvillian(&h, &[jump]).unwrap();
        let rho = Array2::from_shape_fn((3, 3), |(i, j)| C64::new(1.0 + i as f64, j as f64 * 0.5));
        let want = {
            let ld = dagger(&lm);
            let ll = ld.dot(&lm);
            (hm.dot(&rho) - rho.dot(&hm)).mapv(|z| -I * z) + lm.dot(&rho).dot(&ld)
                - (ll.dot(&rho) + rho.dot(&ll)).mapv(|z| 0.5 * z)
        };
        let got = lv.dot(&Array1::from_iter(rho.iter().copied()));
        let got = Array2::from_shape_vec((3, 3), got.to_vec()).unwrap();
        assert!(frobenius(&(&got - &want)) < 1e-12);
    }

    #[test]
    fn closed_system_has_degenerate_kernel() {
        let l = SpaceLayout::new([("q", 2)]).unwrap();
        let h = Hamiltonian::constant(Operator::zeros(&l));
        let r = steady_state(&h, &[], &SteadyOptions::default()).unwrap();
        assert_eq!(r.null_dim, 4);
        assert!(!r.is_unique());
    }

    #[test]
    fn dimension_cap_enforced() {
        let l = SpaceLayout::new([("q", 5)]).unwrap();
        let h = Hamiltonian::constant(Operator::zeros(&l));
        let opts = SteadyOptions { dim_cap: 4, ..SteadyOptions::default() };
        assert!(steady_state(&h, &[], &opts).is_err());
    }
}
