//! Sparse evaluation of the Lindblad generator and the non-Hermitian
//! no-jump generator.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{dagger, Operator, SpaceLayout, I, ZERO};
use crate::model::{check_layout, Hamiltonian};
use crate::sparse::Csr;

/// `dρ/dt = Kρ + ρK† + Σ_k L_k ρ L_k†` with `K(t) = −iH(t) − ½ Σ_k L_k†L_k`.
///
/// `K` is stored on the union sparsity pattern of its constant part and every
/// harmonic so that evaluating `K(t)` is a single pass over the nonzeros.
#[derive(Clone, Debug)]
pub struct Generator {
    layout: SpaceLayout,
    pattern: Csr,
    constant: Vec<C64>,
    harmonics: Vec<(f64, Vec<C64>, Vec<C64>)>,
    jumps: Vec<Csr>,
    kvals: Vec<C64>,
    t_cached: Option<f64>,
    scratch: Vec<C64>,
}

impl Generator {
    pub fn new(h: &Hamiltonian, collapse: &[Operator]) -> Result<Self> {
        let layout = h.layout().clone();
        check_layout(collapse, &layout)?;
        let d = layout.dim();
        let mut k0 = h.constant_part().mapv(|z| -I * z);
        for l in collapse {
            let m = l.matrix();
            k0 -= &dagger(m).dot(m).mapv(|z| 0.5 * z);
        }
        let parts: Vec<(f64, Array2<C64>, Array2<C64>)> = h
            .harmonics()
            .iter()
            .map(|hm| (hm.freq, hm.op.mapv(|z| -I * z), dagger(&hm.op).mapv(|z| -I * z)))
            .collect();
        let mut all: Vec<&Array2<C64>> = vec![&k0];
        for (_, a, b) in &parts {
            all.push(a);
            all.push(b);
        }
        let pattern = Csr::union_pattern(&all);
        let constant = pattern.values_on(&k0);
        let harmonics = parts
            .iter()
            .map(|(f, a, b)| (*f, pattern.values_on(a), pattern.values_on(b)))
            .collect();
        let jumps = collapse.iter().map(|l| Csr::from_dense(l.matrix())).collect();
        let nnz = pattern.nnz();
        Ok(Self {
            layout,
            pattern,
            constant,
            harmonics,
            jumps,
            kvals: vec![ZERO; nnz],
            t_cached: None,
            scratch: vec![ZERO; d * d],
        })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn jumps(&self) -> &[Csr] {
        &self.jumps
    }

    pub fn is_time_independent(&self) -> bool {
        self.harmonics.iter().all(|(f, _, _)| *f == 0.0)
    }

    fn update(&mut self, t: f64) {
        if self.t_cached == Some(t) {
            return;
        }
        self.kvals.copy_from_slice(&self.constant);
        for (f, a, b) in &self.harmonics {
            let ph = C64::from_polar(1.0, f * t);
            let phc = ph.conj();
            for ((k, x), y) in self.kvals.iter_mut().zip(a).zip(b) {
                *k += x * ph + y * phc;
            }
        }
        self.t_cached = Some(t);
    }

    /// Lindblad right-hand side for a Hermitian row-major `ρ`. The output is
    /// Hermitian by construction.
    pub fn lindblad(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        self.update(t);
        let d = self.dim();
        self.pattern.mul_mat(&self.kvals, rho, &mut self.scratch);
        for i in 0..d {
            for j in i..d {
                let a = self.scratch[i * d + j];
                let b = self.scratch[j * d + i];
                out[i * d + j] = a + b.conj();
                out[j * d + i] = b + a.conj();
            }
        }
        self.add_jump_terms(rho, out);
    }

    /// Lindblad right-hand side applied to an arbitrary (not necessarily
    /// Hermitian) row-major matrix.
    pub fn lindblad_general(&mut self, t: f64, x: &[C64], out: &mut [C64]) {
        self.update(t);
        self.pattern.mul_mat(&self.kvals, x, out);
        // x K† = (K x†)†
        let d = self.dim();
        let mut xd = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                xd[i * d + j] = x[j * d + i].conj();
            }
        }
        self.pattern.mul_mat(&self.kvals, &xd, &mut self.scratch);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] += self.scratch[j * d + i].conj();
            }
        }
        self.add_jump_terms(x, out);
    }

    fn add_jump_terms(&mut self, x: &[C64], out: &mut [C64]) {
        for l in &self.jumps {
            l.mul_mat(&l.vals, x, &mut self.scratch);
            l.add_mat_mul_adjoint(&l.vals, &self.scratch, out);
        }
    }

    /// `dψ/dt = K(t) ψ`.
    pub fn no_jump(&mut self, t: f64, psi: &[C64], out: &mut [C64]) {
        self.update(t);
        self.pattern.mul_vec(&self.kvals, psi, out);
    }

    /// Dense `K(t)`.
    pub fn k_matrix(&mut self, t: f64) -> Array2<C64> {
        self.update(t);
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for k in self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1] {
                m[[i, self.pattern.cols[k]]] = self.kvals[k];
            }
        }
        m
    }
}

/// Checks that `grid` is finite and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}
