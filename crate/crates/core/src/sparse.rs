//! Compressed-row storage used on the hot path of the integrators.
//!
//! Operators are built densely; right before integration the generator is
//! compiled to CSR so each right-hand-side evaluation costs `O(nnz · d)`
//! instead of `O(d³)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::hilbert::ZERO;

#[derive(Clone, Debug)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &Array2<C64>) -> Self {
        Self::from_pattern(m, |i, j| m[[i, j]] != ZERO)
    }

    /// CSR over the union of the nonzero patterns of `mats`, with values of
    /// the first matrix. Use [`Csr::values_on`] for the others.
    pub fn union_pattern(mats: &[&Array2<C64>]) -> Self {
        let first = mats[0];
        Self::from_pattern(first, |i, j| mats.iter().any(|m| m[[i, j]] != ZERO))
    }

    fn from_pattern(m: &Array2<C64>, keep: impl Fn(usize, usize) -> bool) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                if keep(i, j) {
                    cols.push(j);
                    vals.push(m[[i, j]]);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// Values of `m` laid out on this pattern. Entries of `m` outside the
    /// pattern are dropped.
    pub fn values_on(&self, m: &Array2<C64>) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.vals.len());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.push(m[[i, self.cols[k]]]);
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `Tr(A X)` for a row-major `dim × dim` matrix, using the stored values.
    pub fn trace_product(&self, x: &[C64]) -> C64 {
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] * d + i];
            }
        }
        acc
    }

    /// `⟨x|A|x⟩` using the stored values.
    pub fn expect_vec(&self, x: &[C64]) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.dim {
            let mut row = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += x[i].conj() * row;
        }
        acc
    }

    /// `out = A · x` for a vector.
    pub fn mul_vec(&self, vals: &[C64], x: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += vals[k] * x[self.cols[k]];
            }
            out[i] = acc;
        }
    }

    /// `out = A · X` for a row-major `dim × dim` matrix.
    pub fn mul_mat(&self, vals: &[C64], x: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.iter_mut().for_each(|z| *z = ZERO);
        for i in 0..d {
            let orow = &mut out[i * d..(i + 1) * d];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = vals[k];
                let xrow = &x[self.cols[k] * d..(self.cols[k] + 1) * d];
                for (o, xv) in orow.iter_mut().zip(xrow) {
                    *o += a * xv;
                }
            }
        }
    }

    /// `out += X · A†` for a row-major `dim × dim` matrix.
    pub fn add_mat_mul_adjoint(&self, vals: &[C64], x: &[C64], out: &mut [C64]) {
        let d = self.dim;
        // (X A†)_{ij} = Σ_k X_ik conj(A_jk)
        for j in 0..d {
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let a = vals[k].conj();
                let col = self.cols[k];
                for i in 0..d {
                    out[i * d + j] += x[i * d + col] * a;
                }
            }
        }
    }
}
