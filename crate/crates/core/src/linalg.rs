//! Thin bridge to `nalgebra` for the decompositions the dense algebra needs.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

fn to_na(m: &Array2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Eigenvalues of a Hermitian matrix (the anti-Hermitian part is ignored).
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let h = to_na(m);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// `exp(−iHt)` for Hermitian `H`.
pub fn unitary(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let m = to_na(h);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = m.symmetric_eigen();
    let n = h.nrows();
    let v = &eig.eigenvectors;
    Array2::from_shape_fn((n, n), |(i, j)| {
        (0..n)
            .map(|k| v[(i, k)] * C64::from_polar(1.0, -eig.eigenvalues[k] * t) * v[(j, k)].conj())
            .sum()
    })
}

/// Singular values (descending) with the matching right singular vectors.
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub right_vectors: Vec<Array1<C64>>,
}

pub fn svd(m: &Array2<C64>) -> Svd {
    let a = to_na(m);
    let n = a.ncols();
    // Right singular vectors of A are eigenvectors of A†A; nalgebra's SVD on a
    // wide-or-square matrix returns all of them through v_t.
    let dec = a.svd(false, true);
    let v_t = dec.v_t.expect("requested v_t");
    let mut pairs: Vec<(f64, Array1<C64>)> = dec
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let v = Array1::from_iter((0..n).map(|j| v_t[(k, j)].conj()));
            (s, v)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let (singular_values, right_vectors) = pairs.into_iter().unzip();
    Svd { singular_values, right_vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_of_pauli_x() {
        let c = |x: f64| C64::new(x, 0.0);
        let x = ndarray::arr2(&[[c(0.0), c(1.0)], [c(1.0), c(0.0)]]);
        let u = unitary(&x, 0.3);
        assert!((u[[0, 0]] - c(0.3f64.cos())).norm() < 1e-14);
        assert!((u[[1, 0]] - C64::new(0.0, -0.3f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        let c = |x: f64| C64::new(x, 0.0);
        let m = ndarray::arr2(&[[c(1.0), c(1.0)], [c(2.0), c(2.0)]]);
        let s = svd(&m);
        assert!(s.singular_values[1] < 1e-14);
        let v = &s.right_vectors[1];
        let mv = m.dot(v);
        assert!(mv.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let m = ndarray::arr2(&[[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]]);
        let mut ev = hermitian_eigenvalues(&m);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }
}
