use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::params::{SystemParams, Variant};
use crate::hilbert::{dagger, frobenius, identity};

/// Linear map from bare bosonic modes to normal modes:
/// `normal_k = Σ_j matrix[k, j] · bare_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    pub variant: Variant,
    pub bare: Vec<&'static str>,
    pub normal: Vec<&'static str>,
    pub matrix: Array2<C64>,
}

impl ModeTransform {
    /// Coefficients expressing each bare mode in the normal modes:
    /// `bare_j = Σ_k inverse[j, k] · normal_k`.
    pub fn inverse(&self) -> Array2<C64> {
        dagger(&self.matrix)
    }

    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        frobenius(&(&self.matrix.dot(&dagger(&self.matrix)) - &identity(n)))
    }
}

/// Normal modes of the photonic coupling.
///
/// Fiber: `(a1, a2, b) → (c, c1, c2)` with
/// `c = (a1 − e^{−iφ} a2)/√2`, `c1,2 = (a1 + e^{−iφ} a2 ± √2 b)/2`.
/// Hopping: `(a1, a2) → (d1, d2)` with `d1,2 = (a1 ± a2)/√2`.
pub fn mode_transform(p: &SystemParams) -> ModeTransform {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    match p.variant {
        Variant::Fiber => {
            let e = C64::from_polar(1.0, -p.phi);
            let matrix = ndarray::arr2(&[
                [r(h), -e * h, r(0.0)],
                [r(0.5), e * 0.5, r(h)],
                [r(0.5), e * 0.5, r(-h)],
            ]);
            ModeTransform { variant: p.variant, bare: vec!["a1", "a2", "b"], normal: vec!["c", "c1", "c2"], matrix }
        }
        Variant::Hopping => {
            let matrix = ndarray::arr2(&[[r(h), r(h)], [r(h), r(-h)]]);
            ModeTransform { variant: p.variant, bare: vec!["a1", "a2"], normal: vec!["d1", "d2"], matrix }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn fiber_rows_and_unitarity() {
        let t = mode_transform(&presets::fig4());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, -h, 0.0], [0.5, 0.5, h], [0.5, 0.5, -h]];
        for k in 0..3 {
            for j in 0..3 {
                assert!((t.matrix[[k, j]] - C64::new(expected[k][j], 0.0)).norm() < 1e-15);
            }
        }
        assert!(t.unitarity_error() < 1e-14);
    }

    #[test]
    fn fiber_inverse_reproduces_bare_modes() {
        let mut p = presets::fig4();
        p.phi = 0.7;
        let t = mode_transform(&p);
        assert!(t.unitarity_error() < 1e-14);
        let inv = t.inverse();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = C64::from_polar(1.0, p.phi);
        // b = (c1 − c2)/√2
        let b = [0.0, h, -h];
        for k in 0..3 {
            assert!((inv[[2, k]] - C64::new(b[k], 0.0)).norm() < 1e-15);
        }
        // a1 = (c1 + c2 + √2 c)/2, a2 = e^{iφ}(c1 + c2 − √2 c)/2
        let a1 = [h, 0.5, 0.5];
        let a2 = [-h, 0.5, 0.5];
        for k in 0..3 {
            assert!((inv[[0, k]] - C64::new(a1[k], 0.0)).norm() < 1e-15);
            assert!((inv[[1, k]] - e * a2[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn hopping_matrix() {
        let t = mode_transform(&presets::hopping_fig4_equivalent());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, h], [h, -h]];
        for k in 0..2 {
            for j in 0..2 {
                assert!((t.matrix[[k, j]].re - expected[k][j]).abs() < 1e-15);
            }
        }
        assert!(t.unitarity_error() < 1e-14);
    }
}
