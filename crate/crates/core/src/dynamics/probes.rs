//! Observables sampled during time evolution.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::hilbert::identity;
use crate::sparse::Csr;

/// One output column: `⟨num⟩ / ⟨den⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub num: usize,
    pub den: usize,
}

/// A set of operators whose expectation values are recorded, and the columns
/// formed as ratios of them. Ratios keep the raw quantities linear in the
/// state, so trajectory averages are taken on numerators and denominators
/// separately.
#[derive(Clone, Debug)]
pub struct Probes {
    ops: Vec<Csr>,
    columns: Vec<Column>,
}

impl Probes {
    /// Index of the identity operator, present in every set.
    pub const IDENTITY: usize = 0;

    pub fn new(dim: usize) -> Self {
        Self { ops: vec![Csr::from_dense(&identity(dim))], columns: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim
    }

    pub fn add_op(&mut self, op: &Array2<C64>) -> usize {
        assert_eq!(op.nrows(), self.dim(), "probe operator dimension");
        self.ops.push(Csr::from_dense(op));
        self.ops.len() - 1
    }

    pub fn add_ratio(&mut self, name: impl Into<String>, num: usize, den: usize) {
        self.columns.push(Column { name: name.into(), num, den });
    }

    /// Adds the column `⟨op⟩ / Tr ρ`.
    pub fn add_expectation(&mut self, name: impl Into<String>, op: &Array2<C64>) {
        let k = self.add_op(op);
        self.add_ratio(name, k, Self::IDENTITY);
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn n_ops(&self) -> usize {
        self.ops.len()
    }

    /// `Re Tr(A_k ρ)` for a row-major density matrix.
    pub fn raw_density(&self, rho: &[C64], out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.ops) {
            *o = a.trace_product(rho).re;
        }
    }

    /// `Re ⟨ψ|A_k|ψ⟩`.
    pub fn raw_ket(&self, psi: &[C64], out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.ops) {
            *o = a.expect_vec(psi).re;
        }
    }

    pub fn values(&self, raw: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| raw[c.num] / raw[c.den]).collect()
    }
}

/// Per-column running moments over independent samples of `(num, den)`,
/// shifted by the first sample so identical samples give exactly zero spread.
#[derive(Clone, Debug)]
pub struct RatioMoments {
    n: u64,
    shift: Vec<(f64, f64)>,
    sx: Vec<f64>,
    sy: Vec<f64>,
    sxx: Vec<f64>,
    syy: Vec<f64>,
    sxy: Vec<f64>,
}

impl RatioMoments {
    pub fn new(n_columns: usize) -> Self {
        let z = vec![0.0; n_columns];
        Self { n: 0, shift: Vec::new(), sx: z.clone(), sy: z.clone(), sxx: z.clone(), syy: z.clone(), sxy: z }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn push(&mut self, columns: &[Column], raw: &[f64]) {
        if self.n == 0 {
            self.shift = columns.iter().map(|c| (raw[c.num], raw[c.den])).collect();
        }
        for (k, c) in columns.iter().enumerate() {
            let x = raw[c.num] - self.shift[k].0;
            let y = raw[c.den] - self.shift[k].1;
            self.sx[k] += x;
            self.sy[k] += y;
            self.sxx[k] += x * x;
            self.syy[k] += y * y;
            self.sxy[k] += x * y;
        }
        self.n += 1;
    }

    /// Ratio of means `x̄ / ȳ` per column.
    pub fn means(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.sx.len())
            .map(|k| (self.shift[k].0 + self.sx[k] / n) / (self.shift[k].1 + self.sy[k] / n))
            .collect()
    }

    /// Delta-method standard error of the ratio of means.
    pub fn stderr(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.sx.len())
            .map(|k| {
                if self.n < 2 {
                    return 0.0;
                }
                let (mx, my) = (self.sx[k] / n, self.sy[k] / n);
                let vxx = (self.sxx[k] - n * mx * mx) / (n - 1.0);
                let vyy = (self.syy[k] - n * my * my) / (n - 1.0);
                let vxy = (self.sxy[k] - n * mx * my) / (n - 1.0);
                let ybar = self.shift[k].1 + my;
                let r = (self.shift[k].0 + mx) / ybar;
                let v = (vxx - 2.0 * r * vxy + r * r * vyy).max(0.0);
                (v / n).sqrt() / ybar.abs()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_plain_means() {
        let cols = [Column { name: "x".into(), num: 1, den: 0 }];
        let mut m = RatioMoments::new(1);
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(&cols, &[1.0, x]);
        }
        assert!((m.means()[0] - 2.5).abs() < 1e-15);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((m.stderr()[0] - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_have_zero_stderr() {
        let cols = [Column { name: "r".into(), num: 1, den: 2 }];
        let mut m = RatioMoments::new(1);
        for _ in 0..10 {
            m.push(&cols, &[1.0, 0.123456789, 0.987654321]);
        }
        assert_eq!(m.stderr()[0], 0.0);
        assert!((m.means()[0] - 0.123456789 / 0.987654321).abs() < 1e-15);
    }

    #[test]
    fn ratio_column_values() {
        let mut p = Probes::new(2);
        let mut a = Array2::zeros((2, 2));
        a[[0, 0]] = C64::new(1.0, 0.0);
        let k = p.add_op(&a);
        p.add_ratio("p0", k, Probes::IDENTITY);
        let rho = [C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.2, 0.0)];
        let mut raw = vec![0.0; p.n_ops()];
        p.raw_density(&rho, &mut raw);
        assert!((p.values(&raw)[0] - 0.75).abs() < 1e-15);
    }
}
