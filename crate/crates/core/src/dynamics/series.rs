use serde::Serialize;

use super::ode::StepStats;
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;

/// Uniform grid of `n` points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || !t_end.is_finite() || n < 2 {
        return Err(Error::InvalidParameter("time grid needs t_end > 0 and at least 2 samples".into()));
    }
    let dt = t_end / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    g[n - 1] = t_end;
    Ok(g)
}

/// How a series was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolverMeta {
    pub solver: String,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub steps: StepStats,
    pub jumps: Option<u64>,
    /// Largest `|Tr ρ − 1|` seen at the sample times.
    pub trace_drift: f64,
}

/// Observables sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[k][s]` is observable `k` at `times[s]`.
    pub values: Vec<Vec<f64>>,
    /// Standard errors, same shape as `values` (trajectory runs only).
    pub stderr: Option<Vec<Vec<f64>>>,
    /// Sampled states; at least the final one for density-matrix solvers.
    pub states: Vec<(f64, DensityMatrix)>,
    pub meta: SolverMeta,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, names: Vec<String>, meta: SolverMeta) -> Self {
        let values = vec![Vec::with_capacity(times.len()); names.len()];
        Self { times, names, values, stderr: None, states: Vec::new(), meta }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|k| self.values[k].as_slice())
    }

    pub fn stderr_of(&self, name: &str) -> Option<&[f64]> {
        let k = self.index_of(name)?;
        self.stderr.as_ref().map(|s| s[k].as_slice())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|v| v.last().copied())
    }

    pub fn push_row(&mut self, row: &[f64]) {
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(*v);
        }
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.states.last().map(|(_, r)| r)
    }

    /// First sample time at which `name` reaches `level`.
    pub fn first_crossing(&self, name: &str, level: f64) -> Option<f64> {
        let v = self.get(name)?;
        v.iter().position(|x| *x >= level).map(|k| self.times[k])
    }

    /// Largest value of `name` over samples with `t >= from`.
    pub fn max_after(&self, name: &str, from: f64) -> Option<f64> {
        let v = self.get(name)?;
        self.times.iter().zip(v).filter(|(t, _)| **t >= from).map(|(_, x)| *x).reduce(f64::max)
    }

    /// Checks that every population column lies in `[−tol, 1 + tol]`.
    pub fn check_populations(&self, columns: &[&str], tol: f64) -> Result<()> {
        for name in columns {
            if let Some(v) = self.get(name) {
                if let Some((s, x)) = v.iter().enumerate().find(|(_, x)| **x < -tol || **x > 1.0 + tol) {
                    return Err(Error::Invariant(format!("{name} = {x} at t = {}", self.times[s])));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(3000.0, 2000).unwrap();
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1999], 3000.0);
        assert!(uniform_grid(0.0, 10).is_err());
        assert!(uniform_grid(1.0, 1).is_err());
    }

    #[test]
    fn lookup_and_crossing() {
        let mut s = TimeSeries::new(vec![0.0, 1.0, 2.0], vec!["F".into()], SolverMeta::default());
        for x in [0.1, 0.96, 0.5] {
            s.push_row(&[x]);
        }
        assert_eq!(s.first_crossing("F", 0.95), Some(1.0));
        assert_eq!(s.last("F"), Some(0.5));
        assert_eq!(s.max_after("F", 1.5), Some(0.5));
        assert!(s.check_populations(&["F"], 1e-9).is_ok());
        s.values[0][2] = 1.1;
        assert!(s.check_populations(&["F"], 1e-9).is_err());
    }
}
