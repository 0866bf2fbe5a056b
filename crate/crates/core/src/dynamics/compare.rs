//! Deviation between time series produced by different model tiers.

use serde::Serialize;

use super::series::TimeSeries;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub name: String,
    pub max: f64,
    pub rms: f64,
    /// Time of the largest deviation.
    pub t_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub t_from: f64,
    pub t_to: f64,
    pub samples: usize,
    pub deviations: Vec<Deviation>,
}

impl GapReport {
    pub fn get(&self, name: &str) -> Option<&Deviation> {
        self.deviations.iter().find(|d| d.name == name)
    }
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` increasing, `x` inside.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|v| *v < x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return ys[xs.len() - 1];
    }
    if xs[k] == x {
        return ys[k];
    }
    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

/// Compares every observable present in both series on the sample times of
/// `a` that lie in the common range and at or after `after`; `b` is
/// linearly interpolated.
pub fn adiabatic_gap_check(a: &TimeSeries, b: &TimeSeries, after: f64) -> Result<GapReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DisjointRanges);
    }
    let lo = a.times[0].max(b.times[0]).max(after);
    let hi = a.times[a.len() - 1].min(b.times[b.len() - 1]);
    let idx: Vec<usize> = (0..a.len()).filter(|&k| a.times[k] >= lo && a.times[k] <= hi).collect();
    if lo > hi || idx.is_empty() {
        return Err(Error::DisjointRanges);
    }
    let mut deviations = Vec::new();
    for (ka, name) in a.names.iter().enumerate() {
        let Some(kb) = b.index_of(name) else { continue };
        let (mut max, mut t_max, mut sq) = (0.0f64, lo, 0.0);
        for &s in &idx {
            let t = a.times[s];
            let d = (a.values[ka][s] - interpolate(&b.times, &b.values[kb], t)).abs();
            if d > max {
                max = d;
                t_max = t;
            }
            sq += d * d;
        }
        deviations.push(Deviation { name: name.clone(), max, rms: (sq / idx.len() as f64).sqrt(), t_max });
    }
    Ok(GapReport { t_from: lo, t_to: hi, samples: idx.len(), deviations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::series::SolverMeta;

    fn series(times: Vec<f64>, f: impl Fn(f64) -> f64) -> TimeSeries {
        let mut s = TimeSeries::new(times.clone(), vec!["F".into()], SolverMeta::default());
        for t in times {
            s.push_row(&[f(t)]);
        }
        s
    }

    #[test]
    fn identical_inputs_have_zero_deviation() {
        let a = series(vec![0.0, 1.0, 2.0], |t| t * t);
        let r = adiabatic_gap_check(&a, &a, 0.0).unwrap();
        assert_eq!(r.get("F").unwrap().max, 0.0);
        assert_eq!(r.get("F").unwrap().rms, 0.0);
    }

    #[test]
    fn resamples_linear_data_exactly() {
        let a = series(vec![0.0, 0.5, 1.0, 1.5], |t| 2.0 * t + 1.0);
        let b = series(vec![0.0, 1.0, 2.0], |t| 2.0 * t + 1.0);
        let r = adiabatic_gap_check(&a, &b, 0.0).unwrap();
        assert!(r.get("F").unwrap().max < 1e-15);
        assert_eq!(r.samples, 4);
    }

    #[test]
    fn reports_offset_after_cutoff() {
        let a = series(vec![0.0, 1.0, 2.0, 3.0], |t| if t < 1.5 { 1.0 } else { 0.1 });
        let b = series(vec![0.0, 1.0, 2.0, 3.0], |_| 0.0);
        let r = adiabatic_gap_check(&a, &b, 2.0).unwrap();
        let d = r.get("F").unwrap();
        assert!((d.max - 0.1).abs() < 1e-15 && d.t_max == 2.0);
    }

    #[test]
    fn disjoint_ranges_error() {
        let a = series(vec![0.0, 1.0], |t| t);
        let b = series(vec![2.0, 3.0], |t| t);
        assert!(matches!(adiabatic_gap_check(&a, &b, 0.0), Err(Error::DisjointRanges)));
    }
}
