//! Monte-Carlo wave-function unraveling of the Lindblad equation.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::generator::{check_grid, Generator};
use super::ode::{Dp45, StepControl, StepStats};
use super::probes::{Probes, RatioMoments};
use super::series::{SolverMeta, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Operator, StateVector, ZERO};
use crate::model::Hamiltonian;

/// Resolution of the jump time.
pub const JUMP_TIME_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct McwfOptions {
    pub ctrl: StepControl,
    pub n_traj: usize,
    pub seed: u64,
    /// Trajectories evaluated concurrently before their results are folded
    /// into the statistics (in index order).
    pub batch: usize,
}

impl Default for McwfOptions {
    fn default() -> Self {
        Self { ctrl: StepControl::default(), n_traj: 50, seed: 0, batch: 64 }
    }
}

/// Random stream of trajectory `index`, independent of scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Trajectory {
    /// `raw[s * n_ops + k]`
    raw: Vec<f64>,
    psi: Vec<C64>,
    stats: StepStats,
    jumps: u64,
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn run_trajectory(
    mut gen: Generator,
    psi0: &[C64],
    grid: &[f64],
    probes: &Probes,
    ctrl: StepControl,
    seed: u64,
    index: u64,
) -> Result<Trajectory> {
    let mut rng = trajectory_rng(seed, index);
    let has_jumps = !gen.jumps().is_empty();
    let draw = |rng: &mut ChaCha20Rng| if has_jumps { 1.0 - rng.gen::<f64>() } else { 0.0 };
    let mut threshold = draw(&mut rng);

    let n = psi0.len();
    let jumps: Vec<crate::sparse::Csr> = gen.jumps().to_vec();
    let mut dp = Dp45::new(n, ctrl);
    let mut y = psi0.to_vec();
    let mut y_prev = vec![ZERO; n];
    let mut y_try = vec![ZERO; n];
    let mut normalized = vec![ZERO; n];
    let mut buf = vec![ZERO; n];
    let n_ops = probes.n_ops();
    let mut raw = vec![0.0; grid.len() * n_ops];
    let mut n_jumps = 0;
    let mut t = grid[0];
    let mut rhs = |t: f64, x: &[C64], dx: &mut [C64]| gen.no_jump(t, x, dx);

    for (s, &ts) in grid.iter().enumerate() {
        while t < ts {
            y_prev.copy_from_slice(&y);
            let t_prev = t;
            dp.step(&mut rhs, &mut t, &mut y, ts)?;
            if norm_sqr(&y) > threshold {
                continue;
            }
            // Locate the crossing of ‖ψ‖² = threshold by bisection.
            let (mut lo, mut hi) = (0.0, t - t_prev);
            while hi - lo > JUMP_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                dp.fixed_step(&mut rhs, t_prev, &y_prev, mid, &mut y_try);
                if norm_sqr(&y_try) > threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            dp.fixed_step(&mut rhs, t_prev, &y_prev, hi, &mut y);
            t = t_prev + hi;

            let weights: Vec<f64> = jumps
                .iter()
                .map(|l| {
                    l.mul_vec(&l.vals, &y, &mut buf);
                    norm_sqr(&buf)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::ZeroNorm(t));
            }
            let pick = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = weights.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                acc += w;
                if pick < acc && *w > 0.0 {
                    chosen = k;
                    break;
                }
            }
            let l = &jumps[chosen];
            l.mul_vec(&l.vals, &y, &mut buf);
            let nrm = norm_sqr(&buf).sqrt();
            for (a, b) in y.iter_mut().zip(&buf) {
                *a = b / nrm;
            }
            n_jumps += 1;
            threshold = draw(&mut rng);
            dp.invalidate();
        }
        let nrm = norm_sqr(&y).sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroNorm(ts));
        }
        for (a, b) in normalized.iter_mut().zip(&y) {
            *a = b / nrm;
        }
        probes.raw_ket(&normalized, &mut raw[s * n_ops..(s + 1) * n_ops]);
    }
    Ok(Trajectory { raw, psi: normalized, stats: dp.stats(), jumps: n_jumps })
}

/// Averages `n_traj` quantum trajectories started from `psi0`. Trajectory
/// `i` draws from the stream `(seed, i)`, and results are accumulated in
/// index order, so the output does not depend on the number of workers.
pub fn mcwf(
    h: &Hamiltonian,
    jumps: &[Operator],
    psi0: &StateVector,
    grid: &[f64],
    probes: &Probes,
    opts: &McwfOptions,
) -> Result<TimeSeries> {
    check_grid(grid)?;
    opts.ctrl.validate()?;
    if opts.n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    if psi0.layout() != h.layout() {
        return Err(Error::LayoutMismatch(format!("{} vs {}", psi0.layout(), h.layout())));
    }
    if probes.dim() != h.layout().dim() {
        return Err(Error::DimensionMismatch { expected: h.layout().dim(), found: probes.dim() });
    }
    let gen = Generator::new(h, jumps)?;
    let nrm = psi0.norm();
    if !(nrm > 0.0) {
        return Err(Error::ZeroNorm(grid[0]));
    }
    let start: Vec<C64> = psi0.amplitudes().iter().map(|z| z / nrm).collect();

    let columns = probes.columns().to_vec();
    let mut moments: Vec<RatioMoments> = (0..grid.len()).map(|_| RatioMoments::new(columns.len())).collect();
    let d = start.len();
    let mut rho_final = Array2::<C64>::zeros((d, d));
    let mut stats = StepStats::default();
    let mut total_jumps = 0;
    let n_ops = probes.n_ops();
    let batch = opts.batch.max(1);

    let mut first = 0;
    while first < opts.n_traj {
        let last = (first + batch).min(opts.n_traj);
        let results: Vec<Result<Trajectory>> = (first..last)
            .into_par_iter()
            .map(|i| run_trajectory(gen.clone(), &start, grid, probes, opts.ctrl, opts.seed, i as u64))
            .collect();
        for r in results {
            let tr = r?;
            for (s, m) in moments.iter_mut().enumerate() {
                m.push(&columns, &tr.raw[s * n_ops..(s + 1) * n_ops]);
            }
            for i in 0..d {
                for j in 0..d {
                    rho_final[[i, j]] += tr.psi[i] * tr.psi[j].conj();
                }
            }
            stats += tr.stats;
            total_jumps += tr.jumps;
        }
        first = last;
    }

    let meta = SolverMeta {
        solver: "mcwf".into(),
        rtol: Some(opts.ctrl.rtol),
        atol: Some(opts.ctrl.atol),
        n_traj: Some(opts.n_traj),
        seed: Some(opts.seed),
        steps: stats,
        jumps: Some(total_jumps),
        trace_drift: 0.0,
    };
    let mut series = TimeSeries::new(grid.to_vec(), probes.names(), meta);
    let mut errs = vec![Vec::with_capacity(grid.len()); columns.len()];
    for m in &moments {
        series.push_row(&m.means());
        for (col, e) in errs.iter_mut().zip(m.stderr()) {
            col.push(e);
        }
    }
    series.stderr = Some(errs);
    rho_final.mapv_inplace(|z| z / opts.n_traj as f64);
    let t_end = *grid.last().expect("nonempty grid");
    series.states.push((t_end, DensityMatrix::from_matrix(h.layout().clone(), rho_final)?));
    Ok(series)
}
