//! Adaptive Dormand–Prince 5(4) integration of complex linear systems.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::ZERO;

/// Error tolerances and step limits of the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial derivative when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps shorter than `h_min · max(1, |t|)` abort the integration.
    pub h_min: f64,
    pub max_steps: u64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, h_max: f64::INFINITY, h_min: 1e-13, max_steps: 500_000_000 }
    }
}

impl StepControl {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0 && self.atol > 0.0 && self.h_min > 0.0 && self.h_max > 0.0;
        if !ok || self.h_init.is_some_and(|h| h <= 0.0) {
            return Err(Error::InvalidParameter("step control values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Right-hand side `dy/dt = f(t, y)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

impl<F: FnMut(f64, &[C64], &mut [C64])> Rhs for F {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self(t, y, dy)
    }
}

/// Stateful Dormand–Prince stepper; keeps the step size and the FSAL stage
/// between calls so that successive segments continue smoothly.
#[derive(Clone, Debug)]
pub struct Dp45 {
    ctrl: StepControl,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    fsal: bool,
    stats: StepStats,
}

impl Dp45 {
    pub fn new(n: usize, ctrl: StepControl) -> Self {
        Self {
            ctrl,
            h: ctrl.h_init,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
            fsal: false,
            stats: StepStats::default(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn control(&self) -> &StepControl {
        &self.ctrl
    }

    /// Current step-size proposal.
    pub fn step_size(&self) -> Option<f64> {
        self.h
    }

    /// Forgets the cached derivative; call after modifying `y` externally.
    pub fn invalidate(&mut self) {
        self.fsal = false;
    }

    fn initial_step(&mut self, rhs: &mut impl Rhs, t: f64, y: &[C64]) -> f64 {
        if !self.fsal {
            rhs.eval(t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal = true;
        }
        let scale = |v: &C64, yi: &C64| v.norm() / (self.ctrl.atol + self.ctrl.rtol * yi.norm());
        let n = y.len().max(1) as f64;
        let d0 = (y.iter().zip(y).map(|(a, b)| scale(a, b).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0].iter().zip(y).map(|(a, b)| scale(a, b).powi(2)).sum::<f64>() / n).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.ctrl.h_max)
    }

    /// Computes the stages for a step of size `h` and writes the 5th-order
    /// solution to `self.y_new`; returns the scaled error norm. Assumes
    /// `self.k[0]` holds `f(t, y)`.
    fn attempt(&mut self, rhs: &mut impl Rhs, t: f64, y: &[C64], h: f64) -> f64 {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = ZERO;
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.stage[i] = y[i] + acc * h;
            }
            let (_, tail) = self.k.split_at_mut(s);
            rhs.eval(t + C[s] * h, &self.stage, &mut tail[0]);
            self.stats.evaluations += 1;
        }
        // stage 7 was evaluated at the 5th-order solution
        self.y_new.copy_from_slice(&self.stage);
        let mut sum = 0.0;
        for i in 0..n {
            let mut err = ZERO;
            for (j, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err += self.k[j][i] * *e;
                }
            }
            let sc = self.ctrl.atol + self.ctrl.rtol * y[i].norm().max(self.y_new[i].norm());
            sum += (err.norm() * h / sc).powi(2);
        }
        let e = (sum / n.max(1) as f64).sqrt();
        if e.is_finite() {
            e
        } else {
            f64::INFINITY
        }
    }

    /// Takes one accepted adaptive step, never past `t_limit`.
    pub fn step(&mut self, rhs: &mut impl Rhs, t: &mut f64, y: &mut [C64], t_limit: f64) -> Result<()> {
        if self.stats.accepted + self.stats.rejected >= self.ctrl.max_steps {
            return Err(Error::StepUnderflow { t: *t, h: self.h.unwrap_or(0.0) });
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(rhs, *t, y),
        };
        if !self.fsal {
            rhs.eval(*t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal = true;
        }
        loop {
            let remaining = t_limit - *t;
            let clipped = h >= remaining;
            let h_used = if clipped { remaining } else { h };
            if h_used < self.ctrl.h_min * t.abs().max(1.0) && !clipped {
                return Err(Error::StepUnderflow { t: *t, h: h_used });
            }
            let err = self.attempt(rhs, *t, y, h_used);
            if err <= 1.0 {
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposal = (h_used * factor).min(self.ctrl.h_max);
                self.h = Some(if clipped && factor >= 1.0 { h.max(proposal) } else { proposal });
                *t = if clipped { t_limit } else { *t + h_used };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                return Ok(());
            }
            self.stats.rejected += 1;
            if self.stats.accepted + self.stats.rejected >= self.ctrl.max_steps {
                return Err(Error::StepUnderflow { t: *t, h: h_used });
            }
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 1.0) } else { 0.1 };
            h = h_used * factor;
            if h < self.ctrl.h_min * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: *t, h });
            }
        }
    }

    /// Integrates from `t` to `t_end`.
    pub fn integrate(&mut self, rhs: &mut impl Rhs, t: &mut f64, y: &mut [C64], t_end: f64) -> Result<()> {
        while *t < t_end {
            self.step(rhs, t, y, t_end)?;
        }
        Ok(())
    }

    /// One unconditional step of size `h` from `(t, y)` into `out`, without
    /// touching the adaptive state.
    pub fn fixed_step(&mut self, rhs: &mut impl Rhs, t: f64, y: &[C64], h: f64, out: &mut [C64]) {
        let fsal = self.fsal;
        let saved = fsal.then(|| self.k[0].clone());
        rhs.eval(t, y, &mut self.k[0]);
        self.stats.evaluations += 1;
        self.attempt(rhs, t, y, h);
        out.copy_from_slice(&self.y_new);
        match saved {
            Some(k0) => self.k[0] = k0,
            None => self.fsal = false,
        }
    }
}
