//! Regime-of-validity margins of the elimination chain.

use serde::Serialize;

use super::effective::effective_params;
use super::params::{SystemParams, Variant};
use crate::error::{Error, Result};

pub const DEFAULT_RATIO_THRESHOLD: f64 = 5.0;
/// Default resonance-condition tolerance, relative to `|Θ|`.
pub const DEFAULT_RESONANCE_TOL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub large: f64,
    pub small: f64,
    /// `large / small`; infinite when `small` is zero.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub threshold: f64,
    pub margins: Vec<Margin>,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.margins.iter().all(|m| m.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Margin> {
        self.margins.iter().filter(|m| !m.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }
}

fn margin(name: String, large: f64, small: f64, threshold: f64) -> Margin {
    let ratio = if small == 0.0 { f64::INFINITY } else { large / small };
    Margin { name, large, small, ratio, pass: ratio >= threshold }
}

/// Evaluates every "≫" inequality of the model as a ratio against `threshold`.
///
/// Entries are named `"<large> / <small>"` with per-center indices, e.g.
/// `"nu / |Delta_1|"` or `"|Delta_1| / |Omega_1|"`.
pub fn check_validity(p: &SystemParams, threshold: f64) -> ValidityReport {
    let mut margins = Vec::new();
    for j in 0..2 {
        let n = j + 1;
        let d = p.detuning[j];
        let dp = p.raman_detuning[j];
        let ds = p.stark_detuning[j];
        let weak = [
            (format!("|g_{n}|"), p.g[j].norm()),
            (format!("|Omega_{n}|"), p.omega[j].norm()),
            (format!("|Lambda_{n}|"), p.lambda[j].norm()),
            (format!("|Pi_{n}|"), p.pi[j].norm()),
        ];
        let detunings = [
            (format!("|Delta_{n}|"), d.abs()),
            (format!("|Delta'_{n}|"), dp.abs()),
            (format!("|delta_{n}|"), ds.abs()),
            (format!("|Delta_{n} - Delta'_{n}|"), (d - dp).abs()),
            (format!("|Delta_{n} - delta_{n}|"), (d - ds).abs()),
            (format!("|delta_{n} - Delta'_{n}|"), (ds - dp).abs()),
        ];
        // Normal-mode RWA: the nonresonant modes are detuned by √2ν (fiber)
        // or sit at Δ̄_j + J (hopping).
        let (fast_name, fast) = match p.variant {
            Variant::Fiber => ("nu".to_string(), p.nu.abs()),
            Variant::Hopping => (format!("|DeltaBar_{n} + J|"), (p.bare_detuning[j] + p.hopping).abs()),
        };
        for (sname, s) in detunings.iter().take(3).chain(std::iter::once(&weak[0])) {
            margins.push(margin(format!("{fast_name} / {sname}"), fast, *s, threshold));
        }
        // Large-detuning elimination of |e⟩.
        for (lname, l) in &detunings {
            for (sname, s) in &weak {
                margins.push(margin(format!("{lname} / {sname}"), *l, *s, threshold));
            }
        }
    }
    // Dephasing must stay below both effective rates.
    if let Ok(eff) = effective_params(p) {
        let theta = eff.theta.norm();
        let pump = eff.g_eff.norm_sqr() / p.kappa;
        margins.push(margin("|Theta| / gamma_phi".into(), theta, p.gamma_phi, threshold));
        margins.push(margin("g_eff^2/kappa / gamma_phi".into(), pump, p.gamma_phi, threshold));
    }
    ValidityReport { threshold, margins }
}

/// Per-center mismatch of the resonance condition,
/// `|Ω_j|²/Δ_j + |Λ_j|²/Δ'_j − |Π_j|²/Δ'_j − |g_j|² n_c / (2Δ_j)`.
pub fn resonance_residuals(p: &SystemParams, n_c: f64) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for j in 0..2 {
        let d = p.detuning[j];
        let dp = p.raman_detuning[j];
        if d == 0.0 || dp == 0.0 {
            return Err(Error::InvalidParameter("resonance condition needs nonzero detunings".into()));
        }
        out[j] = p.omega[j].norm_sqr() / d + p.lambda[j].norm_sqr() / dp
            - p.pi[j].norm_sqr() / dp
            - p.g[j].norm_sqr() * n_c / (2.0 * d);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub residual: [f64; 2],
    /// `|residual_j| / |Θ|`.
    pub relative: [f64; 2],
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn resonance_condition_check(p: &SystemParams, n_c: f64, rel_tol: f64) -> Result<ResonanceReport> {
    let residual = resonance_residuals(p, n_c)?;
    let theta = effective_params(p).map(|e| e.theta.norm()).unwrap_or(0.0);
    let rel = |r: f64| if theta == 0.0 { if r == 0.0 { 0.0 } else { f64::INFINITY } } else { r.abs() / theta };
    let relative = [rel(residual[0]), rel(residual[1])];
    Ok(ResonanceReport {
        residual,
        relative,
        tolerance: rel_tol,
        within_tolerance: relative.iter().all(|r| *r < rel_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use num_complex::Complex64 as C64;

    #[test]
    fn fig4_margins() {
        let r = check_validity(&presets::fig4(), DEFAULT_RATIO_THRESHOLD);
        let m = r.get("nu / |Delta_1|").unwrap();
        assert!((m.ratio - 10.0).abs() < 1e-12 && m.pass);
        let m = r.get("|Delta_1| / |Omega_1|").unwrap();
        assert!((m.ratio - 10.0).abs() < 1e-12 && m.pass);
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn dephasing_margin_fails_above_theta() {
        let r = check_validity(&presets::fig5(0.02), DEFAULT_RATIO_THRESHOLD);
        let m = r.get("|Theta| / gamma_phi").unwrap();
        assert!((m.ratio - 0.5).abs() < 1e-12);
        assert!(!m.pass);
        assert!(!r.all_pass());
    }

    #[test]
    fn hopping_margins_use_bare_detuning() {
        let r = check_validity(&presets::hopping_fig4_equivalent(), DEFAULT_RATIO_THRESHOLD);
        let m = r.get("|DeltaBar_1 + J| / |Delta_1|").unwrap();
        assert!((m.ratio - 21.0).abs() < 1e-12);
    }

    #[test]
    fn fig4_resonance_residual() {
        // 1/10 + 1/(−10) − 0.01/(−10) − 0 = +0.001 per center
        let rep = resonance_condition_check(&presets::fig4(), 0.0, DEFAULT_RESONANCE_TOL).unwrap();
        for j in 0..2 {
            assert!((rep.residual[j] - 0.001).abs() < 1e-15);
            assert!((rep.relative[j] - 0.1).abs() < 1e-12);
        }
        assert!(!rep.within_tolerance);
    }

    #[test]
    fn balanced_set_has_zero_residual() {
        // |Ω|²/Δ cancels |Λ|²/Δ' when Λ = Ω and Δ' = −Δ
        let mut p = presets::fig4();
        p.lambda = p.omega;
        p.pi = [C64::new(0.0, 0.0); 2];
        p.raman_detuning = [-p.detuning[0], -p.detuning[1]];
        p.g = [C64::new(0.0, 0.0); 2];
        let r = resonance_residuals(&p, 0.0).unwrap();
        assert_eq!(r, [0.0, 0.0]);
    }

    #[test]
    fn residual_is_linear_in_occupation() {
        let p = presets::fig4();
        let r0 = resonance_residuals(&p, 0.0).unwrap();
        let r1 = resonance_residuals(&p, 1.0).unwrap();
        let r2 = resonance_residuals(&p, 2.5).unwrap();
        for j in 0..2 {
            let slope = -p.g[j].norm_sqr() / (2.0 * p.detuning[j]);
            assert!((r1[j] - r0[j] - slope).abs() < 1e-15);
            assert!((r2[j] - r0[j] - 2.5 * slope).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_detuning_errors() {
        let mut p = presets::fig4();
        p.raman_detuning[1] = 0.0;
        assert!(resonance_residuals(&p, 0.0).is_err());
    }
}
