use num_complex::Complex64 as C64;
use serde::Serialize;

use super::params::{SystemParams, Variant};
use crate::error::{Error, Result};

/// Tolerance on the consistency conditions that make `Θ`, `g_eff` and `Δ̃`
/// single numbers.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Parameters of the Raman-eliminated two-qubit model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveParams {
    /// Effective Raman drive `Θ = Λ_j Π_j* / Δ'_j`.
    #[serde(serialize_with = "ser_c64")]
    pub theta: C64,
    /// Effective qubit–mode coupling `g_eff = Ω_1 g_1* / (√2 Δ_1)`.
    #[serde(serialize_with = "ser_c64")]
    pub g_eff: C64,
    /// Stark shifts `Δ̃_j = |Σ_j|² / δ_j`.
    pub delta_tilde_1: f64,
    pub delta_tilde_2: f64,
    /// Common shift `Δ̃ = Δ̃_1 = −Δ̃_2`.
    pub delta_tilde: f64,
    /// Engineered collective decay `8 |g_eff|² / κ`.
    pub kappa_eff: f64,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= CONSISTENCY_TOL * a.norm().max(b.norm()).max(1.0)
}

fn nonzero(name: &str, v: f64) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be nonzero and finite")));
    }
    Ok(v)
}

/// Derives `(Θ, g_eff, Δ̃_j, κ_eff)` and checks that both centers agree.
pub fn effective_params(p: &SystemParams) -> Result<EffectiveParams> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut theta = [C64::default(); 2];
    let mut geff = [C64::default(); 2];
    let mut dt = [0.0; 2];
    for j in 0..2 {
        let dp = nonzero("raman detuning", p.raman_detuning[j])?;
        let d = nonzero("cavity detuning", p.detuning[j])?;
        let ds = nonzero("stark detuning", p.stark_detuning[j])?;
        theta[j] = p.lambda[j] * p.pi[j].conj() / dp;
        geff[j] = p.omega[j] * p.g[j].conj() / (sqrt2 * d);
        dt[j] = p.sigma[j].norm_sqr() / ds;
    }
    if !close(theta[0], theta[1]) {
        return Err(Error::Consistency {
            name: "Lambda_1 Pi_1*/Delta'_1 = Lambda_2 Pi_2*/Delta'_2",
            lhs: format!("{}", theta[0]),
            rhs: format!("{}", theta[1]),
        });
    }
    // The fiber normal mode enters the two centers with opposite sign, the
    // hopping normal mode with the same sign.
    let geff_2 = match p.variant {
        Variant::Fiber => -geff[1],
        Variant::Hopping => geff[1],
    };
    if !close(geff[0], geff_2) {
        return Err(Error::Consistency {
            name: "g_eff of center 1 = g_eff of center 2",
            lhs: format!("{}", geff[0]),
            rhs: format!("{geff_2}"),
        });
    }
    if !close(C64::new(dt[0], 0.0), C64::new(-dt[1], 0.0)) {
        return Err(Error::Consistency {
            name: "DeltaTilde_1 = -DeltaTilde_2",
            lhs: format!("{}", dt[0]),
            rhs: format!("{}", -dt[1]),
        });
    }
    let kappa = nonzero("kappa", p.kappa)?;
    Ok(EffectiveParams {
        theta: theta[0],
        g_eff: geff[0],
        delta_tilde_1: dt[0],
        delta_tilde_2: dt[1],
        delta_tilde: dt[0],
        kappa_eff: 8.0 * geff[0].norm_sqr() / kappa,
    })
}
