use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::effective::{effective_params, EffectiveParams};
use super::params::{SystemParams, Variant};
use super::validity::resonance_residuals;
use crate::analysis::CollectiveBasis;
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, dagger, ket_bra, tensor, Operator, SpaceLayout};

/// Single-center level indices.
pub const LEVEL_0: usize = 0;
pub const LEVEL_1: usize = 1;
pub const LEVEL_E: usize = 2;

pub const NV_LABELS: [&str; 2] = ["NV1", "NV2"];
/// Label of the four-dimensional collective space, basis `(|00⟩, |T⟩, |11⟩, |S⟩)`.
pub const PAIR_LABEL: &str = "pair";

/// Level of approximation of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// Three-level centers with all normal modes in the frame rotating with
    /// the photonic coupling.
    FullRotated,
    /// Three-level centers with only the resonant normal mode.
    SingleModeRwa,
    /// Excited state eliminated: two qubits plus the resonant mode.
    EffectiveRaman,
    /// Resonant mode eliminated: two qubits in the collective basis.
    CollectiveHd,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::FullRotated, Tier::SingleModeRwa, Tier::EffectiveRaman, Tier::CollectiveHd];

    pub fn is_time_dependent(self) -> bool {
        matches!(self, Tier::FullRotated | Tier::SingleModeRwa)
    }

    pub fn has_excited_level(self) -> bool {
        self.is_time_dependent()
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::FullRotated => "full-rotated",
            Tier::SingleModeRwa => "single-mode-rwa",
            Tier::EffectiveRaman => "effective-raman",
            Tier::CollectiveHd => "collective-hd",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Tier::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown tier `{s}`")))
    }
}

/// Label of the resonant normal mode.
pub fn resonant_mode(variant: Variant) -> &'static str {
    match variant {
        Variant::Fiber => "c",
        Variant::Hopping => "d1",
    }
}

/// Labels and cutoffs of the bosonic modes present in `tier`, resonant mode first.
pub fn tier_modes(p: &SystemParams, tier: Tier) -> Vec<(&'static str, usize)> {
    let cut = p.cutoffs;
    match (tier, p.variant) {
        (Tier::FullRotated, Variant::Fiber) => vec![("c", cut.c), ("c1", cut.c1), ("c2", cut.c2)],
        (Tier::FullRotated, Variant::Hopping) => vec![("d1", cut.c), ("d2", cut.c1)],
        (Tier::SingleModeRwa | Tier::EffectiveRaman, v) => vec![(resonant_mode(v), cut.c)],
        (Tier::CollectiveHd, _) => vec![],
    }
}

pub fn tier_layout(p: &SystemParams, tier: Tier) -> Result<SpaceLayout> {
    if tier == Tier::CollectiveHd {
        return SpaceLayout::new([(PAIR_LABEL, 4)]);
    }
    let nv_dim = if tier.has_excited_level() { 3 } else { 2 };
    let mut parts: Vec<(&str, usize)> = NV_LABELS.iter().map(|l| (*l, nv_dim)).collect();
    for (label, cutoff) in tier_modes(p, tier) {
        if cutoff < 1 {
            return Err(Error::InvalidCutoff(cutoff));
        }
        parts.push((label, cutoff + 1));
    }
    SpaceLayout::new(parts)
}

/// One rotating term `op · e^{iωt} + h.c.`.
#[derive(Clone, Debug, PartialEq)]
pub struct Harmonic {
    pub freq: f64,
    pub op: Array2<C64>,
}

/// `H(t) = constant + Σ_k (op_k e^{iω_k t} + op_k† e^{−iω_k t})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    layout: SpaceLayout,
    constant: Array2<C64>,
    harmonics: Vec<Harmonic>,
}

impl Hamiltonian {
    pub fn constant(op: Operator) -> Self {
        let layout = op.layout().clone();
        Self { layout, constant: op.into_matrix(), harmonics: Vec::new() }
    }

    pub fn new(layout: SpaceLayout, constant: Array2<C64>, harmonics: Vec<Harmonic>) -> Result<Self> {
        let d = layout.dim();
        for m in std::iter::once(&constant).chain(harmonics.iter().map(|h| &h.op)) {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
            }
        }
        Ok(Self { layout, constant, harmonics })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn constant_part(&self) -> &Array2<C64> {
        &self.constant
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn is_time_independent(&self) -> bool {
        self.harmonics.iter().all(|h| h.freq == 0.0)
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut m = self.constant.clone();
        for h in &self.harmonics {
            let ph = C64::from_polar(1.0, h.freq * t);
            let hd = dagger(&h.op);
            m.zip_mut_with(&h.op, |a, b| *a += b * ph);
            m.zip_mut_with(&hd, |a, b| *a += b * ph.conj());
        }
        Operator::new(self.layout.clone(), m).expect("dimensions checked at construction")
    }

    /// Adds `op e^{iωt} + h.c.`, merging with an existing term at the same frequency.
    fn push(&mut self, freq: f64, op: Array2<C64>) {
        if let Some(h) = self.harmonics.iter_mut().find(|h| h.freq == freq) {
            h.op += &op;
        } else {
            self.harmonics.push(Harmonic { freq, op });
        }
    }
}

fn nv_level_op(layout: &SpaceLayout, j: usize, to: usize, from: usize) -> Result<Array2<C64>> {
    let d = layout.dim_of(NV_LABELS[j])?;
    Ok(tensor(&[(NV_LABELS[j], &ket_bra(d, to, from))], layout)?.into_matrix())
}

fn nv_mode_op(layout: &SpaceLayout, j: usize, to: usize, from: usize, mode: &str) -> Result<Array2<C64>> {
    let d = layout.dim_of(NV_LABELS[j])?;
    let a = annihilation(layout.dim_of(mode)? - 1)?;
    Ok(tensor(&[(NV_LABELS[j], &ket_bra(d, to, from)), (mode, &a)], layout)?.into_matrix())
}

fn scaled(m: Array2<C64>, c: C64) -> Array2<C64> {
    m.mapv(|z| z * c)
}

/// Full Hamiltonian (with its time dependence) of a tier.
pub fn hamiltonian(p: &SystemParams, tier: Tier) -> Result<Hamiltonian> {
    p.validate()?;
    let layout = tier_layout(p, tier)?;
    match tier {
        Tier::FullRotated | Tier::SingleModeRwa => excited_tier(p, tier, layout),
        Tier::EffectiveRaman => {
            let eff = effective_params(p)?;
            Ok(Hamiltonian::constant(effective_raman(&eff, &layout, resonant_mode(p.variant))?))
        }
        Tier::CollectiveHd => {
            let eff = effective_params(p)?;
            Ok(Hamiltonian::constant(collective_hd(&eff)))
        }
    }
}

/// Hamiltonian of `tier` evaluated at time `t` (ignored by static tiers).
pub fn build_hamiltonian(p: &SystemParams, tier: Tier, t: f64) -> Result<Operator> {
    Ok(hamiltonian(p, tier)?.at(t))
}

fn excited_tier(p: &SystemParams, tier: Tier, layout: SpaceLayout) -> Result<Hamiltonian> {
    let d = layout.dim();
    let mut h = Hamiltonian { layout: layout.clone(), constant: Array2::zeros((d, d)), harmonics: Vec::new() };
    let sqrt2 = std::f64::consts::SQRT_2;
    // Sign of the resonant mode at each center.
    let sign = match p.variant {
        Variant::Fiber => [1.0, -1.0],
        Variant::Hopping => [1.0, 1.0],
    };
    let res = resonant_mode(p.variant);
    for j in 0..2 {
        let e0 = nv_level_op(&layout, j, LEVEL_E, LEVEL_0)?;
        let e1 = nv_level_op(&layout, j, LEVEL_E, LEVEL_1)?;
        h.push(p.detuning[j], scaled(e0.clone(), p.omega[j]));
        h.push(p.raman_detuning[j], scaled(e0, p.lambda[j]));
        h.push(p.raman_detuning[j], scaled(e1.clone(), p.pi[j]));
        h.push(p.stark_detuning[j], scaled(e1, p.sigma[j]));

        let gj = p.g[j];
        let res_op = nv_mode_op(&layout, j, LEVEL_E, LEVEL_1, res)?;
        h.push(p.detuning[j], scaled(res_op, gj * (sign[j] / sqrt2)));

        if tier == Tier::FullRotated {
            match p.variant {
                Variant::Fiber => {
                    let w = sqrt2 * p.nu;
                    let c1 = nv_mode_op(&layout, j, LEVEL_E, LEVEL_1, "c1")?;
                    let c2 = nv_mode_op(&layout, j, LEVEL_E, LEVEL_1, "c2")?;
                    h.push(p.detuning[j] - w, scaled(c1, gj * 0.5));
                    h.push(p.detuning[j] + w, scaled(c2, gj * 0.5));
                }
                Variant::Hopping => {
                    let d2 = nv_mode_op(&layout, j, LEVEL_E, LEVEL_1, "d2")?;
                    let s = if j == 0 { 1.0 } else { -1.0 };
                    h.push(p.bare_detuning[j] + p.hopping, scaled(d2, gj * (s / sqrt2)));
                }
            }
        }
    }
    if p.compensate_resonance {
        let residual = resonance_residuals(p, p.photon_occupation)?;
        for j in 0..2 {
            let n1 = nv_level_op(&layout, j, LEVEL_1, LEVEL_1)?;
            h.constant.scaled_add(C64::new(-residual[j], 0.0), &n1);
        }
    }
    Ok(h)
}

/// `−[Δ̃_1 n_1 + Δ̃_2 n_2] − [Θ σ⁺_1 + Θ σ⁺_2 + g_eff m† σ⁺_1 + g_eff m† σ⁺_2 + h.c.]`
/// on `NV1(2) ⊗ NV2(2) ⊗ mode`, with `σ⁺ = |1⟩⟨0|`.
pub fn effective_raman(eff: &EffectiveParams, layout: &SpaceLayout, mode: &str) -> Result<Operator> {
    let d = layout.dim();
    let mut m = Array2::<C64>::zeros((d, d));
    let shifts = [eff.delta_tilde_1, eff.delta_tilde_2];
    for j in 0..2 {
        let n1 = nv_level_op(layout, j, LEVEL_1, LEVEL_1)?;
        m.scaled_add(C64::new(-shifts[j], 0.0), &n1);
        let up = nv_level_op(layout, j, LEVEL_1, LEVEL_0)?;
        let coupling = {
            let dq = layout.dim_of(NV_LABELS[j])?;
            let ad = dagger(&annihilation(layout.dim_of(mode)? - 1)?);
            tensor(&[(NV_LABELS[j], &ket_bra(dq, LEVEL_1, LEVEL_0)), (mode, &ad)], layout)?.into_matrix()
        };
        let mut x = scaled(up, eff.theta);
        x.scaled_add(eff.g_eff, &coupling);
        let xd = dagger(&x);
        m -= &x;
        m -= &xd;
    }
    Operator::new(layout.clone(), m)
}

/// Collective-basis drive Hamiltonian on the `pair` space, basis
/// `(|00⟩, |T⟩, |11⟩, |S⟩)`:
/// `−[√2Θ |11⟩⟨T| + √2Θ |T⟩⟨00| − Δ̃ |S⟩⟨T| + h.c.]`.
pub fn collective_hd(eff: &EffectiveParams) -> Operator {
    let layout = SpaceLayout::new([(PAIR_LABEL, 4)]).expect("static layout");
    let (s00, t, s11, s) = (CollectiveBasis::IDX_00, CollectiveBasis::IDX_T, CollectiveBasis::IDX_11, CollectiveBasis::IDX_S);
    let a = eff.theta * std::f64::consts::SQRT_2;
    let mut x = Array2::<C64>::zeros((4, 4));
    x[[s11, t]] = a;
    x[[t, s00]] = a;
    x[[s, t]] = C64::new(-eff.delta_tilde, 0.0);
    let m = -(&x + &dagger(&x));
    Operator::new(layout, m).expect("4x4")
}
