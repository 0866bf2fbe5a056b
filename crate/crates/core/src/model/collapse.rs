use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::effective::effective_params;
use super::hamiltonian::{tier_layout, Tier, LEVEL_0, LEVEL_1, NV_LABELS};
use super::params::{SystemParams, Variant};
use super::transform::mode_transform;
use crate::analysis::CollectiveBasis;
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, dagger, ket_bra, tensor, Operator, SpaceLayout};

/// `σ_z = |1⟩⟨1| − |0⟩⟨0|` on a center of dimension `d` (zero on `|e⟩`).
pub fn sigma_z(d: usize) -> Array2<C64> {
    &ket_bra(d, LEVEL_1, LEVEL_1) - &ket_bra(d, LEVEL_0, LEVEL_0)
}

fn mode_lowering(layout: &SpaceLayout, label: &str) -> Result<Array2<C64>> {
    let a = annihilation(layout.dim_of(label)? - 1)?;
    Ok(tensor(&[(label, &a)], layout)?.into_matrix())
}

fn rate_factor(rate: f64) -> C64 {
    C64::new((2.0 * rate).sqrt(), 0.0)
}

/// Jump operators `L_k` of a tier. Each dissipator is `D[L]ρ = LρL† − ½{L†L, ρ}`,
/// so a channel `κ(2AρA† − A†Aρ − ρA†A)` contributes `L = √(2κ) A`. The
/// collective tier uses the engineered operator
/// `L_e = √κ_eff (|11⟩⟨T| + |T⟩⟨00|)` directly.
pub fn build_collapse_ops(p: &SystemParams, tier: Tier) -> Result<Vec<Operator>> {
    p.validate()?;
    let layout = tier_layout(p, tier)?;
    let mut ops: Vec<Array2<C64>> = Vec::new();
    match tier {
        Tier::FullRotated => {
            let t = mode_transform(p);
            let inv = t.inverse();
            let normal: Vec<Array2<C64>> =
                t.normal.iter().map(|l| mode_lowering(&layout, l)).collect::<Result<_>>()?;
            let rates = match p.variant {
                Variant::Fiber => vec![p.kappa, p.kappa, p.kappa_f],
                Variant::Hopping => vec![p.kappa, p.kappa],
            };
            for (j, rate) in rates.into_iter().enumerate() {
                if rate == 0.0 {
                    continue;
                }
                // bare_j = Σ_k inv[j, k] normal_k
                let d = layout.dim();
                let mut bare = Array2::<C64>::zeros((d, d));
                for (k, op) in normal.iter().enumerate() {
                    bare.scaled_add(inv[[j, k]], op);
                }
                ops.push(bare.mapv(|z| z * rate_factor(rate)));
            }
        }
        Tier::SingleModeRwa | Tier::EffectiveRaman => {
            if p.kappa > 0.0 {
                let label = super::hamiltonian::resonant_mode(p.variant);
                ops.push(mode_lowering(&layout, label)?.mapv(|z| z * rate_factor(p.kappa)));
            }
        }
        Tier::CollectiveHd => {
            let eff = effective_params(p)?;
            if eff.kappa_eff > 0.0 {
                ops.push(collective_jump(eff.kappa_eff));
            }
        }
    }

    if p.gamma_phi > 0.0 {
        for j in 0..2 {
            let sz = if tier == Tier::CollectiveHd {
                pair_sigma_z(j)
            } else {
                let d = layout.dim_of(NV_LABELS[j])?;
                tensor(&[(NV_LABELS[j], &sigma_z(d))], &layout)?.into_matrix()
            };
            ops.push(sz.mapv(|z| z * rate_factor(p.gamma_phi)));
        }
    }

    for extra in &p.extra_decay {
        if !layout.contains(&extra.subsystem) {
            continue;
        }
        let d = layout.dim_of(&extra.subsystem)?;
        if extra.from >= d || extra.to >= d || extra.rate == 0.0 {
            continue;
        }
        let op = tensor(&[(extra.subsystem.as_str(), &ket_bra(d, extra.to, extra.from))], &layout)?;
        ops.push(op.into_matrix().mapv(|z| z * rate_factor(extra.rate)));
    }

    ops.into_iter().map(|m| Operator::new(layout.clone(), m)).collect()
}

/// `√κ_eff (|11⟩⟨T| + |T⟩⟨00|)` on the pair space.
pub fn collective_jump(kappa_eff: f64) -> Array2<C64> {
    let mut m = Array2::<C64>::zeros((4, 4));
    let s = C64::new(kappa_eff.sqrt(), 0.0);
    m[[CollectiveBasis::IDX_11, CollectiveBasis::IDX_T]] = s;
    m[[CollectiveBasis::IDX_T, CollectiveBasis::IDX_00]] = s;
    m
}

/// `σ_z` of center `j` expressed in the pair basis.
pub fn pair_sigma_z(j: usize) -> Array2<C64> {
    let q = SpaceLayout::new([("NV1", 2), ("NV2", 2)]).expect("static layout");
    let sz = tensor(&[(NV_LABELS[j], &sigma_z(2))], &q).expect("static").into_matrix();
    let u = CollectiveBasis::new().change_of_basis();
    dagger(&u).dot(&sz).dot(&u)
}

/// Checks that a user-supplied list of jump operators lives on `layout`.
pub fn check_layout(ops: &[Operator], layout: &SpaceLayout) -> Result<()> {
    for op in ops {
        if op.layout() != layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", op.layout(), layout)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{frobenius, StateVector};
    use crate::model::presets;

    #[test]
    fn collective_jump_coefficient_and_dark_states() {
        let p = presets::fig4();
        let ops = build_collapse_ops(&p, Tier::CollectiveHd).unwrap();
        assert_eq!(ops.len(), 1);
        let l = ops[0].matrix();
        let c = l[[CollectiveBasis::IDX_11, CollectiveBasis::IDX_T]].re;
        assert!((c - 0.08f64.sqrt()).abs() < 1e-15);
        assert!((c - 0.2828).abs() < 1e-4);
        let layout = ops[0].layout().clone();
        for idx in [CollectiveBasis::IDX_S, CollectiveBasis::IDX_11] {
            let psi = StateVector::basis(&layout, &[idx]).unwrap();
            let out = ops[0].apply(&psi).unwrap();
            assert!(out.norm() == 0.0);
        }
    }

    #[test]
    fn no_dephasing_when_rate_is_zero() {
        let p = presets::fig4();
        assert_eq!(build_collapse_ops(&p, Tier::SingleModeRwa).unwrap().len(), 1);
        assert_eq!(build_collapse_ops(&p, Tier::EffectiveRaman).unwrap().len(), 1);
        assert_eq!(build_collapse_ops(&p, Tier::FullRotated).unwrap().len(), 3);
        let q = presets::fig5(0.01);
        assert_eq!(build_collapse_ops(&q, Tier::SingleModeRwa).unwrap().len(), 3);
        assert_eq!(build_collapse_ops(&q, Tier::CollectiveHd).unwrap().len(), 3);
    }

    #[test]
    fn negative_rates_rejected() {
        let mut p = presets::fig4();
        p.gamma_phi = -0.1;
        assert!(build_collapse_ops(&p, Tier::SingleModeRwa).is_err());
    }

    #[test]
    fn pair_sigma_z_matches_product_form() {
        let u = CollectiveBasis::new().change_of_basis();
        for j in 0..2 {
            let q = SpaceLayout::new([("NV1", 2), ("NV2", 2)]).unwrap();
            let sz = tensor(&[(NV_LABELS[j], &sigma_z(2))], &q).unwrap().into_matrix();
            let back = u.dot(&pair_sigma_z(j)).dot(&dagger(&u));
            assert!(frobenius(&(&back - &sz)) < 1e-14);
        }
    }

    #[test]
    fn extra_decay_hook() {
        let mut p = presets::fig4();
        p.extra_decay.push(crate::model::ExtraDecay { subsystem: "NV1".into(), from: 2, to: 0, rate: 0.01 });
        assert_eq!(build_collapse_ops(&p, Tier::SingleModeRwa).unwrap().len(), 2);
        // no |e⟩ in the effective tier
        assert_eq!(build_collapse_ops(&p, Tier::EffectiveRaman).unwrap().len(), 1);
    }

    #[test]
    fn fiber_frame_dissipator_keeps_resonant_mode_channel() {
        // Σ L†L over the three bare channels equals 2κ (c†c + c1†c1 + c2†c2) when κ_f = κ.
        let p = presets::fig4();
        let ops = build_collapse_ops(&p, Tier::FullRotated).unwrap();
        let layout = ops[0].layout().clone();
        let mut sum = Array2::<C64>::zeros((layout.dim(), layout.dim()));
        for op in &ops {
            sum += &dagger(op.matrix()).dot(op.matrix());
        }
        let mut want = Array2::<C64>::zeros(sum.raw_dim());
        for l in ["c", "c1", "c2"] {
            let a = mode_lowering(&layout, l).unwrap();
            want += &dagger(&a).dot(&a).mapv(|z| z * 2.0 * p.kappa);
        }
        assert!(frobenius(&(&sum - &want)) < 1e-13);
    }
}
