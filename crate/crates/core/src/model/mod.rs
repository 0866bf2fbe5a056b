//! Hamiltonians, jump operators and derived parameters for the fiber-coupled
//! and hopping-coupled two-resonator setups, at four levels of approximation.

mod collapse;
mod effective;
mod hamiltonian;
mod params;
mod transform;
mod validity;

pub use collapse::{build_collapse_ops, check_layout, collective_jump, pair_sigma_z, sigma_z};
pub use effective::{effective_params, EffectiveParams, CONSISTENCY_TOL};
pub use hamiltonian::{
    build_hamiltonian, collective_hd, effective_raman, hamiltonian, resonant_mode, tier_layout, tier_modes,
    Hamiltonian, Harmonic, Tier, LEVEL_0, LEVEL_1, LEVEL_E, NV_LABELS, PAIR_LABEL,
};
pub use params::{presets, Cutoffs, ExtraDecay, SystemParams, Variant};
pub use transform::{mode_transform, ModeTransform};
pub use validity::{
    check_validity, resonance_condition_check, resonance_residuals, Margin, ResonanceReport, ValidityReport,
    DEFAULT_RATIO_THRESHOLD, DEFAULT_RESONANCE_TOL,
};
