use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the two resonators are connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Both resonators side-coupled to one fiber-taper mode `b`.
    Fiber,
    /// Direct evanescent photon hopping between the resonators.
    Hopping,
}

/// Fock-space cutoffs of the normal modes. `c` is the resonant mode (`c` for
/// the fiber variant, `d1` for hopping); `c1`/`c2` are the nonresonant ones
/// (`d2` uses `c1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Cutoffs {
    pub c: usize,
    pub c1: usize,
    pub c2: usize,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self { c: 1, c1: 1, c2: 1 }
    }
}

/// Incoherent decay `|to⟩⟨from|` on one subsystem at rate `rate`, added to
/// every tier whose layout contains the subsystem and level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraDecay {
    pub subsystem: String,
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Every physical parameter of the two-center setup. Frequencies and rates are
/// in units of the reference coupling `g`, times in `1/g`. Index 0 refers to
/// center 1 and index 1 to center 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    pub variant: Variant,
    /// NV–WGM couplings `g_j`.
    #[serde(with = "complex_pair")]
    pub g: [C64; 2],
    /// Raman laser on `|0⟩ ↔ |e⟩` paired with the cavity (`Ω_j`).
    #[serde(with = "complex_pair")]
    pub omega: [C64; 2],
    /// Second Raman pair: `Λ_j` on `|0⟩ ↔ |e⟩`, `Π_j` on `|1⟩ ↔ |e⟩`.
    #[serde(with = "complex_pair")]
    pub lambda: [C64; 2],
    #[serde(with = "complex_pair")]
    pub pi: [C64; 2],
    /// Stark-shift laser on `|1⟩ ↔ |e⟩` (`Σ_j`).
    #[serde(with = "complex_pair")]
    pub sigma: [C64; 2],
    /// `Δ_j`: detuning of the `Ω` laser and the cavity.
    pub detuning: [f64; 2],
    /// `Δ'_j`: detuning of the `Λ`/`Π` pair.
    pub raman_detuning: [f64; 2],
    /// `δ_j`: detuning of the Stark laser.
    pub stark_detuning: [f64; 2],
    /// Cavity–fiber coupling `ν` and fiber propagation phase `φ`.
    pub nu: f64,
    pub phi: f64,
    /// Photon hopping rate `J` and bare WGM detunings `Δ̄_j` (hopping variant).
    pub hopping: f64,
    pub bare_detuning: [f64; 2],
    /// Resonator field decay `κ`, fiber-mode decay `κ_f`, pure dephasing `γ_φ`.
    pub kappa: f64,
    pub kappa_f: f64,
    pub gamma_phi: f64,
    pub cutoffs: Cutoffs,
    /// Photon occupation `⟨c†c⟩` assumed in the resonance condition.
    pub photon_occupation: f64,
    /// Adds `−residual_j |1⟩_j⟨1|` to the tiers that still contain `|e⟩`,
    /// cancelling the resonance-condition mismatch.
    pub compensate_resonance: bool,
    pub extra_decay: Vec<ExtraDecay>,
}

impl Default for SystemParams {
    fn default() -> Self {
        presets::fig4()
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("kappa_f", self.kappa_f), ("gamma_phi", self.gamma_phi)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for c in [self.cutoffs.c, self.cutoffs.c1, self.cutoffs.c2] {
            if c < 1 {
                return Err(Error::InvalidCutoff(c));
            }
        }
        for d in &self.extra_decay {
            if !(d.rate >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative extra decay rate {}", d.rate)));
            }
        }
        if self.variant == Variant::Hopping {
            for j in 0..2 {
                let lhs = self.bare_detuning[j] - self.hopping;
                if (lhs - self.detuning[j]).abs() > 1e-9 * self.detuning[j].abs().max(1.0) {
                    return Err(Error::Consistency {
                        name: "bare detuning minus hopping equals cavity detuning",
                        lhs: format!("{lhs}"),
                        rhs: format!("{}", self.detuning[j]),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sets a real-valued parameter by name, as used by sweeps and CLI
    /// overrides. Per-center names take a `1`/`2` suffix (`omega2`,
    /// `detuning1`, ...); a name without suffix sets both centers.
    pub fn set_by_name(&mut self, name: &str, value: f64) -> Result<()> {
        let unknown = || Error::Config(format!("unknown parameter `{name}`"));
        let scalar = match name {
            "nu" => Some(&mut self.nu),
            "phi" => Some(&mut self.phi),
            "hopping" | "J" => Some(&mut self.hopping),
            "kappa" => Some(&mut self.kappa),
            "kappa_f" => Some(&mut self.kappa_f),
            "gamma_phi" => Some(&mut self.gamma_phi),
            "photon_occupation" => Some(&mut self.photon_occupation),
            _ => None,
        };
        if let Some(slot) = scalar {
            *slot = value;
            return Ok(());
        }
        let (base, which) = match name.chars().last() {
            Some('1') => (&name[..name.len() - 1], Some(0)),
            Some('2') => (&name[..name.len() - 1], Some(1)),
            _ => (name, None),
        };
        let targets: Vec<usize> = which.map_or(vec![0, 1], |j| vec![j]);
        for j in targets {
            match base {
                "g" => self.g[j] = C64::new(value, 0.0),
                "omega" => self.omega[j] = C64::new(value, 0.0),
                "lambda" => self.lambda[j] = C64::new(value, 0.0),
                "pi" => self.pi[j] = C64::new(value, 0.0),
                "sigma" => self.sigma[j] = C64::new(value, 0.0),
                "detuning" => self.detuning[j] = value,
                "raman_detuning" => self.raman_detuning[j] = value,
                "stark_detuning" => self.stark_detuning[j] = value,
                "bare_detuning" => self.bare_detuning[j] = value,
                _ => return Err(unknown()),
            }
        }
        Ok(())
    }

    /// Reads back a real-valued parameter by the names accepted by
    /// [`Self::set_by_name`]; complex entries report their real part.
    pub fn get_by_name(&self, name: &str) -> Result<f64> {
        let v = match name {
            "nu" => self.nu,
            "phi" => self.phi,
            "hopping" | "J" => self.hopping,
            "kappa" => self.kappa,
            "kappa_f" => self.kappa_f,
            "gamma_phi" => self.gamma_phi,
            "photon_occupation" => self.photon_occupation,
            _ => {
                let (base, j) = match name.chars().last() {
                    Some('1') => (&name[..name.len() - 1], 0),
                    Some('2') => (&name[..name.len() - 1], 1),
                    _ => (name, 0),
                };
                match base {
                    "g" => self.g[j].re,
                    "omega" => self.omega[j].re,
                    "lambda" => self.lambda[j].re,
                    "pi" => self.pi[j].re,
                    "sigma" => self.sigma[j].re,
                    "detuning" => self.detuning[j],
                    "raman_detuning" => self.raman_detuning[j],
                    "stark_detuning" => self.stark_detuning[j],
                    "bare_detuning" => self.bare_detuning[j],
                    _ => return Err(Error::Config(format!("unknown parameter `{name}`"))),
                }
            }
        };
        Ok(v)
    }
}

/// Named parameter sets.
pub mod presets {
    use super::*;

    pub const NAMES: &[&str] = &["fig4", "fig5-gamma-<value>", "hopping-fig4-equivalent", "physical-units"];

    /// Reference coupling `g/2π` in MHz for the physical-units preset.
    pub const PHYSICAL_G_MHZ: f64 = 55.0;
    /// Resonator decay `κ/2π` in MHz for the physical-units preset.
    pub const PHYSICAL_KAPPA_MHZ: f64 = 50.0;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Fiber-coupled reference set with the sign assignment
    /// `Δ = 10`, `Δ' = −10`, `δ = (20, −20)`, `Ω = (1, −1)`.
    pub fn fig4() -> SystemParams {
        let s = 5f64.sqrt() / 5.0;
        SystemParams {
            variant: Variant::Fiber,
            g: [r(1.0), r(1.0)],
            omega: [r(1.0), r(-1.0)],
            lambda: [r(1.0), r(1.0)],
            pi: [r(0.1), r(0.1)],
            sigma: [r(s), r(s)],
            detuning: [10.0, 10.0],
            raman_detuning: [-10.0, -10.0],
            stark_detuning: [20.0, -20.0],
            nu: 100.0,
            phi: 0.0,
            hopping: 100.0,
            bare_detuning: [110.0, 110.0],
            kappa: 0.5,
            kappa_f: 0.5,
            gamma_phi: 0.0,
            cutoffs: Cutoffs::default(),
            photon_occupation: 0.0,
            compensate_resonance: false,
            extra_decay: Vec::new(),
        }
    }

    pub fn fig5(gamma_phi: f64) -> SystemParams {
        SystemParams { gamma_phi, ..fig4() }
    }

    /// Hopping variant with the same effective `(Θ, g_eff, Δ̃_j)` as [`fig4`].
    /// The hopping cavity couplings enter both centers with the same sign, so
    /// `Ω_2 = +g` here.
    pub fn hopping_fig4_equivalent() -> SystemParams {
        SystemParams {
            variant: Variant::Hopping,
            omega: [r(1.0), r(1.0)],
            hopping: 100.0,
            bare_detuning: [110.0, 110.0],
            ..fig4()
        }
    }

    /// [`fig4`] with the resonator decay set from the measured
    /// `g/2π ≈ 55 MHz`, `κ/2π ≈ 50 MHz`.
    pub fn physical_units() -> SystemParams {
        SystemParams { kappa: PHYSICAL_KAPPA_MHZ / PHYSICAL_G_MHZ, kappa_f: PHYSICAL_KAPPA_MHZ / PHYSICAL_G_MHZ, ..fig4() }
    }

    pub fn by_name(name: &str) -> Result<SystemParams> {
        match name {
            "fig4" | "fig4a" | "fig4b" => Ok(fig4()),
            "hopping-fig4-equivalent" => Ok(hopping_fig4_equivalent()),
            "physical-units" => Ok(physical_units()),
            _ => {
                if let Some(v) = name.strip_prefix("fig5-gamma-") {
                    let gamma: f64 = v
                        .parse()
                        .map_err(|_| Error::Config(format!("bad dephasing rate in preset `{name}`")))?;
                    if !(gamma >= 0.0) || !gamma.is_finite() {
                        return Err(Error::Config(format!("bad dephasing rate in preset `{name}`")));
                    }
                    Ok(fig5(gamma))
                } else {
                    Err(Error::Config(format!("unknown parameter preset `{name}`")))
                }
            }
        }
    }
}

/// Accepts either a real number or a `[re, im]` pair per center.
mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Complex([f64; 2]),
    }

    impl From<C64> for Repr {
        fn from(z: C64) -> Self {
            if z.im == 0.0 {
                Repr::Real(z.re)
            } else {
                Repr::Complex([z.re, z.im])
            }
        }
    }

    impl From<Repr> for C64 {
        fn from(r: Repr) -> Self {
            match r {
                Repr::Real(x) => C64::new(x, 0.0),
                Repr::Complex([re, im]) => C64::new(re, im),
            }
        }
    }

    pub fn serialize<S: Serializer>(v: &[C64; 2], s: S) -> Result<S::Ok, S::Error> {
        [Repr::from(v[0]), Repr::from(v[1])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[C64; 2], D::Error> {
        let [a, b] = <[Repr; 2]>::deserialize(d)?;
        Ok([a.into(), b.into()])
    }
}
