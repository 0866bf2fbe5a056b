//! Declarative experiment descriptions and the shipped experiment presets.
//!
//! A config file is TOML. Every key is optional; missing keys come from the
//! preset named by `preset` (an experiment preset from [`catalog`] or a
//! parameter preset from [`crate::model::presets`]), then from the defaults.
//!
//! ```toml
//! preset = "fig4a"
//! solver = "me"
//! t_end = 1500.0
//! initial_state = "ket11"
//!
//! [params]
//! gamma_phi = 0.001
//! cutoffs = { c = 2 }
//!
//! [sweep]
//! parameter = "gamma_phi"
//! values = [0.0, 0.01]
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{presets, SystemParams, Tier};

pub const DEFAULT_T_END: f64 = 3000.0;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_TRAJECTORIES: usize = 50;
pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Me,
    Mcwf,
    Steady,
    FieldMatrix,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::Me, Solver::Mcwf, Solver::Steady, Solver::FieldMatrix];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Me => "me",
            Solver::Mcwf => "mcwf",
            Solver::Steady => "steady",
            Solver::FieldMatrix => "field_matrix",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s || (s == "field-matrix" && *v == Solver::FieldMatrix))
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}

/// Two-qubit initial state; modes start in vacuum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Ket00,
    Ket11,
    #[serde(rename = "ketT")]
    KetT,
    #[serde(rename = "ketS")]
    KetS,
    MixedIdentity,
    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩` as `[re, im]` pairs; normalized
    /// before use.
    Custom(Vec<[f64; 2]>),
}

impl InitialState {
    pub fn is_pure(&self) -> bool {
        !matches!(self, InitialState::MixedIdentity)
    }

    pub fn label(&self) -> &'static str {
        match self {
            InitialState::Ket00 => "ket00",
            InitialState::Ket11 => "ket11",
            InitialState::KetT => "ketT",
            InitialState::KetS => "ketS",
            InitialState::MixedIdentity => "mixed_identity",
            InitialState::Custom(_) => "custom",
        }
    }

    /// Product-basis amplitudes of a pure initial state.
    pub fn amplitudes(&self) -> Result<[C64; 4]> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = |a: [f64; 4]| a.map(|x| C64::new(x, 0.0));
        match self {
            InitialState::Ket00 => Ok(r([1.0, 0.0, 0.0, 0.0])),
            InitialState::Ket11 => Ok(r([0.0, 0.0, 0.0, 1.0])),
            InitialState::KetT => Ok(r([0.0, h, h, 0.0])),
            InitialState::KetS => Ok(r([0.0, h, -h, 0.0])),
            InitialState::MixedIdentity => Err(Error::Config("mixed_identity has no amplitudes".into())),
            InitialState::Custom(v) => {
                if v.len() != 4 {
                    return Err(Error::Config(format!("custom initial state needs 4 amplitudes, got {}", v.len())));
                }
                let amps: Vec<C64> = v.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::Config("custom initial state has zero or non-finite norm".into()));
                }
                Ok([amps[0] / norm, amps[1] / norm, amps[2] / norm, amps[3] / norm])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// `timeseries.csv`
    Csv,
    /// `summary.json`
    Json,
    /// `summary.txt`, a short human-readable report.
    Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// Preset the config was derived from, if any.
    pub preset: Option<String>,
    pub params: SystemParams,
    pub tier: Tier,
    pub solver: Solver,
    pub initial_state: InitialState,
    pub t_end: f64,
    pub n_samples: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub rtol: f64,
    pub atol: f64,
    pub outputs: Vec<Output>,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            preset: None,
            params: presets::fig4(),
            tier: Tier::SingleModeRwa,
            solver: Solver::Me,
            initial_state: InitialState::Ket00,
            t_end: DEFAULT_T_END,
            n_samples: DEFAULT_SAMPLES,
            n_traj: DEFAULT_TRAJECTORIES,
            seed: 0,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            outputs: vec![Output::Csv, Output::Json],
            sweep: None,
        }
    }
}

/// Config file contents before preset resolution.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: Option<String>,
    pub preset: Option<String>,
    pub params: Option<toml::Table>,
    pub tier: Option<Tier>,
    pub solver: Option<Solver>,
    pub initial_state: Option<InitialState>,
    pub t_end: Option<f64>,
    pub n_samples: Option<usize>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub outputs: Option<Vec<Output>>,
    pub sweep: Option<Sweep>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies the file on top of its preset (or the defaults) and validates.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.preset {
            Some(name) => preset_config(name)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.name {
            c.name = v;
        }
        if let Some(table) = &self.params {
            c.params = merge_params(&c.params, table)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        take!(tier, solver, initial_state, t_end, n_samples, n_traj, seed, rtol, atol, outputs);
        if self.sweep.is_some() {
            c.sweep = self.sweep;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Overlays the keys of `table` onto `base`. Unknown keys are rejected.
pub fn merge_params(base: &SystemParams, table: &toml::Table) -> Result<SystemParams> {
    let mut value = toml::Value::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
    merge_table(&mut value, table, "params")?;
    value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

fn merge_table(target: &mut toml::Value, overlay: &toml::Table, path: &str) -> Result<()> {
    let dst = target
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("`{path}` is not a table")))?;
    for (k, v) in overlay {
        let here = format!("{path}.{k}");
        match dst.get_mut(k) {
            // extra_decay is an empty list by default, so it is replaced wholesale
            Some(slot @ toml::Value::Table(_)) => match v {
                toml::Value::Table(t) => merge_table(slot, t, &here)?,
                _ => return Err(Error::Config(format!("`{here}` must be a table"))),
            },
            Some(slot) => *slot = v.clone(),
            None if k == "extra_decay" => {
                dst.insert(k.clone(), v.clone());
            }
            None => return Err(Error::Config(format!("unknown parameter `{here}`"))),
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive and finite, got {}", self.t_end)));
        }
        if self.n_samples < 2 {
            return Err(Error::Config("n_samples must be at least 2".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config("rtol and atol must be positive".into()));
        }
        match self.solver {
            Solver::Steady if self.tier.is_time_dependent() => {
                return Err(Error::Config(format!("solver steady needs a time-independent tier, not {}", self.tier)));
            }
            Solver::FieldMatrix if self.tier != Tier::EffectiveRaman => {
                return Err(Error::Config("solver field_matrix belongs to tier effective-raman".into()));
            }
            Solver::FieldMatrix if self.params.cutoffs.c != 1 => {
                return Err(Error::Config("solver field_matrix needs photon cutoff c = 1".into()));
            }
            Solver::Mcwf if !self.initial_state.is_pure() => {
                return Err(Error::Config("solver mcwf needs a pure initial state".into()));
            }
            Solver::Mcwf if self.n_traj == 0 => {
                return Err(Error::Config("n_traj must be at least 1".into()));
            }
            _ => {}
        }
        if self.initial_state.is_pure() {
            self.initial_state.amplitudes()?;
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("outputs must not be empty".into()));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep values must not be empty".into()));
            }
            if let Some(v) = s.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::Config(format!("sweep value {v} is not finite")));
            }
            self.params.get_by_name(&s.parameter)?;
            for v in &s.values {
                self.point(*v)?.params.validate()?;
            }
        }
        Ok(())
    }

    /// The config of one sweep point, without the sweep axis.
    pub fn point(&self, value: f64) -> Result<ExperimentConfig> {
        let s = self.sweep.as_ref().ok_or_else(|| Error::Config("config has no sweep axis".into()))?;
        let mut c = self.clone();
        c.params.set_by_name(&s.parameter, value)?;
        c.sweep = None;
        c.name = format!("{}-{}-{}", self.name, s.parameter, value);
        Ok(c)
    }
}

/// A named, ready-to-run experiment.
#[derive(Clone, Debug, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

/// Values of the dephasing sweep.
pub const FIG5_GAMMAS: [f64; 5] = [0.0, 0.001, 0.005, 0.01, 0.02];

pub fn catalog() -> Vec<PresetInfo> {
    let p = |name, description| PresetInfo { name, description };
    vec![
        p("fig4a", "single-mode RWA, |00>, MCWF with 50 trajectories"),
        p("fig4b", "single-mode RWA, |11>, MCWF with 50 trajectories"),
        p("fig4a-me", "fig4a with the density-matrix solver"),
        p("fig4b-me", "fig4b with the density-matrix solver"),
        p("fig5", "fig4a swept over the dephasing rates 0, 0.001, 0.005, 0.01, 0.02"),
        p("fig5-gamma-<value>", "fig4a with dephasing rate <value>"),
        p("steady-collective", "stationary state of the collective two-qubit model"),
        p("full-model", "three normal modes and three-level centers, density-matrix solver from |00>"),
        p("field-matrix", "photon-number block equations of the effective Raman model"),
        p("hopping", "photon-hopping variant with the fig4-equivalent mapping, effective Raman tier"),
        p("kappa-f-sweep", "single-mode RWA, fiber decay swept over 0, 0.5, 1"),
        p("physical-units", "fig4a with g/2pi = 55 MHz and kappa/2pi = 50 MHz"),
    ]
}

/// Resolves an experiment preset, falling back to a parameter preset with
/// the default run settings.
pub fn preset_config(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig { preset: Some(name.to_string()), name: name.to_string(), ..Default::default() };
    let mcwf = ExperimentConfig { solver: Solver::Mcwf, ..base.clone() };
    let c = match name {
        "fig4a" => mcwf,
        "fig4b" => ExperimentConfig { initial_state: InitialState::Ket11, ..mcwf },
        "fig4a-me" => base,
        "fig4b-me" => ExperimentConfig { initial_state: InitialState::Ket11, ..base },
        "fig5" => ExperimentConfig {
            sweep: Some(Sweep { parameter: "gamma_phi".into(), values: FIG5_GAMMAS.to_vec() }),
            ..mcwf
        },
        "steady-collective" => ExperimentConfig { tier: Tier::CollectiveHd, solver: Solver::Steady, ..base },
        "full-model" => ExperimentConfig { tier: Tier::FullRotated, rtol: 1e-7, atol: 1e-9, ..base },
        "field-matrix" => ExperimentConfig { tier: Tier::EffectiveRaman, solver: Solver::FieldMatrix, ..base },
        "hopping" => ExperimentConfig {
            params: presets::hopping_fig4_equivalent(),
            tier: Tier::EffectiveRaman,
            ..base
        },
        "kappa-f-sweep" => ExperimentConfig {
            sweep: Some(Sweep { parameter: "kappa_f".into(), values: vec![0.0, 0.5, 1.0] }),
            ..base
        },
        "physical-units" => ExperimentConfig { params: presets::physical_units(), ..mcwf },
        _ if name.starts_with("fig5-gamma-") => ExperimentConfig { params: presets::by_name(name)?, ..mcwf },
        _ => ExperimentConfig { params: presets::by_name(name)?, ..base },
    };
    Ok(c)
}
