//! Executes [`ExperimentConfig`]s and writes their artifacts.
//!
//! A run writes into `<out>/<name>/`: `timeseries.csv` (columns `t, F, P00,
//! P11, PT, PS, n_c[, n_c1, n_c2][, stderr_*]`, 17 significant digits),
//! `summary.json` and optionally `summary.txt`. Every file is written to a
//! temporary sibling first and renamed into place.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    embed_qubit_state, fidelity, populations, qubit_layout, reduce_to_qubits, standard_probes, Populations,
    LEAKAGE_COLUMN, QUBIT_OBSERVABLES,
};
use crate::config::{ExperimentConfig, InitialState, Output, Solver};
use crate::dynamics::{
    integrate_field_matrix, integrate_me, mcwf, steady_state, uniform_grid, FieldBlocks, FieldMatrixModel,
    McwfOptions, MeOptions, SolverMeta, StepControl, SteadyOptions, TimeSeries,
};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, StateVector};
use crate::model::{
    build_collapse_ops, check_validity, effective_params, hamiltonian, resonance_condition_check, tier_layout,
    tier_modes, EffectiveParams, ResonanceReport, Tier, ValidityReport, Variant, DEFAULT_RATIO_THRESHOLD,
    DEFAULT_RESONANCE_TOL,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NVDISS_OUT";
pub const DEFAULT_OUT_DIR: &str = "nvdiss-out";
/// Fidelity level whose first crossing is reported.
pub const FIDELITY_MARK: f64 = 0.95;
/// The stationarity residual compares the final sample with this fraction of `t_end`.
pub const STATIONARITY_FRACTION: f64 = 0.9;

/// Photon-number column names in CSV order.
pub const MODE_COLUMNS: [&str; 3] = ["n_c", "n_c1", "n_c2"];

#[derive(Clone, Debug, Serialize)]
pub struct SteadyReport {
    pub null_dim: usize,
    pub unique: bool,
    /// `‖L[ρ_ss]‖_F`
    pub residual: f64,
    pub smallest_singular_values: Vec<f64>,
    pub fidelity: f64,
    pub populations: Populations,
    pub leakage: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub name: String,
    pub preset: Option<String>,
    pub tier: Tier,
    pub solver: Solver,
    pub variant: Variant,
    pub initial_state: &'static str,
    pub t_end: f64,
    pub n_samples: usize,
    pub final_fidelity: f64,
    pub final_fidelity_stderr: Option<f64>,
    pub final_observables: BTreeMap<String, f64>,
    /// Time-domain solvers: largest change of a qubit observable between
    /// `0.9 t_end` and `t_end`. Steady solver: `‖L[ρ_ss]‖_F`.
    pub stationarity_residual: f64,
    pub time_to_fidelity_095: Option<f64>,
    pub max_leakage: f64,
    pub effective: EffectiveParams,
    pub validity: ValidityReport,
    pub resonance: Option<ResonanceReport>,
    pub warnings: Vec<String>,
    pub solver_meta: SolverMeta,
    pub steady: Option<SteadyReport>,
    pub artifacts: Vec<String>,
}

/// Output of [`simulate`]: the sampled series (absent for the steady
/// solver) and the summary without artifact paths.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub series: Option<TimeSeries>,
    pub summary: Summary,
}

fn mode_probes(cfg: &ExperimentConfig) -> Vec<(&'static str, &'static str)> {
    if cfg.solver == Solver::FieldMatrix {
        return Vec::new();
    }
    tier_modes(&cfg.params, cfg.tier).iter().zip(MODE_COLUMNS).map(|((label, _), col)| (col, *label)).collect()
}

/// Columns of `timeseries.csv` after `t`.
pub fn csv_columns(cfg: &ExperimentConfig) -> Vec<String> {
    let n_modes = match cfg.tier {
        Tier::CollectiveHd => 1,
        _ => tier_modes(&cfg.params, cfg.tier).len(),
    };
    let mut cols: Vec<String> = QUBIT_OBSERVABLES.iter().map(|s| s.to_string()).collect();
    cols.extend(MODE_COLUMNS[..n_modes].iter().map(|s| s.to_string()));
    if cfg.solver == Solver::Mcwf {
        let errs: Vec<String> = cols.iter().map(|c| format!("stderr_{c}")).collect();
        cols.extend(errs);
    }
    cols
}

fn initial_density(cfg: &ExperimentConfig, layout: &crate::hilbert::SpaceLayout) -> Result<DensityMatrix> {
    match &cfg.initial_state {
        InitialState::MixedIdentity => {
            let q = qubit_layout();
            let d = layout.dim();
            let mut m = Array2::<C64>::zeros((d, d));
            for k in 0..4 {
                let psi = StateVector::basis(&q, &[k / 2, k % 2])?;
                let v = embed_qubit_state(&psi, layout)?;
                m += &v.to_density().into_matrix().mapv(|z| z * 0.25);
            }
            DensityMatrix::from_matrix(layout.clone(), m)
        }
        s => Ok(initial_ket(s, layout)?.to_density()),
    }
}

fn initial_ket(state: &InitialState, layout: &crate::hilbert::SpaceLayout) -> Result<StateVector> {
    let amps = ndarray::Array1::from(state.amplitudes()?.to_vec());
    embed_qubit_state(&StateVector::from_amplitudes(qubit_layout(), amps)?, layout)
}

fn control(cfg: &ExperimentConfig) -> StepControl {
    StepControl::with_tolerances(cfg.rtol, cfg.atol)
}

/// Runs the configured solver without touching the filesystem.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.sweep.is_some() {
        return Err(Error::Config("config has a sweep axis; use sweep".into()));
    }
    let p = &cfg.params;
    let eff = effective_params(p)?;
    let validity = check_validity(p, DEFAULT_RATIO_THRESHOLD);
    let resonance = resonance_condition_check(p, p.photon_occupation, DEFAULT_RESONANCE_TOL).ok();
    let mut warnings: Vec<String> = validity
        .failures()
        .map(|m| format!("validity margin {} = {:.3} below {}", m.name, m.ratio, validity.threshold))
        .collect();
    if let Some(r) = &resonance {
        if !r.within_tolerance {
            warnings.push(format!(
                "resonance residual relative {:?} exceeds {} (set compensate_resonance to absorb it)",
                r.relative, r.tolerance
            ));
        }
    }
    for w in &warnings {
        log::warn!("{}: {w}", cfg.name);
    }

    let layout = tier_layout(p, cfg.tier)?;
    let probes_layout = if cfg.solver == Solver::FieldMatrix { qubit_layout() } else { layout.clone() };
    let probes = standard_probes(&probes_layout, &eff, &mode_probes(cfg))?;
    let grid = uniform_grid(cfg.t_end, cfg.n_samples)?;
    log::info!("{}: tier {} (dim {}), solver {}", cfg.name, cfg.tier, layout.dim(), cfg.solver);

    let (series, steady, final_state, meta) = match cfg.solver {
        Solver::Steady => {
            let h = hamiltonian(p, cfg.tier)?;
            let ops = build_collapse_ops(p, cfg.tier)?;
            let r = steady_state(&h, &ops, &SteadyOptions::default())?;
            let red = reduce_to_qubits(&r.rho_ss, 1.0)?;
            let report = SteadyReport {
                null_dim: r.null_dim,
                unique: r.is_unique(),
                residual: r.residual,
                smallest_singular_values: r.smallest_singular_values.clone(),
                fidelity: fidelity(&red.rho, &eff)?,
                populations: populations(&red.rho)?,
                leakage: red.leakage,
            };
            let meta = SolverMeta { solver: "steady".into(), ..SolverMeta::default() };
            (None, Some(report), r.rho_ss, meta)
        }
        Solver::Me => {
            let h = hamiltonian(p, cfg.tier)?;
            let ops = build_collapse_ops(p, cfg.tier)?;
            let rho0 = initial_density(cfg, &layout)?;
            let opts = MeOptions { ctrl: control(cfg), ..MeOptions::default() };
            let s = integrate_me(&h, &ops, &rho0, &grid, &probes, &opts)?;
            let st = s.final_state().cloned().ok_or_else(|| Error::Invariant("missing final state".into()))?;
            let meta = s.meta.clone();
            (Some(s), None, st, meta)
        }
        Solver::Mcwf => {
            let h = hamiltonian(p, cfg.tier)?;
            let ops = build_collapse_ops(p, cfg.tier)?;
            let psi0 = initial_ket(&cfg.initial_state, &layout)?;
            let opts = McwfOptions { ctrl: control(cfg), n_traj: cfg.n_traj, seed: cfg.seed, ..McwfOptions::default() };
            let s = mcwf(&h, &ops, &psi0, &grid, &probes, &opts)?;
            let st = s.final_state().cloned().ok_or_else(|| Error::Invariant("missing final state".into()))?;
            let meta = s.meta.clone();
            (Some(s), None, st, meta)
        }
        Solver::FieldMatrix => {
            // EffectiveRaman damps the mode with L = √(2κ) c, i.e. standard rate 2κ
            let model = FieldMatrixModel::from_effective(&eff, 2.0 * p.kappa);
            let rho0 = initial_density(cfg, &qubit_layout())?;
            let s = integrate_field_matrix(&model, &FieldBlocks::vacuum(&rho0)?, &grid, &probes, &control(cfg))?;
            let st = s.final_state().cloned().ok_or_else(|| Error::Invariant("missing final state".into()))?;
            let meta = s.meta.clone();
            (Some(s), None, st, meta)
        }
    };

    let mut final_observables = BTreeMap::new();
    let (final_fidelity, final_fidelity_stderr, stationarity, time_to_mark, max_leakage) = match &series {
        Some(s) => {
            for name in &s.names {
                if let Some(v) = s.last(name) {
                    final_observables.insert(name.clone(), v);
                }
            }
            let f = s.last("F").unwrap_or(f64::NAN);
            let f_err = s.stderr_of("F").and_then(|e| e.last().copied());
            let k0 = nearest_index(&s.times, STATIONARITY_FRACTION * cfg.t_end);
            let last = s.len() - 1;
            let stationarity = QUBIT_OBSERVABLES
                .iter()
                .filter_map(|n| s.get(n))
                .map(|v| (v[last] - v[k0]).abs())
                .fold(0.0, f64::max);
            let mark = s.first_crossing("F", FIDELITY_MARK);
            let leak = s.get(LEAKAGE_COLUMN).map_or(0.0, |v| v.iter().copied().fold(0.0, f64::max));
            (f, f_err, stationarity, mark, leak)
        }
        None => {
            let r = steady.as_ref().expect("steady report");
            let pops = r.populations;
            for (k, v) in [("F", r.fidelity), ("P00", pops.p00), ("P11", pops.p11), ("PT", pops.pt), ("PS", pops.ps)] {
                final_observables.insert(k.to_string(), v);
            }
            final_observables.insert(LEAKAGE_COLUMN.to_string(), r.leakage);
            (r.fidelity, None, r.residual, None, r.leakage)
        }
    };
    drop(final_state);

    let summary = Summary {
        name: cfg.name.clone(),
        preset: cfg.preset.clone(),
        tier: cfg.tier,
        solver: cfg.solver,
        variant: p.variant,
        initial_state: cfg.initial_state.label(),
        t_end: cfg.t_end,
        n_samples: cfg.n_samples,
        final_fidelity,
        final_fidelity_stderr,
        final_observables,
        stationarity_residual: stationarity,
        time_to_fidelity_095: time_to_mark,
        max_leakage,
        effective: eff,
        validity,
        resonance,
        warnings,
        solver_meta: meta,
        steady,
        artifacts: Vec::new(),
    };
    Ok(RunResult { series, summary })
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().partial_cmp(&(b.1 - t).abs()).expect("finite times"))
        .map_or(0, |(i, _)| i)
}

/// Fixed 17-significant-digit rendering used by every CSV.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the CSV artifact of a series.
pub fn render_csv(series: &TimeSeries, columns: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["t".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header).map_err(io)?;
    let lookup: Vec<Option<&[f64]>> = columns
        .iter()
        .map(|c| match c.strip_prefix("stderr_") {
            Some(base) => series.stderr_of(base),
            None => series.get(c),
        })
        .collect();
    for (k, t) in series.times.iter().enumerate() {
        let mut row = vec![format_value(*t)];
        row.extend(lookup.iter().map(|col| format_value(col.map_or(f64::NAN, |v| v[k]))));
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn text_report(s: &Summary) -> String {
    let mut out = format!(
        "{}: tier {}, solver {}, initial {}\nfinal F = {:.6}",
        s.name, s.tier, s.solver, s.initial_state, s.final_fidelity
    );
    if let Some(e) = s.final_fidelity_stderr {
        out += &format!(" +/- {e:.6}");
    }
    out += "\n";
    for (k, v) in &s.final_observables {
        out += &format!("  {k} = {v:.6}\n");
    }
    out += &format!("stationarity residual = {:.3e}\nmax leakage = {:.4}\n", s.stationarity_residual, s.max_leakage);
    if let Some(t) = s.time_to_fidelity_095 {
        out += &format!("F first exceeds {FIDELITY_MARK} at t = {t:.1}\n");
    }
    for w in &s.warnings {
        out += &format!("warning: {w}\n");
    }
    out
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub result: RunResult,
}

/// Simulates `cfg` and writes the requested artifacts into `out/<name>/`.
/// With `strict`, validity warnings abort the run before any integration.
pub fn run(cfg: &ExperimentConfig, out: &Path, strict: bool) -> Result<RunReport> {
    if strict {
        preflight_strict(cfg)?;
    }
    let mut result = simulate(cfg)?;
    let dir = out.join(&cfg.name);
    let mut artifacts = Vec::new();
    for o in dedup(&cfg.outputs) {
        match o {
            Output::Csv => match &result.series {
                Some(s) => {
                    let path = dir.join("timeseries.csv");
                    write_atomic(&path, &render_csv(s, &csv_columns(cfg))?)?;
                    artifacts.push(path);
                }
                None => log::info!("{}: steady solver has no time series; skipping csv", cfg.name),
            },
            Output::Json => artifacts.push(dir.join("summary.json")),
            Output::Summary => {
                let path = dir.join("summary.txt");
                write_atomic(&path, text_report(&result.summary).as_bytes())?;
                artifacts.push(path);
            }
        }
    }
    result.summary.artifacts = artifacts.iter().map(|p| p.display().to_string()).collect();
    if cfg.outputs.contains(&Output::Json) {
        let mut text = serde_json::to_string_pretty(&result.summary)?;
        text.push('\n');
        write_atomic(&dir.join("summary.json"), text.as_bytes())?;
    }
    Ok(RunReport { dir, result })
}

fn dedup(outputs: &[Output]) -> Vec<Output> {
    let mut seen = Vec::new();
    for o in outputs {
        if !seen.contains(o) {
            seen.push(*o);
        }
    }
    seen
}

/// Fails with a config error when the parameters violate a validity margin
/// or the resonance condition.
pub fn preflight_strict(cfg: &ExperimentConfig) -> Result<()> {
    let configs = match &cfg.sweep {
        Some(s) => s.values.iter().map(|v| cfg.point(*v)).collect::<Result<Vec<_>>>()?,
        None => vec![cfg.clone()],
    };
    for c in configs {
        let p = &c.params;
        let validity = check_validity(p, DEFAULT_RATIO_THRESHOLD);
        let mut problems: Vec<String> = validity.failures().map(|m| format!("{} = {:.3}", m.name, m.ratio)).collect();
        let res = resonance_condition_check(p, p.photon_occupation, DEFAULT_RESONANCE_TOL)?;
        if !res.within_tolerance {
            problems.push(format!("resonance residual relative {:?}", res.relative));
        }
        if !problems.is_empty() {
            return Err(Error::Config(format!("strict mode: {}: {}", c.name, problems.join("; "))));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Monotonicity {
    pub nonincreasing: bool,
    pub nondecreasing: bool,
    pub strictly_decreasing: bool,
    pub strictly_increasing: bool,
    /// `max − min` of the final fidelity over the axis.
    pub spread: f64,
}

impl Monotonicity {
    /// Flags of `ys` ordered by increasing `xs`.
    pub fn of(xs: &[f64], ys: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite sweep values"));
        let d: Vec<f64> = pairs.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            nonincreasing: d.iter().all(|x| *x <= 0.0),
            nondecreasing: d.iter().all(|x| *x >= 0.0),
            strictly_decreasing: d.iter().all(|x| *x < 0.0),
            strictly_increasing: d.iter().all(|x| *x > 0.0),
            spread: if ys.is_empty() { 0.0 } else { max - min },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub name: String,
    pub final_fidelity: f64,
    pub final_fidelity_stderr: Option<f64>,
    pub stationarity_residual: f64,
    pub max_leakage: f64,
    pub warnings: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub name: String,
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    pub final_fidelity: Monotonicity,
    pub artifacts: Vec<String>,
}

/// Runs every point of the sweep axis (concurrently) and writes
/// `out/<name>/sweep.{json,csv}` plus one run directory per point.
pub fn sweep(cfg: &ExperimentConfig, out: &Path, strict: bool) -> Result<SweepSummary> {
    cfg.validate()?;
    let axis = cfg.sweep.as_ref().ok_or_else(|| Error::Config("config has no sweep axis".into()))?;
    if strict {
        preflight_strict(cfg)?;
    }
    let dir = out.join(&cfg.name);
    let points: Vec<ExperimentConfig> = axis.values.iter().map(|v| cfg.point(*v)).collect::<Result<_>>()?;
    let reports: Vec<Result<RunReport>> = points.par_iter().map(|c| run(c, &dir, false)).collect();
    let mut rows = Vec::with_capacity(reports.len());
    let mut artifacts = Vec::new();
    for (r, v) in reports.into_iter().zip(&axis.values) {
        let r = r?;
        let s = &r.result.summary;
        artifacts.extend(s.artifacts.iter().cloned());
        rows.push(SweepRow {
            value: *v,
            name: s.name.clone(),
            final_fidelity: s.final_fidelity,
            final_fidelity_stderr: s.final_fidelity_stderr,
            stationarity_residual: s.stationarity_residual,
            max_leakage: s.max_leakage,
            warnings: s.warnings.len(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.final_fidelity).collect();
    let csv_path = dir.join("sweep.csv");
    let json_path = dir.join("sweep.json");
    artifacts.push(csv_path.display().to_string());
    artifacts.push(json_path.display().to_string());
    let summary = SweepSummary {
        name: cfg.name.clone(),
        parameter: axis.parameter.clone(),
        final_fidelity: Monotonicity::of(&xs, &ys),
        rows,
        artifacts,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record([axis.parameter.as_str(), "final_F", "stderr_F", "stationarity_residual", "max_leakage"])
        .map_err(io)?;
    for r in &summary.rows {
        w.write_record([
            format_value(r.value),
            format_value(r.final_fidelity),
            format_value(r.final_fidelity_stderr.unwrap_or(f64::NAN)),
            format_value(r.stationarity_residual),
            format_value(r.max_leakage),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    write_atomic(&csv_path, &bytes)?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    write_atomic(&json_path, text.as_bytes())?;
    Ok(summary)
}

/// Output directory from the environment, falling back to [`DEFAULT_OUT_DIR`].
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset_config;

    fn short(name: &str) -> ExperimentConfig {
        ExperimentConfig { t_end: 50.0, n_samples: 11, n_traj: 4, ..preset_config(name).unwrap() }
    }

    #[test]
    fn csv_column_contract() {
        let c = short("fig4a");
        let cols = csv_columns(&c);
        assert_eq!(
            cols,
            [
                "F", "P00", "P11", "PT", "PS", "n_c", "stderr_F", "stderr_P00", "stderr_P11", "stderr_PT", "stderr_PS",
                "stderr_n_c"
            ]
        );
        let full = ExperimentConfig { tier: Tier::FullRotated, ..short("fig4a-me") };
        assert_eq!(csv_columns(&full), ["F", "P00", "P11", "PT", "PS", "n_c", "n_c1", "n_c2"]);
    }

    #[test]
    fn csv_rows_have_fixed_precision() {
        let c = short("fig4a-me");
        let r = simulate(&c).unwrap();
        let text = String::from_utf8(render_csv(r.series.as_ref().unwrap(), &csv_columns(&c)).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,F,P00,P11,PT,PS,n_c");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0.0000000000000000e0");
        assert_eq!(first[2], "1.0000000000000000e0");
        assert_eq!(text.lines().count(), 12);
    }

    #[test]
    fn steady_collective_reports_target_populations() {
        let r = simulate(&preset_config("steady-collective").unwrap()).unwrap();
        let s = r.summary.steady.unwrap();
        assert!(s.unique);
        assert!((s.populations.p11 - 1.0 / 3.0).abs() < 1e-9);
        assert!((s.populations.ps - 2.0 / 3.0).abs() < 1e-9);
        assert!(r.summary.final_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn field_matrix_and_collective_runs() {
        {
            let name = "field-matrix";
            let r = simulate(&short(name)).unwrap();
            assert!(r.summary.final_observables.contains_key("n_c"));
        }
        let c = ExperimentConfig { tier: Tier::CollectiveHd, ..short("fig4a-me") };
        let r = simulate(&c).unwrap();
        assert_eq!(r.summary.max_leakage, 0.0);
    }

    #[test]
    fn mixed_initial_state_has_unit_trace() {
        let c = ExperimentConfig { initial_state: InitialState::MixedIdentity, tier: Tier::EffectiveRaman, ..short("fig4a-me") };
        let r = simulate(&c).unwrap();
        let s = r.series.unwrap();
        let p: f64 = ["P00", "P11", "PT", "PS"].iter().map(|k| s.get(k).unwrap()[0]).sum();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((s.get("PS").unwrap()[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_flags() {
        let m = Monotonicity::of(&[0.02, 0.0, 0.01], &[0.5, 0.9, 0.7]);
        assert!(m.strictly_decreasing && m.nonincreasing && !m.nondecreasing);
        assert!((m.spread - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sweep_writes_rows_in_axis_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = short("kappa-f-sweep");
        c.tier = Tier::EffectiveRaman;
        let s = sweep(&c, dir.path(), false).unwrap();
        assert_eq!(s.rows.iter().map(|r| r.value).collect::<Vec<_>>(), [0.0, 0.5, 1.0]);
        assert!(dir.path().join("kappa-f-sweep/sweep.csv").exists());
        assert!(s.final_fidelity.spread < 1e-12);
    }

    #[test]
    fn run_rejects_sweep_configs() {
        assert!(matches!(simulate(&short("fig5")), Err(Error::Config(_))));
    }
}
