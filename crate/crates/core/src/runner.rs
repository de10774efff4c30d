//! Batch front end: flat TOML scenario files, the five subcommands and
//! deterministic CSV / text reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::criticality::{self, classify, compute_exponents, DataTraits, Extended, Regime};
use crate::diagnostics::{
    self, cui_bound_check, exterior_energy_with, fit_decay, gagliardo_ratio, log_spaced, weak_residual,
    weighted_energy, TestFunctionParams,
};
use crate::error::{Error, Result};
use crate::frac_ops::{
    adjoint_pairing, cutoff_deriv_closed_form, inversion_residual, rl_deriv_right, CutoffProfile, FracOrder,
    TimeGrid, TimeSeries,
};
use crate::spectral::{k0_hat, k1_hat, Fourier, SpatialGrid};
use crate::stepper::{self, DataShape, RunStatus, ScenarioConfig, SolutionHistory};

pub const SCHEMA: &str = "memwave-report/1";
pub const MAX_ROWS: usize = 5000;
pub const DEFAULT_OUTPUT_DIR: &str = "memwave-out";
pub const DEFAULT_EXPONENT_GAMMAS: [f64; 5] = [0.6, 0.7, 0.8, 0.9, 0.99];
/// Amplitudes at or below this count as small data unless overridden.
pub const SMALL_DATA_AMPLITUDE: f64 = 0.1;
/// Light-cone growth allowance: the box must hold `B(K + 1.1 t_end)`.
pub const WRAP_MARGIN: f64 = 1.1;

const KEYS: [&str; 20] = [
    "n",
    "gamma",
    "p",
    "K",
    "amplitude",
    "data_shape",
    "box_half_length",
    "points_per_dim",
    "dt",
    "t_end",
    "blowup_threshold",
    "delta",
    "output_dir",
    "linear",
    "small_data",
    "sweep_p",
    "sweep_gamma",
    "sweep_amplitude",
    "exponent_gammas",
    "fit_window",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Classify,
    Sweep,
    Verify,
    Exponents,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Classify => "classify",
            Subcommand::Sweep => "sweep",
            Subcommand::Verify => "verify",
            Subcommand::Exponents => "exponents",
        }
    }
}

/// Axes of a sweep; `None` means the scenario's own value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepAxes {
    pub p: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub amplitude: Option<Vec<f64>>,
}

impl SweepAxes {
    pub fn is_set(&self) -> bool {
        self.p.is_some() || self.gamma.is_some() || self.amplitude.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub scenario: ScenarioConfig,
    pub n: u32,
    pub delta: f64,
    pub small_data: bool,
    pub fit_window: Option<(f64, f64)>,
    pub output_dir: PathBuf,
    pub subcommand: Subcommand,
    pub sweep: SweepAxes,
    pub exponent_gammas: Vec<f64>,
    pub full_resolution: bool,
    pub workers: usize,
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn get_f64(table: &toml::Table, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(x)) => Ok(Some(*x)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(config_err(key, format!("expected a number, found {}", other.type_str()))),
    }
}

fn require_f64(table: &toml::Table, key: &str) -> Result<f64> {
    get_f64(table, key)?.ok_or_else(|| config_err(key, "missing required key"))
}

fn get_int(table: &toml::Table, key: &str) -> Result<Option<i64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) => Ok(Some(*i)),
        Some(other) => Err(config_err(key, format!("expected an integer, found {}", other.type_str()))),
    }
}

fn get_bool(table: &toml::Table, key: &str) -> Result<Option<bool>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
        Some(other) => Err(config_err(key, format!("expected a boolean, found {}", other.type_str()))),
    }
}

fn get_list(table: &toml::Table, key: &str) -> Result<Option<Vec<f64>>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                toml::Value::Float(x) => Ok(*x),
                toml::Value::Integer(i) => Ok(*i as f64),
                other => Err(config_err(key, format!("list entries must be numbers, found {}", other.type_str()))),
            })
            .collect::<Result<Vec<f64>>>()
            .map(Some),
        Some(other) => Err(config_err(key, format!("expected a list, found {}", other.type_str()))),
    }
}

/// Parses and validates a scenario document.
///
/// Required keys: `n`, `gamma`, `p`, `K`, `box_half_length`,
/// `points_per_dim`, `t_end`. Defaults: `amplitude = 1`,
/// `data_shape = "gaussian_bump"`, `dt = min(0.25, dx/2)`,
/// `blowup_threshold = 1e6`, `delta = 0.1`, `output_dir = "memwave-out"`.
pub fn parse_config(text: &str, subcommand: Subcommand) -> Result<RunManifest> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| config_err("<document>", e.message().to_string()))?;
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(key, "unknown key"));
        }
    }
    let n = get_int(&table, "n")?.ok_or_else(|| config_err("n", "missing required key"))?;
    if !(1..=3).contains(&n) {
        return Err(Error::Validation(format!("n must be 1, 2 or 3, got {n}")));
    }
    let gamma = require_f64(&table, "gamma")?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Validation("gamma must lie in (0,1)".into()));
    }
    let p = require_f64(&table, "p")?;
    let k = require_f64(&table, "K")?;
    let half_length = require_f64(&table, "box_half_length")?;
    let points = get_int(&table, "points_per_dim")?.ok_or_else(|| config_err("points_per_dim", "missing required key"))?;
    let t_end = require_f64(&table, "t_end")?;
    if points < 2 {
        return Err(Error::Validation("points_per_dim must be at least 2".into()));
    }
    let grid = SpatialGrid::new(n as usize, half_length, points as usize)
        .map_err(|e| Error::Validation(e.to_string()))?;
    if k >= half_length {
        return Err(Error::Validation(format!(
            "support containment: K = {k} must be smaller than box_half_length = {half_length}"
        )));
    }
    // The cone B(t+K) must not wrap around the periodic box before t_end.
    let reach = k + WRAP_MARGIN * t_end;
    if half_length < reach {
        return Err(Error::Validation(format!(
            "support containment: box_half_length = {half_length} is below K + {WRAP_MARGIN} t_end = {reach}"
        )));
    }
    let data_shape = match table.get("data_shape") {
        None => DataShape::GaussianBump,
        Some(toml::Value::String(s)) => match s.as_str() {
            "gaussian_bump" => DataShape::GaussianBump,
            "plateau" => DataShape::Plateau,
            other => {
                return Err(config_err(
                    "data_shape",
                    format!("unknown preset `{other}`; expected gaussian_bump or plateau"),
                ))
            }
        },
        Some(other) => return Err(config_err("data_shape", format!("expected a string, found {}", other.type_str()))),
    };
    let amplitude = get_f64(&table, "amplitude")?.unwrap_or(1.0);
    let scenario = ScenarioConfig {
        gamma,
        p,
        support_radius: k,
        amplitude,
        data_shape,
        grid,
        dt: get_f64(&table, "dt")?.unwrap_or_else(|| stepper::default_dt(&grid)),
        t_end,
        blowup_threshold: get_f64(&table, "blowup_threshold")?.unwrap_or(stepper::DEFAULT_BLOWUP_THRESHOLD),
        nonlinear: !get_bool(&table, "linear")?.unwrap_or(false),
    };
    scenario.validate()?;
    let delta = get_f64(&table, "delta")?.unwrap_or(diagnostics::DEFAULT_DELTA);
    if !(delta > 0.0) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    let output_dir = match table.get("output_dir") {
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
        Some(toml::Value::String(s)) => PathBuf::from(s),
        Some(other) => return Err(config_err("output_dir", format!("expected a string, found {}", other.type_str()))),
    };
    let fit_window = match get_list(&table, "fit_window")? {
        None => None,
        Some(w) if w.len() == 2 && w[0] < w[1] => Some((w[0], w[1])),
        Some(_) => return Err(config_err("fit_window", "expected [t_lo, t_hi] with t_lo < t_hi")),
    };
    let sweep = SweepAxes {
        p: get_list(&table, "sweep_p")?,
        gamma: get_list(&table, "sweep_gamma")?,
        amplitude: get_list(&table, "sweep_amplitude")?,
    };
    if subcommand == Subcommand::Sweep && !sweep.is_set() {
        return Err(Error::Validation(
            "sweep needs at least one of sweep_p, sweep_gamma, sweep_amplitude".into(),
        ));
    }
    for g in sweep.gamma.iter().flatten() {
        if !(*g > 0.0 && *g < 1.0) {
            return Err(Error::Validation("gamma must lie in (0,1)".into()));
        }
    }
    for q in sweep.p.iter().flatten() {
        if !(*q > 1.0) {
            return Err(Error::Validation(format!("sweep_p entries must exceed 1, got {q}")));
        }
    }
    let exponent_gammas = get_list(&table, "exponent_gammas")?.unwrap_or_else(|| DEFAULT_EXPONENT_GAMMAS.to_vec());
    Ok(RunManifest {
        small_data: get_bool(&table, "small_data")?.unwrap_or(amplitude.abs() <= SMALL_DATA_AMPLITUDE),
        scenario,
        n: n as u32,
        delta,
        fit_window,
        output_dir,
        subcommand,
        sweep,
        exponent_gammas,
        full_resolution: false,
        workers: 1,
    })
}

/// One CSV file of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryReport {
    pub schema: &'static str,
    pub subcommand: Subcommand,
    pub tables: Vec<Table>,
    pub text: String,
    /// Verification rows that did not pass.
    pub failures: usize,
}

impl SummaryReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn ext(x: Extended) -> String {
    match x {
        Extended::Finite(v) => num(v),
        Extended::Infinite => "inf".into(),
    }
}

fn traits_of(manifest: &RunManifest, config: &ScenarioConfig) -> DataTraits {
    let positive_mean = match &config.data_shape {
        DataShape::GaussianBump | DataShape::Plateau => config.amplitude > 0.0,
        DataShape::Custom { u0, u1 } => u0.iter().sum::<f64>() > 0.0 && u1.iter().sum::<f64>() > 0.0,
    };
    DataTraits {
        positive_mean,
        small_data: manifest.small_data,
        compact_support: true,
    }
}

const SUMMARY_HEADER: [&str; 18] = [
    "schema",
    "run_id",
    "n",
    "gamma",
    "p",
    "amplitude",
    "K",
    "dt",
    "t_end",
    "status",
    "t_detect",
    "final_t",
    "decay_exponent",
    "decay_r2",
    "sup_W_over_W1",
    "predicted",
    "flag",
    "reason",
];

const TIMESERIES_HEADER: [&str; 8] = [
    "t",
    "l2_u",
    "h1_u",
    "l2_du",
    "W",
    "exterior_energy",
    "forcing_l2",
    "exterior_mass",
];

struct RunOutcome {
    summary: Vec<String>,
    timeseries: Table,
    long: Vec<Vec<String>>,
}

fn simulate_one(manifest: &RunManifest, config: &ScenarioConfig, run_id: &str) -> Result<RunOutcome> {
    let history = stepper::run(config)?;
    let n = manifest.n as usize;
    let fourier = Fourier::new(config.grid);
    let total = history.records.len();
    let stride = if manifest.full_resolution || total <= MAX_ROWS {
        1
    } else {
        total.div_ceil(MAX_ROWS)
    };
    let mut timeseries = Table::new(format!("{run_id}_timeseries"), &TIMESERIES_HEADER);
    let mut long = Vec::new();
    let mut picked: Vec<usize> = (0..total).step_by(stride).collect();
    if picked.last() != Some(&(total - 1)) {
        picked.push(total - 1);
    }
    for &m in &picked {
        let r = &history.records[m];
        let w = weighted_energy(r.t, r.l2_du, n, config.gamma)?;
        let e = exterior_energy_with(&fourier, &history.states[m], manifest.delta)?;
        let values = [r.t, r.l2_u, r.h1_u, r.l2_du, w, e.value, r.forcing_l2, r.exterior_mass];
        timeseries.push(values.iter().map(|v| num(*v)).collect());
        for (name, v) in TIMESERIES_HEADER.iter().zip(values).skip(1) {
            long.push(vec![run_id.to_string(), num(r.t), name.to_string(), num(v)]);
        }
    }
    let summary = summary_row(manifest, config, run_id, &history)?;
    Ok(RunOutcome {
        summary,
        timeseries,
        long,
    })
}

fn summary_row(manifest: &RunManifest, config: &ScenarioConfig, run_id: &str, history: &SolutionHistory) -> Result<Vec<String>> {
    let n = manifest.n as usize;
    let final_t = history.final_state().time;
    let window = manifest
        .fit_window
        .unwrap_or((final_t / 10f64.sqrt(), final_t));
    let fit = if history.status == RunStatus::Completed {
        fit_decay(&history.series(|r| r.l2_du), window).ok()
    } else {
        None
    };
    let w: Vec<f64> = history
        .records
        .iter()
        .map(|r| weighted_energy(r.t, r.l2_du, n, config.gamma))
        .collect::<Result<_>>()?;
    let w1_index = ((1.0 / config.dt).round() as usize).min(w.len() - 1);
    let sup_ratio = w.iter().cloned().fold(0.0, f64::max) / w[w1_index];
    let (predicted, flag) = if config.nonlinear {
        let verdict = classify(manifest.n, config.gamma, config.p, traits_of(manifest, config));
        let flag = if verdict.tag == Regime::BlowUpPositiveData && history.status == RunStatus::Completed {
            "horizon too short"
        } else {
            ""
        };
        (verdict.tag.as_str(), flag)
    } else {
        ("linear", "")
    };
    let (t_detect, reason) = match &history.status {
        RunStatus::BlowUpDetected { t_detect } => (num(*t_detect), String::new()),
        RunStatus::NumericalFailure { t, reason } => (String::new(), format!("{reason} at t={t}")),
        _ => (String::new(), String::new()),
    };
    Ok(vec![
        SCHEMA.into(),
        run_id.into(),
        manifest.n.to_string(),
        num(config.gamma),
        num(config.p),
        num(config.amplitude),
        num(config.support_radius),
        num(config.dt),
        num(config.t_end),
        history.status.label().into(),
        t_detect,
        num(final_t),
        fit.map(|f| num(f.exponent)).unwrap_or_default(),
        fit.map(|f| num(f.r_squared)).unwrap_or_default(),
        num(sup_ratio),
        predicted.into(),
        flag.into(),
        reason,
    ])
}

fn summary_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = header
            .iter()
            .zip(row)
            .filter(|(_, v)| !v.is_empty())
            .map(|(h, v)| format!("{h}={v}"))
            .collect();
        let _ = writeln!(out, "{}", fields.join(" "));
    }
    out
}

fn simulate(manifest: &RunManifest) -> Result<SummaryReport> {
    let outcome = simulate_one(manifest, &manifest.scenario, "run")?;
    let mut summary = Table::new("summary", &SUMMARY_HEADER);
    summary.push(outcome.summary);
    let mut long = Table::new("long", &["run_id", "t", "quantity", "value"]);
    long.rows = outcome.long;
    let mut timeseries = outcome.timeseries;
    timeseries.name = "timeseries".into();
    let text = format!("schema {SCHEMA}\nsimulate\n{}", summary_text(&summary.header, &summary.rows));
    Ok(SummaryReport {
        schema: SCHEMA,
        subcommand: Subcommand::Simulate,
        tables: vec![summary, timeseries, long],
        text,
        failures: 0,
    })
}

fn classify_report(manifest: &RunManifest) -> Result<SummaryReport> {
    let config = &manifest.scenario;
    let traits = traits_of(manifest, config);
    let verdict = classify(manifest.n, config.gamma, config.p, traits);
    let mut table = Table::new(
        "summary",
        &["schema", "n", "gamma", "p", "positive_mean", "small_data", "compact_support", "tag", "citation", "notes"],
    );
    table.push(vec![
        SCHEMA.into(),
        manifest.n.to_string(),
        num(config.gamma),
        num(config.p),
        traits.positive_mean.to_string(),
        traits.small_data.to_string(),
        traits.compact_support.to_string(),
        verdict.tag.as_str().into(),
        format!("\"{}\"", verdict.citation),
        format!("\"{}\"", verdict.notes),
    ]);
    let text = format!(
        "schema {SCHEMA}\nclassify n={} gamma={} p={}\nverdict {}\ncitation {}\nnotes {}\n",
        manifest.n, config.gamma, config.p, verdict.tag, verdict.citation, verdict.notes
    );
    Ok(SummaryReport {
        schema: SCHEMA,
        subcommand: Subcommand::Classify,
        tables: vec![table],
        text,
        failures: 0,
    })
}

/// Cartesian product of the sweep axes in `p`, `gamma`, `amplitude` order.
pub fn sweep_entries(manifest: &RunManifest) -> Vec<ScenarioConfig> {
    let base = &manifest.scenario;
    let ps = manifest.sweep.p.clone().unwrap_or_else(|| vec![base.p]);
    let gs = manifest.sweep.gamma.clone().unwrap_or_else(|| vec![base.gamma]);
    let amps = manifest.sweep.amplitude.clone().unwrap_or_else(|| vec![base.amplitude]);
    let mut out = Vec::new();
    for &p in &ps {
        for &gamma in &gs {
            for &amplitude in &amps {
                out.push(ScenarioConfig {
                    p,
                    gamma,
                    amplitude,
                    ..base.clone()
                });
            }
        }
    }
    out
}

fn sweep(manifest: &RunManifest) -> Result<SummaryReport> {
    let entries = sweep_entries(manifest);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.workers.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<RunOutcome>> = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, config)| simulate_one(manifest, config, &format!("entry_{i:04}")))
            .collect()
    });
    let mut summary = Table::new("summary", &SUMMARY_HEADER);
    let mut long = Table::new("long", &["run_id", "t", "quantity", "value"]);
    let mut regime = Table::new(
        "regime_map",
        &["run_id", "n", "gamma", "p", "amplitude", "predicted", "observed", "t_detect", "flag"],
    );
    let mut tables = Vec::new();
    for outcome in outcomes {
        let outcome = outcome?;
        let s = &outcome.summary;
        let col = |name: &str| s[SUMMARY_HEADER.iter().position(|h| *h == name).expect("known column")].clone();
        regime.push(vec![
            col("run_id"),
            col("n"),
            col("gamma"),
            col("p"),
            col("amplitude"),
            col("predicted"),
            col("status"),
            col("t_detect"),
            col("flag"),
        ]);
        summary.push(outcome.summary);
        long.rows.extend(outcome.long);
        tables.push(outcome.timeseries);
    }
    let text = format!(
        "schema {SCHEMA}\nsweep entries={}\n{}",
        summary.rows.len(),
        summary_text(&summary.header, &summary.rows)
    );
    let mut all = vec![summary, regime, long];
    all.extend(tables);
    Ok(SummaryReport {
        schema: SCHEMA,
        subcommand: Subcommand::Sweep,
        tables: all,
        text,
        failures: 0,
    })
}

fn exponents_report(manifest: Option<&RunManifest>) -> Result<SummaryReport> {
    let dims: Vec<u32> = match manifest {
        Some(m) => vec![m.n],
        None => vec![1, 2, 3],
    };
    let gammas = manifest
        .map(|m| m.exponent_gammas.clone())
        .unwrap_or_else(|| DEFAULT_EXPONENT_GAMMAS.to_vec());
    let mut table = Table::new(
        "exponents",
        &["n", "gamma", "p_c", "p_gamma", "p_1", "p_2", "p_3", "sobolev_cap", "inv_gamma"],
    );
    for &n in &dims {
        for &g in &gammas {
            let e = compute_exponents(n, g)?;
            table.push(vec![
                n.to_string(),
                num(g),
                num(e.p_c),
                ext(e.p_gamma),
                ext(e.p_1),
                ext(e.p_2),
                ext(e.p_3),
                ext(e.sobolev_cap),
                num(e.inv_gamma()),
            ]);
        }
    }
    let mut limits = Table::new("gamma_limits", &["n", "k", "gamma", "p_gamma_gap", "p_1_gap", "p_2_gap", "p_3_gap"]);
    for &n in &dims {
        for row in criticality::gamma_limits(n)?.rows {
            limits.push(vec![
                n.to_string(),
                row.k.to_string(),
                num(row.gamma),
                num(row.p_gamma_gap),
                num(row.p_1_gap),
                row.p_2_gap.map(num).unwrap_or_default(),
                row.p_3_gap.map(num).unwrap_or_default(),
            ]);
        }
    }
    let text = format!(
        "schema {SCHEMA}\nexponents\n{}",
        summary_text(&table.header, &table.rows)
    );
    Ok(SummaryReport {
        schema: SCHEMA,
        subcommand: Subcommand::Exponents,
        tables: vec![table, limits],
        text,
        failures: 0,
    })
}

/// Suites every `verify` report must contain.
pub const VERIFY_SUITES: [&str; 5] = ["frac_ops", "symbols", "cui", "gagliardo", "weak_residual"];

struct Checks {
    table: Table,
}

impl Checks {
    fn new() -> Self {
        Checks {
            table: Table::new("verify", &["suite", "case", "value", "threshold", "pass"]),
        }
    }

    fn add(&mut self, suite: &str, case: String, value: f64, threshold: f64, pass: bool) {
        self.table.push(vec![suite.into(), case, num(value), num(threshold), pass.to_string()]);
    }
}

fn verify_frac_ops(checks: &mut Checks) -> Result<()> {
    let half = FracOrder::new(0.5)?;
    let grid = TimeGrid::spanning(1.0, 512)?;
    let g = TimeSeries::from_fn(grid, f64::sin);
    let sup = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = inversion_residual(&g, half)? / sup;
    checks.add("frac_ops", "inversion sin dt=1/512".into(), rel, 0.02, rel <= 0.02);

    let f = TimeSeries::from_fn(grid, |t| t);
    let w = CutoffProfile::new(CutoffProfile::DEFAULT_SIGMA, 1.0)?.sample(grid);
    let pairing = adjoint_pairing(&f, &w, half)?;
    let rel = pairing.residual() / pairing.scale();
    checks.add("frac_ops", "adjoint (t, w1) dt=1/512".into(), rel, 0.01, rel <= 0.01);

    let fine = TimeGrid::spanning(1.0, 1024)?;
    for sigma in [5.0, 7.0, 9.0] {
        for alpha in [0.25, 0.5, 0.75] {
            for k in 0..3 {
                let order = FracOrder::new(alpha)?;
                let profile = CutoffProfile::new(sigma, 1.0)?;
                let numeric = rl_deriv_right(&profile.sample(fine), order, k)?;
                let mut err = 0.0f64;
                let mut scale = 0.0f64;
                for (m, t) in fine.nodes().enumerate() {
                    let exact = cutoff_deriv_closed_form(&profile, order, k, t)?;
                    err = err.max((numeric.values()[m] - exact).abs());
                    scale = scale.max(exact.abs());
                }
                let rel = err / scale;
                checks.add(
                    "frac_ops",
                    format!("closed form sigma={sigma} alpha={alpha} k={k}"),
                    rel,
                    0.01,
                    rel <= 0.01,
                );
            }
        }
    }
    Ok(())
}

fn verify_symbols(checks: &mut Checks) -> Result<()> {
    for t in [0.5, 2.0, 10.0, 100.0] {
        let below = (k0_hat(t, 0.25 - 1e-14)?, k1_hat(t, 0.25 - 1e-14)?);
        let above = (k0_hat(t, 0.25 + 1e-14)?, k1_hat(t, 0.25 + 1e-14)?);
        let gap = ((below.0 - above.0).abs() / below.0.abs()).max((below.1 - above.1).abs() / below.1.abs());
        checks.add("symbols", format!("continuity |xi|=1/2 t={t}"), gap, 1e-6, gap <= 1e-6);
    }
    for t in [0.5, 2.0, 10.0] {
        let k1 = k1_hat(t, 0.0)?;
        let want = 1.0 - (-t).exp();
        let err = (k1 - want).abs();
        checks.add("symbols", format!("k1 zero mode t={t}"), err, 1e-13, err <= 1e-13);
    }
    Ok(())
}

/// Parameter triples of the convolution estimate, three per case.
pub const CUI_TRIPLES: [(f64, f64, f64); 9] = [
    (0.5, 1.0, 2.0),
    (0.2, 1.5, 0.5),
    (0.0, 2.0, 2.0),
    (0.5, 0.5, 1.0),
    (0.3, 0.7, 0.5),
    (0.0, 0.5, 1.0),
    (0.2, 0.1, 0.3),
    (0.5, 0.2, 0.6),
    (0.0, 0.5, 0.5),
];

fn verify_cui(checks: &mut Checks) -> Result<()> {
    let ts = log_spaced(1.0, 1e4, 40);
    for (theta, a, b) in CUI_TRIPLES {
        let report = cui_bound_check(theta, a, b, &ts)?;
        let ok = report.sup_ratio.is_finite() && report.trend_is_bounded();
        checks.add(
            "cui",
            format!("{} theta={theta} a={a} b={b}", report.case.label()),
            report.sup_ratio,
            f64::INFINITY,
            ok,
        );
    }
    Ok(())
}

fn verify_gagliardo(checks: &mut Checks) -> Result<()> {
    let grid = SpatialGrid::new(1, 128.0, 4096)?;
    let k = 2.0;
    for (q, sigma) in [(2.0, 1.0), (4.0, 0.5)] {
        let mut ratios = Vec::new();
        for t in [1.0, 10.0, 100.0] {
            let centre = 0.5 * t;
            let u = grid.sample(|x| {
                let s = (x[0] - centre).abs();
                if s < 1.0 {
                    (1.0 - s * s).powi(4)
                } else {
                    0.0
                }
            });
            ratios.push(gagliardo_ratio(&grid, &u, t, q, sigma, k)?);
        }
        let sup = ratios.iter().cloned().fold(0.0, f64::max);
        let ok = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
        checks.add("gagliardo", format!("translated bump q={q} sigma={sigma}"), sup, f64::INFINITY, ok);
    }
    Ok(())
}

/// Weak-form residual at `(N, dt)` and `(2N, dt/2)` for a small-data run.
pub fn weak_refinement_pair() -> Result<(f64, f64)> {
    let mut out = [0.0; 2];
    for (slot, (points, dt)) in out.iter_mut().zip([(256usize, 0.1), (512, 0.05)]) {
        let grid = SpatialGrid::new(1, 32.0, points)?;
        let mut config = ScenarioConfig::new(grid, 0.9, 4.5, 4.0, 4.5)?;
        config.dt = dt;
        config.amplitude = 0.5;
        let history = stepper::run(&config)?;
        let params = TestFunctionParams::new(4.5, 0.9, 6.0, 4.0)?;
        *slot = weak_residual(&history, &params, 4.5, 0.9)?.residual;
    }
    Ok((out[0], out[1]))
}

fn verify_weak(checks: &mut Checks) -> Result<()> {
    let (coarse, fine) = weak_refinement_pair()?;
    let factor = coarse / fine;
    checks.add("weak_residual", "refinement factor".into(), factor, 1.5, factor >= 1.5);
    Ok(())
}

fn verify() -> Result<SummaryReport> {
    let mut checks = Checks::new();
    verify_frac_ops(&mut checks)?;
    verify_symbols(&mut checks)?;
    verify_cui(&mut checks)?;
    verify_gagliardo(&mut checks)?;
    verify_weak(&mut checks)?;
    let present: BTreeSet<&str> = checks.table.rows.iter().map(|r| r[0].as_str()).collect();
    let missing: Vec<&str> = VERIFY_SUITES.iter().copied().filter(|s| !present.contains(s)).collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!("verify suites missing: {}", missing.join(", "))));
    }
    let failures = checks.table.rows.iter().filter(|r| r[4] != "true").count();
    let mut text = format!("schema {SCHEMA}\nverify rows={} failures={failures}\n", checks.table.rows.len());
    for row in &checks.table.rows {
        let _ = writeln!(
            text,
            "{} {:<5} {} value={}",
            row[0],
            if row[4] == "true" { "PASS" } else { "FAIL" },
            row[1],
            row[2]
        );
    }
    Ok(SummaryReport {
        schema: SCHEMA,
        subcommand: Subcommand::Verify,
        tables: vec![checks.table],
        text,
        failures,
    })
}

/// Runs a subcommand. `verify` and `exponents` accept a missing manifest.
pub fn run_subcommand(subcommand: Subcommand, manifest: Option<&RunManifest>) -> Result<SummaryReport> {
    let need = || manifest.ok_or_else(|| Error::Validation(format!("`{}` needs --config", subcommand.name())));
    match subcommand {
        Subcommand::Simulate => simulate(need()?),
        Subcommand::Classify => classify_report(need()?),
        Subcommand::Sweep => sweep(need()?),
        Subcommand::Verify => verify(),
        Subcommand::Exponents => exponents_report(manifest),
    }
}

/// Writes every table as `<name>.csv` and the text summary as
/// `summary.txt` under `dir`.
pub fn emit_report(report: &SummaryReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for table in &report.tables {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, table.to_csv()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("summary.txt");
    fs::write(&path, &report.text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Reads a config file and parses it for `subcommand`.
pub fn load_manifest(path: &Path, subcommand: Subcommand) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, subcommand)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "n = 1\ngamma = 0.9\np = 2.0\nK = 4.0\nbox_half_length = 32.0\npoints_per_dim = 128\nt_end = 2.0\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let m = parse_config(MINIMAL, Subcommand::Simulate).unwrap();
        assert_eq!(m.scenario.amplitude, 1.0);
        assert_eq!(m.scenario.data_shape, DataShape::GaussianBump);
        assert_eq!(m.scenario.dt, 0.25);
        assert_eq!(m.scenario.blowup_threshold, 1e6);
        assert_eq!(m.delta, 0.1);
        assert_eq!(m.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
        assert!(m.scenario.nonlinear);
    }

    #[test]
    fn gamma_out_of_range_is_rejected() {
        let text = MINIMAL.replace("gamma = 0.9", "gamma = 1.2");
        match parse_config(&text, Subcommand::Simulate) {
            Err(Error::Validation(msg)) => assert_eq!(msg, "gamma must lie in (0,1)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cone_must_not_wrap_before_t_end() {
        let text = MINIMAL.replace("t_end = 2.0", "t_end = 30.0");
        match parse_config(&text, Subcommand::Simulate) {
            Err(Error::Validation(msg)) => assert!(msg.contains("support containment")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn support_must_fit_in_box() {
        let text = MINIMAL.replace("K = 4.0", "K = 32.0");
        match parse_config(&text, Subcommand::Simulate) {
            Err(Error::Validation(msg)) => assert!(msg.contains("support containment")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys_are_named() {
        let text = format!("{MINIMAL}colour = 3\n");
        match parse_config(&text, Subcommand::Simulate) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "colour"),
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("p = 2.0\n", "");
        match parse_config(&text, Subcommand::Simulate) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "p"),
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("p = 2.0", "p = \"two\"");
        assert!(matches!(parse_config(&text, Subcommand::Simulate), Err(Error::Config { .. })));
    }

    #[test]
    fn sweep_requires_an_axis() {
        assert!(parse_config(MINIMAL, Subcommand::Sweep).is_err());
        let text = format!("{MINIMAL}sweep_p = [2.0, 3.0]\nsweep_amplitude = [1.0, 2.0]\n");
        let m = parse_config(&text, Subcommand::Sweep).unwrap();
        let entries = sweep_entries(&m);
        assert_eq!(entries.len(), 4);
        assert_eq!((entries[1].p, entries[1].amplitude), (2.0, 2.0));
    }

    #[test]
    fn empty_sweep_gives_header_only() {
        let text = format!("{MINIMAL}sweep_p = []\n");
        let m = parse_config(&text, Subcommand::Sweep).unwrap();
        let report = run_subcommand(Subcommand::Sweep, Some(&m)).unwrap();
        let summary = report.table("summary").unwrap();
        assert!(summary.rows.is_empty());
        assert_eq!(summary.to_csv().lines().count(), 1);
    }

    #[test]
    fn classify_row() {
        let m = parse_config(MINIMAL, Subcommand::Classify).unwrap();
        let report = run_subcommand(Subcommand::Classify, Some(&m)).unwrap();
        let t = report.table("summary").unwrap();
        assert_eq!(t.rows[0][t.column("tag").unwrap()], "BlowUpPositiveData");
    }

    #[test]
    fn exponent_table_uses_infinity_marker() {
        let text = MINIMAL.to_string() + "exponent_gammas = [0.5, 0.9]\n";
        let m = parse_config(&text, Subcommand::Exponents).unwrap();
        let report = run_subcommand(Subcommand::Exponents, Some(&m)).unwrap();
        let t = report.table("exponents").unwrap();
        assert_eq!(t.rows[0][t.column("p_gamma").unwrap()], "inf");
        assert_eq!(t.rows[1][t.column("p_gamma").unwrap()], "3.75");
    }
}
