//! Scenario runner and serialization boundary: parse a flat `key = value`
//! config, execute the named experiment, and emit CSV series, density
//! snapshots, and a JSON report into the output directory.
//!
//! CSV is the primary output and is byte-identical for a fixed config and
//! seed: 17 significant digits, '.' decimal separator, '\n' line endings.
//! `--format json` additionally mirrors the series as `series.json` with a
//! metadata object.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dispersion::{
    check_in_domain, coherent_state, group_velocity, hessian, hessian_eigenvalues_3d, omega,
    CoherentStateParams, DispersionModel,
};
use crate::error::Error;
use crate::numerics::{make_grid, Grid};
use crate::qcurve::{
    classify, make_decreasing_from_coherent, sample_entropy_series, EntropySeries, Propagator,
    QCurve, QCurveState,
};
use crate::transitions::{
    oscillation_period, oscillator_basis, transition_probability, two_level_spectrum,
    MultiLevelSystem, TwoLevelSystem,
};
use crate::twoparticle::{collision_scenario, CollisionParams, Snapshot, Statistics};

/// The experiments the binary knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Coherent,
    Decreasing,
    DispersionTable,
    TwoState,
    MultiState,
    Collide,
    Classify,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Coherent => "coherent",
            Scenario::Decreasing => "decreasing",
            Scenario::DispersionTable => "dispersion-table",
            Scenario::TwoState => "two-state",
            Scenario::MultiState => "multi-state",
            Scenario::Collide => "collide",
            Scenario::Classify => "classify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Failure modes of a run, split by exit code: config errors exit 1,
/// everything that goes wrong after a valid config exits 2.
#[derive(Debug)]
pub enum RunError {
    Config(Vec<String>),
    Runtime(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Runtime(_) | RunError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msgs) => {
                writeln!(f, "config error:")?;
                for m in msgs {
                    writeln!(f, "  - {m}")?;
                }
                Ok(())
            }
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Runtime(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Classification summary included in the report when the run produced an
/// entropy series.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub label: String,
    pub eps: f64,
    pub n_samples: usize,
    pub first: f64,
    pub last: f64,
    pub min: f64,
    pub max: f64,
}

/// Run report: echoes the resolved config (including defaults) so the run
/// can be reproduced exactly, plus derived quantities and provenance notes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, f64>,
    pub runtime_seconds: f64,
}

// ---------------------------------------------------------------------------
// config parsing

/// Flat `key = value` document with `#` comments. Reads are tracked so
/// unknown keys can be rejected; violations accumulate instead of failing
/// on the first.
struct Config {
    entries: BTreeMap<String, String>,
    used: BTreeSet<String>,
    errors: Vec<String>,
    echo: BTreeMap<String, String>,
    notes: Vec<String>,
}

impl Config {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut errors = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim().to_string();
                    let value = value.trim().to_string();
                    if key.is_empty() {
                        errors.push(format!("line {}: missing key before '='", lineno + 1));
                    } else if let std::collections::btree_map::Entry::Vacant(slot) =
                        entries.entry(key.clone())
                    {
                        slot.insert(value);
                    } else {
                        errors.push(format!("line {}: duplicate key `{key}`", lineno + 1));
                    }
                }
                None => errors.push(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )),
            }
        }
        Config {
            entries,
            used: BTreeSet::new(),
            errors,
            echo: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn f64_where(
        &mut self,
        key: &str,
        default: f64,
        constraint: &str,
        pred: impl Fn(f64) -> bool,
    ) -> f64 {
        let value = match self.raw(key) {
            Some(text) => match text.parse::<f64>() {
                Ok(v) => v,
                Err(_) => {
                    self.errors
                        .push(format!("{key}: expected a number, got `{text}`"));
                    default
                }
            },
            None => default,
        };
        if !pred(value) {
            self.errors
                .push(format!("{key}: must satisfy {constraint} (got {value})"));
        }
        self.echo.insert(key.to_string(), format!("{value}"));
        value
    }

    fn f64(&mut self, key: &str, default: f64) -> f64 {
        self.f64_where(key, default, "finite", f64::is_finite)
    }

    fn usize_where(
        &mut self,
        key: &str,
        default: usize,
        constraint: &str,
        pred: impl Fn(usize) -> bool,
    ) -> usize {
        let value = match self.raw(key) {
            Some(text) => match text.parse::<usize>() {
                Ok(v) => v,
                Err(_) => {
                    self.errors
                        .push(format!("{key}: expected a nonnegative integer, got `{text}`"));
                    default
                }
            },
            None => default,
        };
        if !pred(value) {
            self.errors
                .push(format!("{key}: must satisfy {constraint} (got {value})"));
        }
        self.echo.insert(key.to_string(), format!("{value}"));
        value
    }

    fn u64_opt(&mut self, key: &str) -> Option<u64> {
        let text = self.raw(key)?;
        match text.parse::<u64>() {
            Ok(v) => {
                self.echo.insert(key.to_string(), format!("{v}"));
                Some(v)
            }
            Err(_) => {
                self.errors
                    .push(format!("{key}: expected a nonnegative integer, got `{text}`"));
                None
            }
        }
    }

    fn choice(&mut self, key: &str, default: &str, allowed: &[&str]) -> String {
        let value = self.raw(key).unwrap_or_else(|| default.to_string());
        if !allowed.contains(&value.as_str()) {
            self.errors.push(format!(
                "{key}: must be one of {{{}}} (got `{value}`)",
                allowed.join(", ")
            ));
        }
        self.echo.insert(key.to_string(), value.clone());
        value
    }

    fn required_string(&mut self, key: &str) -> Option<String> {
        match self.raw(key) {
            Some(v) => {
                self.echo.insert(key.to_string(), v.clone());
                Some(v)
            }
            None => {
                self.errors.push(format!("{key}: required key is missing"));
                None
            }
        }
    }

    /// Grid size: any value >= 2 is accepted and rounded up to the next
    /// power of two (minimum 8), with a note in the report.
    fn grid_n(&mut self, key: &str, default: usize) -> usize {
        let requested = self.usize_where(key, default, ">= 2", |v| v >= 2);
        let mut n = 8usize;
        while n < requested {
            n *= 2;
        }
        if n != requested {
            self.notes
                .push(format!("{key} = {requested} rounded up to {n} (power of two)"));
            self.echo.insert(key.to_string(), format!("{n}"));
        }
        n
    }

    fn model(&mut self) -> DispersionModel {
        let c = self.f64_where("c", 1.0, "> 0", |v| v > 0.0);
        let hbar_over_m = self.f64_where("hbar_over_m", 1.0, "> 0", |v| v > 0.0);
        DispersionModel { c, hbar_over_m }
    }

    /// Validate no unknown keys remain and surface the accumulated errors.
    fn finish(mut self) -> Result<(BTreeMap<String, String>, Vec<String>), RunError> {
        for key in self.entries.keys() {
            if !self.used.contains(key) {
                self.errors.push(format!("unknown key `{key}`"));
            }
        }
        if self.errors.is_empty() {
            Ok((self.echo, self.notes))
        } else {
            Err(RunError::Config(self.errors))
        }
    }
}

// ---------------------------------------------------------------------------
// output writers

/// 17 significant digits; enough to round-trip any f64 exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), RunError> {
    let mut out = String::with_capacity(rows.len() * 80);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(v));
            first = false;
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn series_rows(series: &EntropySeries) -> Vec<Vec<f64>> {
    let total = series.total();
    series
        .times()
        .iter()
        .zip(series.s_r())
        .zip(series.s_k())
        .zip(&total)
        .map(|(((&t, &r), &k), &s)| vec![t, r, k, s])
        .collect()
}

const SERIES_HEADER: &str = "t,s_r,s_k,s_total";

#[derive(Serialize)]
struct JsonSeries<'a> {
    meta: &'a BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn write_json_mirror(
    path: &Path,
    meta: &BTreeMap<String, String>,
    header: &str,
    rows: Vec<Vec<f64>>,
) -> Result<(), RunError> {
    let doc = JsonSeries {
        meta,
        columns: header.split(',').map(str::to_string).collect(),
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("series serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_snapshot(dir: &Path, snap: &Snapshot) -> Result<String, RunError> {
    let name = format!("snapshots_{}.csv", snap.time);
    let m = snap.axis.len();
    let mut rows = Vec::with_capacity(m * m);
    for (i, &x1) in snap.axis.iter().enumerate() {
        for (j, &x2) in snap.axis.iter().enumerate() {
            rows.push(vec![x1, x2, snap.values[i * m + j]]);
        }
    }
    write_csv(&dir.join(&name), "x1,x2,rho", &rows)?;
    Ok(name)
}

fn classification_report(series: &EntropySeries, eps: f64) -> Result<ClassificationReport, Error> {
    let total = series.total();
    let label = classify(&total, eps)?;
    Ok(ClassificationReport {
        label: label.letter().to_string(),
        eps,
        n_samples: total.len(),
        first: total[0],
        last: *total.last().unwrap(),
        min: total.iter().cloned().fold(f64::INFINITY, f64::min),
        max: total.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

// ---------------------------------------------------------------------------
// scenario runners

struct RunContext<'a> {
    out_dir: &'a Path,
    format: OutputFormat,
    seed_override: Option<u64>,
}

fn shared_grid(cfg: &mut Config, default_length: f64) -> (usize, f64) {
    let n = cfg.grid_n("n", 1024);
    let length = cfg.f64_where("length", default_length, "> 0", |v| v > 0.0);
    (n, length)
}

fn make_grid_checked(n: usize, length: f64) -> Result<Arc<Grid>, RunError> {
    make_grid(n, length)
        .map(Arc::new)
        .map_err(|e| RunError::Config(vec![format!("grid: {e}")]))
}

fn run_packet_scenario(
    cfg: &mut Config,
    decreasing: bool,
) -> Result<(EntropySeries, BTreeMap<String, f64>), RunError> {
    let (n, length) = shared_grid(cfg, 200.0);
    let model = cfg.model();
    let r0 = cfg.f64("r0", 0.0);
    let k0 = cfg.f64("k0", 0.0);
    let sigma2 = cfg.f64_where("sigma2", 1.0, "> 0", |v| v > 0.0);
    let t_max = cfg.f64_where("t_max", 10.0, "> 0", |v| v > 0.0);
    let n_steps = cfg.usize_where("n_steps", 101, ">= 2", |v| v >= 2);
    let propagator = match cfg
        .choice("propagator", "exact", &["exact", "taylor"])
        .as_str()
    {
        "taylor" => Propagator::Taylor,
        _ => Propagator::Exact,
    };
    let grid = make_grid_checked(n, length)?;
    let params =
        CoherentStateParams::new(r0, k0, sigma2).map_err(|e| RunError::Config(vec![e.to_string()]))?;
    params.check_aliasing(&grid)?;

    let curve = if decreasing {
        make_decreasing_from_coherent(&params, &model, &grid, t_max, n_steps)?
    } else {
        let times: Vec<f64> = (0..n_steps)
            .map(|i| t_max * i as f64 / (n_steps - 1) as f64)
            .collect();
        check_in_domain(&params, &model, &grid, &times)?;
        QCurve::new(
            QCurveState::Dispersive {
                initial: coherent_state(&params, &grid)?,
                model,
                propagator,
            },
            0.0,
            t_max,
            n_steps,
        )?
    };
    let series = sample_entropy_series(&curve)?;
    let mut derived = BTreeMap::new();
    derived.insert("hessian_at_k0".to_string(), hessian(k0, &model));
    derived.insert("group_velocity_at_k0".to_string(), group_velocity(k0, &model));
    Ok((series, derived))
}

fn run_dispersion_table(cfg: &mut Config) -> Result<Vec<Vec<f64>>, RunError> {
    let model = cfg.model();
    let k_min = cfg.f64("k_min", -10.0);
    let k_max = cfg.f64("k_max", 10.0);
    let n_points = cfg.usize_where("n_points", 201, ">= 2", |v| v >= 2);
    if !(k_max > k_min) {
        return Err(RunError::Config(vec![format!(
            "k_max: must exceed k_min (got k_min = {k_min}, k_max = {k_max})"
        )]));
    }
    let rows = (0..n_points)
        .map(|i| {
            let k = k_min + (k_max - k_min) * i as f64 / (n_points - 1) as f64;
            let (lambda_long, lambda_perp) = hessian_eigenvalues_3d(k.abs(), &model);
            vec![
                k,
                omega(k, &model),
                group_velocity(k, &model),
                hessian(k, &model),
                lambda_long,
                lambda_perp,
            ]
        })
        .collect();
    Ok(rows)
}

struct FiniteLevelRun {
    series: EntropySeries,
    probabilities: Vec<Vec<f64>>,
    prob_header: String,
    derived: BTreeMap<String, f64>,
}

fn run_two_state(cfg: &mut Config) -> Result<FiniteLevelRun, RunError> {
    let (n, length) = shared_grid(cfg, 60.0);
    let sigma2 = cfg.f64_where("sigma2", 1.0, "> 0", |v| v > 0.0);
    let omega1 = cfg.f64("omega1", 1.0);
    let omega2 = cfg.f64("omega2", 2.0);
    let w11 = cfg.f64("w11", 0.0);
    let w12 = cfg.f64("w12", 0.1);
    let w22 = cfg.f64("w22", 0.0);
    let t_max = cfg.f64_where("t_max", 10.0, "> 0", |v| v > 0.0);
    let n_steps = cfg.usize_where("n_steps", 101, ">= 2", |v| v >= 2);

    let sys = TwoLevelSystem {
        omega1,
        omega2,
        w11,
        w12,
        w22,
    };
    let spectrum = two_level_spectrum(&sys);
    let grid = make_grid_checked(n, length)?;
    let basis = oscillator_basis(&grid, 2, sigma2)?;

    let hmat = vec![sys.total1(), w12, w12, sys.total2()];
    let curve = QCurve::new(
        QCurveState::FiniteLevel {
            system: MultiLevelSystem::new(2, hmat)?,
            basis,
            initial: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        },
        0.0,
        t_max,
        n_steps,
    )?;
    let series = sample_entropy_series(&curve)?;

    let probabilities = series
        .times()
        .iter()
        .map(|&t| vec![t, transition_probability(&sys, t)])
        .collect();

    let mut derived = BTreeMap::new();
    derived.insert("eta".to_string(), spectrum.eta);
    derived.insert("theta".to_string(), spectrum.theta);
    derived.insert("lambda_plus".to_string(), spectrum.lambda_plus);
    derived.insert("lambda_minus".to_string(), spectrum.lambda_minus);
    if let Ok(period) = oscillation_period(&sys) {
        derived.insert("period".to_string(), period);
    }
    Ok(FiniteLevelRun {
        series,
        probabilities,
        prob_header: "t,p_transition".to_string(),
        derived,
    })
}

fn run_multi_state(cfg: &mut Config, seed_override: Option<u64>) -> Result<FiniteLevelRun, RunError> {
    let (n, length) = shared_grid(cfg, 60.0);
    let sigma2 = cfg.f64_where("sigma2", 1.0, "> 0", |v| v > 0.0);
    let n_levels = cfg.usize_where("n_levels", 5, "2..=64", |v| (2..=64).contains(&v));
    let w_scale = cfg.f64_where("w_scale", 0.1, "> 0", |v| v > 0.0);
    let t_max = cfg.f64_where("t_max", 10.0, "> 0", |v| v > 0.0);
    let n_steps = cfg.usize_where("n_steps", 101, ">= 2", |v| v >= 2);
    let seed = seed_override.or_else(|| cfg.u64_opt("seed")).unwrap_or(0);
    cfg.echo.insert("seed".to_string(), format!("{seed}"));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hmat = vec![0.0; n_levels * n_levels];
    for i in 0..n_levels {
        hmat[i * n_levels + i] = rng.gen_range(0.5..2.5);
    }
    for i in 0..n_levels {
        for j in (i + 1)..n_levels {
            let w = rng.gen_range(-w_scale..w_scale);
            hmat[i * n_levels + j] = w;
            hmat[j * n_levels + i] = w;
        }
    }
    let sys = MultiLevelSystem::new(n_levels, hmat)?;

    let times: Vec<f64> = (0..n_steps)
        .map(|i| t_max * i as f64 / (n_steps - 1) as f64)
        .collect();
    let mut probabilities = Vec::with_capacity(n_steps);
    for &t in &times {
        let mut row = Vec::with_capacity(n_levels + 1);
        row.push(t);
        for j in 0..n_levels {
            row.push(crate::transitions::multistate_probability(&sys, j, t)?);
        }
        probabilities.push(row);
    }
    let prob_header = std::iter::once("t".to_string())
        .chain((0..n_levels).map(|j| format!("p_{j}")))
        .collect::<Vec<_>>()
        .join(",");

    let grid = make_grid_checked(n, length)?;
    let basis = oscillator_basis(&grid, n_levels, sigma2)?;
    let mut initial = vec![Complex64::new(0.0, 0.0); n_levels];
    initial[0] = Complex64::new(1.0, 0.0);
    let curve = QCurve::new(
        QCurveState::FiniteLevel {
            system: sys,
            basis,
            initial,
        },
        0.0,
        t_max,
        n_steps,
    )?;
    let series = sample_entropy_series(&curve)?;

    Ok(FiniteLevelRun {
        series,
        probabilities,
        prob_header,
        derived: BTreeMap::new(),
    })
}

type CollideOutcome = (EntropySeries, Vec<Snapshot>, BTreeMap<String, f64>);

fn run_collide(cfg: &mut Config) -> Result<CollideOutcome, RunError> {
    let (n, length) = shared_grid(cfg, 400.0);
    let model = cfg.model();
    let k1 = cfg.f64("k1", 1.0);
    let c1 = cfg.f64("c1", -30.0);
    let c2 = cfg.f64("c2", 30.0);
    let sigma2 = cfg.f64_where("sigma2", 1.0, "> 0", |v| v > 0.0);
    let t_max = cfg.f64_where("t_max", 70.0, "> 0", |v| v > 0.0);
    let n_steps = cfg.usize_where("n_steps", 141, ">= 8", |v| v >= 8);
    let stride = cfg.f64_where("snapshot_stride", 20.0, ">= 0", |v| v >= 0.0);
    let subsample = cfg.usize_where("snapshot_subsample", 8, ">= 1", |v| v >= 1);
    let stats = match cfg.choice("statistics", "fermion", &["fermion", "boson"]).as_str() {
        "boson" => Statistics::Boson,
        _ => Statistics::Fermion,
    };
    if c1 >= c2 {
        return Err(RunError::Config(vec![format!(
            "c1: must be less than c2 (got c1 = {c1}, c2 = {c2})"
        )]));
    }
    let grid = make_grid_checked(n, length)?;
    let params = CollisionParams {
        k1,
        c1,
        c2,
        sigma2,
        model,
        t_max,
        n_steps,
        stats,
        snapshot_stride: if stride > 0.0 { Some(stride) } else { None },
        snapshot_subsample: subsample,
    };
    let out = collision_scenario(&params, &grid)?;
    let mut derived = BTreeMap::new();
    derived.insert("group_velocity_at_k1".to_string(), group_velocity(k1, &model));
    derived.insert(
        "closing_time".to_string(),
        (c2 - c1) / (2.0 * group_velocity(k1, &model).abs().max(f64::MIN_POSITIVE)),
    );
    Ok((out.series, out.snapshots, derived))
}

fn run_classify(cfg: &mut Config, eps: f64) -> Result<ClassificationReport, RunError> {
    let input = match cfg.required_string("input") {
        Some(p) => p,
        None => return Err(RunError::Config(vec!["input: required key is missing".into()])),
    };
    let text = fs::read_to_string(PathBuf::from(&input))
        .map_err(|e| RunError::Config(vec![format!("input: cannot read `{input}`: {e}")]))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RunError::Config(vec![format!("input: `{input}` is empty")]))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = columns
        .iter()
        .position(|&c| c == "s_total")
        .ok_or_else(|| {
            RunError::Config(vec![format!(
                "input: `{input}` has no `s_total` column (header: {header})"
            )])
        })?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(RunError::Config(vec![format!(
                "input: row {} has {} fields, expected {}",
                i + 2,
                fields.len(),
                columns.len()
            )]));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                RunError::Config(vec![format!("input: row {}: bad number `{s}`", i + 2)])
            })
        };
        times.push(parse(fields[0])?);
        values.push(parse(fields[col])?);
    }
    let zeros = vec![0.0; values.len()];
    let series = EntropySeries::new(times, values, zeros)?;
    Ok(classification_report(&series, eps)?)
}

// ---------------------------------------------------------------------------
// entry point

/// Execute a scenario, writing all artifacts into `out_dir`, and return the
/// report that was also written there as `report.json`.
pub fn run(
    scenario: Scenario,
    config_text: &str,
    out_dir: &Path,
    format: OutputFormat,
    seed_override: Option<u64>,
) -> Result<Report, RunError> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)?;
    let ctx = RunContext {
        out_dir,
        format,
        seed_override,
    };
    let mut cfg = Config::parse(config_text);
    let eps = cfg.f64_where("eps", 1e-6, "> 0", |v| v > 0.0);

    // First pass evaluates the scenario with errors still accumulating in
    // `cfg`; `finish` then reports every violation at once.
    let staged = stage_scenario(scenario, &mut cfg, &ctx, eps);
    let (echo, notes) = cfg.finish()?;
    let staged = staged?;

    let mut report = Report {
        scenario: scenario.name().to_string(),
        config: echo,
        notes,
        outputs: Vec::new(),
        classification: None,
        derived: BTreeMap::new(),
        runtime_seconds: 0.0,
    };
    write_outputs(staged, &ctx, &mut report, eps)?;
    report.runtime_seconds = started.elapsed().as_secs_f64();

    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(out_dir.join("report.json"), text)?;
    report.outputs.push("report.json".to_string());
    Ok(report)
}

/// Scenario result prior to serialization.
enum Staged {
    Series {
        series: EntropySeries,
        snapshots: Vec<Snapshot>,
        probabilities: Option<(String, Vec<Vec<f64>>)>,
        derived: BTreeMap<String, f64>,
    },
    Table(Vec<Vec<f64>>),
    Label(ClassificationReport),
}

fn stage_scenario(
    scenario: Scenario,
    cfg: &mut Config,
    ctx: &RunContext<'_>,
    eps: f64,
) -> Result<Staged, RunError> {
    match scenario {
        Scenario::Coherent | Scenario::Decreasing => {
            let (series, derived) = run_packet_scenario(cfg, scenario == Scenario::Decreasing)?;
            Ok(Staged::Series {
                series,
                snapshots: Vec::new(),
                probabilities: None,
                derived,
            })
        }
        Scenario::DispersionTable => Ok(Staged::Table(run_dispersion_table(cfg)?)),
        Scenario::TwoState => {
            let run = run_two_state(cfg)?;
            Ok(Staged::Series {
                series: run.series,
                snapshots: Vec::new(),
                probabilities: Some((run.prob_header, run.probabilities)),
                derived: run.derived,
            })
        }
        Scenario::MultiState => {
            let run = run_multi_state(cfg, ctx.seed_override)?;
            Ok(Staged::Series {
                series: run.series,
                snapshots: Vec::new(),
                probabilities: Some((run.prob_header, run.probabilities)),
                derived: run.derived,
            })
        }
        Scenario::Collide => {
            let (series, snapshots, derived) = run_collide(cfg)?;
            Ok(Staged::Series {
                series,
                snapshots,
                probabilities: None,
                derived,
            })
        }
        Scenario::Classify => Ok(Staged::Label(run_classify(cfg, eps)?)),
    }
}

fn write_outputs(
    staged: Staged,
    ctx: &RunContext<'_>,
    report: &mut Report,
    eps: f64,
) -> Result<(), RunError> {
    match staged {
        Staged::Series {
            series,
            snapshots,
            probabilities,
            derived,
        } => {
            write_csv(
                &ctx.out_dir.join("series.csv"),
                SERIES_HEADER,
                &series_rows(&series),
            )?;
            report.outputs.push("series.csv".to_string());
            if ctx.format == OutputFormat::Json {
                write_json_mirror(
                    &ctx.out_dir.join("series.json"),
                    &report.config,
                    SERIES_HEADER,
                    series_rows(&series),
                )?;
                report.outputs.push("series.json".to_string());
            }
            if let Some((header, rows)) = probabilities {
                write_csv(&ctx.out_dir.join("probabilities.csv"), &header, &rows)?;
                report.outputs.push("probabilities.csv".to_string());
            }
            for snap in &snapshots {
                report.outputs.push(write_snapshot(ctx.out_dir, snap)?);
            }
            report.classification = Some(classification_report(&series, eps)?);
            report.derived = derived;
        }
        Staged::Table(rows) => {
            let header = "k,omega,group_velocity,hessian,lambda_long,lambda_perp";
            write_csv(&ctx.out_dir.join("series.csv"), header, &rows)?;
            report.outputs.push("series.csv".to_string());
            if ctx.format == OutputFormat::Json {
                write_json_mirror(
                    &ctx.out_dir.join("series.json"),
                    &report.config,
                    header,
                    rows,
                )?;
                report.outputs.push("series.json".to_string());
            }
        }
        Staged::Label(label) => {
            report.classification = Some(label);
        }
    }
    Ok(())
}
