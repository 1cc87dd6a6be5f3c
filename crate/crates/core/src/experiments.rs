//! Parameter sweeps, optimal-field searches, power-law fits and the oracle
//! validation report, with a plain key=value config format and CSV output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::convex_roof::{minimize, OptimizerOptions};
use crate::error::{Error, Result};
use crate::measures::{tangle_pure, Measure};
use crate::optimize::golden_section;
use crate::oracles::{oracle_suite, OracleCase};
use crate::spin_ring::{
    build_hamiltonian, ground_state, ground_tangle_closed_form, spectrum, thermal_state, FieldKind,
    SpectrumReport, SpinRingParams,
};
use crate::state::{ghz_minus, ghz_plus, w_flipped, w_state, PureState};

/// Rows with a tangle below this are flagged.
pub const TAU_CUTOFF: f64 = 1e-5;

/// Per-family tolerances of the validation report.
pub fn family_tolerance(family: &str) -> f64 {
    match family {
        "isotropic-3" => 1e-5,
        "pure" | "ground-state" => 1e-9,
        _ => 1e-6,
    }
}

// ---------------------------------------------------------------- grids

/// `start:stop:count`, optionally followed by `log` (as `:log` or after a
/// space), or an explicit comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let values = if text.contains(':') {
        let fields = text.replace(char::is_whitespace, ":");
        let parts: Vec<&str> = fields.split(':').filter(|s| !s.is_empty()).collect();
        let (log, parts) = match parts.last() {
            Some(&"log") => (true, &parts[..parts.len() - 1]),
            Some(&"lin") => (false, &parts[..parts.len() - 1]),
            _ => (false, &parts[..]),
        };
        if parts.len() != 3 {
            return Err(Error::Config(format!("grid '{text}' must be start:stop:count [log]")));
        }
        let start = parse_f64(parts[0])?;
        let stop = parse_f64(parts[1])?;
        let count: usize = parts[2].parse().map_err(|_| Error::Config(format!("bad grid count '{}'", parts[2])))?;
        if count == 0 {
            return Err(Error::Config(format!("grid '{text}' is empty")));
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(Error::Config(format!("log grid '{text}' needs positive bounds")));
        }
        spaced(start, stop, count, log)
    } else {
        text.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("grid '{text}' must be strictly increasing")));
    }
    Ok(values)
}

/// `count` points from `start` to `stop`, linear or logarithmic.
pub fn spaced(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let s = i as f64 / (count - 1) as f64;
            if i == 0 {
                start
            } else if i == count - 1 {
                stop
            } else if log {
                (start.ln() + s * (stop.ln() - start.ln())).exp()
            } else {
                start + s * (stop - start)
            }
        })
        .collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("'{}' is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

// ---------------------------------------------------------------- config

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSearch {
    pub window: (f64, f64),
    /// Log-spaced points scanned before the golden-section refinement.
    pub scan_points: usize,
    /// Relative tolerance on b.
    pub rel_tol: f64,
}

impl Default for FieldSearch {
    fn default() -> Self {
        Self { window: (1e-3, 1.0), scan_points: 12, rel_tol: 1e-3 }
    }
}

impl FieldSearch {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("field window must satisfy 0 < lo < hi, got {lo}:{hi}")));
        }
        if self.scan_points < 3 {
            return Err(Error::Config("field scan needs at least 3 points".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("field tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Template; `b`, `temperature` and (with ratios) `jxy` are overridden.
    pub model: SpinRingParams,
    pub b_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// J_xy/J_z values; empty means the template couplings.
    pub anisotropy_ratios: Vec<f64>,
    pub optimizer: OptimizerOptions,
    pub field_search: FieldSearch,
    pub output_path: Option<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: SpinRingParams::isotropic(1.0, FieldKind::Radial, 0.0, 0.0),
            b_grid: vec![0.1],
            t_grid: vec![1e-3],
            anisotropy_ratios: Vec::new(),
            optimizer: OptimizerOptions::default(),
            field_search: FieldSearch::default(),
            output_path: None,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "jxy",
    "jz",
    "field",
    "b",
    "t",
    "ratios",
    "restarts",
    "seed",
    "cardinality_offset",
    "max_iterations",
    "gradient_step",
    "convergence_tol",
    "line_search_tol",
    "b_window",
    "b_scan_points",
    "b_rel_tol",
    "output",
];

impl FromStr for SweepConfig {
    type Err = Error;

    /// `key = value` lines; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1)));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
            let int = |v: &str| -> Result<usize> {
                v.parse().map_err(|_| Error::Config(format!("line {}: '{v}' is not a non-negative integer", n + 1)))
            };
            match key {
                "jxy" => cfg.model.jxy = parse_f64(value)?,
                "jz" => cfg.model.jz = parse_f64(value)?,
                "field" => cfg.model.field = value.parse()?,
                "b" => cfg.b_grid = parse_grid(value)?,
                "t" => cfg.t_grid = parse_grid(value)?,
                "ratios" => cfg.anisotropy_ratios = parse_grid(value)?,
                "restarts" => cfg.optimizer.restarts = int(value)?,
                "seed" => {
                    cfg.optimizer.seed =
                        value.parse().map_err(|_| Error::Config(format!("line {}: bad seed '{value}'", n + 1)))?
                }
                "cardinality_offset" => cfg.optimizer.cardinality_offset = int(value)?,
                "max_iterations" => cfg.optimizer.max_iterations = int(value)?,
                "gradient_step" => cfg.optimizer.gradient_step = parse_f64(value)?,
                "convergence_tol" => cfg.optimizer.convergence_tol = parse_f64(value)?,
                "line_search_tol" => cfg.optimizer.line_search_tol = parse_f64(value)?,
                "b_window" => {
                    let (lo, hi) = value
                        .split_once(':')
                        .ok_or_else(|| Error::Config(format!("line {}: b_window must be lo:hi", n + 1)))?;
                    cfg.field_search.window = (parse_f64(lo)?, parse_f64(hi)?);
                }
                "b_scan_points" => cfg.field_search.scan_points = int(value)?,
                "b_rel_tol" => cfg.field_search.rel_tol = parse_f64(value)?,
                "output" => cfg.output_path = Some(value.to_string()),
                _ => unreachable!(),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.optimizer.validate()?;
        self.field_search.validate()?;
        for (name, grid) in [("b", &self.b_grid), ("t", &self.t_grid)] {
            if grid.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!("{name} grid must be strictly increasing")));
            }
            if grid.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Config(format!("{name} grid must be non-negative")));
            }
        }
        if self.anisotropy_ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("ratios must be strictly increasing".into()));
        }
        if !self.anisotropy_ratios.is_empty() {
            if !(self.model.jz > 0.0) {
                return Err(Error::Config("anisotropy ratios need jz > 0".into()));
            }
            if let Some(r) = self.anisotropy_ratios.iter().find(|r| !(**r > -2.0 && **r <= 1.0)) {
                return Err(Error::Config(format!("ratio {r} outside (-2, 1]")));
            }
        }
        Ok(())
    }

    /// Coupling templates, one per ratio (or the model itself).
    pub fn models(&self) -> Vec<SpinRingParams> {
        if self.anisotropy_ratios.is_empty() {
            vec![self.model]
        } else {
            self.anisotropy_ratios.iter().map(|r| SpinRingParams { jxy: r * self.model.jz, ..self.model }).collect()
        }
    }

    /// Grid points in output order: model, then temperature, then b.
    pub fn points(&self) -> Vec<SpinRingParams> {
        let mut out = Vec::new();
        for m in self.models() {
            for &t in &self.t_grid {
                for &b in &self.b_grid {
                    out.push(m.with_temperature(t).with_b(b));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------- csv

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A row type with a fixed CSV layout.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// CSV writer flushing after every row.
pub struct RowWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RowWriter<W> {
    pub fn new<R: CsvRow>(out: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(R::header()).map_err(csv_err)?;
        inner.flush().map_err(io_err)?;
        Ok(Self { inner })
    }

    pub fn row<R: CsvRow>(&mut self, r: &R) -> Result<()> {
        self.inner.write_record(r.fields()).map_err(csv_err)?;
        self.inner.flush().map_err(io_err)
    }
}

pub fn write_csv<R: CsvRow, W: Write>(out: W, rows: &[R]) -> Result<()> {
    let mut w = RowWriter::new::<R>(out)?;
    rows.iter().try_for_each(|r| w.row(r))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv error: {e}"))
}

/// Evaluates `f` over `items` in parallel and hands results to `sink` in
/// input order as soon as each prefix is complete.
pub fn ordered_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R> + Sync,
    mut sink: impl FnMut(usize, R) -> Result<()>,
) -> Result<()> {
    let (tx, rx) = mpsc::channel::<(usize, Result<R>)>();
    let f = &f;
    std::thread::scope(|scope| {
        scope.spawn(move || {
            items.par_iter().enumerate().for_each_with(tx, |tx, (i, item)| {
                let _ = tx.send((i, f(item)));
            });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        let mut first_err = None;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&next) {
                if first_err.is_none() {
                    if let Err(e) = r.and_then(|v| sink(next, v)) {
                        first_err = Some(e);
                    }
                }
                next += 1;
            }
        }
        first_err.map_or(Ok(()), Err)
    })
}

// ---------------------------------------------------------------- sweep

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub temperature: f64,
    pub b: f64,
    pub jxy: f64,
    pub jz: f64,
    pub field: FieldKind,
    pub tau: f64,
    pub splitting_01: f64,
    pub ground_degeneracy: usize,
    pub converged: bool,
    pub spread: f64,
    pub below_cutoff: bool,
}

impl CsvRow for SweepRecord {
    fn header() -> &'static [&'static str] {
        &["temperature", "b", "jxy", "jz", "field", "tau", "splitting_01", "ground_degeneracy", "converged", "spread", "below_cutoff"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.temperature),
            fmt_f64(self.b),
            fmt_f64(self.jxy),
            fmt_f64(self.jz),
            self.field.name().to_string(),
            fmt_f64(self.tau),
            fmt_f64(self.splitting_01),
            self.ground_degeneracy.to_string(),
            self.converged.to_string(),
            fmt_f64(self.spread),
            self.below_cutoff.to_string(),
        ]
    }
}

/// Thermal tangle and spectrum at one parameter point.
pub fn sweep_point(params: &SpinRingParams, opts: &OptimizerOptions) -> Result<SweepRecord> {
    params.validate()?;
    let h = build_hamiltonian(params)?;
    let levels = spectrum(&h)?;
    let rho = thermal_state(&h, params.temperature)?;
    let res = minimize(&rho, &Measure::ThreeTangle, opts)?;
    let tau = res.value.min(1.0);
    Ok(SweepRecord {
        temperature: params.temperature,
        b: params.b,
        jxy: params.jxy,
        jz: params.jz,
        field: params.field,
        tau,
        splitting_01: levels.splitting_01,
        ground_degeneracy: levels.ground_degeneracy,
        converged: res.converged(),
        spread: res.spread(),
        below_cutoff: tau < TAU_CUTOFF,
    })
}

/// Runs every grid point; rows reach `out` in grid order, each flushed as
/// soon as it and all earlier rows are done.
pub fn run_sweep<W: Write>(cfg: &SweepConfig, out: W) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let points = cfg.points();
    let mut rows = Vec::with_capacity(points.len());
    let mut w = RowWriter::new::<SweepRecord>(out)?;
    ordered_map(
        &points,
        |p| sweep_point(p, &cfg.optimizer),
        |_, rec| {
            w.row(&rec)?;
            rows.push(rec);
            Ok(())
        },
    )?;
    Ok(rows)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("i/o error: {e}"))
}

// ---------------------------------------------------------------- optimal field

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalField {
    pub temperature: f64,
    pub jxy: f64,
    pub jz: f64,
    pub b_opt: f64,
    pub tau_max: f64,
    pub converged: bool,
    /// False when the maximum sits on the edge of the search window.
    pub interior: bool,
    pub evaluations: usize,
}

impl CsvRow for OptimalField {
    fn header() -> &'static [&'static str] {
        &["temperature", "jxy", "jz", "b_opt", "tau_max", "one_minus_tau_max", "converged", "interior", "evaluations"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.temperature),
            fmt_f64(self.jxy),
            fmt_f64(self.jz),
            fmt_f64(self.b_opt),
            fmt_f64(self.tau_max),
            fmt_f64(1.0 - self.tau_max),
            self.converged.to_string(),
            self.interior.to_string(),
            self.evaluations.to_string(),
        ]
    }
}

/// Maximizes the thermal tangle over b: log-spaced scan of the window, then
/// golden section in ln b around the best scan point.
pub fn optimal_field(model: &SpinRingParams, search: &FieldSearch, opts: &OptimizerOptions) -> Result<OptimalField> {
    search.validate()?;
    let (lo, hi) = search.window;
    let grid = spaced(lo, hi, search.scan_points, true);
    let eval = |b: f64| sweep_point(&model.with_b(b), opts);
    let scan: Vec<SweepRecord> = grid.par_iter().map(|&b| eval(b)).collect::<Result<_>>()?;
    let i = (0..scan.len()).max_by(|&a, &b| scan[a].tau.total_cmp(&scan[b].tau).then(b.cmp(&a))).unwrap();

    let a = grid[i.saturating_sub(1)].ln();
    let c = grid[(i + 1).min(grid.len() - 1)].ln();
    let mut best = scan[i].clone();
    let mut evaluations = scan.len();
    let mut err = None;
    let tol = (1.0 + search.rel_tol).ln();
    golden_section(
        |x| {
            evaluations += 1;
            match eval(x.exp()) {
                Ok(rec) => {
                    let v = -rec.tau;
                    if rec.tau > best.tau {
                        best = rec;
                    }
                    v
                }
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            }
        },
        a,
        c,
        tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(OptimalField {
        temperature: model.temperature,
        jxy: model.jxy,
        jz: model.jz,
        b_opt: best.b,
        tau_max: best.tau,
        converged: best.converged,
        interior: i > 0 && i + 1 < grid.len(),
        evaluations,
    })
}

/// Optimal field for every (model, temperature) of the config, in order.
pub fn run_optimal_field<W: Write>(cfg: &SweepConfig, out: W) -> Result<Vec<OptimalField>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for m in cfg.models() {
        for &t in &cfg.t_grid {
            points.push(m.with_temperature(t));
        }
    }
    let mut rows = Vec::new();
    let mut w = RowWriter::new::<OptimalField>(out)?;
    ordered_map(
        &points,
        |p| optimal_field(p, &cfg.field_search, &cfg.optimizer),
        |_, rec| {
            w.row(&rec)?;
            rows.push(rec);
            Ok(())
        },
    )?;
    Ok(rows)
}

// ---------------------------------------------------------------- fits

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual in log₁₀–log₁₀ coordinates.
    pub residual: f64,
    pub n_points: usize,
}

impl fmt::Display for PowerLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "exponent = {:.6}\nprefactor = {:.6e}\nresidual = {:.3e}\nn_points = {}",
            self.exponent, self.prefactor, self.residual, self.n_points
        )
    }
}

/// Least-squares line through (log₁₀ x, log₁₀ y): y ≈ prefactor·x^exponent.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} x values, {} y values", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Domain(format!("power-law fit needs at least 3 points, got {}", x.len())));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("power-law fit needs positive data, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("power-law fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(PowerLawFit { exponent: slope, prefactor: 10f64.powf(intercept), residual: (rss / n).sqrt(), n_points: x.len() })
}

/// Two named numeric columns of a CSV with a header row.
pub fn read_columns(text: &str, x_col: &str, y_col: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Config(format!("column '{name}' not in header")))
    };
    let (ix, iy) = (find(x_col)?, find(y_col)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let get = |i: usize| rec.get(i).ok_or_else(|| Error::Config(format!("row {} is short", n + 2))).and_then(parse_f64);
        xs.push(get(ix)?);
        ys.push(get(iy)?);
    }
    Ok((xs, ys))
}

// ---------------------------------------------------------------- figure shapes

/// Rises to its maximum and falls after it, up to `slack`.
pub fn is_unimodal(values: &[f64], slack: f64) -> bool {
    let Some(peak) = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])) else {
        return false;
    };
    values[..=peak].windows(2).all(|w| w[1] >= w[0] - slack) && values[peak..].windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Width of {x : y(x) ≥ frac·max y}, with linear interpolation of the
/// crossings; the region is clipped to the sampled range.
pub fn width_above_fraction(x: &[f64], y: &[f64], frac: f64) -> f64 {
    let Some(peak) = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])) else {
        return 0.0;
    };
    let level = frac * y[peak];
    let cross = |i: usize, j: usize| x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let mut left = x[0];
    for i in (0..peak).rev() {
        if y[i] < level {
            left = cross(i, i + 1);
            break;
        }
    }
    let mut right = x[x.len() - 1];
    for i in peak + 1..y.len() {
        if y[i] < level {
            right = cross(i - 1, i);
            break;
        }
    }
    right - left
}

// ---------------------------------------------------------------- validation

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub label: String,
    pub family: String,
    pub expected: f64,
    pub value: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CsvRow for ValidationRow {
    fn header() -> &'static [&'static str] {
        &["label", "family", "expected", "value", "abs_error", "tolerance", "pass"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.label.to_string(),
            self.family.to_string(),
            fmt_f64(self.expected),
            fmt_f64(self.value),
            fmt_f64(self.error),
            fmt_f64(self.tolerance),
            self.pass.to_string(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// (family, max abs error, tolerance) in first-seen order.
    pub fn family_errors(&self) -> Vec<(String, f64, f64)> {
        let mut out: Vec<(String, f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(f, _, _)| *f == r.family) {
                Some(entry) => entry.1 = entry.1.max(r.error),
                None => out.push((r.family.clone(), r.error, family_tolerance(&r.family))),
            }
        }
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (family, err, tol) in self.family_errors() {
            let ok = if err <= tol { "ok" } else { "FAIL" };
            writeln!(f, "{family:14} max |error| = {err:.3e}  (tolerance {tol:.0e})  {ok}")?;
        }
        write!(f, "{}", if self.passed() { "all cases within tolerance" } else { "validation FAILED" })
    }
}

pub fn validate_case(case: &OracleCase, opts: &OptimizerOptions) -> Result<ValidationRow> {
    let value = minimize(&case.state, &case.measure, opts)?.value;
    let error = (value - case.expected).abs();
    let tolerance = family_tolerance(&case.family);
    Ok(ValidationRow {
        label: case.label.clone(),
        family: case.family.clone(),
        expected: case.expected,
        value,
        error,
        tolerance,
        pass: error <= tolerance,
    })
}

/// Runs the oracle suite through the optimizer.
pub fn run_validation(opts: &OptimizerOptions) -> Result<ValidationReport> {
    let cases = oracle_suite()?;
    let rows = cases.par_iter().map(|c| validate_case(c, opts)).collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport { rows })
}

// ---------------------------------------------------------------- ground state

#[derive(Clone, Debug)]
pub struct GroundStateReport {
    pub params: SpinRingParams,
    pub spectrum: SpectrumReport,
    pub energy: f64,
    pub state: PureState,
    pub tangle: f64,
    pub fidelity_ghz_plus: f64,
    pub fidelity_ghz_minus: f64,
    pub fidelity_w: f64,
    pub fidelity_w_flipped: f64,
    /// Closed form and its difference from `tangle`, isotropic radial only.
    pub closed_form: Option<(f64, f64)>,
}

impl GroundStateReport {
    pub fn w_class_fidelity(&self) -> f64 {
        self.fidelity_w.max(self.fidelity_w_flipped)
    }
}

pub fn ground_state_report(params: &SpinRingParams) -> Result<GroundStateReport> {
    params.validate()?;
    let h = build_hamiltonian(params)?;
    let spectrum = spectrum(&h)?;
    let (energy, state) = ground_state(&h)?;
    let tangle = tangle_pure(&state)?;
    let closed_form = if params.is_isotropic_radial() && params.jz > 0.0 && params.b > 0.0 {
        let v = ground_tangle_closed_form(params.b / params.jz)?;
        Some((v, tangle - v))
    } else {
        None
    };
    Ok(GroundStateReport {
        params: *params,
        energy,
        tangle,
        fidelity_ghz_plus: state.fidelity(&ghz_plus()),
        fidelity_ghz_minus: state.fidelity(&ghz_minus()),
        fidelity_w: state.fidelity(&w_state()),
        fidelity_w_flipped: state.fidelity(&w_flipped()),
        spectrum,
        state,
        closed_form,
    })
}

impl fmt::Display for GroundStateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "jxy = {}  jz = {}  field = {}  b = {}", p.jxy, p.jz, p.field.name(), p.b)?;
        writeln!(f, "energies:")?;
        for e in &self.spectrum.energies {
            writeln!(f, "  {e:+.12e}")?;
        }
        writeln!(f, "ground degeneracy = {}", self.spectrum.ground_degeneracy)?;
        writeln!(f, "splitting_01 = {:.12e}", self.spectrum.splitting_01)?;
        writeln!(f, "ground-state amplitudes (|s1 s2 s3>, 0 = up):")?;
        for (i, a) in self.state.amplitudes().iter().enumerate() {
            writeln!(f, "  |{:03b}>  {:+.12} {:+.12}i", i, a.re, a.im)?;
        }
        writeln!(f, "tangle = {:.15}", self.tangle)?;
        writeln!(f, "fidelity GHZ+ = {:.15}", self.fidelity_ghz_plus)?;
        writeln!(f, "fidelity GHZ- = {:.15}", self.fidelity_ghz_minus)?;
        writeln!(f, "fidelity W = {:.15}", self.fidelity_w)?;
        write!(f, "fidelity flipped W = {:.15}", self.fidelity_w_flipped)?;
        if let Some((v, d)) = self.closed_form {
            write!(f, "\nclosed-form tangle = {v:.15}\ndifference = {d:.3e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("1e-4:1e-2:3 log").unwrap();
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert_eq!(g, parse_grid("1e-4:1e-2:3:log").unwrap());
        assert_eq!(parse_grid("0, 0.5,0.9").unwrap(), vec![0.0, 0.5, 0.9]);
        assert_eq!(parse_grid("2").unwrap(), vec![2.0]);
        assert!(parse_grid("1,0").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1:3 log").is_err());
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg: SweepConfig = "# fig 2\njz = 1\nfield = x\nratios = 0, 0.5, 0.9\nt = 1e-3\nb = 0.01:1:4 log\nrestarts = 3\nseed = 7\noutput = out.csv\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.model.field, FieldKind::UniformX);
        assert_eq!(cfg.optimizer.restarts, 3);
        assert_eq!(cfg.optimizer.seed, 7);
        assert_eq!(cfg.output_path.as_deref(), Some("out.csv"));
        let pts = cfg.points();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[4].jxy, 0.5);
        assert_eq!(pts[4].b, 0.01);
        assert!("colour = red".parse::<SweepConfig>().is_err());
        assert!("b = 1\nb = 2".parse::<SweepConfig>().is_err());
        assert!("ratios = 0, 1.5".parse::<SweepConfig>().is_err());
        assert!("t = -1".parse::<SweepConfig>().is_err());
        assert!("restarts = 0".parse::<SweepConfig>().is_err());
        assert!("jxy".parse::<SweepConfig>().is_err());
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        let fit = PowerLawFit { exponent: 0.0, prefactor: 1.0, residual: 0.0, n_points: 3 };
        assert!(fit.to_string().contains("n_points = 3"));
    }

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = spaced(1e-4, 1e-2, 9, true);
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t.powf(0.5)).collect();
        let fit = fit_power_law(&x, &y).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-10);
        assert!((fit.prefactor - 2.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
        assert!(fit_power_law(&x[..2], &y[..2]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn column_reader() {
        let (x, y) = read_columns("a,b,c\n1,2,3\n4,5,6\n", "a", "c").unwrap();
        assert_eq!((x, y), (vec![1.0, 4.0], vec![3.0, 6.0]));
        assert!(read_columns("a,b\n1,2\n", "a", "z").is_err());
        assert!(read_columns("a,b\n1,x\n", "a", "b").is_err());
    }

    #[test]
    fn shapes() {
        assert!(is_unimodal(&[0.0, 1.0, 3.0, 2.0, 1.0], 0.0));
        assert!(!is_unimodal(&[0.0, 2.0, 1.0, 3.0, 1.0], 0.0));
        assert!(is_unimodal(&[0.0, 1e-9, 0.0, 1.0], 1e-6));
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 1.0, 2.0, 1.0, 0.0];
        assert!((width_above_fraction(&x, &y, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        let mut seen = Vec::new();
        ordered_map(
            &items,
            |&i| {
                std::thread::sleep(std::time::Duration::from_micros(((50 - i) * 37 % 200) as u64));
                Ok(i * 2)
            },
            |idx, v| {
                assert_eq!(v, idx * 2);
                seen.push(idx);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen, items);
        let err = ordered_map(&items, |&i| if i == 7 { Err(Error::Numerical("x".into())) } else { Ok(i) }, |_, _| Ok(()));
        assert!(err.is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg: SweepConfig = "t = 1e-3, 1e-2\nb = 0.1, 0.3\nrestarts = 2".parse().unwrap();
        let mut a = Vec::new();
        let rows = run_sweep(&cfg, &mut a).unwrap();
        let mut b = Vec::new();
        rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_sweep(&cfg, &mut b)).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with(&SweepRecord::header().join(",")));
        assert_eq!(rows[1].b, 0.3);
        assert_eq!(rows[2].temperature, 1e-2);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.tau) && r.spread >= 0.0));
    }

    #[test]
    fn zero_field_ground_mixture_has_zero_tangle() {
        let rec = sweep_point(&SpinRingParams::isotropic(1.0, FieldKind::Radial, 0.0, 0.0), &OptimizerOptions::default()).unwrap();
        assert_eq!(rec.ground_degeneracy, 4);
        assert!(rec.tau < TAU_CUTOFF && rec.below_cutoff, "{}", rec.tau);
    }

    #[test]
    fn ground_state_reports() {
        let r = ground_state_report(&SpinRingParams { jxy: 1.0, jz: 0.0, field: FieldKind::UniformZ, b: 0.5, temperature: 0.0 }).unwrap();
        assert!(r.w_class_fidelity() >= 1.0 - 1e-10);
        assert!(r.closed_form.is_none());
        let r = ground_state_report(&SpinRingParams::isotropic(1.0, FieldKind::Radial, 0.5, 0.0)).unwrap();
        assert!(r.closed_form.unwrap().1.abs() <= 1e-10);
        assert!(r.to_string().contains("closed-form tangle"));
        let r = ground_state_report(&SpinRingParams::isotropic(1.0, FieldKind::Radial, 0.0, 0.0)).unwrap();
        assert_eq!(r.spectrum.ground_degeneracy, 4);
    }
}
