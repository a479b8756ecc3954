//! JSON and CSV file formats. FORMATS.md is the reference for every layout
//! defined here.

use std::fs;
use std::path::Path;

use hessma_core::geometry::{CosineTerm, DensityKind};
use hessma_core::solver::{AtomicMeasure, DensitySpec, FlatReport, SolveMethod};
use hessma_core::{EnvelopeFunction, GridFunction, Point, ScalarDensity, SolveConfig, SolveReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn point(coords: &[f64], dim: usize, what: &str) -> CliResult<Point> {
    if coords.len() != dim {
        return Err(CliError::input(format!("{what}: expected {dim} coordinates, found {}", coords.len())));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(CliError::input(format!("{what}: coordinates must be finite")));
    }
    Ok(Point::new(coords))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDto {
    pub freq: Vec<i64>,
    pub amp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityDto {
    Constant { value: f64 },
    Cosine { c0: f64, terms: Vec<TermDto> },
}

impl DensityDto {
    pub fn to_density(&self, dim: usize) -> CliResult<ScalarDensity> {
        let rho = match self {
            DensityDto::Constant { value } => ScalarDensity::constant(*value)?,
            DensityDto::Cosine { c0, terms } => ScalarDensity::cosine(
                *c0,
                terms.iter().map(|t| CosineTerm { freq: t.freq.clone(), amp: t.amp }).collect(),
            )?,
        };
        match rho.dim() {
            Some(d) if d != dim => {
                Err(CliError::input(format!("density frequencies have dimension {d}, problem has dimension {dim}")))
            }
            _ => Ok(rho),
        }
    }

    pub fn from_density(rho: &ScalarDensity) -> Self {
        match rho.kind() {
            DensityKind::Constant(v) => DensityDto::Constant { value: *v },
            DensityKind::Cosine { c0, terms } => DensityDto::Cosine {
                c0: *c0,
                terms: terms.iter().map(|t| TermDto { freq: t.freq.clone(), amp: t.amp }).collect(),
            },
        }
    }
}

fn density_or_uniform(d: &Option<DensityDto>, dim: usize) -> CliResult<ScalarDensity> {
    d.as_ref().map_or(Ok(ScalarDensity::uniform()), |d| d.to_density(dim))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDto {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodDto {
    Damped,
    Newton,
}

impl From<MethodDto> for SolveMethod {
    fn from(m: MethodDto) -> Self {
        match m {
            MethodDto::Damped => SolveMethod::Damped,
            MethodDto::Newton => SolveMethod::Newton,
        }
    }
}

impl From<SolveMethod> for MethodDto {
    fn from(m: SolveMethod) -> Self {
        match m {
            SolveMethod::Damped => MethodDto::Damped,
            SolveMethod::Newton => MethodDto::Newton,
        }
    }
}

/// Solver settings; absent fields keep the defaults of the command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDto {
    pub tol: Option<f64>,
    pub tau: Option<f64>,
    pub max_iter: Option<usize>,
    pub truncation: Option<usize>,
    pub liftoff_step: Option<f64>,
    pub method: Option<MethodDto>,
}

impl ConfigDto {
    pub fn apply(&self, mut cfg: SolveConfig) -> SolveConfig {
        if let Some(v) = self.method {
            if SolveMethod::from(v) != cfg.method {
                let tol = cfg.tol;
                cfg = if v == MethodDto::Newton { SolveConfig::newton() } else { SolveConfig::default() };
                cfg.tol = tol;
            }
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.truncation {
            cfg.truncation = v;
        }
        if let Some(v) = self.liftoff_step {
            cfg.liftoff_step = v;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleDto {
    /// `ε_k = ratio^k` down to `eps_min`.
    Geometric { ratio: f64, eps_min: f64 },
    /// An explicit strictly decreasing list of exponents.
    Explicit { values: Vec<f64> },
}

/// Input of `solve-twisted` and `solve-flat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub atoms: Vec<AtomDto>,
    #[serde(default)]
    pub density: Option<DensityDto>,
    #[serde(default)]
    pub epsilon_exp: Option<f64>,
    #[serde(default)]
    pub config: Option<ConfigDto>,
    #[serde(default)]
    pub schedule: Option<ScheduleDto>,
    #[serde(default)]
    pub spread_threshold: Option<f64>,
}

impl ProblemFile {
    pub fn measure(&self) -> CliResult<AtomicMeasure> {
        atoms_to_measure(self.dim, &self.atoms)
    }

    pub fn density(&self) -> CliResult<ScalarDensity> {
        density_or_uniform(&self.density, self.dim)
    }
}

fn atoms_to_measure(dim: usize, atoms: &[AtomDto]) -> CliResult<AtomicMeasure> {
    if !(1..=2).contains(&dim) {
        return Err(CliError::input(format!("dim must be 1 or 2, found {dim}")));
    }
    if atoms.is_empty() {
        return Err(CliError::input("atoms: at least one atom is required"));
    }
    let sites = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| point(&a.point, dim, &format!("atoms[{i}].point")))
        .collect::<CliResult<Vec<_>>>()?;
    let weights = atoms.iter().map(|a| a.weight).collect();
    Ok(AtomicMeasure::positive(sites, weights)?)
}

/// A serialized envelope function: `{sites, values, truncation}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDto {
    pub sites: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Density for the measure computations; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityDto>,
}

fn default_truncation() -> usize {
    SolveConfig::default().truncation
}

impl EnvelopeDto {
    pub fn from_envelope(f: &EnvelopeFunction) -> Self {
        EnvelopeDto {
            sites: f.sites().iter().map(|p| p.coords().to_vec()).collect(),
            values: f.values().to_vec(),
            truncation: f.truncation(),
            density: None,
        }
    }

    pub fn to_envelope(&self) -> CliResult<EnvelopeFunction> {
        let dim = self.sites.first().map_or(0, Vec::len);
        if !(1..=2).contains(&dim) {
            return Err(CliError::input("sites: need at least one site of dimension 1 or 2"));
        }
        let sites = self
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| point(s, dim, &format!("sites[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(EnvelopeFunction::new(sites, self.values.clone(), self.truncation)?)
    }
}

/// `solution.json` of `solve-twisted`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub dim: usize,
    pub sites: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub truncation: usize,
    pub epsilon_exp: f64,
    pub method: MethodDto,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    pub history: Vec<f64>,
}

impl SolutionFile {
    pub fn new(f: &EnvelopeFunction, report: &SolveReport) -> Self {
        let e = EnvelopeDto::from_envelope(f);
        SolutionFile {
            dim: f.dim(),
            sites: e.sites,
            values: e.values,
            truncation: e.truncation,
            epsilon_exp: report.eps_exp,
            method: report.method.into(),
            converged: report.converged,
            iterations: report.iterations,
            max_residual: report.max_residual(),
            residuals: report.residuals.clone(),
            history: report.history.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatStepDto {
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub c: f64,
    pub converged: bool,
}

/// `flat_report.json` of `solve-flat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatReportFile {
    pub c: f64,
    pub spread: f64,
    pub spread_threshold: f64,
    pub spread_ok: bool,
    pub per_atom_c: Vec<f64>,
    pub mass_residual: f64,
    pub converged: bool,
    pub steps: Vec<FlatStepDto>,
    /// The sup-normalized solution at the last exponent.
    pub solution: EnvelopeDto,
    pub samples_file: String,
}

impl FlatReportFile {
    pub fn new(r: &FlatReport, spread_threshold: f64, samples_file: &str) -> Self {
        FlatReportFile {
            c: r.c,
            spread: r.spread,
            spread_threshold,
            spread_ok: r.spread_ok,
            per_atom_c: r.per_atom_c.clone(),
            mass_residual: r.mass_residual,
            converged: r.converged,
            steps: r
                .steps
                .iter()
                .map(|s| FlatStepDto { eps: s.eps, iterations: s.iterations, residual: s.residual, c: s.c, converged: s.converged })
                .collect(),
            solution: EnvelopeDto::from_envelope(&r.solution),
            samples_file: samples_file.to_string(),
        }
    }
}

/// Input of `measure` and `regularize`: an envelope JSON, a solution JSON or
/// a grid CSV.
pub enum FunctionInput {
    Envelope(EnvelopeFunction),
    Grid(GridFunction),
}

impl FunctionInput {
    pub fn dim(&self) -> usize {
        match self {
            FunctionInput::Envelope(f) => f.dim(),
            FunctionInput::Grid(g) => g.dim(),
        }
    }
}

/// Read a function and the density attached to it (uniform for CSV input).
pub fn read_function(path: &Path) -> CliResult<(FunctionInput, ScalarDensity)> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok((FunctionInput::Grid(read_grid_csv(path)?), ScalarDensity::uniform()))
    } else {
        let dto: EnvelopeDto = read_json(path)?;
        let f = dto.to_envelope()?;
        let rho = density_or_uniform(&dto.density, f.dim())?;
        Ok((FunctionInput::Envelope(f), rho))
    }
}

/// `masses.json` of the exact oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMassesFile {
    pub oracle: String,
    pub sites: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    pub volumes: Vec<f64>,
    pub total: f64,
    pub truncation: usize,
}

/// `masses.json` of the sampling oracles; the bins are listed in
/// `partition.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedMassesFile {
    pub oracle: String,
    pub dim: usize,
    pub bins: usize,
    pub offset: f64,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub grid: usize,
    pub masses: Vec<f64>,
    pub stderr: Vec<f64>,
    pub total: f64,
}

/// Input of `quantize`: a density or weighted point samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpecFile {
    pub dim: usize,
    #[serde(default)]
    pub density: Option<DensityDto>,
    #[serde(default)]
    pub samples: Option<Vec<AtomDto>>,
}

impl DensitySpecFile {
    pub fn to_spec(&self) -> CliResult<DensitySpec> {
        match (&self.density, &self.samples) {
            (Some(_), Some(_)) => Err(CliError::input("give either density or samples, not both")),
            (None, Some(s)) => {
                let points = s
                    .iter()
                    .enumerate()
                    .map(|(i, a)| Ok((point(&a.point, self.dim, &format!("samples[{i}].point"))?, a.weight)))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(DensitySpec::Samples { dim: self.dim, points })
            }
            (d, None) => Ok(DensitySpec::Density(density_or_uniform(d, self.dim)?)),
        }
    }
}

/// `measure.json` of `quantize`; the atoms use the problem-file layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub atoms: Vec<AtomDto>,
}

impl MeasureFile {
    pub fn new(mu: &AtomicMeasure) -> Self {
        MeasureFile {
            dim: mu.dim(),
            atoms: mu
                .sites()
                .iter()
                .zip(mu.weights())
                .map(|(p, w)| AtomDto { point: p.coords().to_vec(), weight: *w })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> CliResult<AtomicMeasure> {
        atoms_to_measure(self.dim, &self.atoms)
    }
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

fn axis_names(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).map(|a| format!("{prefix}x{a}")).collect()
}

/// Write a grid function as `x0(,x1),value` rows in node order.
pub fn write_grid_csv(path: &Path, g: &GridFunction) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = axis_names("", g.dim());
    header.push("value".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (x, v) in GridFunction::nodes(g.dim(), g.resolution()).zip(g.values()) {
        let mut row: Vec<String> = x.coords().iter().map(f64::to_string).collect();
        row.push(v.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a grid CSV written by [`write_grid_csv`]. Rows must list every node
/// of an `m^dim` grid in node order.
pub fn read_grid_csv(path: &Path) -> CliResult<GridFunction> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let dim = header.len().saturating_sub(1);
    if !(1..=2).contains(&dim) || header.get(dim) != Some("value") {
        return Err(csv_err(path, "header must be x0,value or x0,x1,value"));
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| csv_err(path, format!("row {}: {e}", line + 2)))?;
        values.push(nums[dim]);
        coords.push(Point::new(&nums[..dim]));
    }
    let m = (values.len() as f64).powf(1.0 / dim as f64).round() as usize;
    if m < 2 || m.pow(dim as u32) != values.len() {
        return Err(csv_err(path, format!("{} rows do not form a square grid in dimension {dim}", values.len())));
    }
    for (k, (x, y)) in GridFunction::nodes(dim, m).zip(&coords).enumerate() {
        if (x - *y).norm_inf() > 1e-9 {
            return Err(csv_err(path, format!("row {}: expected node {:?}", k + 2, x.coords())));
        }
    }
    Ok(GridFunction::new(dim, m, values)?)
}

/// One row of `partition.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinRow {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub mass: f64,
    pub stderr: f64,
}

/// Write binned masses as `lo_x..,hi_x..,mass,stderr` rows.
pub fn write_partition_csv(path: &Path, rows: &[BinRow]) -> CliResult<()> {
    let dim = rows.first().map_or(1, |r| r.lo.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = axis_names("lo_", dim);
    header.extend(axis_names("hi_", dim));
    header.extend(["mass".to_string(), "stderr".to_string()]);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        let row: Vec<String> =
            r.lo.iter().chain(&r.hi).chain([&r.mass, &r.stderr]).map(f64::to_string).collect();
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition_csv(path: &Path) -> CliResult<Vec<BinRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let width = r.headers().map_err(|e| csv_err(path, e))?.len();
    if width != 4 && width != 6 {
        return Err(csv_err(path, "expected 4 columns (dim 1) or 6 columns (dim 2)"));
    }
    let dim = (width - 2) / 2;
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| csv_err(path, format!("row {}: {e}", line + 2)))?;
        rows.push(BinRow { lo: nums[..dim].to_vec(), hi: nums[dim..2 * dim].to_vec(), mass: nums[2 * dim], stderr: nums[2 * dim + 1] });
    }
    Ok(rows)
}

pub fn partition_rows(pm: &hessma_core::PartitionMeasure) -> Vec<BinRow> {
    (0..pm.partition.len())
        .map(|i| BinRow {
            lo: pm.partition.lower(i).coords().to_vec(),
            hi: pm.partition.upper(i).coords().to_vec(),
            mass: pm.masses[i],
            stderr: pm.stderr[i],
        })
        .collect()
}
