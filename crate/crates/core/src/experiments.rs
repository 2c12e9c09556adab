//! Monte Carlo sweeps over random instances.
//!
//! Every sweep is a grid of cells times a number of seeded trials. Work items
//! run on the rayon pool but results are always returned ordered by
//! `(cell, trial)`, and every random choice is derived from the master seed
//! and the item's position, so output does not depend on scheduling.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colouring::{exact_chi_w, greedy_colour_default, local_average_bound, two_stage_colour, ExactOutcome};
use crate::error::{Error, Result};
use crate::graph::{degree_stats, gen_gnp, Graph};
use crate::patterns::PatternGraph;
use crate::seed::Seed;
use crate::threshold::{colour_count, default_window, theta_threshold, uniform_colouring, CopyTable, FractionEstimate};
use crate::weights::{sample_weights, WeightDistributionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    T1a,
    T1b,
    T2,
    Concentration,
}

impl ExperimentKind {
    fn tag(self) -> u64 {
        match self {
            ExperimentKind::T1a => 1,
            ExperimentKind::T1b => 2,
            ExperimentKind::T2 => 3,
            ExperimentKind::Concentration => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::T1a => "t1a",
            ExperimentKind::T1b => "t1b",
            ExperimentKind::T2 => "t2",
            ExperimentKind::Concentration => "concentration",
        }
    }

    /// CSV header for this kind.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::T1a => &[
                "experiment",
                "n",
                "beta",
                "p",
                "graph_seed",
                "edges",
                "max_degree",
                "mu",
                "greedy_max",
                "local_bound",
                "two_stage_max",
                "bad_count",
                "exact_chi_w",
                "ratio",
                "two_stage_ratio",
            ],
            ExperimentKind::T1b => &[
                "experiment",
                "n",
                "beta",
                "p",
                "graph_seed",
                "edges",
                "max_degree",
                "max_weight",
                "ratio",
            ],
            ExperimentKind::T2 => &[
                "experiment",
                "n",
                "beta",
                "theta",
                "theta_th",
                "r",
                "M",
                "K",
                "graph_seed",
                "fraction",
                "stderr",
                "y_count",
                "z_count",
                "copies",
            ],
            ExperimentKind::Concentration => &[
                "experiment",
                "n",
                "p",
                "eps",
                "graph_seed",
                "max_degree",
                "deviations",
                "deviation_fraction",
                "chernoff_bound",
                "e_nei",
            ],
        }
    }

    fn default_trials(self) -> u64 {
        match self {
            ExperimentKind::T2 => 50,
            _ => 100,
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1a" => Ok(ExperimentKind::T1a),
            "t1b" => Ok(ExperimentKind::T1b),
            "t2" => Ok(ExperimentKind::T2),
            "concentration" => Ok(ExperimentKind::Concentration),
            other => Err(Error::invalid(format!("unknown experiment kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(Error::invalid(format!("unknown record format {other:?}"))),
        }
    }
}

fn default_dist() -> WeightDistributionSpec {
    WeightDistributionSpec::Constant(1)
}

fn default_eps() -> f64 {
    0.3
}

fn default_exact_max_n() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_grid: Vec<usize>,
    /// `p = n^-beta` per `n`; exclusive with `p_grid`.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub theta_grid: Vec<f64>,
    #[serde(default = "default_dist")]
    pub dist: WeightDistributionSpec,
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Seeds per cell (graph seeds for t2).
    #[serde(default)]
    pub trials: Option<u64>,
    /// Uniform colourings per graph (t2).
    #[serde(default)]
    pub colourings: Option<u64>,
    #[serde(default, rename = "K")]
    pub k: Option<u64>,
    #[serde(default, rename = "M")]
    pub m: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// t1a computes the exact weighted colouring number up to this many vertices.
    #[serde(default = "default_exact_max_n")]
    pub exact_max_n: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Record per-trial wall-clock time (makes output non-reproducible).
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n_grid: Vec<usize>) -> Self {
        ExperimentConfig {
            kind,
            n_grid,
            beta: None,
            p_grid: None,
            theta_grid: Vec::new(),
            dist: default_dist(),
            pattern: None,
            eps: default_eps(),
            trials: None,
            colourings: None,
            k: None,
            m: None,
            seed: 0,
            exact_max_n: default_exact_max_n(),
            output: None,
            format: OutputFormat::Csv,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(self.kind.default_trials())
    }

    pub fn colourings(&self) -> u64 {
        self.colourings.unwrap_or(200)
    }

    /// `(n, beta, p)` per graph cell.
    fn graph_cells(&self) -> Result<Vec<(usize, Option<f64>, f64)>> {
        match (&self.beta, &self.p_grid) {
            (Some(_), Some(_)) => Err(Error::invalid("give either beta or p_grid, not both")),
            (None, None) => Err(Error::invalid("one of beta or p_grid is required")),
            (Some(beta), None) => Ok(self
                .n_grid
                .iter()
                .map(|&n| (n, Some(*beta), p_from_beta(n, *beta)))
                .collect()),
            (None, Some(ps)) => {
                if ps.is_empty() {
                    return Err(Error::invalid("p_grid is empty"));
                }
                if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::invalid(format!("p {p} outside [0,1]")));
                }
                Ok(self
                    .n_grid
                    .iter()
                    .flat_map(|&n| ps.iter().map(move |&p| (n, None, p)))
                    .collect())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid is empty"));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::invalid("n must be >= 1"));
        }
        if self.trials() == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::invalid(format!("eps must lie in (0, 1/2), got {}", self.eps)));
        }
        self.dist.validate()?;
        if let Some(beta) = self.beta {
            if !beta.is_finite() {
                return Err(Error::invalid("beta must be finite"));
            }
        }
        self.graph_cells()?;
        match self.kind {
            ExperimentKind::T1a => {
                if self.dist.mean().is_none() {
                    return Err(Error::invalid(format!("{} has infinite mean", self.dist)));
                }
                if let Some(beta) = self.beta {
                    if !(beta > 0.0 && beta < 1.0) {
                        return Err(Error::invalid(format!("t1a needs beta in (0,1), got {beta}")));
                    }
                }
                for (n, _, p) in self.graph_cells()? {
                    if (n as f64) * p < 1.0 {
                        return Err(Error::invalid(format!("n p = {} < 1 at n = {n}", n as f64 * p)));
                    }
                }
            }
            ExperimentKind::T1b => {
                if let (WeightDistributionSpec::ParetoCeil(alpha), Some(beta)) = (self.dist, self.beta) {
                    // s = alpha / 2 must exceed 1 and beta must exceed 1 - 1/(2s - 1)
                    if alpha <= 2.0 {
                        return Err(Error::invalid(format!("t1b needs alpha > 2, got {alpha}")));
                    }
                    let floor = 1.0 - 1.0 / (alpha - 1.0);
                    if !(beta > floor && beta < 1.0) {
                        return Err(Error::invalid(format!("t1b needs beta in ({floor}, 1), got {beta}")));
                    }
                }
            }
            ExperimentKind::T2 => {
                if self.theta_grid.is_empty() {
                    return Err(Error::invalid("theta_grid is empty"));
                }
                if let Some(t) = self.theta_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                    return Err(Error::invalid(format!("theta {t} must be finite and >= 0")));
                }
                if self.colourings() == 0 {
                    return Err(Error::invalid("colourings must be >= 1"));
                }
                let gamma = self.pattern()?;
                if !gamma.is_balanced() {
                    return Err(Error::invalid(format!("pattern {} is not balanced", gamma.name())));
                }
                let beta = self.beta.ok_or_else(|| Error::invalid("t2 requires beta"))?;
                theta_threshold(gamma.v0() as u64, gamma.e0() as u64, beta)?;
                if self.k == Some(0) || self.m == Some(0) {
                    return Err(Error::invalid("K and M must be >= 1"));
                }
            }
            ExperimentKind::Concentration => {}
        }
        Ok(())
    }

    fn pattern(&self) -> Result<PatternGraph> {
        PatternGraph::named(self.pattern.as_deref().unwrap_or("triangle"))
    }
}

/// `p = n^-beta`, clamped to `[0, 1]`.
pub fn p_from_beta(n: usize, beta: f64) -> f64 {
    (n as f64).powf(-beta).clamp(0.0, 1.0)
}

/// One trial's measurements; fields that do not apply to a kind are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_th: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub graph_seed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_stage_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_chi_w: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_stage_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<u64>,
    /// Colourings where `Y <= good(v0(K+1)) <= Z` failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich_violations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chernoff_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_nei: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl TrialRecord {
    pub fn new(experiment: ExperimentKind, n: usize, graph_seed: &Seed) -> Self {
        TrialRecord {
            experiment,
            n,
            beta: None,
            p: None,
            theta: None,
            theta_th: None,
            r: None,
            m: None,
            k: None,
            eps: None,
            graph_seed: graph_seed.to_string(),
            edges: None,
            max_degree: None,
            mu: None,
            greedy_max: None,
            local_bound: None,
            two_stage_max: None,
            bad_count: None,
            exact_chi_w: None,
            ratio: None,
            two_stage_ratio: None,
            max_weight: None,
            fraction: None,
            stderr: None,
            y_count: None,
            z_count: None,
            copies: None,
            sandwich_violations: None,
            deviations: None,
            deviation_fraction: None,
            chernoff_bound: None,
            e_nei: None,
            wall_ms: None,
        }
    }

    fn cell(&self, column: &str) -> String {
        fn opt<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        match column {
            "experiment" => self.experiment.as_str().to_string(),
            "n" => self.n.to_string(),
            "beta" => opt(&self.beta),
            "p" => opt(&self.p),
            "theta" => opt(&self.theta),
            "theta_th" => opt(&self.theta_th),
            "r" => opt(&self.r),
            "M" => opt(&self.m),
            "K" => opt(&self.k),
            "eps" => opt(&self.eps),
            "graph_seed" => self.graph_seed.clone(),
            "edges" => opt(&self.edges),
            "max_degree" => opt(&self.max_degree),
            "mu" => opt(&self.mu),
            "greedy_max" => opt(&self.greedy_max),
            "local_bound" => opt(&self.local_bound),
            "two_stage_max" => opt(&self.two_stage_max),
            "bad_count" => opt(&self.bad_count),
            "exact_chi_w" => opt(&self.exact_chi_w),
            "ratio" => opt(&self.ratio),
            "two_stage_ratio" => opt(&self.two_stage_ratio),
            "max_weight" => opt(&self.max_weight),
            "fraction" => opt(&self.fraction),
            "stderr" => opt(&self.stderr),
            "y_count" => opt(&self.y_count),
            "z_count" => opt(&self.z_count),
            "copies" => opt(&self.copies),
            "deviations" => opt(&self.deviations),
            "deviation_fraction" => opt(&self.deviation_fraction),
            "chernoff_bound" => opt(&self.chernoff_bound),
            "e_nei" => opt(&self.e_nei),
            other => unreachable!("unknown column {other}"),
        }
    }

    /// The record with every field outside its kind's CSV columns cleared.
    pub fn csv_projection(&self) -> TrialRecord {
        let cols = self.experiment.columns();
        let keep = |c: &str| cols.contains(&c);
        let mut out = TrialRecord::new(self.experiment, self.n, &Seed::new(0));
        out.graph_seed = self.graph_seed.clone();
        macro_rules! copy_if {
            ($($field:ident => $col:literal),* $(,)?) => {
                $(if keep($col) { out.$field = self.$field.clone(); })*
            };
        }
        copy_if!(
            beta => "beta", p => "p", theta => "theta", theta_th => "theta_th", r => "r", m => "M", k => "K",
            eps => "eps", edges => "edges", max_degree => "max_degree", mu => "mu", greedy_max => "greedy_max",
            local_bound => "local_bound", two_stage_max => "two_stage_max", bad_count => "bad_count",
            exact_chi_w => "exact_chi_w", ratio => "ratio", two_stage_ratio => "two_stage_ratio",
            max_weight => "max_weight", fraction => "fraction", stderr => "stderr", y_count => "y_count",
            z_count => "z_count", copies => "copies", deviations => "deviations",
            deviation_fraction => "deviation_fraction", chernoff_bound => "chernoff_bound", e_nei => "e_nei",
        );
        out
    }
}

/// Serialized record sink; each record is flushed as soon as it is written.
pub struct RecordWriter {
    kind: ExperimentKind,
    format: OutputFormat,
    path: PathBuf,
    out: BufWriter<File>,
}

impl RecordWriter {
    /// Truncates `path` and writes the CSV header (if any).
    pub fn create(path: &Path, kind: ExperimentKind, format: OutputFormat) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = RecordWriter {
            kind,
            format,
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        w.header()?;
        Ok(w)
    }

    /// Appends to `path`, writing the header only if the file is empty.
    pub fn append(path: &Path, kind: ExperimentKind, format: OutputFormat) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let empty = file.metadata().map_err(|e| Error::io(path, e))?.len() == 0;
        let mut w = RecordWriter {
            kind,
            format,
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        if empty {
            w.header()?;
        }
        Ok(w)
    }

    fn header(&mut self) -> Result<()> {
        if self.format == OutputFormat::Csv {
            let line = self.kind.columns().join(",");
            self.line(&line)?;
        }
        Ok(())
    }

    fn line(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn write(&mut self, record: &TrialRecord) -> Result<()> {
        if record.experiment != self.kind {
            return Err(Error::invalid(format!(
                "{} record written to a {} sink",
                record.experiment.as_str(),
                self.kind.as_str()
            )));
        }
        let line = record_line(record, self.kind, self.format)?;
        self.line(&line)
    }
}

fn record_line(record: &TrialRecord, kind: ExperimentKind, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Csv => kind
            .columns()
            .iter()
            .map(|c| record.cell(c))
            .collect::<Vec<_>>()
            .join(","),
        OutputFormat::Jsonl => serde_json::to_string(record)?,
    })
}

/// The exact bytes [`emit`] would write, as a string.
pub fn render(records: &[TrialRecord], kind: ExperimentKind, format: OutputFormat) -> Result<String> {
    let mut out = String::new();
    if format == OutputFormat::Csv {
        out.push_str(&kind.columns().join(","));
        out.push('\n');
    }
    for r in records {
        if r.experiment != kind {
            return Err(Error::invalid(format!(
                "{} record in a {} table",
                r.experiment.as_str(),
                kind.as_str()
            )));
        }
        out.push_str(&record_line(r, kind, format)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `records` to a fresh file at `path`.
pub fn emit(records: &[TrialRecord], kind: ExperimentKind, format: OutputFormat, path: &Path) -> Result<()> {
    let mut w = RecordWriter::create(path, kind, format)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

pub fn read_records(path: &Path, format: OutputFormat) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        OutputFormat::Csv => {
            let mut reader = csv::Reader::from_reader(file);
            reader
                .deserialize()
                .map(|r| {
                    r.map_err(|source| Error::Csv {
                        path: path.to_path_buf(),
                        source,
                    })
                })
                .collect()
        }
        OutputFormat::Jsonl => {
            let mut out = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if !line.trim().is_empty() {
                    out.push(serde_json::from_str(&line)?);
                }
            }
            Ok(out)
        }
    }
}

/// Random instance of one trial.
struct Instance {
    graph_seed: Seed,
    graph: Graph,
}

fn instance(kind: ExperimentKind, master: u64, graph_cell: usize, trial: u64, n: usize, p: f64) -> Result<Instance> {
    let graph_seed = Seed::new(master)
        .child(kind.tag())
        .child(graph_cell as u64)
        .child(trial);
    let graph = gen_gnp(n, p, &graph_seed.child(0))?;
    Ok(Instance { graph_seed, graph })
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, timing.then(|| start.elapsed().as_secs_f64() * 1e3)))
}

fn par_trials<T: Send>(cells: usize, trials: u64, f: impl Fn(usize, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let items: Vec<(usize, u64)> = (0..cells).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    items.into_par_iter().map(|(c, t)| f(c, t)).collect()
}

/// Linear regime: greedy and two-stage colourings against `2 mu n p`.
pub fn run_t1a(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    check_kind(cfg, ExperimentKind::T1a)?;
    cfg.validate()?;
    let cells = cfg.graph_cells()?;
    let mu = cfg.dist.mean().expect("validated finite mean");
    par_trials(cells.len(), cfg.trials(), |c, t| {
        let (n, beta, p) = cells[c];
        let (rec, wall) = timed(cfg.timing, || {
            let inst = instance(cfg.kind, cfg.seed, c, t, n, p)?;
            let g = &inst.graph;
            let w = sample_weights(g, &cfg.dist, &inst.graph_seed.child(1))?;
            let greedy = greedy_colour_default(g, &w).max_colour();
            let (_, report) = two_stage_colour(g, &w, mu, p, cfg.eps)?;
            let scale = 2.0 * mu * n as f64 * p;
            let mut rec = TrialRecord::new(cfg.kind, n, &inst.graph_seed);
            rec.beta = beta;
            rec.p = Some(p);
            rec.eps = Some(cfg.eps);
            rec.edges = Some(g.m() as u64);
            rec.max_degree = Some(degree_stats(g).max_degree as u64);
            rec.mu = Some(mu);
            rec.greedy_max = Some(greedy);
            rec.local_bound = Some(local_average_bound(g, &w));
            rec.two_stage_max = Some(report.max_colour);
            rec.bad_count = Some(report.bad_vertices.len() as u64);
            if n <= cfg.exact_max_n {
                if let ExactOutcome::Optimal { chi_w, .. } = exact_chi_w(g, &w, 50_000_000) {
                    rec.exact_chi_w = Some(chi_w);
                }
            }
            rec.ratio = Some(greedy as f64 / scale);
            rec.two_stage_ratio = Some(report.max_colour as f64 / scale);
            Ok(rec)
        })?;
        Ok(TrialRecord { wall_ms: wall, ..rec })
    })
}

/// Heavy-tail regime: the largest edge weight against `n p`.
pub fn run_t1b(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    check_kind(cfg, ExperimentKind::T1b)?;
    cfg.validate()?;
    let cells = cfg.graph_cells()?;
    par_trials(cells.len(), cfg.trials(), |c, t| {
        let (n, beta, p) = cells[c];
        let (rec, wall) = timed(cfg.timing, || {
            let inst = instance(cfg.kind, cfg.seed, c, t, n, p)?;
            let g = &inst.graph;
            let w = sample_weights(g, &cfg.dist, &inst.graph_seed.child(1))?;
            let max_weight = w.max_weight();
            let np = n as f64 * p;
            let mut rec = TrialRecord::new(cfg.kind, n, &inst.graph_seed);
            rec.beta = beta;
            rec.p = Some(p);
            rec.edges = Some(g.m() as u64);
            rec.max_degree = Some(degree_stats(g).max_degree as u64);
            rec.max_weight = Some(max_weight);
            rec.ratio = Some(if np > 0.0 { max_weight as f64 / np } else { 0.0 });
            Ok(rec)
        })?;
        Ok(TrialRecord { wall_ms: wall, ..rec })
    })
}

/// Good-colouring fraction across a theta grid.
///
/// The graph for a given `(n, trial)` is shared by all theta values, so the
/// sweep compares colour budgets on the same instances.
pub fn run_t2(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    check_kind(cfg, ExperimentKind::T2)?;
    cfg.validate()?;
    let gamma = cfg.pattern()?;
    let beta = cfg.beta.expect("validated");
    let theta_th = theta_threshold(gamma.v0() as u64, gamma.e0() as u64, beta)?;
    let k = cfg.k.unwrap_or_else(|| cfg.dist.default_cutoff());
    let m = cfg.m.unwrap_or_else(|| default_window(&gamma, k));
    let m_sandwich = default_window(&gamma, k);
    let colourings = cfg.colourings();
    let thetas = &cfg.theta_grid;
    let ns = &cfg.n_grid;

    // graphs, weights and copy tables per (n, trial), shared across theta
    let tables: Vec<(Seed, usize, CopyTable)> = par_trials(ns.len(), cfg.trials(), |ni, t| {
        let n = ns[ni];
        let inst = instance(cfg.kind, cfg.seed, ni, t, n, p_from_beta(n, beta))?;
        let w = sample_weights(&inst.graph, &cfg.dist, &inst.graph_seed.child(1))?;
        Ok((inst.graph_seed, n, CopyTable::build(&inst.graph, &w, &gamma)))
    })?;
    let trials = cfg.trials() as usize;

    par_trials(thetas.len() * ns.len(), cfg.trials(), |cell, t| {
        let (ti, ni) = (cell / ns.len(), cell % ns.len());
        let theta = thetas[ti];
        let (graph_seed, n, table) = &tables[ni * trials + t as usize];
        let (rec, wall) = timed(cfg.timing, || {
            let r = colour_count(*n, theta)?;
            let colour_seed = Seed::new(cfg.seed)
                .child(cfg.kind.tag())
                .child(1000 + cell as u64)
                .child(t);
            let mut rng = colour_seed.rng();
            let (mut good, mut y_sum, mut z_sum, mut violations) = (0u64, 0u64, 0u64, 0u64);
            for _ in 0..colourings {
                let c = uniform_colouring(*n, r, &mut rng);
                if table.any_good(&c, m) {
                    good += 1;
                }
                let y = table.count_progressions(&c, k);
                let good_s = table.count_good(&c, m_sandwich);
                let z_s = table.count_within_window(&c, m_sandwich);
                if !(y <= good_s && good_s <= z_s) {
                    violations += 1;
                }
                y_sum += y;
                z_sum += if m == m_sandwich {
                    z_s
                } else {
                    table.count_within_window(&c, m)
                };
            }
            let est = FractionEstimate::from_counts(good, colourings);
            let mut rec = TrialRecord::new(cfg.kind, *n, graph_seed);
            rec.beta = Some(beta);
            rec.p = Some(p_from_beta(*n, beta));
            rec.theta = Some(theta);
            rec.theta_th = Some(theta_th);
            rec.r = Some(r);
            rec.m = Some(m);
            rec.k = Some(k);
            rec.fraction = Some(est.fraction);
            rec.stderr = Some(est.stderr);
            rec.y_count = Some(y_sum);
            rec.z_count = Some(z_sum);
            rec.copies = Some(table.len() as u64);
            rec.sandwich_violations = Some(violations);
            Ok(rec)
        })?;
        Ok(TrialRecord { wall_ms: wall, ..rec })
    })
}

/// `2 exp(-(eps^2 / 4) mu)`.
pub fn chernoff_bound(eps: f64, mean: f64) -> f64 {
    2.0 * (-(eps * eps / 4.0) * mean).exp()
}

/// Per-vertex degree deviations `|deg - (n-1)p| >= eps (n-1)p`.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    check_kind(cfg, ExperimentKind::Concentration)?;
    cfg.validate()?;
    let cells = cfg.graph_cells()?;
    let eps = cfg.eps;
    par_trials(cells.len(), cfg.trials(), |c, t| {
        let (n, beta, p) = cells[c];
        let (rec, wall) = timed(cfg.timing, || {
            let inst = instance(cfg.kind, cfg.seed, c, t, n, p)?;
            let stats = degree_stats(&inst.graph);
            let mean = (n - 1) as f64 * p;
            let deviations = stats
                .degrees
                .iter()
                .filter(|&&d| (d as f64 - mean).abs() >= eps * mean)
                .count() as u64;
            let np = n as f64 * p;
            let e_nei = stats
                .degrees
                .iter()
                .all(|&d| np * (1.0 - eps) <= d as f64 && d as f64 <= np * (1.0 + eps));
            let mut rec = TrialRecord::new(cfg.kind, n, &inst.graph_seed);
            rec.beta = beta;
            rec.p = Some(p);
            rec.eps = Some(eps);
            rec.max_degree = Some(stats.max_degree as u64);
            rec.deviations = Some(deviations);
            rec.deviation_fraction = Some(deviations as f64 / n as f64);
            rec.chernoff_bound = Some(chernoff_bound(eps, mean));
            rec.e_nei = Some(e_nei);
            Ok(rec)
        })?;
        Ok(TrialRecord { wall_ms: wall, ..rec })
    })
}

fn check_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::invalid(format!(
            "config is for {}, not {}",
            cfg.kind.as_str(),
            kind.as_str()
        )));
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    match cfg.kind {
        ExperimentKind::T1a => run_t1a(cfg),
        ExperimentKind::T1b => run_t1b(cfg),
        ExperimentKind::T2 => run_t2(cfg),
        ExperimentKind::Concentration => run_concentration(cfg),
    }
}

/// Runs the sweep and writes it to `cfg.output` when set.
pub fn run_and_emit(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let records = run(cfg)?;
    if let Some(path) = &cfg.output {
        emit(&records, cfg.kind, cfg.format, path)?;
    }
    Ok(records)
}
