use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;
use sgswe::basis::{BetaParams, DistributionSpec};
use sgswe::scenarios::{builtin_scenario, ScenarioSpec};
use sgswe::solver::{Integrator, SolverConfig, SourceDiscretization};

use crate::CliError;

/// `NX x NY`, written `100x100` or just `100` for a square grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("invalid grid size `{s}`"))
        };
        match s.split_once(['x', 'X']) {
            Some((a, b)) => Ok(Self {
                nx: parse(a)?,
                ny: parse(b)?,
            }),
            None => {
                let n = parse(s)?;
                Ok(Self { nx: n, ny: n })
            }
        }
    }
}

impl TryFrom<String> for GridSize {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl std::fmt::Display for GridSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

/// Beta exponents `alpha:beta` of one random variable; `[alpha, beta]` in
/// a config file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct BetaPair(pub f64, pub f64);

impl FromStr for BetaPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected alpha:beta, got `{s}`"))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Self(num(a)?, num(b)?))
    }
}

/// Every tunable setting. Each one may come from the top level of the
/// config file, from its `[scenario-N]` section, or from a flag, in
/// increasing order of precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Built-in scenario, 1 to 5
    #[arg(long, short)]
    pub scenario: Option<u32>,
    /// Grid as NXxNY or N
    #[arg(long)]
    pub grid: Option<GridSize>,
    /// Number of basis terms (a full tensor set)
    #[arg(long, short)]
    pub k: Option<usize>,
    /// Maximum degree per random dimension
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
    /// Beta exponents per random dimension, as alpha:beta
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<BetaPair>>,
    /// Minmod parameter in [1, 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Offset added to active filter parameters
    #[arg(long)]
    pub delta: Option<f64>,
    /// Desingularization threshold (default min(dx, dy))
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    /// ssp-rk2 or ssp-rk3
    #[arg(long)]
    pub integrator: Option<String>,
    /// well-balanced, or cell-centered as a negative control
    #[arg(long)]
    pub source: Option<String>,
    /// Output times
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    #[arg(long)]
    pub end_time: Option<f64>,
    /// Output directory
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads
    #[arg(long, env = "SGSWE_THREADS")]
    pub threads: Option<usize>,

    /// Convergence grids
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<GridSize>>,
    /// Convergence reference grid
    #[arg(long)]
    pub reference: Option<GridSize>,
    /// Collocation points per random dimension
    #[arg(long)]
    pub points: Option<usize>,
    /// Lake surface coefficients for the well-balance check
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eta: Option<Vec<f64>>,
    /// Well-balance tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Basis sizes for the closure discrepancy study
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Params {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &Params) -> Params {
        overlay!(self, top; scenario, grid, k, degrees, beta, theta, delta, epsilon, cfl,
            integrator, source, snapshots, end_time, output, threads, grids, reference,
            points, eta, tol, ks);
        self
    }
}

/// Reads a config file: top-level keys plus optional `[scenario-N]`
/// sections that apply only when scenario N is selected.
pub fn load_file(path: &Path) -> Result<(Params, Vec<(u32, Params)>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let section_keys: Vec<String> = table
        .keys()
        .filter(|k| k.starts_with("scenario-"))
        .cloned()
        .collect();
    let mut sections = Vec::new();
    for key in section_keys {
        let id = key["scenario-".len()..]
            .parse::<u32>()
            .map_err(|_| CliError::Config(format!("bad section name [{key}]")))?;
        let value = table.remove(&key).unwrap();
        let params =
            Params::deserialize(value).map_err(|e| CliError::Config(format!("[{key}]: {e}")))?;
        sections.push((id, params));
    }
    let top = Params::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((top, sections))
}

/// Merges the config file (if any) under the flags.
pub fn merge(file: Option<&Path>, flags: &Params) -> Result<Params, CliError> {
    let Some(path) = file else {
        return Ok(flags.clone());
    };
    let (top, sections) = load_file(path)?;
    let scenario = flags.scenario.or(top.scenario).unwrap_or(1);
    let mut merged = top;
    for (id, section) in &sections {
        if *id == scenario {
            merged = merged.overlay(section);
        }
    }
    Ok(merged.overlay(flags))
}

/// A fully resolved problem.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ScenarioSpec,
    pub grid: GridSize,
    pub cfg: SolverConfig,
    pub output: PathBuf,
    pub params: Params,
}

fn domain(e: sgswe::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn resolve(params: Params) -> Result<Resolved, CliError> {
    let mut spec = builtin_scenario(params.scenario.unwrap_or(1)).map_err(domain)?;
    if let Some(pairs) = &params.beta {
        let marginals = pairs
            .iter()
            .map(|p| BetaParams::new(p.0, p.1))
            .collect::<sgswe::Result<Vec<_>>>()
            .map_err(domain)?;
        if marginals.len() != spec.distribution.dim() {
            return Err(CliError::Config(format!(
                "scenario {} has {} random variables, got {} beta pairs",
                spec.id,
                spec.distribution.dim(),
                marginals.len()
            )));
        }
        spec.distribution = DistributionSpec::new(marginals).map_err(domain)?;
    }
    match (params.k, &params.degrees) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either k or degrees, not both".into(),
            ));
        }
        (Some(k), None) => spec = spec.with_terms(k).map_err(domain)?,
        (None, Some(d)) => spec = spec.with_max_degrees(d).map_err(domain)?,
        (None, None) => {}
    }
    if let Some(t) = params.end_time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!(
                "end time must be positive, got {t}"
            )));
        }
        spec.end_time = t;
    }
    if let Some(s) = &params.snapshots {
        if let Some(bad) = s.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::Config(format!("invalid snapshot time {bad}")));
        }
        spec.snapshots = s.clone();
        if params.end_time.is_none() {
            if let Some(last) = s.iter().copied().reduce(f64::max).filter(|&t| t > 0.0) {
                spec.end_time = last;
            }
        }
    }
    let mut cfg = spec.solver_config();
    if let Some(v) = params.theta {
        cfg.theta = v;
    }
    if let Some(v) = params.delta {
        cfg.delta = v;
    }
    if let Some(v) = params.epsilon {
        cfg.epsilon = Some(v);
    }
    if let Some(v) = params.cfl {
        cfg.cfl = v;
    }
    if let Some(name) = &params.integrator {
        cfg.integrator = match name.as_str() {
            "ssp-rk2" => Integrator::SspRk2,
            "ssp-rk3" => Integrator::SspRk3,
            other => return Err(CliError::Config(format!("unknown integrator `{other}`"))),
        };
    }
    if let Some(name) = &params.source {
        cfg.source = match name.as_str() {
            "well-balanced" => SourceDiscretization::WellBalanced,
            "cell-centered" => SourceDiscretization::CellCentered,
            other => {
                return Err(CliError::Config(format!(
                    "unknown source discretization `{other}`"
                )))
            }
        };
    }
    cfg.validate().map_err(domain)?;
    if params.threads == Some(0) {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    let grid = params.grid.unwrap_or(GridSize {
        nx: spec.grid,
        ny: spec.grid,
    });
    let output = params
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("sgswe-out"));
    Ok(Resolved {
        spec,
        grid,
        cfg,
        output,
        params,
    })
}
