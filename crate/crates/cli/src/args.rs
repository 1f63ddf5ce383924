//! Flag definitions and `--config` file merging.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "tpldca",
    version,
    about = "Inexact proximal linearized DC solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one algorithm on one problem and write trace.csv and summary.json.
    Solve(SolveArgs),
    /// Run tpldca and the baseline on the same instance.
    Compare(SolveArgs),
    /// Write the |x| counterexample reports.
    Counterexample(CounterexampleArgs),
    /// Print the registry problem names.
    List,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Tpldca,
    Souza,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Tpldca => "tpldca",
            Algorithm::Souza => "souza",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnerKind {
    Ista,
    Subgradient,
    Halving,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of `csv,json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Flat `key=value` file using the flag names; flags win on conflict.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SolveArgs {
    /// `paper2d`, `abs1d` or `rand_maxquad(n,p)`.
    #[arg(long)]
    pub problem: Option<String>,
    /// Ignored by `compare`, which runs both.
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// `inverse-square` for 1/(k+1)², or a positive constant.
    #[arg(long)]
    pub zeta: Option<String>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub inner_cap: Option<usize>,
    #[arg(long)]
    pub noise_radius: Option<f64>,
    /// Seed for the Step-1 perturbation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed for `rand_maxquad` instances.
    #[arg(long)]
    pub instance_seed: Option<u64>,
    /// Comma-separated start point; defaults to the problem's start.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, value_enum)]
    pub inner: Option<InnerKind>,
    /// ISTA step τ, or the subgradient step offset c.
    #[arg(long)]
    pub step: Option<f64>,
    /// Keep the per-inner-iteration gap series.
    #[arg(long)]
    pub record_inner: bool,
    /// Comma-separated outer indices whose inner series are written.
    #[arg(long)]
    pub inner_k: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Default)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub imax: Option<usize>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

const SOLVE_KEYS: &[&str] = &[
    "problem",
    "algorithm",
    "sigma",
    "lambda",
    "theta",
    "rho",
    "gamma",
    "zeta",
    "outer-tol",
    "max-outer",
    "inner-cap",
    "noise-radius",
    "seed",
    "instance-seed",
    "x0",
    "inner",
    "step",
    "record-inner",
    "inner-k",
    "out",
    "format",
];

const COUNTEREXAMPLE_KEYS: &[&str] = &["theta", "lambda", "imax", "zeta", "out", "format"];

/// Reads `key=value` lines; `#` starts a comment. Keys may be written with `_` or `-`.
pub fn read_config_file(path: &Path, allowed: &[&str]) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !allowed.contains(&key.as_str()) {
            bail!("{}:{}: unknown key `{key}`", path.display(), n + 1);
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn fill<T: FromStr>(slot: &mut Option<T>, map: &BTreeMap<String, String>, key: &str) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(v.parse().map_err(|e| anyhow!("config key `{key}`: {e}"))?);
        }
    }
    Ok(())
}

fn fill_enum<T: ValueEnum>(
    slot: &mut Option<T>,
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<()> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(T::from_str(v, true).map_err(|e| anyhow!("config key `{key}`: {e}"))?);
        }
    }
    Ok(())
}

fn fill_output(out: &mut OutputArgs, map: &BTreeMap<String, String>) -> Result<()> {
    fill(&mut out.out, map, "out")?;
    fill(&mut out.format, map, "format")
}

impl SolveArgs {
    pub fn merge_config(&mut self) -> Result<()> {
        let Some(path) = self.output.config.clone() else {
            return Ok(());
        };
        let map = read_config_file(&path, SOLVE_KEYS)?;
        fill(&mut self.problem, &map, "problem")?;
        fill_enum(&mut self.algorithm, &map, "algorithm")?;
        fill(&mut self.sigma, &map, "sigma")?;
        fill(&mut self.lambda, &map, "lambda")?;
        fill(&mut self.theta, &map, "theta")?;
        fill(&mut self.rho, &map, "rho")?;
        fill(&mut self.gamma, &map, "gamma")?;
        fill(&mut self.zeta, &map, "zeta")?;
        fill(&mut self.outer_tol, &map, "outer-tol")?;
        fill(&mut self.max_outer, &map, "max-outer")?;
        fill(&mut self.inner_cap, &map, "inner-cap")?;
        fill(&mut self.noise_radius, &map, "noise-radius")?;
        fill(&mut self.seed, &map, "seed")?;
        fill(&mut self.instance_seed, &map, "instance-seed")?;
        fill(&mut self.x0, &map, "x0")?;
        fill_enum(&mut self.inner, &map, "inner")?;
        fill(&mut self.step, &map, "step")?;
        fill(&mut self.inner_k, &map, "inner-k")?;
        if !self.record_inner {
            let mut flag = None;
            fill::<bool>(&mut flag, &map, "record-inner")?;
            self.record_inner = flag.unwrap_or(false);
        }
        fill_output(&mut self.output, &map)
    }
}

impl CounterexampleArgs {
    pub fn merge_config(&mut self) -> Result<()> {
        let Some(path) = self.output.config.clone() else {
            return Ok(());
        };
        let map = read_config_file(&path, COUNTEREXAMPLE_KEYS)?;
        fill(&mut self.theta, &map, "theta")?;
        fill(&mut self.lambda, &map, "lambda")?;
        fill(&mut self.imax, &map, "imax")?;
        fill(&mut self.zeta, &map, "zeta")?;
        fill_output(&mut self.output, &map)
    }
}

/// Which file kinds to write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

pub fn parse_formats(list: Option<&str>) -> Result<Formats> {
    let mut f = Formats {
        csv: false,
        json: false,
    };
    for part in list.unwrap_or("csv,json").split(',').map(str::trim) {
        match part {
            "csv" => f.csv = true,
            "json" => f.json = true,
            other => bail!("unknown format `{other}` (expected csv and/or json)"),
        }
    }
    Ok(f)
}

pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| anyhow!("{what}: cannot parse `{p}`: {e}"))
        })
        .collect()
}
