//! Configuration resolution and the subcommands of the `memoryflow` binary.
//!
//! Settings come from built-in defaults, then an optional `key = value`
//! config file, then command-line flags. Every command writes CSV preceded
//! by a `#` metadata block that echoes the resolved configuration, so output
//! depends only on that configuration.
//!
//! Exit codes: 0 success, 1 invalid parameters, 2 numerical convergence
//! failure, 3 partial sweep failure, 4 property-suite failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::checks::{run_all, CheckConfig, Corruption, SuiteReport};
use crate::dephasing::{Decoherence, DephasingParams, LinearGamma, MatsubaraTruncation, SpinBoson};
use crate::nonmarkov::{
    quantifier_of_gamma, PairStrategy, RevivalAnalysis, StatePair, TimeGrid, Trajectory,
};
use crate::quantifiers::{Mu, QuantifierKind};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_PARTIAL_SWEEP: i32 = 3;
pub const EXIT_SUITE_FAILURE: i32 = 4;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "MEMORYFLOW_THREADS";

/// Counterexamples listed per suite subject by `check`.
const MAX_LISTED: usize = 10;
const DEFAULT_GRID_RESOLUTION: usize = 12;
/// Horizon and resolution used with `--gamma-linear` when none is given.
const LINEAR_DEFAULT_TMAX: f64 = 10.0;
const LINEAR_DEFAULT_STEPS: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "memoryflow",
    version,
    about = "Non-Markovianity of qubit dephasing from distinguishability revivals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Decoherence function Γ(t) on the time grid (one block per β).
    Gamma,
    /// Quantifiers of the dephased equatorial pair along the trajectory.
    Series,
    /// Non-Markovianity measure and revival windows.
    Measure,
    /// Measure over a β or κ sweep.
    Sweep,
    /// Run the seeded property suites.
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gamma => "gamma",
            Command::Series => "series",
            Command::Measure => "measure",
            Command::Sweep => "sweep",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameter {
    Beta,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Equatorial,
    Grid,
}

/// Command-line flags; every value is optional so that config-file values
/// can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub omega0: Option<f64>,
    /// One or more inverse temperatures, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Comma-separated subset of D,sqrtJ,K,S.
    #[arg(long, global = true)]
    pub quantifiers: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub sweep: Option<SweepParameter>,
    #[arg(long, global = true)]
    pub from: Option<f64>,
    #[arg(long, global = true)]
    pub to: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Log-spaced sweep points.
    #[arg(long, global = true)]
    pub log: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// 17 significant digits instead of 7.
    #[arg(long, global = true)]
    pub full_precision: bool,
    #[arg(long, global = true, value_enum)]
    pub strategy: Option<StrategyName>,
    /// Bloch-grid levels per axis for `--strategy grid`.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Replace Γ by the linear function C·t.
    #[arg(long, global = true, value_name = "C")]
    pub gamma_linear: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative stopping tolerance of the Matsubara series.
    #[arg(long, global = true)]
    pub matsubara_tol: Option<f64>,
    /// Cap on the number of Matsubara terms.
    #[arg(long, global = true)]
    pub matsubara_terms: Option<usize>,
    /// Random instances per property in `check`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, hide = true)]
    pub corrupt_contractivity: bool,
}

const CONFIG_KEYS: [&str; 24] = [
    "kappa",
    "eta",
    "omega0",
    "beta",
    "tmax",
    "steps",
    "mu",
    "quantifiers",
    "sweep",
    "from",
    "to",
    "points",
    "log",
    "out",
    "seed",
    "full_precision",
    "strategy",
    "resolution",
    "gamma_linear",
    "threads",
    "samples",
    "matsubara_tol",
    "matsubara_terms",
    "corrupt_contractivity",
];

/// Parses `key = value` lines. Keys accept `-` or `_`; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", n + 1))?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(format!("config line {}: unknown key '{key}'", n + 1));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("config line {}: duplicate key '{key}'", n + 1));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        from: f64,
        to: f64,
        points: usize,
        scale: SweepScale,
    ) -> crate::Result<Self> {
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(Error::param(format!(
                "sweep needs from < to, got [{from}, {to}]"
            )));
        }
        if from <= 0.0 {
            return Err(Error::param(format!(
                "sweep values must be positive, got from = {from}"
            )));
        }
        if points < 2 {
            return Err(Error::param(format!(
                "sweep needs at least 2 points, got {points}"
            )));
        }
        Ok(Self {
            parameter,
            from,
            to,
            points,
            scale,
        })
    }

    /// Ascending parameter values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.from;
                }
                if i == self.points - 1 {
                    return self.to;
                }
                let s = i as f64 / last;
                match self.scale {
                    SweepScale::Linear => self.from + s * (self.to - self.from),
                    SweepScale::Log => (self.from.ln() + s * (self.to / self.from).ln()).exp(),
                }
            })
            .collect()
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kappa: f64,
    pub eta: f64,
    pub omega0: f64,
    pub betas: Vec<f64>,
    pub tmax: Option<f64>,
    pub steps: Option<usize>,
    pub mu: Mu,
    pub quantifiers: Vec<QuantifierKind>,
    pub strategy: PairStrategy,
    pub gamma_linear: Option<f64>,
    pub sweep: SweepSpec,
    pub truncation: MatsubaraTruncation,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub full_precision: bool,
    pub threads: Option<usize>,
    pub samples: usize,
    pub corruption: Option<Corruption>,
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> crate::Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::param(format!("cannot parse {key} = '{raw}'")))
}

fn parse_bool(key: &str, raw: &str) -> crate::Result<bool> {
    match raw.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::param(format!(
            "cannot parse {key} = '{raw}' as a boolean"
        ))),
    }
}

fn parse_list(key: &str, raw: &str) -> crate::Result<Vec<f64>> {
    raw.split(',').map(|s| parse_value(key, s)).collect()
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> crate::Result<T> {
    T::from_str(raw.trim(), true).map_err(|_| Error::param(format!("invalid {key} '{raw}'")))
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(
        flags: &Flags,
        file: &BTreeMap<String, String>,
        env_threads: Option<&str>,
    ) -> crate::Result<Self> {
        let get = |key: &str| file.get(key).map(String::as_str);
        macro_rules! pick {
            ($flag:expr, $key:literal, $default:expr) => {
                match ($flag, get($key)) {
                    (Some(v), _) => v,
                    (None, Some(raw)) => parse_value($key, raw)?,
                    (None, None) => $default,
                }
            };
        }
        macro_rules! pick_opt {
            ($flag:expr, $key:literal) => {
                match ($flag, get($key)) {
                    (Some(v), _) => Some(v),
                    (None, Some(raw)) => Some(parse_value($key, raw)?),
                    (None, None) => None,
                }
            };
        }
        let switch = |flag: bool, key: &str| -> crate::Result<bool> {
            if flag {
                return Ok(true);
            }
            get(key).map_or(Ok(false), |raw| parse_bool(key, raw))
        };

        let mu = Mu::new(pick!(flags.mu, "mu", Mu::QUARTER.get()))?;
        let betas = match (&flags.beta, get("beta")) {
            (Some(v), _) => v.clone(),
            (None, Some(raw)) => parse_list("beta", raw)?,
            (None, None) => vec![10.0],
        };
        if betas.is_empty() {
            return Err(Error::param("at least one beta is required"));
        }
        let names = flags
            .quantifiers
            .clone()
            .or_else(|| get("quantifiers").map(str::to_string))
            .unwrap_or_else(|| "D,sqrtJ,K,S".to_string());
        let quantifiers = names
            .split(',')
            .map(|n| QuantifierKind::parse(n, mu))
            .collect::<crate::Result<Vec<_>>>()?;
        let strategy_name = match (flags.strategy, get("strategy")) {
            (Some(s), _) => s,
            (None, Some(raw)) => parse_enum("strategy", raw)?,
            (None, None) => StrategyName::Equatorial,
        };
        let strategy = match strategy_name {
            StrategyName::Equatorial => PairStrategy::Equatorial,
            StrategyName::Grid => PairStrategy::BlochGrid {
                resolution: pick!(flags.resolution, "resolution", DEFAULT_GRID_RESOLUTION),
            },
        };
        let gamma_linear: Option<f64> = pick_opt!(flags.gamma_linear, "gamma_linear");
        if let Some(c) = gamma_linear {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::param(format!(
                    "gamma-linear slope must be non-negative, got {c}"
                )));
            }
        }

        let parameter = match (flags.sweep, get("sweep")) {
            (Some(p), _) => p,
            (None, Some(raw)) => parse_enum("sweep", raw)?,
            (None, None) => SweepParameter::Beta,
        };
        let (from, to, points) = match parameter {
            SweepParameter::Beta => (1.0, 20.0, 8),
            SweepParameter::Kappa => (0.05, 5.0, 16),
        };
        let scale = if switch(flags.log, "log")? {
            SweepScale::Log
        } else {
            SweepScale::Linear
        };
        let sweep = SweepSpec::new(
            parameter,
            pick!(flags.from, "from", from),
            pick!(flags.to, "to", to),
            pick!(flags.points, "points", points),
            scale,
        )?;

        let threads = match (flags.threads, get("threads"), env_threads) {
            (Some(n), _, _) => Some(n),
            (None, Some(raw), _) => Some(parse_value("threads", raw)?),
            (None, None, Some(raw)) => Some(parse_value(THREADS_ENV, raw)?),
            _ => None,
        };
        if threads == Some(0) {
            return Err(Error::param("threads must be at least 1"));
        }
        let samples = pick!(flags.samples, "samples", 1000);
        if samples == 0 {
            return Err(Error::param("samples must be at least 1"));
        }

        Ok(Self {
            kappa: pick!(flags.kappa, "kappa", 0.1),
            eta: pick!(flags.eta, "eta", 0.5),
            omega0: pick!(flags.omega0, "omega0", 1.0),
            betas,
            tmax: pick_opt!(flags.tmax, "tmax"),
            steps: pick_opt!(flags.steps, "steps"),
            mu,
            quantifiers,
            strategy,
            gamma_linear,
            sweep,
            truncation: MatsubaraTruncation::new(
                pick!(
                    flags.matsubara_tol,
                    "matsubara_tol",
                    MatsubaraTruncation::default().rel_tol
                ),
                pick!(
                    flags.matsubara_terms,
                    "matsubara_terms",
                    MatsubaraTruncation::default().max_terms
                ),
            )?,
            out: pick_opt!(flags.out.clone(), "out"),
            seed: pick!(flags.seed, "seed", 0),
            full_precision: switch(flags.full_precision, "full_precision")?,
            threads,
            samples,
            corruption: switch(flags.corrupt_contractivity, "corrupt_contractivity")?
                .then_some(Corruption::NegateContractivity),
        })
    }

    pub fn params(&self, kappa: f64, beta: f64) -> crate::Result<DephasingParams> {
        DephasingParams::new(kappa, self.eta, self.omega0, beta)
    }

    /// Γ source at the given coupling and inverse temperature.
    pub fn model(&self, kappa: f64, beta: f64) -> crate::Result<Box<dyn Decoherence>> {
        match self.gamma_linear {
            Some(c) => Ok(Box::new(LinearGamma(c))),
            None => Ok(Box::new(SpinBoson {
                params: self.params(kappa, beta)?,
                truncation: self.truncation,
            })),
        }
    }

    /// Explicit `tmax`/`steps` where given, otherwise the default horizon of
    /// the model.
    pub fn grid(&self, kappa: f64, beta: f64) -> crate::Result<TimeGrid> {
        if self.gamma_linear.is_some() {
            return TimeGrid::new(
                self.tmax.unwrap_or(LINEAR_DEFAULT_TMAX),
                self.steps.unwrap_or(LINEAR_DEFAULT_STEPS),
            );
        }
        let p = self.params(kappa, beta)?;
        let auto = TimeGrid::for_params(&p);
        match (self.tmax, self.steps) {
            (Some(t), Some(n)) => TimeGrid::new(t, n),
            (Some(t), None) => {
                let steps = ((t / p.period()) * 100.0).ceil().max(1000.0);
                TimeGrid::new(t, steps as usize)
            }
            (None, Some(n)) => TimeGrid::new(auto.t_max, n),
            (None, None) => Ok(auto),
        }
    }

    fn fmt_num(&self, x: f64) -> String {
        format_number(x, self.full_precision)
    }

    fn header(&self, command: Command, betas: &[f64]) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".to_string());
        let strategy = match self.strategy {
            PairStrategy::Equatorial => "equatorial".to_string(),
            PairStrategy::BlochGrid { resolution } => format!("grid({resolution})"),
        };
        let mut entries = vec![
            ("command", command.name().to_string()),
            ("kappa", self.kappa.to_string()),
            ("eta", self.eta.to_string()),
            ("omega0", self.omega0.to_string()),
            (
                "beta",
                if betas.is_empty() {
                    "swept".to_string()
                } else {
                    list(betas)
                },
            ),
            ("tmax", opt(self.tmax.map(|t| t.to_string()))),
            ("steps", opt(self.steps.map(|n| n.to_string()))),
            ("mu", self.mu.get().to_string()),
            (
                "quantifiers",
                self.quantifiers
                    .iter()
                    .map(QuantifierKind::label)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("strategy", strategy),
            (
                "gamma_linear",
                self.gamma_linear
                    .map_or("off".to_string(), |c| c.to_string()),
            ),
            ("matsubara_tol", format!("{:e}", self.truncation.rel_tol)),
            ("matsubara_terms", self.truncation.max_terms.to_string()),
            ("seed", self.seed.to_string()),
            ("full_precision", self.full_precision.to_string()),
        ];
        if command == Command::Sweep {
            let s = &self.sweep;
            let name = match s.parameter {
                SweepParameter::Beta => "beta",
                SweepParameter::Kappa => "kappa",
            };
            entries.push(("sweep", name.to_string()));
            entries.push(("from", s.from.to_string()));
            entries.push(("to", s.to.to_string()));
            entries.push(("points", s.points.to_string()));
            entries.push((
                "scale",
                if s.scale == SweepScale::Log {
                    "log"
                } else {
                    "linear"
                }
                .to_string(),
            ));
        }
        if command == Command::Check {
            entries.push(("samples", self.samples.to_string()));
            entries.push((
                "corrupt_contractivity",
                self.corruption.is_some().to_string(),
            ));
        }
        let mut out = format!("# memoryflow {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }
}

/// Scientific notation with 7 significant digits, or 17 when `full`;
/// non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_number(x: f64, full: bool) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if full {
        format!("{x:.16e}")
    } else {
        format!("{x:.6e}")
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Convergence { .. } => EXIT_CONVERGENCE,
            Error::InvalidParameter(_) | Error::InvalidState(_) | Error::Io(_) => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Output of a command: named CSV documents plus the exit code to report.
/// A document named `None` is the primary output.
pub struct Output {
    pub documents: Vec<(Option<String>, String)>,
    pub code: i32,
    pub diagnostics: Vec<String>,
}

impl Output {
    fn single(text: String) -> Self {
        Self {
            documents: vec![(None, text)],
            code: EXIT_OK,
            diagnostics: Vec::new(),
        }
    }
}

fn per_beta<F>(cfg: &RunConfig, command: Command, mut body: F) -> Result<Output, Failure>
where
    F: FnMut(f64, &mut String) -> crate::Result<()>,
{
    let mut documents = Vec::new();
    for &beta in &cfg.betas {
        let mut text = cfg.header(command, &[beta]);
        body(beta, &mut text)?;
        let name = (cfg.betas.len() > 1).then(|| format!("beta{beta}"));
        documents.push((name, text));
    }
    Ok(Output {
        documents,
        code: EXIT_OK,
        diagnostics: Vec::new(),
    })
}

pub fn cmd_gamma(cfg: &RunConfig) -> Result<Output, Failure> {
    per_beta(cfg, Command::Gamma, |beta, out| {
        let grid = cfg.grid(cfg.kappa, beta)?;
        let traj = Trajectory::sample(&grid, cfg.model(cfg.kappa, beta)?.as_ref())?;
        out.push_str("t,gamma\n");
        for (t, g) in traj.times.iter().zip(&traj.gamma) {
            let _ = writeln!(out, "{},{}", cfg.fmt_num(*t), cfg.fmt_num(*g));
        }
        Ok(())
    })
}

pub fn cmd_series(cfg: &RunConfig) -> Result<Output, Failure> {
    per_beta(cfg, Command::Series, |beta, out| {
        let grid = cfg.grid(cfg.kappa, beta)?;
        let traj = Trajectory::sample(&grid, cfg.model(cfg.kappa, beta)?.as_ref())?;
        let labels: Vec<String> = cfg.quantifiers.iter().map(QuantifierKind::label).collect();
        let _ = writeln!(out, "t,{}", labels.join(","));
        for (t, g) in traj.times.iter().zip(&traj.gamma) {
            out.push_str(&cfg.fmt_num(*t));
            for &kind in &cfg.quantifiers {
                out.push(',');
                out.push_str(&cfg.fmt_num(quantifier_of_gamma(kind, *g)));
            }
            out.push('\n');
        }
        Ok(())
    })
}

pub fn cmd_measure(cfg: &RunConfig) -> Result<Output, Failure> {
    per_beta(cfg, Command::Measure, |beta, out| {
        let grid = cfg.grid(cfg.kappa, beta)?;
        let analysis = RevivalAnalysis::new(&grid, cfg.model(cfg.kappa, beta)?.as_ref())?;
        out.push_str("# each summary row is followed by num_windows rows t_start,t_end,gain\n");
        out.push_str("quantifier,measure,num_windows\n");
        for &kind in &cfg.quantifiers {
            let mut result = analysis.measure(kind, cfg.strategy)?;
            result
                .windows
                .sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
            if let StatePair::Bloch { first, second } = result.pair {
                let _ = writeln!(
                    out,
                    "# {} optimizer: first = [{:e} {:e} {:e}], second = [{:e} {:e} {:e}]",
                    kind.label(),
                    first.x,
                    first.y,
                    first.z,
                    second.x,
                    second.y,
                    second.z
                );
            }
            let _ = writeln!(
                out,
                "{},{},{}",
                kind.label(),
                cfg.fmt_num(result.value),
                result.windows.len()
            );
            for w in &result.windows {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    cfg.fmt_num(w.t_start),
                    cfg.fmt_num(w.t_end),
                    cfg.fmt_num(w.gain)
                );
            }
        }
        Ok(())
    })
}

/// Measures of every selected quantifier at one sweep point; failed cells
/// are NaN and the first failure is returned alongside.
fn sweep_point(cfg: &RunConfig, value: f64) -> (Vec<f64>, Option<String>) {
    let (kappa, beta) = match cfg.sweep.parameter {
        SweepParameter::Beta => (cfg.kappa, value),
        SweepParameter::Kappa => (value, cfg.betas[0]),
    };
    let analysis = cfg
        .grid(kappa, beta)
        .and_then(|grid| RevivalAnalysis::new(&grid, cfg.model(kappa, beta)?.as_ref()));
    let analysis = match analysis {
        Ok(a) => a,
        Err(e) => return (vec![f64::NAN; cfg.quantifiers.len()], Some(e.to_string())),
    };
    let mut failure = None;
    let cells = cfg
        .quantifiers
        .iter()
        .map(|&kind| match analysis.measure(kind, cfg.strategy) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert_with(|| format!("{}: {e}", kind.label()));
                f64::NAN
            }
        })
        .collect();
    (cells, failure)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Output, Failure> {
    if cfg.sweep.parameter == SweepParameter::Kappa && cfg.betas.len() != 1 {
        return Err(Error::param("a kappa sweep needs exactly one beta").into());
    }
    let values = cfg.sweep.values();
    // each point buffered independently; collection keeps ascending order
    let results: Vec<(Vec<f64>, Option<String>)> =
        values.par_iter().map(|&v| sweep_point(cfg, v)).collect();

    let betas: &[f64] = match cfg.sweep.parameter {
        SweepParameter::Beta => &[],
        SweepParameter::Kappa => &cfg.betas,
    };
    let mut text = cfg.header(Command::Sweep, betas);
    let labels: Vec<String> = cfg
        .quantifiers
        .iter()
        .map(|k| format!("M_{}", k.label()))
        .collect();
    let _ = writeln!(text, "param_value,{}", labels.join(","));
    let mut diagnostics = Vec::new();
    for (value, (cells, failure)) in values.iter().zip(results) {
        if let Some(reason) = failure {
            diagnostics.push(format!("sweep point {value}: {reason}"));
        }
        text.push_str(&cfg.fmt_num(*value));
        for c in cells {
            text.push(',');
            text.push_str(&cfg.fmt_num(c));
        }
        text.push('\n');
    }
    let code = if diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_PARTIAL_SWEEP
    };
    Ok(Output {
        documents: vec![(None, text)],
        code,
        diagnostics,
    })
}

pub fn check_report(cfg: &RunConfig, reports: &[SuiteReport]) -> String {
    let mut text = cfg.header(Command::Check, &[]);
    text.push_str("suite,subject,passed,total\n");
    for r in reports {
        for c in &r.counts {
            let _ = writeln!(text, "{},{},{},{}", r.name, c.subject, c.passed, c.total);
        }
    }
    if reports.iter().any(|r| !r.ok()) {
        let _ = writeln!(
            text,
            "# counterexamples (first {MAX_LISTED} per subject; regenerate with seed, suite and instance)"
        );
        text.push_str("# suite,subject,seed,instance,lhs,rhs,tol,inputs\n");
        for r in reports {
            let mut listed: BTreeMap<&str, usize> = BTreeMap::new();
            for f in &r.failures {
                let n = listed.entry(f.subject.as_str()).or_default();
                *n += 1;
                if *n > MAX_LISTED {
                    continue;
                }
                let _ = writeln!(
                    text,
                    "# {},{},{},{},{:e},{:e},{:e},{}",
                    f.suite, f.subject, cfg.seed, f.instance, f.lhs, f.rhs, f.tol, f.inputs
                );
            }
        }
    }
    text
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Output, Failure> {
    let reports = run_all(&CheckConfig {
        seed: cfg.seed,
        samples: cfg.samples,
        corruption: cfg.corruption,
        dephasing: true,
    });
    let mut out = Output::single(check_report(cfg, &reports));
    for r in reports.iter().filter(|r| !r.ok()) {
        out.diagnostics.push(format!(
            "suite {} failed: {} of {} instances passed",
            r.name,
            r.passed(),
            r.total()
        ));
    }
    if !out.diagnostics.is_empty() {
        out.code = EXIT_SUITE_FAILURE;
    }
    Ok(out)
}

/// Destination of a named document: `PATH` itself for the primary output,
/// `stem_NAME.ext` otherwise.
fn document_path(base: &Path, name: &Option<String>) -> PathBuf {
    match name {
        None => base.to_path_buf(),
        Some(name) => {
            let stem = base
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let file = match base.extension() {
                Some(ext) => format!("{stem}_{name}.{}", ext.to_string_lossy()),
                None => format!("{stem}_{name}"),
            };
            base.with_file_name(file)
        }
    }
}

fn execute(command: Command, cfg: &RunConfig) -> Result<Output, Failure> {
    match command {
        Command::Gamma => cmd_gamma(cfg),
        Command::Series => cmd_series(cfg),
        Command::Measure => cmd_measure(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Check => cmd_check(cfg),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match run_cli(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let file = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure {
                code: EXIT_INVALID,
                message: format!("{}: {e}", path.display()),
            })?;
            parse_config(&text).map_err(|message| Failure {
                code: EXIT_INVALID,
                message,
            })?
        }
        None => BTreeMap::new(),
    };
    let env_threads = std::env::var(THREADS_ENV).ok();
    let cfg = RunConfig::resolve(&cli.flags, &file, env_threads.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        })?;
    let output = pool.install(|| execute(cli.command, &cfg))?;

    for (name, text) in &output.documents {
        match &cfg.out {
            Some(base) => std::fs::write(document_path(base, name), text).map_err(Error::from)?,
            None => stdout.write_all(text.as_bytes()).map_err(Error::from)?,
        }
    }
    for d in &output.diagnostics {
        let _ = writeln!(stderr, "{d}");
    }
    Ok(output.code)
}
