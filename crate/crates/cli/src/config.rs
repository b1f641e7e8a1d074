//! Command-line parsing and the resolved run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcl_core::{Domain, Predicate, Suite, DEFAULT_ORDER, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};

/// Environment variable that replaces the default jet order.
pub const ORDER_ENV: &str = "FCL_JET_ORDER";

/// Every curvature report needs seventh-order jets.
pub const MIN_ORDER: usize = 7;

/// Past this the jets get too large to be useful.
pub const MAX_ORDER: usize = 10;

pub const DEFAULT_SAMPLES: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "fcl", version, about = "Curvature, classification and identity checks for Finsler metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature tensors and fitted scalars at each sample.
    Report(ReportArgs),
    /// Decide every metric class over the samples.
    Classify(ClassifyArgs),
    /// Check the identity suite over the samples.
    Verify(VerifyArgs),
    /// Integrate one geodesic and report diagnostics along it.
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Metric definition file.
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `ball:R` or `box:A`; defaults to the metric's own domain.
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Jet order; overrides FCL_JET_ORDER.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub out: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: SampleArgs,
    /// Also print rank-4 tensors in text output.
    #[arg(long)]
    pub rank4: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: SampleArgs,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: SampleArgs,
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// Initial position, comma separated.
    #[arg(long, value_parser = parse_csv)]
    pub x0: Csv,
    /// Initial velocity, comma separated.
    #[arg(long, value_parser = parse_csv)]
    pub y0: Csv,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub out: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv(pub Vec<f64>);

fn parse_csv(s: &str) -> Result<Csv, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("`{t}` is not a finite number")),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Report,
    Classify,
    Verify,
    Geodesic,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Report => "report",
            CommandKind::Classify => "classify",
            CommandKind::Verify => "verify",
            CommandKind::Geodesic => "geodesic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRequest {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub t_max: f64,
    pub steps: usize,
}

/// Everything a run depends on. Echoed verbatim in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub metric: String,
    pub samples: usize,
    pub seed: u64,
    /// `None` uses the metric's default domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    pub order: usize,
    pub tolerance: f64,
    pub tolerance_overrides: BTreeMap<Predicate, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicRequest>,
    pub format: Format,
    pub rank4: bool,
}

/// A rejected command line: message plus exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

impl UsageError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: crate::EXIT_USAGE,
        }
    }
}

/// Pulls `--tol.NAME T` and `--tol.NAME=T` out of `args`.
pub fn split_tolerance_overrides(args: Vec<String>) -> Result<(Vec<String>, BTreeMap<Predicate, f64>), UsageError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = BTreeMap::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| UsageError::new(format!("`--tol.{spec}` needs a value")))?;
                (spec.to_string(), v)
            }
        };
        let pred = Predicate::from_name(&name).ok_or_else(|| {
            let known: Vec<_> = Predicate::ALL.iter().map(|p| p.name()).collect();
            UsageError::new(format!("unknown predicate `{name}` (known: {})", known.join(", ")))
        })?;
        overrides.insert(pred, parse_tolerance(&value)?);
    }
    Ok((rest, overrides))
}

fn parse_tolerance(s: &str) -> Result<f64, UsageError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(UsageError::new(format!("tolerance must be a positive number, got `{s}`"))),
    }
}

/// Explicit flag, then the environment, then the default.
pub fn resolve_order(flag: Option<usize>, env: Option<&str>) -> Result<usize, UsageError> {
    let order = match (flag, env) {
        (Some(k), _) => k,
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| UsageError::new(format!("{ORDER_ENV} must be an integer, got `{v}`")))?,
        (None, None) => DEFAULT_ORDER,
    };
    if order < MIN_ORDER {
        return Err(UsageError::new(format!(
            "jet order {order} is below the minimum {MIN_ORDER} needed for curvature"
        )));
    }
    if order > MAX_ORDER {
        return Err(UsageError::new(format!("jet order {order} exceeds the supported maximum {MAX_ORDER}")));
    }
    Ok(order)
}

impl RunConfig {
    /// Resolves parsed arguments; `env_order` is the value of `FCL_JET_ORDER`.
    pub fn from_cli(
        cli: Cli,
        overrides: BTreeMap<Predicate, f64>,
        env_order: Option<&str>,
    ) -> Result<RunConfig, UsageError> {
        let sampled = |kind: CommandKind, c: SampleArgs, tol: f64| -> Result<RunConfig, UsageError> {
            Ok(RunConfig {
                command: kind,
                metric: c.metric.display().to_string(),
                samples: c.samples,
                seed: c.seed,
                domain: c.domain,
                order: resolve_order(c.order, env_order)?,
                tolerance: parse_tolerance(&tol.to_string())?,
                tolerance_overrides: BTreeMap::new(),
                suite: None,
                geodesic: None,
                format: c.out,
                rank4: false,
            })
        };
        if !overrides.is_empty() && !matches!(cli.command, Command::Classify(_)) {
            return Err(UsageError::new("per-predicate tolerances apply to `classify` only"));
        }
        match cli.command {
            Command::Report(a) => Ok(RunConfig {
                rank4: a.rank4,
                ..sampled(CommandKind::Report, a.common, DEFAULT_TOLERANCE)?
            }),
            Command::Classify(a) => Ok(RunConfig {
                tolerance_overrides: overrides,
                ..sampled(CommandKind::Classify, a.common, a.tol)?
            }),
            Command::Verify(a) => Ok(RunConfig {
                suite: Some(a.suite),
                ..sampled(CommandKind::Verify, a.common, a.tol)?
            }),
            Command::Geodesic(a) => {
                if a.x0.0.len() != a.y0.0.len() {
                    return Err(UsageError::new(format!(
                        "--x0 has {} components but --y0 has {}",
                        a.x0.0.len(),
                        a.y0.0.len()
                    )));
                }
                if !(a.tmax.is_finite() && a.tmax > 0.0) {
                    return Err(UsageError::new(format!("--tmax must be positive, got {}", a.tmax)));
                }
                Ok(RunConfig {
                    command: CommandKind::Geodesic,
                    metric: a.metric.display().to_string(),
                    samples: 0,
                    seed: 0,
                    domain: None,
                    order: MIN_ORDER,
                    tolerance: parse_tolerance(&a.tol.to_string())?,
                    tolerance_overrides: BTreeMap::new(),
                    suite: None,
                    geodesic: Some(GeodesicRequest {
                        x0: a.x0.0,
                        y0: a.y0.0,
                        t_max: a.tmax,
                        steps: a.steps,
                    }),
                    format: a.out,
                    rank4: false,
                })
            }
        }
    }

    /// Parses a full command line, program name first.
    pub fn parse_args(args: Vec<String>, env_order: Option<&str>) -> Result<RunConfig, UsageError> {
        let (args, overrides) = split_tolerance_overrides(args)?;
        let cli = Cli::try_parse_from(args).map_err(|e| UsageError {
            message: e.render().to_string(),
            exit_code: e.exit_code(),
        })?;
        RunConfig::from_cli(cli, overrides, env_order)
    }
}
