//! The `fcl` command line: sampling, orchestration of core computations and
//! report rendering.
//!
//! [`execute`] is the whole program minus process I/O, so tests can drive it
//! in-process.

pub mod config;
pub mod num;
pub mod report;
pub mod text;

use std::time::Instant;

use fcl_core::classify::{point_residuals, predicates_with};
use fcl_core::geodesic::{along_geodesic_diagnostics_with, integrate_geodesic};
use fcl_core::identities::verify_identities_with;
use fcl_core::{load_metric, sample_points, BasePoint, CurvaturePack, Error, Geometry, MetricField, Tolerances, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CommandKind, Format, RunConfig, UsageError};
pub use report::Report;

use report::{
    pack_blocks, Classification, Diagnostics, ErrorEntry, Fits, GeodesicBlock, IdentityEntry, MetricInfo, SampleBlock,
    SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

/// Structured form of a rejected command line, for `--out json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageReport {
    pub schema: u32,
    pub exit_code: i32,
    pub errors: Vec<ErrorEntry>,
}

fn wants_json(args: &[String]) -> bool {
    args.iter().any(|a| a == "--out=json") || args.windows(2).any(|w| w[0] == "--out" && w[1] == "json")
}

/// Runs a full command line (program name first).
pub fn execute(args: Vec<String>, env_order: Option<&str>) -> Outcome {
    let json = wants_json(&args);
    let config = match RunConfig::parse_args(args, env_order) {
        Ok(c) => c,
        Err(e) if e.exit_code == EXIT_OK => {
            return Outcome {
                stdout: e.message,
                stderr: String::new(),
                exit_code: EXIT_OK,
            }
        }
        Err(e) => {
            let stdout = if json {
                let r = UsageReport {
                    schema: SCHEMA,
                    exit_code: e.exit_code,
                    errors: vec![ErrorEntry::other("usage", e.message.trim_end())],
                };
                serde_json::to_string_pretty(&r).expect("serializable") + "\n"
            } else {
                String::new()
            };
            return Outcome {
                stdout,
                stderr: e.message,
                exit_code: e.exit_code,
            };
        }
    };
    let (report, diagnostics) = run(config);
    let stdout = match report.config.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => text::render(&report),
    };
    let mut stderr = String::new();
    for d in diagnostics {
        stderr.push_str(&d);
        stderr.push('\n');
    }
    Outcome {
        stdout,
        stderr,
        exit_code: report.exit_code,
    }
}

/// Loads the metric file named in `config` and runs the command. The second
/// value holds compiler-style diagnostics for stderr.
pub fn run(config: RunConfig) -> (Report, Vec<String>) {
    let start = Instant::now();
    let mut report = Report::new(config);
    let mut diagnostics = Vec::new();
    let path = report.config.metric.clone();
    match std::fs::read_to_string(&path) {
        Err(e) => {
            diagnostics.push(format!("{path}: {e}"));
            report.errors.push(ErrorEntry::other("io", format!("cannot read `{path}`: {e}")));
            report.exit_code = EXIT_USAGE;
        }
        Ok(text) => match load_metric(&text) {
            Ok(metric) => run_metric(&mut report, &metric),
            Err(e) => {
                diagnostics.push(format!("{path}:{e}"));
                report.errors.push(ErrorEntry::from_error(&e, None));
                report.exit_code = match e {
                    Error::Parse(_) => EXIT_USAGE,
                    _ => EXIT_NUMERICAL,
                };
            }
        },
    }
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    (report, diagnostics)
}

/// Runs the configured command against an already compiled metric.
pub fn run_metric(report: &mut Report, metric: &MetricField) {
    let domain = report.config.domain.unwrap_or_else(|| metric.default_domain());
    report.metric = Some(MetricInfo {
        kind: metric.kind().name().to_string(),
        dim: metric.dim(),
        domain,
    });
    if report.config.command == CommandKind::Geodesic {
        run_geodesic(report, metric);
        return;
    }
    let points = match sample_points(metric, domain, report.config.samples, report.config.seed) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(ErrorEntry::from_error(&e, None));
            report.exit_code = EXIT_NUMERICAL;
            return;
        }
    };
    if points.is_empty() {
        report.notes.push("no samples".into());
    }
    match report.config.command {
        CommandKind::Report => run_report(report, metric, &points),
        CommandKind::Classify => run_classify(report, metric, &points),
        CommandKind::Verify => run_verify(report, metric, &points),
        CommandKind::Geodesic => unreachable!(),
    }
}

/// 0 with no failures, 3 when every sample failed, 1 otherwise.
fn failure_code(failed: usize, total: usize, verdicts_failed: bool) -> i32 {
    if total > 0 && failed == total {
        EXIT_NUMERICAL
    } else if failed > 0 || verdicts_failed {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn sample_block(metric: &MetricField, p: &BasePoint, index: usize, order: usize) -> SampleBlock {
    let computed = (|| -> fcl_core::Result<_> {
        let geo = Geometry::new(metric, p, order)?;
        let pack = CurvaturePack::compute(&geo)?;
        let residuals = point_residuals(&geo)?;
        let first = [
            ("fundamental", "g_ij", geo.fundamental()?.value()),
            ("cartan", "C_ijk", geo.cartan()?.value()),
            ("mean_cartan", "I_k", geo.mean_cartan()?.value()),
            ("spray", "G^i", geo.spray()?.value()),
        ];
        let fits = Fits::new(geo.finsler()?.value(), &residuals, &pack);
        Ok((pack_blocks(&first, &pack), fits))
    })();
    let (tensors, fits, error) = match computed {
        Ok((t, f)) => (t, Some(f), None),
        Err(e) => (Vec::new(), None, Some(ErrorEntry::from_error(&e, Some(index)))),
    };
    SampleBlock {
        index,
        x: num::nums(p.x()),
        y: num::nums(p.y()),
        tensors,
        fits,
        error,
    }
}

fn run_report(report: &mut Report, metric: &MetricField, points: &[BasePoint]) {
    let order = report.config.order;
    let blocks: Vec<SampleBlock> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| sample_block(metric, p, i, order))
        .collect();
    report.errors.extend(blocks.iter().filter_map(|b| b.error.clone()));
    report.exit_code = failure_code(report.errors.len(), points.len(), false);
    report.samples = Some(blocks);
}

fn run_classify(report: &mut Report, metric: &MetricField, points: &[BasePoint]) {
    let tol = Tolerances {
        default: report.config.tolerance,
        overrides: report.config.tolerance_overrides.clone(),
    };
    let record = predicates_with(metric, points, &tol, report.config.order, Some(report.config.seed));
    let c = Classification::from(&record);
    report.errors.extend(c.failures.iter().cloned());
    for v in &c.violations {
        report.errors.push(ErrorEntry::other("implication_violated", v.clone()));
    }
    report.exit_code = failure_code(c.failures.len(), points.len(), !c.violations.is_empty());
    report.classification = Some(c);
}

fn run_verify(report: &mut Report, metric: &MetricField, points: &[BasePoint]) {
    let suite = report.config.suite.unwrap_or(fcl_core::Suite::All);
    let reports = verify_identities_with(metric, points, suite, report.config.tolerance, report.config.order);
    let entries: Vec<IdentityEntry> = reports.iter().map(IdentityEntry::from).collect();
    let errored = entries.iter().map(|e| e.errors).max().unwrap_or(0);
    if errored > 0 {
        report.errors.push(ErrorEntry::other(
            "sample_failure",
            format!("{errored} of {} samples failed numerically", points.len()),
        ));
    }
    let failed = entries.iter().any(|e| e.verdict == Verdict::Fail);
    report.exit_code = failure_code(errored, points.len(), failed);
    report.identities = Some(entries);
}

fn run_geodesic(report: &mut Report, metric: &MetricField) {
    let req = report.config.geodesic.clone().expect("geodesic runs carry a request");
    let path = match integrate_geodesic(metric, &req.x0, &req.y0, req.t_max, req.steps) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(ErrorEntry::from_error(&e, None));
            report.exit_code = match e {
                Error::InvalidPoint(_) | Error::DomainViolation(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            };
            return;
        }
    };
    let mut block = GeodesicBlock::from(&path);
    if let Some(t) = path.left_domain_at {
        report.notes.push(format!("path left the domain at t = {t}; truncated"));
    }
    let tol = report.config.tolerance;
    match along_geodesic_diagnostics_with(metric, &path, tol) {
        Ok(d) => {
            let violated = d.st5_asserted && d.st5_max.is_some_and(|m| !(m <= tol));
            if violated {
                report.errors.push(ErrorEntry::other(
                    "st5_violated",
                    "stretch vanishes along the path but 2μ′ = μ²F does not hold",
                ));
            }
            report.exit_code = if violated { EXIT_FAILED } else { EXIT_OK };
            block.diagnostics = Some(Diagnostics::from(&d));
        }
        Err(e) => {
            report.errors.push(ErrorEntry::from_error(&e, None));
            report.exit_code = match e {
                Error::FitFailed { .. } => EXIT_FAILED,
                _ => EXIT_NUMERICAL,
            };
        }
    }
    report.geodesic = Some(block);
}
