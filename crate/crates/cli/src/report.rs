//! The report document and its construction from core results.

use fcl_core::classify::PointResiduals;
use fcl_core::geodesic::{GeodesicDiagnostics, GeodesicPath};
use fcl_core::identities::IdentityReport;
use fcl_core::tensor::index_tuples;
use fcl_core::{ClassificationRecord, CurvaturePack, Domain, Error, TensorValue, Variance, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::num::{nums, Num};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricInfo>,
    pub exit_code: i32,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<IdentityEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicBlock>,
    pub errors: Vec<ErrorEntry>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing: Timing,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            config,
            metric: None,
            exit_code: 0,
            notes: Vec::new(),
            samples: None,
            classification: None,
            identities: None,
            geodesic: None,
            errors: Vec::new(),
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only serializable data")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInfo {
    pub kind: String,
    pub dim: usize,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ErrorEntry {
    pub fn from_error(e: &Error, sample: Option<usize>) -> Self {
        let (line, column) = match e {
            Error::Parse(p) => (Some(p.line), Some(p.column)),
            _ => (None, None),
        };
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            sample,
            line,
            column,
        }
    }

    pub fn other(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
            sample: None,
            line: None,
            column: None,
        }
    }
}

/// One tensor, row-major, with enough metadata to rebuild its indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorBlock {
    pub name: String,
    pub symbol: String,
    /// One letter per slot, `u` upper and `l` lower.
    pub variance: String,
    pub shape: Vec<usize>,
    pub data: Vec<Num>,
}

impl TensorBlock {
    pub fn new(name: &str, symbol: &str, t: &TensorValue) -> Self {
        Self {
            name: name.to_string(),
            symbol: symbol.to_string(),
            variance: t
                .variance
                .iter()
                .map(|v| match v {
                    Variance::Upper => 'u',
                    Variance::Lower => 'l',
                })
                .collect(),
            shape: vec![t.n; t.variance.len()],
            data: nums(&t.entries),
        }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// `(index tuple, value)` pairs in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = (Vec<usize>, &Num)> {
        let n = self.shape.first().copied().unwrap_or(1);
        index_tuples(n, self.rank()).into_iter().zip(&self.data)
    }
}

/// Fitted scalars at one sample. `mu`/`lambda` come from the isotropic
/// Berwald fit, `eta` from `L = ηC`, `k` from `Rⁱ_k = K F² hⁱ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub f: Num,
    pub mu: Num,
    pub lambda: Num,
    pub mu_prime: Num,
    pub gib_residual: Num,
    pub eta: Num,
    pub eta_residual: Num,
    pub k: Num,
    pub k_residual: Num,
}

impl Fits {
    pub fn new(f: f64, r: &PointResiduals, pack: &CurvaturePack) -> Self {
        const DEGENERATE: &str = "Cartan torsion vanishes (Riemannian point)";
        let (mu, mu_prime) = if r.gib.degenerate {
            (Num::missing(DEGENERATE), Num::missing(DEGENERATE))
        } else {
            (Num::new(r.gib.mu), Num::new(r.gib.mu_prime))
        };
        let eta_residual = r.residuals[&fcl_core::Predicate::RelIsotropicLandsberg];
        Self {
            f: Num::new(f),
            mu,
            lambda: Num::new(r.gib.lambda),
            mu_prime,
            gib_residual: Num::new(r.gib.residual),
            eta: Num::from_option(r.eta, DEGENERATE),
            eta_residual: Num::new(eta_residual),
            k: Num::new(pack.flag.k),
            k_residual: Num::new(pack.flag.residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBlock {
    pub index: usize,
    pub x: Vec<Num>,
    pub y: Vec<Num>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tensors: Vec<TensorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fits: Option<Fits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
}

/// Tensor blocks of a curvature pack, in a fixed order.
pub fn pack_blocks(first: &[(&str, &str, TensorValue)], pack: &CurvaturePack) -> Vec<TensorBlock> {
    let mut blocks: Vec<TensorBlock> = first.iter().map(|(n, s, t)| TensorBlock::new(n, s, t)).collect();
    let rest: [(&str, &str, &TensorValue); 11] = [
        ("berwald", "B^i_jkl", &pack.berwald),
        ("mean_berwald", "E_jk", &pack.mean_berwald),
        ("landsberg", "L_jkl", &pack.landsberg),
        ("mean_landsberg", "J_k", &pack.mean_landsberg),
        ("stretch", "Σ_jklm", &pack.stretch),
        ("douglas", "D^i_jkl", &pack.douglas),
        ("gdw", "h^i_m D^m_jkl|s y^s", &pack.gdw),
        ("riemann", "R^i_k", &pack.riemann),
        ("riemann_h", "R^i_jkl", &pack.riemann_h),
        ("h_curvature", "H_jk", &pack.h_curvature),
        ("e_bar", "E_jk|l", &pack.e_bar),
    ];
    blocks.extend(rest.iter().map(|(n, s, t)| TensorBlock::new(n, s, t)));
    blocks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateEntry {
    pub name: String,
    pub residual: Num,
    pub tolerance: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub predicates: Vec<PredicateEntry>,
    pub samples: usize,
    pub seed: Option<u64>,
    pub failures: Vec<ErrorEntry>,
    pub violations: Vec<String>,
}

impl From<&ClassificationRecord> for Classification {
    fn from(r: &ClassificationRecord) -> Self {
        Self {
            predicates: r
                .predicates
                .iter()
                .map(|(p, res)| PredicateEntry {
                    name: p.name().to_string(),
                    residual: Num::new(res.residual),
                    tolerance: res.tolerance,
                    verdict: res.verdict,
                })
                .collect(),
            samples: r.samples,
            seed: r.seed,
            failures: r
                .failures
                .iter()
                .map(|f| ErrorEntry {
                    sample: Some(f.sample),
                    ..ErrorEntry::other("sample_failure", f.error.clone())
                })
                .collect(),
            violations: r.violations.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub name: String,
    pub conditional: bool,
    pub samples: usize,
    pub skipped: usize,
    pub errors: usize,
    pub max_residual: Num,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl From<&IdentityReport> for IdentityEntry {
    fn from(r: &IdentityReport) -> Self {
        Self {
            name: r.identity.name().to_string(),
            conditional: r.identity.is_conditional(),
            samples: r.samples,
            skipped: r.skipped,
            errors: r.errors,
            max_residual: Num::from_option(r.max_residual, "not evaluated at any sample"),
            tolerance: r.tolerance,
            verdict: r.verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: Num,
    pub x: Vec<Num>,
    pub v: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub f_defect: Num,
    pub mu: Vec<Num>,
    pub st5_defect: Vec<Num>,
    pub st5_max: Num,
    pub stretch_norm: Num,
    pub st5_asserted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&GeodesicDiagnostics> for Diagnostics {
    fn from(d: &GeodesicDiagnostics) -> Self {
        let reason = d.note.as_deref().unwrap_or("fewer than five samples");
        Self {
            f_defect: Num::new(d.f_defect),
            mu: nums(&d.mu),
            st5_defect: nums(&d.st5_defect),
            st5_max: Num::from_option(d.st5_max, reason),
            stretch_norm: Num::new(d.stretch_norm),
            st5_asserted: d.st5_asserted,
            note: d.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicBlock {
    pub step: Num,
    pub method_order: u32,
    pub left_domain_at: Num,
    pub path: Vec<PathPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl From<&GeodesicPath> for GeodesicBlock {
    fn from(p: &GeodesicPath) -> Self {
        Self {
            step: Num::new(p.step),
            method_order: p.method_order,
            left_domain_at: Num::from_option(p.left_domain_at, "stayed in the domain"),
            path: p
                .samples
                .iter()
                .map(|s| PathPoint {
                    t: Num::new(s.t),
                    x: nums(&s.x),
                    v: nums(&s.v),
                })
                .collect(),
            diagnostics: None,
        }
    }
}
