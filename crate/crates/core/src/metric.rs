//! Compiled metric fields: evaluate F² pointwise or as a jet.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dsl::{Expr, MetricKind, MetricSpec};
use crate::error::{Error, Result};
use crate::jet::{coordinate_jets, Jet, MultiIndex, Scalar};
use crate::point::BasePoint;
use crate::sampler;

/// Region of positions `x` that samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Domain {
    /// Euclidean ball `|x| <= radius`.
    Ball { radius: f64 },
    /// Cube `|x^i| <= half_width`.
    Box { half_width: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
            Domain::Box { half_width } => x.iter().all(|v| v.abs() <= half_width),
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (shape, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected ball:R or box:A, got `{s}`"))?;
        let v: f64 = value
            .parse()
            .map_err(|_| format!("invalid domain size `{value}`"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("domain size must be positive, got {v}"));
        }
        match shape {
            "ball" => Ok(Domain::Ball { radius: v }),
            "box" => Ok(Domain::Box { half_width: v }),
            _ => Err(format!("unknown domain shape `{shape}`")),
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Ball { radius } => write!(f, "ball:{radius}"),
            Domain::Box { half_width } => write!(f, "box:{half_width}"),
        }
    }
}

/// Number of points used to probe positive definiteness at compile time.
const VALIDATION_SAMPLES: usize = 16;
const VALIDATION_SEED: u64 = 0x5eed;

/// A metric ready for evaluation.
#[derive(Debug, Clone)]
pub struct MetricField {
    spec: MetricSpec,
}

impl MetricField {
    pub(crate) fn unchecked(spec: MetricSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn kind(&self) -> MetricKind {
        self.spec.kind()
    }

    /// Whether `x` lies in the region where the metric is defined.
    pub fn is_admissible(&self, x: &[f64]) -> bool {
        match self.spec {
            MetricSpec::Funk { .. } => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            _ => x.iter().all(|v| v.is_finite()),
        }
    }

    /// Sampling region used when none is configured.
    pub fn default_domain(&self) -> Domain {
        match self.spec {
            MetricSpec::Funk { .. } => Domain::Ball { radius: 0.85 },
            _ => Domain::Box { half_width: 0.5 },
        }
    }

    /// F² written once over any [`Scalar`] (floats or jets).
    pub fn f2<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let dot = |a: &[S], b: &[S]| {
            let mut acc = a[0].mul(&b[0]);
            for i in 1..a.len() {
                acc = acc.add(&a[i].mul(&b[i]));
            }
            acc
        };
        let quadratic = |a: &[Vec<Expr>]| -> Result<S> {
            let mut acc = x[0].lift(0.0);
            for (i, row) in a.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    acc = acc.add(&entry.eval(x, y)?.mul(&y[i]).mul(&y[j]));
                }
            }
            Ok(acc)
        };
        match &self.spec {
            MetricSpec::Euclidean { .. } => Ok(dot(y, y)),
            MetricSpec::Funk { .. } => {
                let xx = dot(x, x);
                let yy = dot(y, y);
                let xy = dot(x, y);
                let radicand = yy.sub(&xx.mul(&yy).sub(&xy.mul(&xy)));
                let f = radicand.sqrt()?.add(&xy).div(&xx.lift(1.0).sub(&xx))?;
                Ok(f.mul(&f))
            }
            MetricSpec::Riemannian { a, .. } => quadratic(a),
            MetricSpec::Randers { a, b, .. } => {
                let alpha = quadratic(a)?.sqrt()?;
                let mut beta = x[0].lift(0.0);
                for (i, bi) in b.iter().enumerate() {
                    beta = beta.add(&bi.eval(x, y)?.mul(&y[i]));
                }
                let f = alpha.add(&beta);
                Ok(f.mul(&f))
            }
            MetricSpec::Custom { f2, .. } => f2.eval(x, y),
        }
    }

    fn check_point(&self, p: &BasePoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::InvalidPoint(format!(
                "point has dimension {}, metric has {}",
                p.dim(),
                self.dim()
            )));
        }
        if !self.is_admissible(p.x()) {
            return Err(Error::DomainViolation(p.x().to_vec()));
        }
        Ok(())
    }

    pub fn f2_value(&self, p: &BasePoint) -> Result<f64> {
        self.check_point(p)?;
        self.f2(p.x(), p.y())
    }

    /// Taylor expansion of F² to total order `order` in `(x, y)` around `p`.
    pub fn f2_jet(&self, p: &BasePoint, order: usize) -> Result<Jet> {
        self.check_point(p)?;
        let vars = coordinate_jets(&p.coords(), order);
        let n = self.dim();
        self.f2(&vars[..n], &vars[n..])
    }

    /// Fundamental tensor `g_ij = ½ ∂²F²/∂yⁱ∂yʲ` at one point.
    pub fn fundamental_matrix(&self, p: &BasePoint) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let jet = self.f2_jet(p, 2)?;
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| 0.5 * jet.partial(&MultiIndex::from_vars(n, &[n + i, n + j])).expect("order 2"))
                    .collect()
            })
            .collect())
    }

    /// Smallest eigenvalue of `g_y` at `p`.
    pub fn min_eigenvalue(&self, p: &BasePoint) -> Result<f64> {
        let n = self.dim();
        let g = self.fundamental_matrix(p)?;
        let m = DMatrix::from_fn(n, n, |i, j| g[i][j]);
        let eig = SymmetricEigen::new(m);
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Compiles a spec, probing positive definiteness of `g` on a fixed sample set.
pub fn compile_metric(spec: MetricSpec) -> Result<MetricField> {
    let field = MetricField::unchecked(spec);
    let domain = field.default_domain();
    let points = sampler::sample_points(&field, domain, VALIDATION_SAMPLES, VALIDATION_SEED)?;
    for p in &points {
        let lowest = field.min_eigenvalue(p)?;
        if !(lowest > 0.0) {
            return Err(Error::NotPositiveDefinite {
                x: p.x().to_vec(),
                y: p.y().to_vec(),
                min_eigenvalue: lowest,
            });
        }
    }
    Ok(field)
}

/// Parses and compiles in one step.
pub fn load_metric(text: &str) -> Result<MetricField> {
    compile_metric(crate::dsl::parse_metric(text)?)
}
