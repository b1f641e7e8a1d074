//! Geodesics `c̈ + 2G(ċ) = 0` by fixed-step RK4, and diagnostics along them.

use serde::{Deserialize, Serialize};

use crate::classify::gib_of;
use crate::curvature::DEFAULT_TOLERANCE;
use crate::dsl::MetricSpec;
use crate::error::{Error, Result};
use crate::fields::Geometry;
use crate::metric::MetricField;
use crate::point::BasePoint;

pub const MIN_STEPS: usize = 8;

/// Funk paths stop before reaching this radius.
pub const FUNK_CAP: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    pub step: f64,
    pub method_order: u32,
    /// Time of the first step that would have left the domain.
    pub left_domain_at: Option<f64>,
}

impl GeodesicPath {
    pub fn end(&self) -> &PathSample {
        self.samples.last().expect("paths hold the initial sample")
    }
}

fn admissible(metric: &MetricField, x: &[f64]) -> bool {
    let inside = metric.is_admissible(x) && x.iter().all(|v| v.is_finite());
    match metric.spec() {
        MetricSpec::Funk { .. } => inside && x.iter().map(|v| v * v).sum::<f64>().sqrt() < FUNK_CAP,
        _ => inside,
    }
}

/// `(ẋ, v̇) = (v, −2G(x, v))`.
fn rhs(metric: &MetricField, x: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = BasePoint::new(x.to_vec(), v.to_vec())?;
    let geo = Geometry::new(metric, &p, 2)?;
    let g = geo.spray()?.value();
    Ok((v.to_vec(), g.entries.iter().map(|gi| -2.0 * gi).collect()))
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + h * y).collect()
}

/// Integrates from `(x0, y0)` up to `t_max` in `steps` RK4 steps. A path
/// that would leave the domain is truncated and flagged.
pub fn integrate_geodesic(metric: &MetricField, x0: &[f64], y0: &[f64], t_max: f64, steps: usize) -> Result<GeodesicPath> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidPoint(format!("at least {MIN_STEPS} steps are required, got {steps}")));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidPoint(format!("t_max must be positive, got {t_max}")));
    }
    let start = BasePoint::new(x0.to_vec(), y0.to_vec())?;
    metric.f2_value(&start)?;
    if !admissible(metric, x0) {
        return Err(Error::DomainViolation(x0.to_vec()));
    }
    let h = t_max / steps as f64;
    let mut x = x0.to_vec();
    let mut v = y0.to_vec();
    let mut samples = vec![PathSample { t: 0.0, x: x.clone(), v: v.clone() }];
    let mut left_domain_at = None;
    for step in 0..steps {
        let t = step as f64 * h;
        let next = (|| -> Result<(Vec<f64>, Vec<f64>)> {
            let (k1x, k1v) = rhs(metric, &x, &v)?;
            let (k2x, k2v) = rhs(metric, &axpy(&x, h / 2.0, &k1x), &axpy(&v, h / 2.0, &k1v))?;
            let (k3x, k3v) = rhs(metric, &axpy(&x, h / 2.0, &k2x), &axpy(&v, h / 2.0, &k2v))?;
            let (k4x, k4v) = rhs(metric, &axpy(&x, h, &k3x), &axpy(&v, h, &k3v))?;
            let combine = |a: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
                (0..a.len()).map(|i| a[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
            };
            Ok((combine(&x, &k1x, &k2x, &k3x, &k4x), combine(&v, &k1v, &k2v, &k3v, &k4v)))
        })();
        match next {
            Ok((nx, nv)) if admissible(metric, &nx) => {
                x = nx;
                v = nv;
                samples.push(PathSample { t: t + h, x: x.clone(), v: v.clone() });
            }
            Ok(_) | Err(Error::DomainViolation(_)) => {
                left_domain_at = Some(t + h);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GeodesicPath {
        samples,
        step: h,
        method_order: 4,
        left_domain_at,
    })
}

/// `2 dμ/dt − μ² F` at interior samples, with the five-point central
/// difference for `dμ/dt` on a uniform grid of spacing `h`.
pub fn st5_defect(mu: &[f64], f: &[f64], h: f64) -> Vec<f64> {
    if mu.len() < 5 {
        return Vec::new();
    }
    (2..mu.len() - 2)
        .map(|i| {
            let d = (-mu[i + 2] + 8.0 * mu[i + 1] - 8.0 * mu[i - 1] + mu[i - 2]) / (12.0 * h);
            2.0 * d - mu[i] * mu[i] * f[i]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicDiagnostics {
    /// `max |F(x(t), ẋ(t)) − F(x₀, y₀)|`.
    pub f_defect: f64,
    /// Fitted `μ` at each sample; empty when the metric is Riemannian.
    pub mu: Vec<f64>,
    /// `2μ′ − μ² F` at interior samples.
    pub st5_defect: Vec<f64>,
    pub st5_max: Option<f64>,
    /// Largest stretch max-abs along the path.
    pub stretch_norm: f64,
    /// Whether the stretch vanishes along the path, so the ODE defect must too.
    pub st5_asserted: bool,
    pub note: Option<String>,
}

/// F-constancy, `μ(t)`, and the defect of `2μ′ = μ² F` along `path`.
pub fn along_geodesic_diagnostics(metric: &MetricField, path: &GeodesicPath) -> Result<GeodesicDiagnostics> {
    along_geodesic_diagnostics_with(metric, path, DEFAULT_TOLERANCE)
}

pub fn along_geodesic_diagnostics_with(metric: &MetricField, path: &GeodesicPath, tol: f64) -> Result<GeodesicDiagnostics> {
    let mut f_values = Vec::with_capacity(path.samples.len());
    let mut mu = Vec::with_capacity(path.samples.len());
    let mut degenerate = false;
    let mut stretch_norm: f64 = 0.0;
    for s in &path.samples {
        let p = BasePoint::new(s.x.clone(), s.v.clone())?;
        let geo = Geometry::new(metric, &p, 5)?;
        f_values.push(geo.finsler()?.value());
        stretch_norm = stretch_norm.max(geo.stretch()?.value().max_abs());
        let fit = gib_of(&geo)?;
        if fit.degenerate {
            degenerate = true;
        } else if !(fit.residual <= tol) {
            return Err(Error::FitFailed {
                t: s.t,
                residual: fit.residual,
            });
        }
        mu.push(fit.mu);
    }
    let f0 = f_values[0];
    let f_defect = f_values.iter().map(|f| (f - f0).abs()).fold(0.0, f64::max);
    if degenerate {
        return Ok(GeodesicDiagnostics {
            f_defect,
            mu: Vec::new(),
            st5_defect: Vec::new(),
            st5_max: None,
            stretch_norm,
            st5_asserted: false,
            note: Some(Error::RiemannianDegenerate.to_string()),
        });
    }
    let st5 = st5_defect(&mu, &f_values, path.step);
    let st5_max = st5.iter().map(|d| d.abs()).reduce(f64::max);
    Ok(GeodesicDiagnostics {
        f_defect,
        mu,
        st5_defect: st5,
        st5_max,
        stretch_norm,
        st5_asserted: stretch_norm <= tol,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::load_metric;

    #[test]
    fn euclidean_line() {
        let m = load_metric("euclidean(2)").unwrap();
        let path = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 1.0, 16).unwrap();
        let end = path.end();
        assert!((end.x[0] - 1.0).abs() < 1e-15 && end.x[1].abs() < 1e-15);
        assert_eq!(path.samples.len(), 17);
        let d = along_geodesic_diagnostics(&m, &path).unwrap();
        assert_eq!(d.f_defect, 0.0);
        assert!(d.note.is_some());
    }

    #[test]
    fn funk_geodesic_is_a_chord_with_unit_mu() {
        let m = load_metric("funk(2)").unwrap();
        let (x0, y0) = ([0.1, 0.0], [1.0, 0.5]);
        let path = integrate_geodesic(&m, &x0, &y0, 0.5, 256).unwrap();
        for s in &path.samples {
            let d = ((s.x[0] - x0[0]) * y0[1] - (s.x[1] - x0[1]) * y0[0]).abs() / (y0[0].hypot(y0[1]));
            assert!(d < 1e-6);
        }
        let diag = along_geodesic_diagnostics(&m, &path).unwrap();
        assert!(diag.f_defect < 1e-7);
        assert!(diag.mu.iter().all(|mu| (mu - 1.0).abs() < 1e-8));
        assert!(diag.stretch_norm > 1e-6);
        assert!(!diag.st5_asserted);
        // with μ ≡ 1 the defect is −F, visibly nonzero
        assert!(diag.st5_max.unwrap() > 0.1);
    }

    #[test]
    fn funk_path_stops_at_the_cap() {
        let m = load_metric("funk(2)").unwrap();
        let path = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 10.0, 64).unwrap();
        assert!(path.left_domain_at.is_some());
        assert!(path.samples.iter().all(|s| s.x[0].hypot(s.x[1]) < FUNK_CAP));
    }

    #[test]
    fn synthetic_mu_solution() {
        let (mu0, h, n) = (0.5, 1.0 / 1024.0, 1025);
        let mu: Vec<f64> = (0..n).map(|i| 2.0 * mu0 / (2.0 - i as f64 * h * mu0)).collect();
        let defect = st5_defect(&mu, &vec![1.0; n], h);
        assert_eq!(defect.len(), n - 4);
        assert!(defect.iter().all(|d| d.abs() < 1e-8));
    }

    #[test]
    fn scaled_velocity_traces_the_same_points() {
        let m = load_metric("randers(2) { 1, 0; 0, 1; 0.1*x[2], -0.1*x[1] }").unwrap();
        let a = integrate_geodesic(&m, &[0.1, 0.2], &[0.6, 0.3], 1.0, 64).unwrap();
        let b = integrate_geodesic(&m, &[0.1, 0.2], &[1.2, 0.6], 0.5, 64).unwrap();
        for (s, r) in a.samples.iter().zip(&b.samples) {
            assert!((s.x[0] - r.x[0]).abs() < 1e-7 && (s.x[1] - r.x[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn bad_requests() {
        let m = load_metric("funk(2)").unwrap();
        assert!(integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 1.0, 4).is_err());
        assert!(matches!(
            integrate_geodesic(&m, &[0.99, 0.0], &[1.0, 0.0], 1.0, 16),
            Err(Error::DomainViolation(_))
        ));
    }
}
