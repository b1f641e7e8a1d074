//! Fits of the isotropic-Berwald scalars, the surface frame, and the
//! per-metric taxonomy verdicts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariant::{along_geodesic, vertical};
use crate::curvature::{scaled_defect, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fields::{dot, Geometry};
use crate::jet::{Jet, DEFAULT_ORDER};
use crate::metric::MetricField;
use crate::point::BasePoint;
use crate::tensor::{index_tuples, JetTensor, Lower, TensorValue, Upper};

/// `⟨C, C⟩ F²` below this counts as a vanishing Cartan torsion.
pub const DEGENERATE_CARTAN: f64 = 1e-12;

/// Fitted `B = μ C ℓ + λ (h h + h h + h h)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibFit {
    pub mu: f64,
    pub lambda: f64,
    pub residual: f64,
    pub mu_prime: f64,
    /// `C` vanishes here, so `μ` was set to 0.
    pub degenerate: bool,
}

/// The fitted scalars as jets, for further differentiation.
pub(crate) struct GibJets {
    pub mu: Jet,
    pub lambda: Jet,
    pub degenerate: bool,
}

/// `(⟨L, C⟩ F, ⟨C, C⟩ F²)` with all slots contracted through `g⁻¹`.
fn cartan_products(geo: &Geometry) -> Result<(Jet, Jet)> {
    let n = geo.dim();
    let c = geo.cartan()?;
    let cu = geo.cartan_raised()?;
    let l = geo.landsberg()?;
    let f = geo.finsler()?;
    let idx = index_tuples(n, 3);
    let lc = dot(idx.iter().map(|ix| (l.get(ix), cu.get(ix))));
    let cc = dot(idx.iter().map(|ix| (c.get(ix), cu.get(ix))));
    Ok((lc.mul(f), cc.mul(geo.f2())))
}

pub(crate) fn gib_jets(geo: &Geometry) -> Result<GibJets> {
    geo.require(5)?;
    let n = geo.dim() as f64;
    let (lc, cc) = cartan_products(geo)?;
    let degenerate = cc.value() <= DEGENERATE_CARTAN;
    let mu = if degenerate {
        lc.lift(0.0)
    } else {
        lc.div(&cc)?.scale(-2.0)
    };
    let e = geo.mean_berwald()?;
    let gi = geo.fundamental_inverse()?;
    let trace = dot(index_tuples(geo.dim(), 2).iter().map(|ix| (gi.get(ix), e.get(ix))));
    let lambda = trace.scale(2.0 / ((n + 1.0) * (n - 1.0)));
    Ok(GibJets { mu, lambda, degenerate })
}

/// `μ C_jkl ℓⁱ + λ (hⁱ_j h_kl + hⁱ_k h_jl + hⁱ_l h_jk)` at the point.
fn gib_model(geo: &Geometry, mu: f64, lambda: f64) -> Result<TensorValue> {
    let c = geo.cartan()?.value();
    let h = geo.angular()?.value();
    let hm = geo.angular_mixed()?.value();
    let f = geo.finsler()?.value();
    let y = geo.point().y().to_vec();
    Ok(TensorValue::from_fn(geo.dim(), vec![Upper, Lower, Lower, Lower], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        mu * c.get(&[j, k, l]) * y[i] / f
            + lambda
                * (hm.get(&[i, j]) * h.get(&[k, l]) + hm.get(&[i, k]) * h.get(&[j, l]) + hm.get(&[i, l]) * h.get(&[j, k]))
    }))
}

pub(crate) fn gib_of(geo: &Geometry) -> Result<GibFit> {
    let jets = gib_jets(geo)?;
    let mu = jets.mu.value();
    let lambda = jets.lambda.value();
    let model = gib_model(geo, mu, lambda)?;
    let residual = scaled_defect(&geo.berwald()?.value(), &model);
    let mu_prime = along_geodesic(geo, &JetTensor::scalar(jets.mu))?.as_scalar().value();
    Ok(GibFit {
        mu,
        lambda,
        residual,
        mu_prime,
        degenerate: jets.degenerate,
    })
}

/// Fits `μ` and `λ` at `p`. Fails with [`Error::RiemannianDegenerate`]
/// where the Cartan torsion vanishes.
pub fn fit_gib(metric: &MetricField, p: &BasePoint) -> Result<GibFit> {
    let geo = Geometry::new(metric, p, 5)?;
    let fit = gib_of(&geo)?;
    if fit.degenerate {
        return Err(Error::RiemannianDegenerate);
    }
    Ok(fit)
}

/// `L = η C` fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelIsotropicFit {
    pub eta: f64,
    pub residual: f64,
}

pub(crate) fn rel_isotropic_of(geo: &Geometry) -> Result<RelIsotropicFit> {
    let (lc, cc) = cartan_products(geo)?;
    let l = geo.landsberg()?.value();
    if cc.value() <= DEGENERATE_CARTAN {
        return Err(Error::RiemannianDegenerate);
    }
    let eta = lc.value() / cc.value() * geo.finsler()?.value();
    let residual = scaled_defect(&l, &geo.cartan()?.value().scale(eta));
    Ok(RelIsotropicFit { eta, residual })
}

pub fn rel_isotropic_fit(metric: &MetricField, p: &BasePoint) -> Result<RelIsotropicFit> {
    let geo = Geometry::new(metric, p, 4)?;
    rel_isotropic_of(&geo)
}

/// Berwald frame data of a Finsler surface at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFrame {
    pub m: Vec<f64>,
    /// Main scalar, `C_ijk = F⁻¹ I m_i m_j m_k`.
    pub i: f64,
    /// `I_{|s} ℓˢ`.
    pub i_1: f64,
    /// `2 E_jk mʲ mᵏ`.
    pub i_2: f64,
    /// `max |C − F⁻¹ I m⊗m⊗m|`.
    pub reconstruction_defect: f64,
}

pub(crate) fn surface_frame_of(geo: &Geometry) -> Result<SurfaceFrame> {
    if geo.dim() != 2 {
        return Err(Error::NotASurface(geo.dim()));
    }
    let g = geo.fundamental()?;
    let yl = geo.y_lower()?;
    let f = geo.finsler()?;
    let det = g.get(&[0, 0]).mul(g.get(&[1, 1])).sub(&g.get(&[0, 1]).mul(g.get(&[1, 0])));
    let norm = det.sqrt()?.mul(f);
    // m = (−ℓ_2, ℓ_1)/√det g, the orientation with det(ℓ, m) > 0
    let m = [yl.get(&[1]).neg().div(&norm)?, yl.get(&[0]).div(&norm)?];
    let c = geo.cartan()?;
    let idx = index_tuples(2, 3);
    let cubes: Vec<Jet> = idx.iter().map(|ix| m[ix[0]].mul(&m[ix[1]]).mul(&m[ix[2]])).collect();
    let main = dot(idx.iter().map(|ix| c.get(ix)).zip(&cubes)).mul(f);
    let i_1 = along_geodesic(geo, &JetTensor::scalar(main.clone()))?.as_scalar().value() / f.value();
    let e = geo.mean_berwald()?.value();
    let mv: Vec<f64> = m.iter().map(Jet::value).collect();
    let i_2 = 2.0 * index_tuples(2, 2).iter().map(|ix| e.get(ix) * mv[ix[0]] * mv[ix[1]]).sum::<f64>();
    let gv = g.value();
    let m_lower: Vec<f64> = (0..2).map(|i| (0..2).map(|j| gv.get(&[i, j]) * mv[j]).sum()).collect();
    let iv = main.value();
    let fv = f.value();
    let cv = c.value();
    let reconstruction_defect = index_tuples(2, 3)
        .iter()
        .map(|ix| (cv.get(ix) - iv / fv * m_lower[ix[0]] * m_lower[ix[1]] * m_lower[ix[2]]).abs())
        .fold(0.0, f64::max);
    Ok(SurfaceFrame {
        m: mv,
        i: iv,
        i_1,
        i_2,
        reconstruction_defect,
    })
}

pub fn surface_frame(metric: &MetricField, p: &BasePoint) -> Result<SurfaceFrame> {
    if metric.dim() != 2 {
        return Err(Error::NotASurface(metric.dim()));
    }
    let geo = Geometry::new(metric, p, 5)?;
    surface_frame_of(&geo)
}

/// `3 I_{,1} + F I I₂`, zero exactly for Douglas surfaces.
pub fn douglas_2d_criterion(metric: &MetricField, p: &BasePoint) -> Result<f64> {
    let frame = surface_frame(metric, p)?;
    if frame.i.abs() <= DEGENERATE_CARTAN.sqrt() {
        return Err(Error::RiemannianDegenerate);
    }
    let f = metric.f2_value(p)?.sqrt();
    Ok(3.0 * frame.i_1 + f * frame.i * frame.i_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Riemannian,
    Berwald,
    WeaklyBerwald,
    Landsberg,
    Stretch,
    Douglas,
    Gdw,
    RQuadratic,
    Gib,
    IsotropicBerwald,
    RelIsotropicLandsberg,
}

impl Predicate {
    pub const ALL: [Predicate; 11] = [
        Predicate::Riemannian,
        Predicate::Berwald,
        Predicate::WeaklyBerwald,
        Predicate::Landsberg,
        Predicate::Stretch,
        Predicate::Douglas,
        Predicate::Gdw,
        Predicate::RQuadratic,
        Predicate::Gib,
        Predicate::IsotropicBerwald,
        Predicate::RelIsotropicLandsberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Riemannian => "riemannian",
            Predicate::Berwald => "berwald",
            Predicate::WeaklyBerwald => "weakly_berwald",
            Predicate::Landsberg => "landsberg",
            Predicate::Stretch => "stretch",
            Predicate::Douglas => "douglas",
            Predicate::Gdw => "gdw",
            Predicate::RQuadratic => "r_quadratic",
            Predicate::Gib => "gib",
            Predicate::IsotropicBerwald => "isotropic_berwald",
            Predicate::RelIsotropicLandsberg => "rel_isotropic_landsberg",
        }
    }

    pub fn from_name(name: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Default tolerance plus per-predicate overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub default: f64,
    pub overrides: BTreeMap<Predicate, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(DEFAULT_TOLERANCE)
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            default: tol,
            overrides: BTreeMap::new(),
        }
    }

    pub fn get(&self, p: Predicate) -> f64 {
        self.overrides.get(&p).copied().unwrap_or(self.default)
    }
}

/// Residual of every predicate at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResiduals {
    pub residuals: BTreeMap<Predicate, f64>,
    pub gib: GibFit,
    pub eta: Option<f64>,
}

/// Vanishing-tensor residuals are raw max-abs values; samples carry
/// Euclidean-unit directions so these are comparable across points.
pub fn point_residuals(geo: &Geometry) -> Result<PointResiduals> {
    geo.require(7)?;
    let gib = gib_of(geo)?;
    let jets = gib_jets(geo)?;
    let f = geo.finsler()?.value();
    let mut r = BTreeMap::new();
    r.insert(Predicate::Riemannian, geo.cartan()?.value().max_abs());
    r.insert(Predicate::Berwald, geo.berwald()?.value().max_abs());
    r.insert(Predicate::WeaklyBerwald, geo.mean_berwald()?.value().max_abs());
    r.insert(Predicate::Landsberg, geo.landsberg()?.value().max_abs());
    r.insert(Predicate::Stretch, geo.stretch()?.value().max_abs());
    r.insert(Predicate::Douglas, geo.douglas()?.value().max_abs());
    r.insert(Predicate::Gdw, geo.gdw()?.value().max_abs());
    r.insert(Predicate::RQuadratic, geo.riemann_h_v()?.value().max_abs());
    r.insert(Predicate::Gib, gib.residual);
    // μ = 2c(x), λ = c(x)/F: μ must be y-independent and equal 2Fλ
    let mu_v = vertical(geo, &JetTensor::scalar(jets.mu))?.value().max_abs();
    let iso = gib.residual.max((gib.mu - 2.0 * f * gib.lambda).abs()).max(mu_v);
    r.insert(Predicate::IsotropicBerwald, iso);
    let (eta, rel) = match rel_isotropic_of(geo) {
        Ok(fit) => (Some(fit.eta), fit.residual),
        Err(Error::RiemannianDegenerate) => (None, geo.landsberg()?.value().max_abs()),
        Err(e) => return Err(e),
    };
    r.insert(Predicate::RelIsotropicLandsberg, rel);
    Ok(PointResiduals { residuals: r, gib, eta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredicateResult {
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

/// Per-sample numerical failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub predicates: BTreeMap<Predicate, PredicateResult>,
    pub samples: usize,
    pub seed: Option<u64>,
    pub failures: Vec<SampleFailure>,
    /// Implications between verdicts that the run broke.
    pub violations: Vec<String>,
}

impl ClassificationRecord {
    pub fn verdict(&self, p: Predicate) -> bool {
        self.predicates[&p].verdict
    }

    pub fn residual(&self, p: Predicate) -> f64 {
        self.predicates[&p].residual
    }

    /// Max-reduction of per-point residuals; independent of sample order.
    pub fn from_points(points: &[Result<PointResiduals>], tol: &Tolerances, seed: Option<u64>) -> Self {
        let mut worst: BTreeMap<Predicate, f64> = Predicate::ALL.iter().map(|&p| (p, 0.0)).collect();
        let mut failures = Vec::new();
        for (sample, point) in points.iter().enumerate() {
            match point {
                Ok(res) => {
                    for (p, v) in &res.residuals {
                        let w = worst.get_mut(p).expect("all predicates present");
                        *w = if v.is_nan() { f64::NAN } else { w.max(*v) };
                    }
                }
                Err(e) => failures.push(SampleFailure {
                    sample,
                    error: e.to_string(),
                }),
            }
        }
        let predicates = worst
            .into_iter()
            .map(|(p, residual)| {
                let tolerance = tol.get(p);
                (
                    p,
                    PredicateResult {
                        residual,
                        tolerance,
                        verdict: residual <= tolerance,
                    },
                )
            })
            .collect();
        let mut record = Self {
            predicates,
            samples: points.len(),
            seed,
            failures,
            violations: Vec::new(),
        };
        record.violations = record.implication_violations();
        record
    }

    fn implication_violations(&self) -> Vec<String> {
        use Predicate::*;
        let rules = [
            (Berwald, WeaklyBerwald),
            (Berwald, Landsberg),
            (Landsberg, Stretch),
            (Douglas, Gdw),
            (Gib, Gdw),
            (RQuadratic, Stretch),
        ];
        rules
            .iter()
            .filter(|(a, b)| self.verdict(*a) && !self.verdict(*b))
            .map(|(a, b)| format!("{} holds but {} does not", a.name(), b.name()))
            .collect()
    }
}

/// Classifies `metric` over `samples`, one jet geometry per point.
pub fn predicates(metric: &MetricField, samples: &[BasePoint], tol: &Tolerances) -> ClassificationRecord {
    predicates_with(metric, samples, tol, DEFAULT_ORDER, None)
}

pub fn predicates_with(
    metric: &MetricField,
    samples: &[BasePoint],
    tol: &Tolerances,
    order: usize,
    seed: Option<u64>,
) -> ClassificationRecord {
    let points: Vec<Result<PointResiduals>> = samples
        .par_iter()
        .map(|p| point_residuals(&Geometry::new(metric, p, order)?))
        .collect();
    ClassificationRecord::from_points(&points, tol, seed)
}
