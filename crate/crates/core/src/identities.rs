//! Numerical verification of the identities between curvature tensors.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{gib_jets, gib_of};
use crate::covariant::{along_geodesic, contract_last, vertical};
use crate::curvature::{defect, landsberg_from_berwald, scaled_defect};
use crate::error::Result;
use crate::fields::Geometry;
use crate::jet::DEFAULT_ORDER;
use crate::metric::MetricField;
use crate::point::BasePoint;
use crate::tensor::{index_tuples, JetTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `Rⁱ_jkl|m + Rⁱ_jlm|k + Rⁱ_jmk|l = Bⁱ_jku Rᵘ_ml + Bⁱ_jlu Rᵘ_km + Bⁱ_jmu Rᵘ_lk`, `Rᵘ_kl = yʲ Rᵘ_jkl`.
    RiemannBianchi,
    /// `Bⁱ_jml|k − Bⁱ_jmk|l = Rⁱ_jkl,m`.
    BerwaldRiemannBianchi,
    /// `Bⁱ_jkl,m = Bⁱ_jkm,l`.
    BerwaldVerticalSymmetry,
    /// `L_ijk|m yᵐ + C_ijm Rᵐ_k = −⅓(g_im Rᵐ_k,j + g_jm Rᵐ_k,i) − ⅙(g_im Rᵐ_j,k + g_jm Rᵐ_i,k)`.
    LandsbergEvolution,
    /// `J_k|m yᵐ + I_m Rᵐ_k = −⅓(2Rᵐ_k,m + Rᵐ_m,k)`.
    MeanLandsbergEvolution,
    /// `y_i Rⁱ_jkl,m = Σ_jmkl`.
    StretchFromRiemann,
    /// `h_ij,k = 2C_ijk − F⁻²(y_j h_ik + y_i h_jk)`.
    AngularVertical,
    /// `y_i Bⁱ_jkl = −2L_jkl`.
    LandsbergFromBerwald,
    /// `E_jk = (n+1)/2 λ h_jk`.
    GibMeanBerwald,
    /// `μ C_jkl = −2F⁻¹ L_jkl`.
    GibCartanLandsberg,
    /// `L_ijk = −½ μ F C_ijk`.
    GibLandsbergCartan,
    /// `λ y_l F⁻² + λ_,l = 0`, for n ≥ 3 only.
    GibLambdaHomogeneity,
    /// `Dⁱ_jkl = −2(F⁻² L_jkl + λ C_jkl) yⁱ` for n ≥ 3. Surfaces keep the
    /// extra term `−(λ y_l F⁻² + λ_,l) h_jk yⁱ`, which need not vanish there.
    GibDouglasForm,
    /// `Dⁱ_jkl|s yˢ = T_jkl yⁱ` with `T = −2(F⁻² L_jkl|s yˢ + λ′ C_jkl + λ L_jkl)`
    /// for n ≥ 3; on surfaces only the proportionality to `yⁱ` is checked.
    GibGdwForm,
}

impl Identity {
    pub const UNIVERSAL: [Identity; 8] = [
        Identity::RiemannBianchi,
        Identity::BerwaldRiemannBianchi,
        Identity::BerwaldVerticalSymmetry,
        Identity::LandsbergEvolution,
        Identity::MeanLandsbergEvolution,
        Identity::StretchFromRiemann,
        Identity::AngularVertical,
        Identity::LandsbergFromBerwald,
    ];

    pub const GIB: [Identity; 6] = [
        Identity::GibMeanBerwald,
        Identity::GibCartanLandsberg,
        Identity::GibLandsbergCartan,
        Identity::GibLambdaHomogeneity,
        Identity::GibDouglasForm,
        Identity::GibGdwForm,
    ];

    pub fn is_conditional(self) -> bool {
        Identity::GIB.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Identity::RiemannBianchi => "riemann_bianchi",
            Identity::BerwaldRiemannBianchi => "berwald_riemann_bianchi",
            Identity::BerwaldVerticalSymmetry => "berwald_vertical_symmetry",
            Identity::LandsbergEvolution => "landsberg_evolution",
            Identity::MeanLandsbergEvolution => "mean_landsberg_evolution",
            Identity::StretchFromRiemann => "stretch_from_riemann",
            Identity::AngularVertical => "angular_vertical",
            Identity::LandsbergFromBerwald => "landsberg_from_berwald",
            Identity::GibMeanBerwald => "gib_mean_berwald",
            Identity::GibCartanLandsberg => "gib_cartan_landsberg",
            Identity::GibLandsbergCartan => "gib_landsberg_cartan",
            Identity::GibLambdaHomogeneity => "gib_lambda_homogeneity",
            Identity::GibDouglasForm => "gib_douglas_form",
            Identity::GibGdwForm => "gib_gdw_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Universal,
    Gib,
    All,
}

impl Suite {
    pub fn members(self) -> Vec<Identity> {
        match self {
            Suite::Universal => Identity::UNIVERSAL.to_vec(),
            Suite::Gib => Identity::GIB.to_vec(),
            Suite::All => Identity::UNIVERSAL.iter().chain(&Identity::GIB).copied().collect(),
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "universal" => Ok(Suite::Universal),
            "gib" => Ok(Suite::Gib),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}` (expected universal, gib or all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not applicable at any sample.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: Identity,
    /// Samples where the identity was evaluated.
    pub samples: usize,
    /// Samples where a conditional identity did not apply.
    pub skipped: usize,
    /// Samples that failed numerically.
    pub errors: usize,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Residual of each requested identity at one point; `None` where a
/// conditional identity does not apply.
pub fn point_identities(geo: &Geometry, members: &[Identity], tol: f64) -> Result<Vec<Option<f64>>> {
    geo.require(7)?;
    let gib_applies = if members.iter().any(|m| m.is_conditional()) {
        gib_of(geo)?.residual <= tol
    } else {
        false
    };
    members
        .iter()
        .map(|&id| {
            let surface_skip = id == Identity::GibLambdaHomogeneity && geo.dim() == 2;
            if (id.is_conditional() && !gib_applies) || surface_skip {
                Ok(None)
            } else {
                residual(geo, id).map(Some)
            }
        })
        .collect()
}

fn residual(geo: &Geometry, id: Identity) -> Result<f64> {
    let n = geo.dim();
    let y = geo.point().y().to_vec();
    let f = geo.finsler()?.value();
    let f2 = f * f;
    match id {
        Identity::RiemannBianchi => {
            let rhh = geo.riemann_h_h()?.value();
            let rh = geo.riemann_h()?.value();
            let b = geo.berwald()?.value();
            let rr = |u: usize, k: usize, l: usize| (0..n).map(|j| y[j] * rh.get(&[u, j, k, l])).sum::<f64>();
            let rr_all: Vec<f64> = index_tuples(n, 3).iter().map(|ix| rr(ix[0], ix[1], ix[2])).collect();
            let r2 = |u: usize, k: usize, l: usize| rr_all[(u * n + k) * n + l];
            Ok(defect(n, 5, |ix| {
                let (i, j, k, l, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
                let lhs = rhh.get(&[i, j, k, l, m]) + rhh.get(&[i, j, l, m, k]) + rhh.get(&[i, j, m, k, l]);
                let rhs = (0..n)
                    .map(|u| {
                        b.get(&[i, j, k, u]) * r2(u, m, l) + b.get(&[i, j, l, u]) * r2(u, k, m) + b.get(&[i, j, m, u]) * r2(u, l, k)
                    })
                    .sum::<f64>();
                (lhs, rhs)
            }))
        }
        Identity::BerwaldRiemannBianchi => {
            let bh = geo.berwald_h()?.value();
            let rv = geo.riemann_h_v()?.value();
            Ok(defect(n, 5, |ix| {
                let (i, j, k, l, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
                (bh.get(&[i, j, m, l, k]) - bh.get(&[i, j, m, k, l]), rv.get(&[i, j, k, l, m]))
            }))
        }
        Identity::BerwaldVerticalSymmetry => {
            let bv = geo.berwald_v()?.value();
            Ok(defect(n, 5, |ix| {
                let (i, j, k, l, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
                (bv.get(&[i, j, k, l, m]), bv.get(&[i, j, k, m, l]))
            }))
        }
        Identity::LandsbergEvolution => {
            let lf = contract_last(geo.landsberg_h()?, geo.y_jets()).value();
            let c = geo.cartan()?.value();
            let rk = geo.riemann_k()?.value();
            let rkv = geo.riemann_k_v()?.value();
            let g = geo.fundamental()?.value();
            let gr = |a: usize, k: usize, d: usize| (0..n).map(|m| g.get(&[a, m]) * rkv.get(&[m, k, d])).sum::<f64>();
            Ok(defect(n, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                let lhs = lf.get(&[i, j, k]) + (0..n).map(|m| c.get(&[i, j, m]) * rk.get(&[m, k])).sum::<f64>();
                let rhs = -(gr(i, k, j) + gr(j, k, i)) / 3.0 - (gr(i, j, k) + gr(j, i, k)) / 6.0;
                (lhs, rhs)
            }))
        }
        Identity::MeanLandsbergEvolution => {
            let jf = along_geodesic(geo, geo.mean_landsberg()?)?.value();
            let i_k = geo.mean_cartan()?.value();
            let rk = geo.riemann_k()?.value();
            let rkv = geo.riemann_k_v()?.value();
            Ok(defect(n, 1, |ix| {
                let k = ix[0];
                let lhs = jf.get(&[k]) + (0..n).map(|m| i_k.get(&[m]) * rk.get(&[m, k])).sum::<f64>();
                let rhs = -(0..n).map(|m| 2.0 * rkv.get(&[m, k, m]) + rkv.get(&[m, m, k])).sum::<f64>() / 3.0;
                (lhs, rhs)
            }))
        }
        Identity::StretchFromRiemann => {
            let rv = geo.riemann_h_v()?.value();
            let yl = geo.y_lower()?.value();
            let sigma = geo.stretch()?.value();
            Ok(defect(n, 4, |ix| {
                let (j, k, l, m) = (ix[0], ix[1], ix[2], ix[3]);
                let lhs = (0..n).map(|i| yl.entries[i] * rv.get(&[i, j, k, l, m])).sum::<f64>();
                (lhs, sigma.get(&[j, m, k, l]))
            }))
        }
        Identity::AngularVertical => {
            let dh = vertical(geo, geo.angular()?)?.value();
            let c = geo.cartan()?.value();
            let h = geo.angular()?.value();
            let yl = geo.y_lower()?.value();
            Ok(defect(n, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                let rhs = 2.0 * c.get(ix) - (yl.entries[j] * h.get(&[i, k]) + yl.entries[i] * h.get(&[j, k])) / f2;
                (dh.get(ix), rhs)
            }))
        }
        Identity::LandsbergFromBerwald => Ok(scaled_defect(&landsberg_from_berwald(geo)?, &geo.landsberg()?.value())),
        Identity::GibMeanBerwald => {
            let lambda = gib_jets(geo)?.lambda.value();
            let e = geo.mean_berwald()?.value();
            let h = geo.angular()?.value();
            Ok(scaled_defect(&e, &h.scale((n as f64 + 1.0) / 2.0 * lambda)))
        }
        Identity::GibCartanLandsberg => {
            let mu = gib_jets(geo)?.mu.value();
            let c = geo.cartan()?.value();
            let l = geo.landsberg()?.value();
            Ok(scaled_defect(&c.scale(mu), &l.scale(-2.0 / f)))
        }
        Identity::GibLandsbergCartan => {
            let mu = gib_jets(geo)?.mu.value();
            let c = geo.cartan()?.value();
            let l = geo.landsberg()?.value();
            Ok(scaled_defect(&l, &c.scale(-0.5 * mu * f)))
        }
        Identity::GibLambdaHomogeneity => {
            let lambda = gib_jets(geo)?.lambda;
            let dl = vertical(geo, &JetTensor::scalar(lambda.clone()))?.value();
            let yl = geo.y_lower()?.value();
            let lv = lambda.value();
            Ok(defect(n, 1, |ix| (lv * yl.entries[ix[0]] / f2, -dl.get(ix))))
        }
        Identity::GibDouglasForm => {
            let lambda_jet = gib_jets(geo)?.lambda;
            let lambda = lambda_jet.value();
            let d = geo.douglas()?.value();
            let l = geo.landsberg()?.value();
            let c = geo.cartan()?.value();
            let h = geo.angular()?.value();
            let yl = geo.y_lower()?.value();
            let extra: Vec<f64> = if n == 2 {
                let dl = vertical(geo, &JetTensor::scalar(lambda_jet))?.value();
                (0..n).map(|m| lambda * yl.entries[m] / f2 + dl.entries[m]).collect()
            } else {
                vec![0.0; n]
            };
            Ok(defect(n, 4, |ix| {
                let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
                let rhs = (-2.0 * (l.get(&[j, k, m]) / f2 + lambda * c.get(&[j, k, m])) - extra[m] * h.get(&[j, k])) * y[i];
                (d.get(ix), rhs)
            }))
        }
        Identity::GibGdwForm if n == 2 => {
            let gdw = geo.gdw()?.value();
            Ok(gdw.max_abs() / (1.0 + geo.douglas_flow()?.value().max_abs()))
        }
        Identity::GibGdwForm => {
            let lambda = gib_jets(geo)?.lambda;
            let lambda_prime = along_geodesic(geo, &JetTensor::scalar(lambda.clone()))?.as_scalar().value();
            let lv = lambda.value();
            let df = geo.douglas_flow()?.value();
            let lf = contract_last(geo.landsberg_h()?, geo.y_jets()).value();
            let l = geo.landsberg()?.value();
            let c = geo.cartan()?.value();
            Ok(defect(n, 4, |ix| {
                let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
                let t = -2.0 * (lf.get(&[j, k, m]) / f2 + lambda_prime * c.get(&[j, k, m]) + lv * l.get(&[j, k, m]));
                (df.get(ix), t * y[i])
            }))
        }
    }
}

/// One report per suite member, max-reduced over `samples`.
pub fn verify_identities(metric: &MetricField, samples: &[BasePoint], suite: Suite, tol: f64) -> Vec<IdentityReport> {
    verify_identities_with(metric, samples, suite, tol, DEFAULT_ORDER)
}

pub fn verify_identities_with(
    metric: &MetricField,
    samples: &[BasePoint],
    suite: Suite,
    tol: f64,
    order: usize,
) -> Vec<IdentityReport> {
    let members = suite.members();
    let per_point: Vec<Result<Vec<Option<f64>>>> = samples
        .par_iter()
        .map(|p| point_identities(&Geometry::new(metric, p, order)?, &members, tol))
        .collect();
    merge_reports(&members, &per_point, tol)
}

pub fn merge_reports(members: &[Identity], per_point: &[Result<Vec<Option<f64>>>], tol: f64) -> Vec<IdentityReport> {
    members
        .iter()
        .enumerate()
        .map(|(slot, &identity)| {
            let mut report = IdentityReport {
                identity,
                samples: 0,
                skipped: 0,
                errors: 0,
                max_residual: None,
                tolerance: tol,
                verdict: Verdict::Skipped,
            };
            for point in per_point {
                match point {
                    Ok(values) => match values[slot] {
                        Some(r) => {
                            report.samples += 1;
                            let worst = report.max_residual.unwrap_or(0.0);
                            report.max_residual = Some(if r.is_nan() { f64::NAN } else { worst.max(r) });
                        }
                        None => report.skipped += 1,
                    },
                    Err(_) => report.errors += 1,
                }
            }
            report.verdict = match report.max_residual {
                _ if report.errors > 0 => Verdict::Fail,
                Some(r) if r <= tol => Verdict::Pass,
                Some(_) => Verdict::Fail,
                None => Verdict::Skipped,
            };
            report
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::load_metric;
    use crate::sampler::sample_points;

    const RANDERS3: &str = "randers(3) { 1, 0, 0; 0, 1, 0; 0, 0, 1; 0.1*x[2], -0.1*x[1], 0.1*x[1]*x[2] }";

    #[test]
    fn funk_passes_everything() {
        let m = load_metric("funk(3)").unwrap();
        let pts = sample_points(&m, m.default_domain(), 10, 7).unwrap();
        for r in verify_identities(&m, &pts, Suite::All, 1e-6) {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            assert_eq!(r.samples, 10);
        }
    }

    #[test]
    fn randers_universal_pass_and_gib_skipped() {
        let m = load_metric(RANDERS3).unwrap();
        let pts = sample_points(&m, m.default_domain(), 10, 8).unwrap();
        let reports = verify_identities(&m, &pts, Suite::All, 1e-6);
        for r in &reports {
            if r.identity.is_conditional() {
                assert!(r.skipped > 0, "{r:?}");
            } else {
                assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            }
        }
    }

    #[test]
    fn euclidean_is_exact() {
        let m = load_metric("euclidean(2)").unwrap();
        let pts = sample_points(&m, m.default_domain(), 3, 9).unwrap();
        for r in verify_identities(&m, &pts, Suite::All, 1e-6) {
            assert!(r.max_residual.unwrap_or(0.0) < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn merge_is_order_independent() {
        let members = [Identity::RiemannBianchi];
        let a = vec![Ok(vec![Some(1e-9)]), Ok(vec![Some(3e-9)]), Ok(vec![None])];
        let b = vec![Ok(vec![None]), Ok(vec![Some(3e-9)]), Ok(vec![Some(1e-9)])];
        assert_eq!(merge_reports(&members, &a, 1e-6), merge_reports(&members, &b, 1e-6));
    }

    #[test]
    fn suites() {
        assert_eq!("all".parse::<Suite>().unwrap().members().len(), 14);
        assert!("some".parse::<Suite>().is_err());
    }
}
