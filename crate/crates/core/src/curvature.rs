//! Berwald, Landsberg, stretch, Douglas and Riemann curvatures, and the
//! numerical check of the identities relating them.

use serde::{Deserialize, Serialize};

use crate::covariant::{along_geodesic, contract_last, horizontal, vertical};
use crate::error::{Error, Result};
use crate::fields::{dot, Geometry};
use crate::jet::Jet;
use crate::metric::MetricField;
use crate::point::BasePoint;
use crate::tensor::{index_tuples, JetTensor, Lower, TensorValue, Upper};

/// Default dimensionless tolerance for identities and predicates.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Smallest flag denominator accepted by [`flag_curvature`].
pub const FLAG_THRESHOLD: f64 = 1e-12;

/// `max|a − b| / (1 + max(|a|, |b|))` over all components.
pub fn scaled_defect(a: &TensorValue, b: &TensorValue) -> f64 {
    a.sub(b).max_abs() / (1.0 + a.max_abs().max(b.max_abs()))
}

/// Applies `f` to every index tuple of a rank-`rank` tensor and returns the
/// scaled defect between the two sides it produces.
pub(crate) fn defect(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> (f64, f64)) -> f64 {
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for idx in index_tuples(n, rank) {
        let (lhs, rhs) = f(&idx);
        diff = diff.max((lhs - rhs).abs());
        size = size.max(lhs.abs()).max(rhs.abs());
    }
    diff / (1.0 + size)
}

impl<'m> Geometry<'m> {
    /// `Bⁱ_jkl = ∂Γⁱ_jk/∂yˡ`.
    pub fn berwald(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald, 5, || vertical(self, self.connection()?))
    }

    /// `E_jk = ½ Bᵐ_jkm`.
    pub fn mean_berwald(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_berwald, 5, || {
            let b = self.berwald()?;
            let n = self.dim();
            Ok(JetTensor::from_fn(n, vec![Lower, Lower], |ix| {
                let mut acc = b.get(&[0, ix[0], ix[1], 0]).clone();
                for m in 1..n {
                    acc = acc.add(b.get(&[m, ix[0], ix[1], m]));
                }
                acc.scale(0.5)
            }))
        })
    }

    /// `L_ijk = C_ijk|s yˢ`.
    pub fn landsberg(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.landsberg, 4, || along_geodesic(self, self.cartan()?))
    }

    /// `J_k = g^ij L_ijk`.
    pub fn mean_landsberg(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_landsberg, 4, || {
            let l = self.landsberg()?;
            let gi = self.fundamental_inverse()?;
            let n = self.dim();
            Ok(JetTensor::from_fn(n, vec![Lower], |k| {
                let pairs: Vec<(&Jet, &Jet)> = index_tuples(n, 2)
                    .iter()
                    .map(|ij| (gi.get(ij), l.get(&[ij[0], ij[1], k[0]])))
                    .collect();
                dot(pairs)
            }))
        })
    }

    /// `L_ijk|l`.
    pub fn landsberg_h(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.landsberg_h, 5, || horizontal(self, self.landsberg()?))
    }

    /// `Σ_ijkl = 2(L_ijk|l − L_ijl|k)`.
    pub fn stretch(&self) -> Result<JetTensor> {
        let lh = self.landsberg_h()?;
        Ok(JetTensor::from_fn(self.dim(), vec![Lower; 4], |ix| {
            lh.get(ix).sub(lh.get(&[ix[0], ix[1], ix[3], ix[2]])).scale(2.0)
        }))
    }

    /// `E_jk,l`.
    pub fn mean_berwald_v(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_berwald_v, 6, || vertical(self, self.mean_berwald()?))
    }

    /// `Ē_jkl = E_jk|l`.
    pub fn mean_berwald_h(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_berwald_h, 6, || horizontal(self, self.mean_berwald()?))
    }

    /// `H_jk = E_jk|m yᵐ`.
    pub fn h_curvature(&self) -> Result<JetTensor> {
        Ok(contract_last(self.mean_berwald_h()?, self.y_jets()))
    }

    /// `Dⁱ_jkl = Bⁱ_jkl − 2/(n+1) (E_jk δⁱ_l + E_kl δⁱ_j + E_lj δⁱ_k + E_jk,l yⁱ)`.
    pub fn douglas(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.douglas, 6, || {
            let n = self.dim();
            let b = self.berwald()?;
            let e = self.mean_berwald()?;
            let ev = self.mean_berwald_v()?;
            let ys = self.y_jets();
            let factor = 2.0 / (n as f64 + 1.0);
            Ok(JetTensor::from_fn(n, vec![Upper, Lower, Lower, Lower], |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let mut bracket = ev.get(&[j, k, l]).mul(&ys[i]);
                if i == l {
                    bracket = bracket.add(e.get(&[j, k]));
                }
                if i == j {
                    bracket = bracket.add(e.get(&[k, l]));
                }
                if i == k {
                    bracket = bracket.add(e.get(&[l, j]));
                }
                b.get(ix).sub(&bracket.scale(factor))
            }))
        })
    }

    /// `Dⁱ_jkl|m yᵐ`.
    pub fn douglas_flow(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.douglas_flow, 7, || along_geodesic(self, self.douglas()?))
    }

    /// `hⁱ_α Dᵅ_jkl|m yᵐ`.
    pub fn gdw(&self) -> Result<JetTensor> {
        let d = self.douglas_flow()?;
        let h = self.angular_mixed()?;
        let n = self.dim();
        Ok(JetTensor::from_fn(n, vec![Upper, Lower, Lower, Lower], |ix| {
            dot((0..n).map(|a| (h.get(&[ix[0], a]), d.get(&[a, ix[1], ix[2], ix[3]]))))
        }))
    }

    /// `Rⁱ_k = 2∂Gⁱ/∂xᵏ − yʲ∂²Gⁱ/∂xʲ∂yᵏ + 2Gʲ∂²Gⁱ/∂yʲ∂yᵏ − Nⁱ_j Nʲ_k`.
    pub fn riemann_k(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_k, 4, || {
            let n = self.dim();
            let g = self.spray()?;
            let nl = self.nonlinear()?;
            let gamma = self.connection()?;
            let ys = self.y_jets();
            JetTensor::try_from_fn(n, vec![Upper, Lower], |ix| {
                let (i, k) = (ix[0], ix[1]);
                let mut acc = g.get(&[i]).derivative(self.xvar(k))?.scale(2.0);
                for j in 0..n {
                    let dx = nl.get(&[i, k]).derivative(self.xvar(j))?;
                    acc = acc.sub(&ys[j].mul(&dx));
                    acc.add_product(&g.get(&[j]).scale(2.0), gamma.get(&[i, j, k]));
                    acc = acc.sub(&nl.get(&[i, j]).mul(nl.get(&[j, k])));
                }
                Ok(acc)
            })
        })
    }

    /// `Rⁱ_k,l`.
    pub fn riemann_k_v(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_k_v, 5, || vertical(self, self.riemann_k()?))
    }

    /// `Rⁱ_jkl = ⅓ ∂/∂yʲ (∂Rⁱ_k/∂yˡ − ∂Rⁱ_l/∂yᵏ)`.
    pub fn riemann_h(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_h, 6, || {
            let rv = self.riemann_k_v()?;
            JetTensor::try_from_fn(self.dim(), vec![Upper, Lower, Lower, Lower], |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                Ok(rv.get(&[i, k, l]).sub(rv.get(&[i, l, k])).derivative(self.yvar(j))?.scale(1.0 / 3.0))
            })
        })
    }

    /// `Rⁱ_jkl,m`.
    pub fn riemann_h_v(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_h_v, 7, || vertical(self, self.riemann_h()?))
    }

    /// `Rⁱ_jkl|m`.
    pub fn riemann_h_h(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_h_h, 7, || horizontal(self, self.riemann_h()?))
    }

    /// `Bⁱ_jkl,m`.
    pub fn berwald_v(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald_v, 6, || vertical(self, self.berwald()?))
    }

    /// `Bⁱ_jkl|m`.
    pub fn berwald_h(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald_h, 6, || horizontal(self, self.berwald()?))
    }

    /// Trace-fitted flag curvature `K = Rᵐ_m / ((n−1)F²)` as a jet.
    pub fn flag_scalar(&self) -> Result<&Jet> {
        Ok(self
            .cached(&self.cache.flag_k, 4, || {
                let r = self.riemann_k()?;
                let n = self.dim();
                let mut trace = r.get(&[0, 0]).clone();
                for m in 1..n {
                    trace = trace.add(r.get(&[m, m]));
                }
                Ok(JetTensor::scalar(trace.div(self.f2())?.scale(1.0 / (n as f64 - 1.0))))
            })?
            .as_scalar())
    }
}

/// Result of fitting `Rⁱ_k = K F² hⁱ_k` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagFit {
    pub k: f64,
    pub residual: f64,
}

/// Every curvature quantity at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePack {
    pub berwald: TensorValue,
    pub mean_berwald: TensorValue,
    pub landsberg: TensorValue,
    pub mean_landsberg: TensorValue,
    pub stretch: TensorValue,
    pub douglas: TensorValue,
    pub gdw: TensorValue,
    pub riemann: TensorValue,
    pub riemann_h: TensorValue,
    pub h_curvature: TensorValue,
    pub e_bar: TensorValue,
    pub flag: FlagFit,
}

impl CurvaturePack {
    pub fn compute(geo: &Geometry) -> Result<Self> {
        geo.require(7)?;
        Ok(Self {
            berwald: geo.berwald()?.value(),
            mean_berwald: geo.mean_berwald()?.value(),
            landsberg: geo.landsberg()?.value(),
            mean_landsberg: geo.mean_landsberg()?.value(),
            stretch: geo.stretch()?.value(),
            douglas: geo.douglas()?.value(),
            gdw: geo.gdw()?.value(),
            riemann: geo.riemann_k()?.value(),
            riemann_h: geo.riemann_h()?.value(),
            h_curvature: geo.h_curvature()?.value(),
            e_bar: geo.mean_berwald_h()?.value(),
            flag: flag_fit_of(geo)?,
        })
    }
}

/// `(Bⁱ_jkl, E_jk)` at `p`.
pub fn berwald(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 5)?;
    Ok((geo.berwald()?.value(), geo.mean_berwald()?.value()))
}

/// `(L_ijk, J_k)` at `p`.
pub fn landsberg(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 4)?;
    Ok((geo.landsberg()?.value(), geo.mean_landsberg()?.value()))
}

/// `−½ y_i Bⁱ_jkl`, the Landsberg tensor read off the Berwald curvature.
pub fn landsberg_from_berwald(geo: &Geometry) -> Result<TensorValue> {
    let b = geo.berwald()?.value();
    let yl = geo.y_lower()?.value();
    let n = geo.dim();
    Ok(TensorValue::from_fn(n, vec![Lower; 3], |ix| {
        -0.5 * (0..n).map(|i| yl.entries[i] * b.get(&[i, ix[0], ix[1], ix[2]])).sum::<f64>()
    }))
}

pub fn stretch(metric: &MetricField, p: &BasePoint) -> Result<TensorValue> {
    let geo = Geometry::new(metric, p, 5)?;
    Ok(geo.stretch()?.value())
}

pub fn douglas(metric: &MetricField, p: &BasePoint) -> Result<TensorValue> {
    let geo = Geometry::new(metric, p, 6)?;
    Ok(geo.douglas()?.value())
}

pub fn gdw_tensor(metric: &MetricField, p: &BasePoint) -> Result<TensorValue> {
    let geo = Geometry::new(metric, p, 7)?;
    Ok(geo.gdw()?.value())
}

/// `(Rⁱ_k, Rⁱ_jkl)` at `p`.
pub fn riemann(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 6)?;
    Ok((geo.riemann_k()?.value(), geo.riemann_h()?.value()))
}

/// `(H_jk, Ē_jkl)` at `p`.
pub fn h_and_ebar(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 6)?;
    Ok((geo.h_curvature()?.value(), geo.mean_berwald_h()?.value()))
}

/// Flag curvature of the flag spanned by `y` and `u`.
pub fn flag_curvature(metric: &MetricField, p: &BasePoint, u: &[f64]) -> Result<f64> {
    let geo = Geometry::new(metric, p, 4)?;
    flag_curvature_of(&geo, u)
}

pub(crate) fn flag_curvature_of(geo: &Geometry, u: &[f64]) -> Result<f64> {
    let n = geo.dim();
    if u.len() != n {
        return Err(Error::InvalidPoint(format!("flag vector has {} components, expected {n}", u.len())));
    }
    let g = geo.fundamental()?.value();
    let r = geo.riemann_k()?.value();
    let y = geo.point().y();
    let form = |a: &[f64], b: &[f64]| -> f64 {
        index_tuples(n, 2).iter().map(|ix| g.get(ix) * a[ix[0]] * b[ix[1]]).sum()
    };
    let ru: Vec<f64> = (0..n).map(|i| (0..n).map(|k| r.get(&[i, k]) * u[k]).sum()).collect();
    let denom = form(y, y) * form(u, u) - form(y, u).powi(2);
    if denom.abs() < FLAG_THRESHOLD {
        return Err(Error::DegenerateFlag(denom));
    }
    Ok(form(u, &ru) / denom)
}

/// Fits `Rⁱ_k = K F² hⁱ_k` at `p`.
pub fn scalar_flag_fit(metric: &MetricField, p: &BasePoint) -> Result<FlagFit> {
    let geo = Geometry::new(metric, p, 4)?;
    flag_fit_of(&geo)
}

pub(crate) fn flag_fit_of(geo: &Geometry) -> Result<FlagFit> {
    // hⁱ_k is the identity on the g-orthogonal complement of y, so the
    // least-squares K there is the trace divided by its rank n − 1.
    let k = geo.flag_scalar()?.value();
    let r = geo.riemann_k()?.value();
    let h = geo.angular_mixed()?.value();
    let f2 = geo.f2().value();
    let model = h.scale(k * f2);
    Ok(FlagFit {
        k,
        residual: scaled_defect(&r, &model),
    })
}

/// Residual vector of `(n+1)/3 K_{,k} + (K + μ²/4 − μ′/(2F)) I_k`.
pub fn kkc_residual(metric: &MetricField, p: &BasePoint, mu: f64, mu_prime: f64) -> Result<Vec<f64>> {
    let geo = Geometry::new(metric, p, 5)?;
    kkc_of(&geo, mu, mu_prime, DEFAULT_TOLERANCE)
}

pub(crate) fn kkc_of(geo: &Geometry, mu: f64, mu_prime: f64, tol: f64) -> Result<Vec<f64>> {
    let fit = flag_fit_of(geo)?;
    if !(fit.residual <= tol) {
        return Err(Error::NotScalarFlag(fit.residual));
    }
    let n = geo.dim();
    let kj = geo.flag_scalar()?;
    let f = geo.finsler()?.value();
    let i = geo.mean_cartan()?.value();
    let coefficient = fit.k + mu * mu / 4.0 - mu_prime / (2.0 * f);
    (0..n)
        .map(|k| {
            let ky = kj.derivative(geo.yvar(k))?.value();
            Ok((n as f64 + 1.0) / 3.0 * ky + coefficient * i.entries[k])
        })
        .collect()
}
