//! First-layer tensor fields derived from F²: fundamental tensor, Cartan
//! torsion, angular metric, spray and the Berwald connection.
//!
//! Everything is computed as jets around one base point by [`Geometry`], so
//! later layers can keep differentiating in `x` and `y`. Each quantity
//! declares the jet order it needs; asking for it from a geometry built with
//! a smaller order is an [`Error::OrderExceeded`].

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{coordinate_jets, Jet};
use crate::metric::MetricField;
use crate::point::BasePoint;
use crate::tensor::{JetTensor, Lower, TensorValue, Upper};

/// Largest tolerated 1-norm condition number of `g`.
pub const MAX_CONDITION: f64 = 1e12;

/// `Σ a·b` over a non-empty sequence of jet pairs.
pub(crate) fn dot<'a>(pairs: impl IntoIterator<Item = (&'a Jet, &'a Jet)>) -> Jet {
    let mut iter = pairs.into_iter();
    let (a, b) = iter.next().expect("empty contraction");
    let mut acc = a.mul(b);
    for (a, b) in iter {
        acc.add_product(a, b);
    }
    acc
}

type Cell = OnceCell<Result<JetTensor>>;

#[derive(Default)]
pub(crate) struct Caches {
    pub f: Cell,
    pub g: Cell,
    pub g_inv: Cell,
    pub y_lower: Cell,
    pub angular: Cell,
    pub angular_mixed: Cell,
    pub cartan: Cell,
    pub mean_cartan: Cell,
    pub cartan_raised: Cell,
    pub spray: Cell,
    pub nonlinear: Cell,
    pub connection: Cell,
    pub berwald: Cell,
    pub mean_berwald: Cell,
    pub landsberg: Cell,
    pub mean_landsberg: Cell,
    pub landsberg_h: Cell,
    pub mean_berwald_v: Cell,
    pub mean_berwald_h: Cell,
    pub douglas: Cell,
    pub douglas_flow: Cell,
    pub riemann_k: Cell,
    pub riemann_k_v: Cell,
    pub riemann_h: Cell,
    pub riemann_h_v: Cell,
    pub riemann_h_h: Cell,
    pub berwald_h: Cell,
    pub berwald_v: Cell,
    pub flag_k: Cell,
}

/// Jets of every derived field at one base point.
pub struct Geometry<'m> {
    metric: &'m MetricField,
    point: BasePoint,
    order: usize,
    n: usize,
    xs: Vec<Jet>,
    ys: Vec<Jet>,
    f2: Jet,
    pub(crate) cache: Caches,
}

impl<'m> Geometry<'m> {
    pub fn new(metric: &'m MetricField, point: &BasePoint, order: usize) -> Result<Self> {
        let f2 = metric.f2_jet(point, order)?;
        if !(f2.value() > 0.0) {
            return Err(Error::InvalidPoint(format!("F² = {} is not positive", f2.value())));
        }
        let n = metric.dim();
        let vars = coordinate_jets(&point.coords(), order);
        Ok(Self {
            metric,
            point: point.clone(),
            order,
            n,
            xs: vars[..n].to_vec(),
            ys: vars[n..].to_vec(),
            f2,
            cache: Caches::default(),
        })
    }

    pub fn metric(&self) -> &MetricField {
        self.metric
    }

    pub fn point(&self) -> &BasePoint {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Jet variable index of `x^i`.
    pub fn xvar(&self, i: usize) -> usize {
        i
    }

    /// Jet variable index of `y^i`.
    pub fn yvar(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn x_jets(&self) -> &[Jet] {
        &self.xs
    }

    /// The coordinate functions `yⁱ` as jets.
    pub fn y_jets(&self) -> &[Jet] {
        &self.ys
    }

    pub fn f2(&self) -> &Jet {
        &self.f2
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.order < needed {
            return Err(Error::OrderExceeded {
                needed,
                available: self.order,
            });
        }
        Ok(())
    }

    pub(crate) fn cached<'a>(
        &'a self,
        cell: &'a Cell,
        needed: usize,
        compute: impl FnOnce() -> Result<JetTensor>,
    ) -> Result<&'a JetTensor> {
        self.require(needed)?;
        cell.get_or_init(compute).as_ref().map_err(Clone::clone)
    }

    /// `F` as a scalar jet.
    pub fn finsler(&self) -> Result<&Jet> {
        Ok(self
            .cached(&self.cache.f, 0, || Ok(JetTensor::scalar(self.f2.sqrt()?)))?
            .as_scalar())
    }

    /// `g_ij = ½ ∂²F²/∂yⁱ∂yʲ`.
    pub fn fundamental(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.g, 2, || {
            let first: Vec<Jet> = (0..self.n)
                .map(|i| self.f2.derivative(self.yvar(i)))
                .collect::<Result<_>>()?;
            JetTensor::try_from_fn(self.n, vec![Lower, Lower], |idx| {
                Ok(first[idx[0]].derivative(self.yvar(idx[1]))?.scale(0.5))
            })
        })
    }

    /// `g^ij`, by Gauss–Jordan elimination on jets.
    pub fn fundamental_inverse(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.g_inv, 2, || {
            let g = self.fundamental()?;
            let n = self.n;
            let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect()).collect();
            let mut inv: Vec<Vec<Jet>> = (0..n)
                .map(|i| (0..n).map(|j| a[0][0].lift(if i == j { 1.0 } else { 0.0 })).collect())
                .collect();
            let norm_g = column_norm(&a);
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
                    .expect("non-empty range");
                a.swap(col, pivot);
                inv.swap(col, pivot);
                let p = a[col][col].recip().map_err(|_| Error::SingularMetric(f64::INFINITY))?;
                for j in 0..n {
                    a[col][j] = a[col][j].mul(&p);
                    inv[col][j] = inv[col][j].mul(&p);
                }
                for r in 0..n {
                    if r == col {
                        continue;
                    }
                    let factor = a[r][col].clone();
                    for j in 0..n {
                        let da = factor.mul(&a[col][j]);
                        a[r][j] = a[r][j].sub(&da);
                        let di = factor.mul(&inv[col][j]);
                        inv[r][j] = inv[r][j].sub(&di);
                    }
                }
            }
            let condition = norm_g * column_norm(&inv);
            if !(condition <= MAX_CONDITION) {
                return Err(Error::SingularMetric(condition));
            }
            Ok(JetTensor::from_fn(n, vec![Upper, Upper], |idx| inv[idx[0]][idx[1]].clone()))
        })
    }

    /// `y_i = g_ij yʲ = ½ ∂F²/∂yⁱ`.
    pub fn y_lower(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.y_lower, 1, || {
            JetTensor::try_from_fn(self.n, vec![Lower], |idx| Ok(self.f2.derivative(self.yvar(idx[0]))?.scale(0.5)))
        })
    }

    /// Angular metric `h_ij = g_ij − F⁻² y_i y_j`.
    pub fn angular(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.angular, 2, || {
            let g = self.fundamental()?;
            let yl = self.y_lower()?;
            let inv_f2 = self.f2.recip()?;
            Ok(JetTensor::from_fn(self.n, vec![Lower, Lower], |idx| {
                g.get(idx).sub(&yl.get(&idx[..1]).mul(yl.get(&idx[1..])).mul(&inv_f2))
            }))
        })
    }

    /// `hⁱ_j = δⁱ_j − F⁻² yⁱ y_j`.
    pub fn angular_mixed(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.angular_mixed, 1, || {
            let yl = self.y_lower()?;
            let inv_f2 = self.f2.recip()?;
            Ok(JetTensor::from_fn(self.n, vec![Upper, Lower], |idx| {
                let delta = if idx[0] == idx[1] { 1.0 } else { 0.0 };
                self.ys[idx[0]].mul(yl.get(&idx[1..])).mul(&inv_f2).neg().add_scalar(delta)
            }))
        })
    }

    /// Cartan torsion `C_ijk = ¼ ∂³F²/∂yⁱ∂yʲ∂yᵏ`.
    pub fn cartan(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.cartan, 3, || {
            JetTensor::try_from_fn(self.n, vec![Lower, Lower, Lower], |idx| {
                Ok(self
                    .f2
                    .derivative(self.yvar(idx[0]))?
                    .derivative(self.yvar(idx[1]))?
                    .derivative(self.yvar(idx[2]))?
                    .scale(0.25))
            })
        })
    }

    /// Mean Cartan torsion `I_k = g^ij C_ijk`.
    pub fn mean_cartan(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_cartan, 3, || {
            let c = self.cartan()?;
            let gi = self.fundamental_inverse()?;
            let n = self.n;
            Ok(JetTensor::from_fn(n, vec![Lower], |k| {
                let pairs: Vec<(&Jet, &Jet)> = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| (gi.get(&[i, j]), c.get(&[i, j, k[0]])))
                    .collect();
                dot(pairs)
            }))
        })
    }

    /// `C^{ijk}` with every slot raised by `g^{-1}`.
    pub fn cartan_raised(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.cartan_raised, 3, || {
            let c = self.cartan()?;
            let gi = self.fundamental_inverse()?;
            let n = self.n;
            let raise = |t: &JetTensor, slot: usize| {
                let mut variance = t.variance().to_vec();
                variance[slot] = Upper;
                JetTensor::from_fn(n, variance, |idx| {
                    let mut inner = idx.to_vec();
                    let terms: Vec<(Jet, Jet)> = (0..n)
                        .map(|m| {
                            inner[slot] = m;
                            (gi.get(&[idx[slot], m]).clone(), t.get(&inner).clone())
                        })
                        .collect();
                    dot(terms.iter().map(|(a, b)| (a, b)))
                })
            };
            let once = raise(c, 0);
            let twice = raise(&once, 1);
            Ok(raise(&twice, 2))
        })
    }

    /// Spray coefficients `Gⁱ = ¼ g^il ([F²]_{xᵏyˡ} yᵏ − [F²]_{xˡ})`.
    pub fn spray(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.spray, 2, || {
            let n = self.n;
            let gi = self.fundamental_inverse()?;
            let bracket: Vec<Jet> = (0..n)
                .map(|l| {
                    let dyl = self.f2.derivative(self.yvar(l))?;
                    let mut acc = self.f2.derivative(self.xvar(l))?.neg();
                    for k in 0..n {
                        acc.add_product(&dyl.derivative(self.xvar(k))?, &self.ys[k]);
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            Ok(JetTensor::from_fn(n, vec![Upper], |i| {
                dot((0..n).map(|l| (gi.get(&[i[0], l]), &bracket[l]))).scale(0.25)
            }))
        })
    }

    /// Nonlinear connection `Nⁱ_j = ∂Gⁱ/∂yʲ`.
    pub fn nonlinear(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.nonlinear, 3, || {
            let g = self.spray()?;
            JetTensor::try_from_fn(self.n, vec![Upper, Lower], |idx| g.get(&idx[..1]).derivative(self.yvar(idx[1])))
        })
    }

    /// Berwald connection `Γⁱ_jk = ∂²Gⁱ/∂yʲ∂yᵏ`.
    pub fn connection(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.connection, 4, || {
            let nl = self.nonlinear()?;
            JetTensor::try_from_fn(self.n, vec![Upper, Lower, Lower], |idx| {
                nl.get(&idx[..2]).derivative(self.yvar(idx[2]))
            })
        })
    }
}

fn column_norm(a: &[Vec<Jet>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|j| (0..n).map(|i| a[i][j].value().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The orthonormal-direction data at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFrame {
    pub f: f64,
    pub ell: Vec<f64>,
    pub y_lower: Vec<f64>,
    pub h_lower: TensorValue,
    pub h_mixed: TensorValue,
}

pub fn fundamental_tensor(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 2)?;
    Ok((geo.fundamental()?.value(), geo.fundamental_inverse()?.value()))
}

/// `(C_ijk, I_k)` at `p`.
pub fn cartan(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 3)?;
    Ok((geo.cartan()?.value(), geo.mean_cartan()?.value()))
}

pub fn angular_frame(metric: &MetricField, p: &BasePoint) -> Result<PointFrame> {
    let geo = Geometry::new(metric, p, 2)?;
    frame_of(&geo)
}

pub(crate) fn frame_of(geo: &Geometry) -> Result<PointFrame> {
    let f = geo.finsler()?.value();
    Ok(PointFrame {
        f,
        ell: geo.point().y().iter().map(|v| v / f).collect(),
        y_lower: geo.y_lower()?.value().entries,
        h_lower: geo.angular()?.value(),
        h_mixed: geo.angular_mixed()?.value(),
    })
}

pub fn spray(metric: &MetricField, p: &BasePoint) -> Result<TensorValue> {
    let geo = Geometry::new(metric, p, 2)?;
    Ok(geo.spray()?.value())
}

/// `(Nⁱ_j, Γⁱ_jk)` at `p`.
pub fn connections(metric: &MetricField, p: &BasePoint) -> Result<(TensorValue, TensorValue)> {
    let geo = Geometry::new(metric, p, 4)?;
    Ok((geo.nonlinear()?.value(), geo.connection()?.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::load_metric;
    use crate::sampler::sample_points;

    fn point(x: &[f64], y: &[f64]) -> BasePoint {
        BasePoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    const SPHERE2: &str = "riemannian(2) { 4/(1 + x[1]^2 + x[2]^2)^2, 0; 0, 4/(1 + x[1]^2 + x[2]^2)^2 }";

    #[test]
    fn euclidean_is_flat() {
        let m = load_metric("euclidean(3)").unwrap();
        let p = point(&[0.1, 0.2, 0.3], &[0.3, -1.0, 2.0]);
        let (g, gi) = fundamental_tensor(&m, &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert_eq!(g.get(&[i, j]), d);
                assert_eq!(gi.get(&[i, j]), d);
            }
        }
        let (c, _) = cartan(&m, &p).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        let (nl, gamma) = connections(&m, &p).unwrap();
        assert_eq!(nl.max_abs(), 0.0);
        assert_eq!(gamma.max_abs(), 0.0);
        assert_eq!(spray(&m, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn funk_at_origin_is_euclidean_to_second_order() {
        let m = load_metric("funk(2)").unwrap();
        let (g, _) = fundamental_tensor(&m, &point(&[0.0, 0.0], &[0.6, -0.8])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(&[i, j]) - d).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn riemannian_fundamental_tensor_is_a() {
        let m = load_metric(SPHERE2).unwrap();
        let p = point(&[0.3, -0.2], &[1.0, 2.0]);
        let (g, _) = fundamental_tensor(&m, &p).unwrap();
        let expected = 4.0 / (1.0f64 + 0.09 + 0.04).powi(2);
        assert!((g.get(&[0, 0]) - expected).abs() < 1e-14);
        assert!(g.get(&[0, 1]).abs() < 1e-14);
        let (c, i) = cartan(&m, &p).unwrap();
        assert!(c.max_abs() < 1e-13);
        assert!(i.max_abs() < 1e-13);
    }

    #[test]
    fn angular_frame_of_euclidean() {
        let m = load_metric("euclidean(2)").unwrap();
        let frame = angular_frame(&m, &point(&[0.0, 0.0], &[3.0, 4.0])).unwrap();
        assert!((frame.f - 5.0).abs() < 1e-15);
        assert!((frame.ell[0] - 0.6).abs() < 1e-15);
        assert!((frame.ell[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn frame_invariants_on_funk() {
        let m = load_metric("funk(3)").unwrap();
        for p in sample_points(&m, m.default_domain(), 10, 5).unwrap() {
            let fr = angular_frame(&m, &p).unwrap();
            let ly: f64 = fr.ell.iter().zip(&fr.y_lower).map(|(a, b)| a * b).sum();
            assert!((ly - fr.f).abs() < 1e-10 * fr.f);
            for i in 0..3 {
                let hy: f64 = (0..3).map(|j| fr.h_lower.get(&[i, j]) * p.y()[j]).sum();
                assert!(hy.abs() < 1e-10);
            }
            let trace: f64 = (0..3).map(|s| fr.h_mixed.get(&[s, s])).sum();
            assert!((trace - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn funk_cartan_is_nonzero_and_orthogonal_to_y() {
        let m = load_metric("funk(2)").unwrap();
        for p in sample_points(&m, m.default_domain(), 20, 11).unwrap() {
            let (c, _) = cartan(&m, &p).unwrap();
            assert!(c.max_abs() > 1e-6);
            for i in 0..2 {
                for j in 0..2 {
                    let cy: f64 = (0..2).map(|k| c.get(&[i, j, k]) * p.y()[k]).sum();
                    assert!(cy.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn funk_spray_is_half_f_y() {
        let m = load_metric("funk(3)").unwrap();
        for p in sample_points(&m, m.default_domain(), 50, 2).unwrap() {
            let g = spray(&m, &p).unwrap();
            let f = m.f2_value(&p).unwrap().sqrt();
            for i in 0..3 {
                let expected = 0.5 * f * p.y()[i];
                assert!((g.entries[i] - expected).abs() <= 1e-8 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn connection_contractions() {
        let m = load_metric("randers(2) { 1 + 0.2*x[2]^2, 0.1*x[1]; 0.1*x[1], 1; 0.1*x[2], -0.1*x[1] }").unwrap();
        for p in sample_points(&m, m.default_domain(), 10, 4).unwrap() {
            let geo = Geometry::new(&m, &p, 4).unwrap();
            let g = geo.spray().unwrap().value();
            let nl = geo.nonlinear().unwrap().value();
            let gamma = geo.connection().unwrap().value();
            let y = p.y();
            for i in 0..2 {
                let ny: f64 = (0..2).map(|j| nl.get(&[i, j]) * y[j]).sum();
                assert!((ny - 2.0 * g.entries[i]).abs() < 1e-12);
                for j in 0..2 {
                    let gy: f64 = (0..2).map(|k| gamma.get(&[i, j, k]) * y[k]).sum();
                    assert!((gy - nl.get(&[i, j])).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn order_is_validated() {
        let m = load_metric("funk(2)").unwrap();
        let geo = Geometry::new(&m, &point(&[0.1, 0.0], &[1.0, 0.0]), 3).unwrap();
        assert!(geo.cartan().is_ok());
        assert!(matches!(
            geo.connection(),
            Err(Error::OrderExceeded { needed: 4, available: 3 })
        ));
    }
}
