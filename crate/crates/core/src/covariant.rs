//! Vertical (`,`) and horizontal (`|`) derivatives for the Berwald connection.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{dot, Geometry};
use crate::jet::Jet;
use crate::metric::MetricField;
use crate::point::BasePoint;
use crate::tensor::{JetTensor, Lower, TensorValue, Upper, Variance};

/// Fields that can be evaluated and differentiated from F² alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    F2,
    Finsler,
    YLower,
    Fundamental,
    FundamentalInverse,
    Angular,
    AngularMixed,
    Cartan,
    MeanCartan,
    Spray,
    Nonlinear,
    Connection,
}

impl FieldKind {
    /// Jet order consumed before the field has a value.
    pub fn depth(self) -> usize {
        match self {
            FieldKind::F2 | FieldKind::Finsler => 0,
            FieldKind::YLower | FieldKind::AngularMixed => 1,
            FieldKind::Fundamental | FieldKind::FundamentalInverse | FieldKind::Angular | FieldKind::Spray => 2,
            FieldKind::Cartan | FieldKind::MeanCartan | FieldKind::Nonlinear => 3,
            FieldKind::Connection => 4,
        }
    }

    pub fn variance(self) -> Vec<Variance> {
        match self {
            FieldKind::F2 | FieldKind::Finsler => vec![],
            FieldKind::YLower | FieldKind::MeanCartan => vec![Lower],
            FieldKind::Spray => vec![Upper],
            FieldKind::Fundamental | FieldKind::Angular => vec![Lower, Lower],
            FieldKind::FundamentalInverse => vec![Upper, Upper],
            FieldKind::AngularMixed | FieldKind::Nonlinear => vec![Upper, Lower],
            FieldKind::Cartan => vec![Lower, Lower, Lower],
            FieldKind::Connection => vec![Upper, Lower, Lower],
        }
    }

    pub fn jet(self, geo: &Geometry) -> Result<JetTensor> {
        Ok(match self {
            FieldKind::F2 => JetTensor::scalar(geo.f2().clone()),
            FieldKind::Finsler => JetTensor::scalar(geo.finsler()?.clone()),
            FieldKind::YLower => geo.y_lower()?.clone(),
            FieldKind::Fundamental => geo.fundamental()?.clone(),
            FieldKind::FundamentalInverse => geo.fundamental_inverse()?.clone(),
            FieldKind::Angular => geo.angular()?.clone(),
            FieldKind::AngularMixed => geo.angular_mixed()?.clone(),
            FieldKind::Cartan => geo.cartan()?.clone(),
            FieldKind::MeanCartan => geo.mean_cartan()?.clone(),
            FieldKind::Spray => geo.spray()?.clone(),
            FieldKind::Nonlinear => geo.nonlinear()?.clone(),
            FieldKind::Connection => geo.connection()?.clone(),
        })
    }
}

/// A named tensor field of a metric.
#[derive(Debug, Clone, Copy)]
pub struct TensorField<'m> {
    pub metric: &'m MetricField,
    pub kind: FieldKind,
}

impl<'m> TensorField<'m> {
    pub fn new(metric: &'m MetricField, kind: FieldKind) -> Self {
        Self { metric, kind }
    }

    pub fn evaluate(&self, p: &BasePoint) -> Result<TensorValue> {
        let geo = Geometry::new(self.metric, p, self.kind.depth())?;
        Ok(self.kind.jet(&geo)?.value())
    }

    fn geometry(&self, p: &BasePoint, extra: usize) -> Result<Geometry<'m>> {
        Geometry::new(self.metric, p, (self.kind.depth() + extra).max(4))
    }
}

/// `T_{,l}` at `p`.
pub fn v_derivative(field: &TensorField, p: &BasePoint) -> Result<TensorValue> {
    let geo = field.geometry(p, 1)?;
    Ok(vertical(&geo, &field.kind.jet(&geo)?)?.value())
}

/// `T_{|l}` at `p`.
pub fn h_derivative(field: &TensorField, p: &BasePoint) -> Result<TensorValue> {
    let geo = field.geometry(p, 1)?;
    Ok(horizontal(&geo, &field.kind.jet(&geo)?)?.value())
}

/// `T_{|s} yˢ` at `p`.
pub fn geodesic_contraction(field: &TensorField, p: &BasePoint) -> Result<TensorValue> {
    let geo = field.geometry(p, 1)?;
    Ok(along_geodesic(&geo, &field.kind.jet(&geo)?)?.value())
}

fn with_new_slot(t: &JetTensor) -> Vec<Variance> {
    let mut v = t.variance().to_vec();
    v.push(Lower);
    v
}

fn partials(t: &JetTensor, vars: impl Iterator<Item = usize> + Clone) -> Result<Vec<Vec<Jet>>> {
    t.entries()
        .iter()
        .map(|c| vars.clone().map(|v| c.derivative(v)).collect())
        .collect()
}

/// Index of the component `idx` in a tensor's entry list.
fn position(t: &JetTensor, idx: &[usize]) -> usize {
    crate::tensor::flat_index(t.n(), idx)
}

/// `Σ_slots ± Γ`-type corrections: `conn(a, m)` is the coefficient that
/// moves index value `a` of a slot to `m`.
fn slot_corrections(geo: &Geometry, t: &JetTensor, idx: &[usize], conn: impl Fn(usize, usize) -> Jet) -> Option<Jet> {
    let n = geo.dim();
    let mut acc: Option<Jet> = None;
    let mut inner = idx.to_vec();
    for (slot, variance) in t.variance().iter().enumerate() {
        for m in 0..n {
            inner[slot] = m;
            let term = t.get(&inner);
            let c = match variance {
                Upper => conn(m, idx[slot]),
                Lower => conn(idx[slot], m).neg(),
            };
            match acc.as_mut() {
                Some(a) => a.add_product(&c, term),
                None => acc = Some(c.mul(term)),
            }
        }
        inner[slot] = idx[slot];
    }
    acc
}

/// `T_{,l} = ∂T/∂yˡ`, new lower slot last.
pub fn vertical(geo: &Geometry, t: &JetTensor) -> Result<JetTensor> {
    let n = geo.dim();
    let rank = t.rank();
    JetTensor::try_from_fn(n, with_new_slot(t), |idx| t.get(&idx[..rank]).derivative(geo.yvar(idx[rank])))
}

/// `∂T/∂xˡ`, new lower slot last.
pub fn x_partial(geo: &Geometry, t: &JetTensor) -> Result<JetTensor> {
    let n = geo.dim();
    let rank = t.rank();
    JetTensor::try_from_fn(n, with_new_slot(t), |idx| t.get(&idx[..rank]).derivative(geo.xvar(idx[rank])))
}

/// `T_{|l} = δT/δxˡ + Σ_upper Γⁱ_ml T^{..m..} − Σ_lower Γᵐ_jl T_{..m..}`
/// with `δ/δxˡ = ∂/∂xˡ − Nᵐ_l ∂/∂yᵐ`.
pub fn horizontal(geo: &Geometry, t: &JetTensor) -> Result<JetTensor> {
    let n = geo.dim();
    let rank = t.rank();
    let nl = geo.nonlinear()?;
    let gamma = geo.connection()?;
    let dx = partials(t, (0..n).map(|l| geo.xvar(l)))?;
    let dy = partials(t, (0..n).map(|m| geo.yvar(m)))?;
    Ok(JetTensor::from_fn(n, with_new_slot(t), |idx| {
        let (base, l) = (&idx[..rank], idx[rank]);
        let c = position(t, base);
        let mut acc = dx[c][l].sub(&dot((0..n).map(|m| (nl.get(&[m, l]), &dy[c][m]))));
        if let Some(corr) = slot_corrections(geo, t, base, |from, to| gamma.get(&[to, from, l]).clone()) {
            acc = acc.add(&corr);
        }
        acc
    }))
}

/// Contracts the last slot of `t` with the vector `v`.
pub fn contract_last(t: &JetTensor, v: &[Jet]) -> JetTensor {
    let rank = t.rank();
    let n = t.n();
    JetTensor::from_fn(n, t.variance()[..rank - 1].to_vec(), |idx| {
        let mut inner = idx.to_vec();
        inner.push(0);
        let terms: Vec<&Jet> = (0..n)
            .map(|s| {
                inner[rank - 1] = s;
                t.get(&inner)
            })
            .collect();
        dot(terms.into_iter().zip(v))
    })
}

/// `T_{|s} yˢ` via the horizontal derivative.
pub fn along_geodesic(geo: &Geometry, t: &JetTensor) -> Result<JetTensor> {
    Ok(contract_last(&horizontal(geo, t)?, geo.y_jets()))
}

/// `T_{|s} yˢ` as the rate of change along the lifted geodesic flow
/// `(ẋ, ẏ) = (y, −2G)`, plus the `N`-corrections of a parallel frame.
pub fn along_flow(geo: &Geometry, t: &JetTensor) -> Result<JetTensor> {
    let n = geo.dim();
    let nl = geo.nonlinear()?;
    let spray = geo.spray()?;
    let ys = geo.y_jets();
    let dx = partials(t, (0..n).map(|l| geo.xvar(l)))?;
    let dy = partials(t, (0..n).map(|m| geo.yvar(m)))?;
    let two_g: Vec<Jet> = spray.entries().iter().map(|g| g.scale(2.0)).collect();
    Ok(JetTensor::from_fn(n, t.variance().to_vec(), |idx| {
        let c = position(t, idx);
        let mut acc = dot(ys.iter().zip(&dx[c])).sub(&dot(two_g.iter().zip(&dy[c])));
        if let Some(corr) = slot_corrections(geo, t, idx, |from, to| nl.get(&[to, from]).clone()) {
            acc = acc.add(&corr);
        }
        acc
    }))
}
