//! Truncated multivariate Taylor expansions ("jets") in the 2n variables
//! `(x¹..xⁿ, y¹..yⁿ)` around a base point of the slit tangent bundle.
//!
//! Coefficients are stored densely, graded by total degree, so a jet of
//! order `k` is a prefix of the coefficient vector of any higher-order jet
//! over the same [`Layout`]. Products use a precomputed table of
//! `(lhs, rhs, out)` index triples sorted by output degree, which makes
//! truncated multiplication a prefix scan of that table.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Constant terms smaller than this make division and square roots fail.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Default truncation order. Seven is the deepest any computation needs
/// (two x-derivatives on top of five y-derivatives of F²).
pub const DEFAULT_ORDER: usize = 7;

/// Monomial bookkeeping shared by every jet with the same number of
/// variables and maximal order.
pub struct Layout {
    nvars: usize,
    max_order: usize,
    exps: Vec<u8>,
    degree_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    shift: Vec<u32>,
    products: Vec<(u32, u32, u32)>,
    product_end: Vec<usize>,
    factorial: Vec<f64>,
}

const NO_SHIFT: u32 = u32::MAX;

impl Layout {
    /// Shared layout for `nvars` variables up to total degree `max_order`.
    pub fn get(nvars: usize, max_order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((nvars, max_order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, max_order)))
            .clone()
    }

    fn build(nvars: usize, max_order: usize) -> Layout {
        assert!(nvars > 0, "a jet needs at least one variable");
        assert!(max_order < 64, "unreasonable jet order {max_order}");
        let mut exps: Vec<u8> = Vec::new();
        let mut degree_end = Vec::with_capacity(max_order + 1);
        let mut current = vec![0u8; nvars];
        for degree in 0..=max_order {
            compositions(degree, nvars, &mut current, 0, &mut exps);
            degree_end.push(exps.len() / nvars);
        }
        let count = exps.len() / nvars;
        let mut index = HashMap::with_capacity(count);
        for i in 0..count {
            index.insert(exps[i * nvars..(i + 1) * nvars].to_vec(), i);
        }

        let mut shift = vec![NO_SHIFT; count * nvars];
        let mut scratch = vec![0u8; nvars];
        for i in 0..count {
            for v in 0..nvars {
                scratch.copy_from_slice(&exps[i * nvars..(i + 1) * nvars]);
                scratch[v] += 1;
                if let Some(&j) = index.get(scratch.as_slice()) {
                    shift[i * nvars + v] = j as u32;
                }
            }
        }

        let mut products = Vec::new();
        let mut product_end = Vec::with_capacity(max_order + 1);
        let mut lhs = vec![0u8; nvars];
        let mut rhs = vec![0u8; nvars];
        let mut degree = 0;
        for out in 0..count {
            while out >= degree_end[degree] {
                product_end.push(products.len());
                degree += 1;
            }
            let target = &exps[out * nvars..(out + 1) * nvars];
            lhs.iter_mut().for_each(|e| *e = 0);
            loop {
                for v in 0..nvars {
                    rhs[v] = target[v] - lhs[v];
                }
                let a = index[lhs.as_slice()];
                let b = index[rhs.as_slice()];
                products.push((a as u32, b as u32, out as u32));
                // odometer over all lhs <= target componentwise
                let mut v = 0;
                while v < nvars {
                    if lhs[v] < target[v] {
                        lhs[v] += 1;
                        break;
                    }
                    lhs[v] = 0;
                    v += 1;
                }
                if v == nvars {
                    break;
                }
            }
        }
        while product_end.len() <= max_order {
            product_end.push(products.len());
        }

        let factorial = (0..count)
            .map(|i| {
                exps[i * nvars..(i + 1) * nvars]
                    .iter()
                    .map(|&e| (1..=e as u64).product::<u64>() as f64)
                    .product()
            })
            .collect();

        Layout {
            nvars,
            max_order,
            exps,
            degree_end,
            index,
            shift,
            products,
            product_end,
            factorial,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of monomials of total degree `<= order`.
    pub fn count(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i * self.nvars..(i + 1) * self.nvars]
    }

    pub fn position(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.nvars {
            return None;
        }
        self.index.get(exps).copied()
    }
}

fn compositions(remaining: usize, nvars: usize, current: &mut [u8], slot: usize, out: &mut Vec<u8>) {
    if slot == nvars - 1 {
        current[slot] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e as u8;
        compositions(remaining - e, nvars, current, slot + 1, out);
    }
    current[slot] = 0;
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layout")
            .field("nvars", &self.nvars)
            .field("max_order", &self.max_order)
            .field("monomials", &self.count(self.max_order))
            .finish()
    }
}

/// Exponents of a mixed partial `∂^|α+β| / ∂x^α ∂y^β`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self {
            x: vec![0; n],
            y: vec![0; n],
        }
    }

    pub fn new(x: Vec<u8>, y: Vec<u8>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y parts must have equal length");
        Self { x, y }
    }

    /// Multi-index from a list of 0-based jet variables (x slots first).
    pub fn from_vars(n: usize, vars: &[usize]) -> Self {
        let mut m = Self::zero(n);
        for &v in vars {
            if v < n {
                m.x[v] += 1;
            } else {
                m.y[v - n] += 1;
            }
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.x.iter().chain(&self.y).map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> Vec<u8> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// All multi-indices over `n` positions and velocities with degree `<= max_degree`.
    pub fn all(n: usize, max_degree: usize) -> Vec<MultiIndex> {
        let layout = Layout::get(2 * n, max_degree);
        (0..layout.count(max_degree))
            .map(|i| {
                let e = layout.exponents(i);
                MultiIndex::new(e[..n].to_vec(), e[n..].to_vec())
            })
            .collect()
    }
}

/// A truncated Taylor expansion of a scalar field.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(layout: &Arc<Layout>, order: usize, value: f64) -> Self {
        assert!(order <= layout.max_order, "order above layout maximum");
        let mut coeffs = vec![0.0; layout.count(order)];
        coeffs[0] = value;
        Self {
            layout: layout.clone(),
            order,
            coeffs,
        }
    }

    pub fn zero(layout: &Arc<Layout>, order: usize) -> Self {
        Self::constant(layout, order, 0.0)
    }

    /// The coordinate function `var` expanded around `value`.
    pub fn variable(layout: &Arc<Layout>, order: usize, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(layout, order, value);
        if order >= 1 {
            jet.coeffs[layout.shift[var] as usize] = 1.0;
        }
        jet
    }

    /// Builds a jet from raw coefficients (length must match the order).
    pub fn from_coeffs(layout: &Arc<Layout>, order: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), layout.count(order), "coefficient count mismatch");
        Self {
            layout: layout.clone(),
            order,
            coeffs,
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn lift(&self, value: f64) -> Self {
        Self::constant(&self.layout, self.order, value)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            layout: self.layout.clone(),
            order,
            coeffs: self.coeffs[..self.layout.count(order)].to_vec(),
        }
    }

    /// Coefficient of the monomial `m` (not scaled by `m!`).
    pub fn coefficient(&self, m: &MultiIndex) -> Result<f64> {
        let degree = m.degree();
        if degree > self.order {
            return Err(Error::OrderExceeded {
                needed: degree,
                available: self.order,
            });
        }
        let pos = self.layout.position(&m.exponents()).ok_or(Error::OrderExceeded {
            needed: degree,
            available: self.order,
        })?;
        Ok(self.coeffs[pos])
    }

    /// The exact mixed partial derivative at the base point: `m! × coeff(m)`.
    pub fn partial(&self, m: &MultiIndex) -> Result<f64> {
        let c = self.coefficient(m)?;
        let pos = self.layout.position(&m.exponents()).expect("checked above");
        Ok(self.layout.factorial[pos] * c)
    }

    /// `∂/∂(var)` of the expansion; one order is lost.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::OrderExceeded {
                needed: 1,
                available: 0,
            });
        }
        let order = self.order - 1;
        let nvars = self.layout.nvars;
        let count = self.layout.count(order);
        let mut coeffs = Vec::with_capacity(count);
        for i in 0..count {
            let up = self.layout.shift[i * nvars + var] as usize;
            let e = self.layout.exps[i * nvars + var] as f64;
            coeffs.push((e + 1.0) * self.coeffs[up]);
        }
        Ok(Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        })
    }

    fn check_compatible(&self, other: &Jet) {
        debug_assert!(
            Arc::ptr_eq(&self.layout, &other.layout),
            "jets over different layouts"
        );
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let count = self.layout.count(order);
        let coeffs = self.coeffs[..count]
            .iter()
            .zip(&other.coeffs[..count])
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let count = self.layout.count(order);
        let coeffs = self.coeffs[..count]
            .iter()
            .zip(&other.coeffs[..count])
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let mut out = Jet::zero(&self.layout, order);
        mul_kernel(&mut out.coeffs, &self.coeffs, &other.coeffs, self.layout.product_slice(order));
        out
    }

    /// `self += a * b`, truncating `self` to the smallest order involved.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        self.check_compatible(a);
        self.check_compatible(b);
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            self.order = order;
            self.coeffs.truncate(self.layout.count(order));
        }
        mul_kernel(&mut self.coeffs, &a.coeffs, &b.coeffs, self.layout.product_slice(order));
    }

    /// `self += factor * a`, truncating to the smaller order.
    pub fn add_scaled(&mut self, a: &Jet, factor: f64) {
        self.check_compatible(a);
        let order = self.order.min(a.order);
        if order < self.order {
            self.order = order;
            self.coeffs.truncate(self.layout.count(order));
        }
        for (c, v) in self.coeffs.iter_mut().zip(&a.coeffs) {
            *c += factor * v;
        }
    }

    /// Power series `Σ_k series[k] u^k` of the non-constant part `u`
    /// relative to the constant term (`self = c0 (1 + u)`), evaluated by Horner.
    fn relative_series(&self, series: &[f64]) -> Jet {
        let c0 = self.value();
        let mut u = self.scale(1.0 / c0);
        u.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.layout, self.order, series[self.order]);
        for k in (0..self.order).rev() {
            acc = u.mul(&acc);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0.abs() < DEGENERACY_THRESHOLD || !c0.is_finite() {
            return Err(Error::DivisionByZeroJet(c0));
        }
        let series: Vec<f64> = (0..=self.order)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        Ok(self.relative_series(&series).scale(1.0 / c0))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 < DEGENERACY_THRESHOLD || !c0.is_finite() {
            return Err(Error::NegativeSqrtJet(c0));
        }
        // binomial coefficients of (1 + u)^(1/2)
        let mut series = Vec::with_capacity(self.order + 1);
        let mut c = 1.0;
        for k in 0..=self.order {
            series.push(c);
            c *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.relative_series(&series).scale(c0.sqrt()))
    }

    pub fn powi(&self, exponent: i32) -> Result<Jet> {
        let base = if exponent < 0 { self.recip()? } else { self.clone() };
        let mut e = exponent.unsigned_abs();
        let mut result = base.lift(1.0);
        let mut square = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square);
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square);
            }
        }
        Ok(result)
    }
}

impl Layout {
    fn product_slice(&self, order: usize) -> &[(u32, u32, u32)] {
        &self.products[..self.product_end[order]]
    }
}

#[inline]
fn mul_kernel(out: &mut [f64], a: &[f64], b: &[f64], table: &[(u32, u32, u32)]) {
    for &(i, j, k) in table {
        out[k as usize] += a[i as usize] * b[j as usize];
    }
}

/// Arithmetic shared by plain floats and jets, so metric formulas are
/// written once and evaluated either pointwise or as Taylor expansions.
pub trait Scalar: Clone {
    fn lift(&self, value: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn powi(&self, exponent: i32) -> Result<Self>;
}

impl Scalar for f64 {
    fn lift(&self, value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if other.abs() < DEGENERACY_THRESHOLD {
            return Err(Error::DivisionByZeroJet(*other));
        }
        Ok(self / other)
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < DEGENERACY_THRESHOLD {
            return Err(Error::NegativeSqrtJet(*self));
        }
        Ok(f64::sqrt(*self))
    }
    fn powi(&self, exponent: i32) -> Result<Self> {
        if exponent < 0 && self.abs() < DEGENERACY_THRESHOLD {
            return Err(Error::DivisionByZeroJet(*self));
        }
        Ok(f64::powi(*self, exponent))
    }
}

impl Scalar for Jet {
    fn lift(&self, value: f64) -> Self {
        Jet::lift(self, value)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn add(&self, other: &Self) -> Self {
        Jet::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Jet::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Jet::mul(self, other)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        Jet::div(self, other)
    }
    fn sqrt(&self) -> Result<Self> {
        Jet::sqrt(self)
    }
    fn powi(&self, exponent: i32) -> Result<Self> {
        Jet::powi(self, exponent)
    }
}

/// Jet variables for the 2n coordinates of `coords` at the given order.
pub fn coordinate_jets(coords: &[f64], order: usize) -> Vec<Jet> {
    let layout = Layout::get(coords.len(), order.max(1));
    coords
        .iter()
        .enumerate()
        .map(|(v, &c)| Jet::variable(&layout, order, v, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vars(coords: &[f64], order: usize) -> Vec<Jet> {
        coordinate_jets(coords, order)
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(Layout::get(4, 7).count(7), 330);
        assert_eq!(Layout::get(6, 7).count(7), 1716);
        assert_eq!(Layout::get(2, 3).count(0), 1);
        assert_eq!(Layout::get(2, 3).count(1), 3);
    }

    #[test]
    fn constants_multiply() {
        let layout = Layout::get(4, 3);
        let p = Jet::constant(&layout, 3, 3.0).mul(&Jet::constant(&layout, 3, 4.0));
        assert_eq!(p.value(), 12.0);
        assert!(p.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn square_of_coordinate() {
        let v = vars(&[0.0, 0.0, 0.0, 0.0], 2);
        let sq = v[0].mul(&v[0]);
        let two = MultiIndex::new(vec![2, 0], vec![0, 0]);
        assert_eq!(sq.coefficient(&two).unwrap(), 1.0);
        let nonzero = sq.coeffs().iter().filter(|&&c| c != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn sqrt_matches_binomial_series() {
        // sqrt(1 + y¹) around y¹ = 0: 1, 1/2, -1/8
        let v = vars(&[0.0, 0.0, 0.0, 0.0], 2);
        let s = v[2].add_scalar(1.0).sqrt().unwrap();
        let at = |e: u8| MultiIndex::new(vec![0, 0], vec![e, 0]);
        assert_eq!(s.coefficient(&at(0)).unwrap(), 1.0);
        assert_eq!(s.coefficient(&at(1)).unwrap(), 0.5);
        assert_eq!(s.coefficient(&at(2)).unwrap(), -0.125);
    }

    #[test]
    fn partial_of_square() {
        let v = vars(&[0.3, 0.1, 0.5, -0.2], 3);
        let f = v[2].mul(&v[2]);
        let m = MultiIndex::new(vec![0, 0], vec![2, 0]);
        assert_eq!(f.partial(&m).unwrap(), 2.0);
        assert_eq!(f.partial(&MultiIndex::zero(2)).unwrap(), 0.25);
        assert!(matches!(
            f.partial(&MultiIndex::new(vec![0, 0], vec![4, 0])),
            Err(Error::OrderExceeded { needed: 4, available: 3 })
        ));
    }

    #[test]
    fn euclidean_hessian() {
        let v = vars(&[0.2, -0.4, 0.6, 0.8], 4);
        let f2 = v[2].mul(&v[2]).add(&v[3].mul(&v[3]));
        for i in 0..2 {
            for j in 0..2 {
                let m = MultiIndex::from_vars(2, &[2 + i, 2 + j]);
                assert_eq!(f2.partial(&m).unwrap(), if i == j { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn division_errors() {
        let v = vars(&[0.0, 1.0], 2);
        assert!(matches!(v[1].div(&v[0]), Err(Error::DivisionByZeroJet(_))));
        assert!(matches!(v[0].neg().add_scalar(-1.0).sqrt(), Err(Error::NegativeSqrtJet(_))));
    }

    #[test]
    fn recip_and_powers_agree() {
        let v = vars(&[0.4, -1.3], 5);
        let f = v[0].mul(&v[1]).add_scalar(2.0);
        let a = f.powi(-2).unwrap();
        let b = f.mul(&f).recip().unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-13, max_relative = 1e-12);
        }
        let s = f.sqrt().unwrap();
        let back = s.mul(&s);
        for (x, y) in back.coeffs().iter().zip(f.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_of_cube() {
        let v = vars(&[0.5, 0.0], 4);
        let cube = v[0].powi(3).unwrap();
        let d = cube.derivative(0).unwrap();
        assert_eq!(d.order(), 3);
        assert_relative_eq!(d.value(), 0.75);
        let dd = d.derivative(0).unwrap();
        assert_relative_eq!(dd.value(), 3.0);
    }

    fn poly(coeffs: &[f64], base: &[f64], order: usize) -> Jet {
        // a generic quadratic-ish polynomial in two variables
        let v = vars(base, order);
        let mut f = v[0].lift(coeffs[0]);
        f.add_scaled(&v[0], coeffs[1]);
        f.add_scaled(&v[1], coeffs[2]);
        f.add_scaled(&v[0].mul(&v[1]), coeffs[3]);
        f.add_scaled(&v[1].mul(&v[1]).mul(&v[0]), coeffs[4]);
        f
    }

    fn binom(n: u8, k: u8) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    proptest! {
        #[test]
        fn leibniz_rule(
            a in proptest::collection::vec(-2.0f64..2.0, 5),
            b in proptest::collection::vec(-2.0f64..2.0, 5),
            base in proptest::collection::vec(-1.0f64..1.0, 2),
            e0 in 0u8..3, e1 in 0u8..3,
        ) {
            let order = 4;
            let fa = poly(&a, &base, order);
            let fb = poly(&b, &base, order);
            let prod = fa.mul(&fb);
            let m = MultiIndex { x: vec![e0, e1], y: vec![] };
            let lhs = prod.partial(&m).unwrap();
            let mut rhs = 0.0;
            for i0 in 0..=e0 {
                for i1 in 0..=e1 {
                    let ma = MultiIndex { x: vec![i0, i1], y: vec![] };
                    let mb = MultiIndex { x: vec![e0 - i0, e1 - i1], y: vec![] };
                    rhs += binom(e0, i0) * binom(e1, i1) * fa.partial(&ma).unwrap() * fb.partial(&mb).unwrap();
                }
            }
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn add_and_mul_commute(
            a in proptest::collection::vec(-8i32..8, 5),
            b in proptest::collection::vec(-8i32..8, 5),
        ) {
            // integer coefficients and base keep every product exact
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let fa = poly(&a, &[1.0, -2.0], 3);
            let fb = poly(&b, &[1.0, -2.0], 3);
            prop_assert_eq!(fa.add(&fb).coeffs().to_vec(), fb.add(&fa).coeffs().to_vec());
            prop_assert_eq!(fa.mul(&fb).coeffs().to_vec(), fb.mul(&fa).coeffs().to_vec());
        }
    }
}
