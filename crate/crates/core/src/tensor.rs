//! Dense tensors over an n-dimensional tangent space, either evaluated
//! ([`TensorValue`]) or carried as jets ([`JetTensor`]) so they can still be
//! differentiated.

use serde::{Deserialize, Serialize};

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

pub use Variance::{Lower, Upper};

/// Row-major offset of `idx` in a tensor with `n` values per slot.
pub fn flat_index(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// All index tuples of a rank-`rank` tensor, in row-major order.
pub fn index_tuples(n: usize, rank: usize) -> Vec<Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; rank];
            for slot in (0..rank).rev() {
                idx[slot] = flat % n;
                flat /= n;
            }
            idx
        })
        .collect()
}

/// A tensor evaluated at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    pub n: usize,
    pub variance: Vec<Variance>,
    pub entries: Vec<f64>,
}

impl TensorValue {
    pub fn from_fn(n: usize, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let entries = index_tuples(n, variance.len()).iter().map(|idx| f(idx)).collect();
        Self { n, variance, entries }
    }

    pub fn zeros(n: usize, variance: Vec<Variance>) -> Self {
        let len = n.pow(variance.len() as u32);
        Self {
            n,
            variance,
            entries: vec![0.0; len],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            n: 1,
            variance: Vec::new(),
            entries: vec![value],
        }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.entries[flat_index(self.n, idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &TensorValue) -> TensorValue {
        assert_eq!(self.entries.len(), other.entries.len(), "shape mismatch");
        TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> TensorValue {
        TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest violation of the symmetry `T(idx) = sign · T(idx with slots a, b swapped)`.
    pub fn symmetry_defect(&self, a: usize, b: usize, sign: f64) -> f64 {
        index_tuples(self.n, self.rank())
            .iter()
            .map(|idx| {
                let mut swapped = idx.clone();
                swapped.swap(a, b);
                (self.get(idx) - sign * self.get(&swapped)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A tensor whose components are jets around a common base point.
#[derive(Debug, Clone)]
pub struct JetTensor {
    n: usize,
    variance: Vec<Variance>,
    entries: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(n: usize, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let entries = index_tuples(n, variance.len()).iter().map(|idx| f(idx)).collect();
        Self { n, variance, entries }
    }

    pub fn try_from_fn<E>(
        n: usize,
        variance: Vec<Variance>,
        mut f: impl FnMut(&[usize]) -> Result<Jet, E>,
    ) -> Result<Self, E> {
        let entries = index_tuples(n, variance.len())
            .iter()
            .map(|idx| f(idx))
            .collect::<Result<_, E>>()?;
        Ok(Self { n, variance, entries })
    }

    pub fn scalar(jet: Jet) -> Self {
        Self {
            n: 1,
            variance: Vec::new(),
            entries: vec![jet],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        debug_assert_eq!(idx.len(), self.rank());
        &self.entries[flat_index(self.n, idx)]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    /// The single component of a rank-0 tensor.
    pub fn as_scalar(&self) -> &Jet {
        assert_eq!(self.rank(), 0, "not a scalar");
        &self.entries[0]
    }

    /// Lowest truncation order among the components.
    pub fn order(&self) -> usize {
        self.entries.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn value(&self) -> TensorValue {
        TensorValue {
            n: if self.rank() == 0 { 1 } else { self.n },
            variance: self.variance.clone(),
            entries: self.entries.iter().map(Jet::value).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(&Jet) -> Result<Jet, E>) -> Result<JetTensor, E> {
        Ok(JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().map(f).collect::<Result<_, E>>()?,
        })
    }

    pub fn sub(&self, other: &JetTensor) -> JetTensor {
        assert_eq!(self.entries.len(), other.entries.len(), "shape mismatch");
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn add(&self, other: &JetTensor) -> JetTensor {
        assert_eq!(self.entries.len(), other.entries.len(), "shape mismatch");
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> JetTensor {
        self.map(|j| j.scale(factor))
    }

    pub fn mul_scalar(&self, s: &Jet) -> JetTensor {
        self.map(|j| j.mul(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = index_tuples(3, 2);
        assert_eq!(t.len(), 9);
        assert_eq!(t[5], vec![1, 2]);
        assert_eq!(flat_index(3, &[1, 2]), 5);
        assert!(index_tuples(2, 0) == vec![Vec::<usize>::new()]);
    }

    #[test]
    fn symmetry_defect_detects_antisymmetry() {
        let t = TensorValue::from_fn(2, vec![Lower, Lower], |i| i[0] as f64 - i[1] as f64);
        assert_eq!(t.symmetry_defect(0, 1, -1.0), 0.0);
        assert_eq!(t.symmetry_defect(0, 1, 1.0), 2.0);
    }
}
