use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y)` of the slit tangent bundle: a manifold point `x` and a
/// nonzero tangent vector `y` at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl BasePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidPoint(format!(
                "x has {} coordinates but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidPoint(format!("dimension {} < 2", x.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidPoint("y = 0 is not on the slit tangent bundle".into()));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Same position, tangent vector scaled by `factor`.
    pub fn scale_y(&self, factor: f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.iter().map(|v| v * factor).collect())
    }

    /// The 2n coordinates `(x¹..xⁿ, y¹..yⁿ)` in jet-variable order.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub(crate) fn from_coords(coords: &[f64]) -> Self {
        let n = coords.len() / 2;
        Self {
            x: coords[..n].to_vec(),
            y: coords[n..].to_vec(),
        }
    }
}
