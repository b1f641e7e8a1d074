//! Report numbers: finite, or null together with the reason.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Value(f64),
    Null(String),
}

impl Num {
    pub fn new(v: f64) -> Num {
        if v.is_finite() {
            Num::Value(v)
        } else if v.is_nan() {
            Num::Null("not a number".into())
        } else if v > 0.0 {
            Num::Null("positive overflow".into())
        } else {
            Num::Null("negative overflow".into())
        }
    }

    pub fn missing(reason: impl Into<String>) -> Num {
        Num::Null(reason.into())
    }

    pub fn from_option(v: Option<f64>, reason: &str) -> Num {
        v.map_or_else(|| Num::missing(reason), Num::new)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Num::Value(v) => Some(*v),
            Num::Null(_) => None,
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::new(v)
    }
}

pub fn nums(values: &[f64]) -> Vec<Num> {
    values.iter().map(|&v| Num::new(v)).collect()
}

#[derive(Serialize, Deserialize)]
struct NullRepr {
    value: Option<f64>,
    reason: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Value(f64),
    Null(NullRepr),
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Num::Value(v) => s.serialize_f64(*v),
            Num::Null(reason) => NullRepr {
                value: None,
                reason: reason.clone(),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(v) => Ok(Num::Value(v)),
            Repr::Null(NullRepr { value: None, reason }) => Ok(Num::Null(reason)),
            Repr::Null(NullRepr { value: Some(v), .. }) => {
                Err(serde::de::Error::custom(format!("null number carries a value {v}")))
            }
        }
    }
}
