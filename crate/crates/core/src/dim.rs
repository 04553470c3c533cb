//! Dimensions and degrees extended by `−∞` (the sup of an empty set).

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An integer or `−∞`. `None` sorts below every finite value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dim(Option<i64>);

impl Dim {
    pub const NEG_INF: Dim = Dim(None);

    pub fn finite(v: i64) -> Self {
        Dim(Some(v))
    }

    pub fn value(self) -> Option<i64> {
        self.0
    }

    pub fn is_neg_inf(self) -> bool {
        self.0.is_none()
    }
}

impl From<u32> for Dim {
    fn from(v: u32) -> Self {
        Dim(Some(i64::from(v)))
    }
}

impl Add for Dim {
    type Output = Dim;

    fn add(self, rhs: Dim) -> Dim {
        match (self.0, rhs.0) {
            (Some(a), Some(b)) => Dim(Some(a + b)),
            _ => Dim::NEG_INF,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "-inf"),
        }
    }
}

impl fmt::Debug for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Dim(Some(v))),
            Raw::Text(t) if t == "-inf" => Ok(Dim::NEG_INF),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad dimension {t:?}"))),
        }
    }
}
