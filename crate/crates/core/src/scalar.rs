//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the crate is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + ScalarOperand
    + LinalgScalar
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits scalar")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Logistic sigmoid, evaluated without overflow for large |z|.
#[inline]
pub fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// Serde adapters that keep non-finite values (the ANOVA `+inf` sentinel, the
/// `-inf` empty-mask fitness) readable in JSON, which has no literal for them.
pub mod nonfinite {
    use super::Scalar;
    use serde::de::{self, Deserializer};
    use serde::ser::{SerializeSeq, Serializer};
    use serde::Deserialize;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn encode<F: Scalar, S: Serializer>(v: F, s: S) -> Result<S::Ok, S::Error> {
        let x = v.as_f64();
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if x > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }

    fn decode<F: Scalar, E: de::Error>(r: Repr) -> Result<F, E> {
        let x = match r {
            Repr::Num(x) => x,
            Repr::Text(t) => match t.as_str() {
                "Infinity" => f64::INFINITY,
                "-Infinity" => f64::NEG_INFINITY,
                "NaN" => f64::NAN,
                other => return Err(E::custom(format!("unexpected number text {other:?}"))),
            },
        };
        Ok(F::lit(x))
    }

    pub fn serialize<F: Scalar, S: Serializer>(v: &F, s: S) -> Result<S::Ok, S::Error> {
        encode(*v, s)
    }

    pub fn deserialize<'de, F: Scalar, D: Deserializer<'de>>(d: D) -> Result<F, D::Error> {
        decode(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        struct Item<F>(F);

        impl<F: Scalar> serde::Serialize for Item<F> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                encode(self.0, s)
            }
        }

        pub fn serialize<F: Scalar, S: Serializer>(v: &[F], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&Item(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, F: Scalar, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<F>, D::Error> {
            let raw = Vec::<Repr>::deserialize(d)?;
            raw.into_iter().map(decode).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric_and_saturates() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!((sigmoid(5.0f64) + sigmoid(-5.0f64) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-1000.0f64) >= 0.0);
        assert!(sigmoid(1000.0f32) <= 1.0);
    }

    #[test]
    fn nonfinite_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "nonfinite::vec")]
            v: Vec<f64>,
        }
        let w = W { v: vec![1.5, f64::INFINITY, f64::NEG_INFINITY] };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"v":[1.5,"Infinity","-Infinity"]}"#);
        let back: W = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
