//! Serde helpers for floats that may be infinite (perfect-fit AIC, Δ-AIC
//! against a perfect fit). Finite values are plain JSON numbers; others are
//! the strings `"inf"`, `"-inf"` and `"nan"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

pub fn serialize<T, S>(value: &T, serializer: S) -> Result<S::Ok, S::Error>
where
    T: Scalar + Serialize,
    S: Serializer,
{
    if value.is_finite() {
        value.serialize(serializer)
    } else if value.is_nan() {
        serializer.serialize_str("nan")
    } else if value.is_sign_negative() {
        serializer.serialize_str("-inf")
    } else {
        serializer.serialize_str("inf")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Text(String),
}

pub fn deserialize<'de, T, D>(deserializer: D) -> Result<T, D::Error>
where
    T: Scalar,
    D: Deserializer<'de>,
{
    let v = match Repr::deserialize(deserializer)? {
        Repr::Number(v) => v,
        Repr::Text(s) => match s.as_str() {
            "inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            "nan" => f64::NAN,
            other => return Err(serde::de::Error::custom(format!("not a number: {other}"))),
        },
    };
    T::from_f64(v).ok_or_else(|| serde::de::Error::custom("value out of range"))
}
