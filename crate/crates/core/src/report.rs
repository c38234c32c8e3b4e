//! JSON helpers: floats are written with 17 significant digits.

use serde::ser::{SerializeSeq, Serializer};
use serde_json::value::RawValue;

pub fn float17_string(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

pub fn float17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    match float17_string(*v) {
        Some(text) => {
            let raw = RawValue::from_string(text).map_err(serde::ser::Error::custom)?;
            s.serialize_some(&raw)
        }
        None => s.serialize_none(),
    }
}

pub fn float17_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&F17(*x))?;
    }
    seq.end()
}

/// A complex number as `[re, im]`.
pub fn complex17<S: Serializer>(v: &num_complex::Complex64, s: S) -> Result<S::Ok, S::Error> {
    float17_vec(&[v.re, v.im], s)
}

/// Wrapper that serialises with [`float17`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F17(pub f64);

impl serde::Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        float17(&self.0, s)
    }
}
