//! JSON has no infinities; extended reals are written as `"inf"` / `"-inf"`.

use serde::Serializer;

pub fn ext_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_ext(*v))
    }
}

/// Shortest round-trip text of a float, with `inf`, `-inf` and `nan` spelled out.
pub fn format_ext(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
