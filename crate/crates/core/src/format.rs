//! Fixed-precision number output shared by the JSON and CSV writers.
//!
//! Every float is written with 17 significant digits in scientific
//! notation, which round-trips any `f64` exactly and is byte-stable across
//! runs.

use serde_json::{Number, Value};

/// `x` with 17 significant digits, e.g. `5.3063755102083896e0`.
pub fn sig17(x: f64) -> String {
    // -0.0 + 0.0 is +0.0
    let x = x + 0.0;
    format!("{x:.16e}")
}

/// A JSON number carrying exactly the digits of [`sig17`]; non-finite
/// values become `null`.
pub fn num17(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = sig17(x).parse().expect("valid JSON number");
    Value::Number(n)
}

pub fn array17(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num17).collect())
}
