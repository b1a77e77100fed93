use std::str::FromStr;

use betalogistic::format_f64;
use serde_json::{Number, Value};

/// A JSON number carrying 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format_f64(x)).map(Value::Number).unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn matrix(rows: &[[f64; 2]; 2]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

pub fn csv_line(values: &[f64]) -> String {
    values.iter().map(|&v| format_f64(v)).collect::<Vec<_>>().join(",")
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
