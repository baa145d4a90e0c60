//! JSON form of a model:
//!
//! ```json
//! {"d": 2, "a0": [[1, 0], [0, 0], [0, 0], [1, 0]],
//!  "coeffs": [[[1, 0], [0, 0], [0, 0], [1, 0]],
//!             {"entries": [[0, 1, 0.5, 0], [1, 0, 0.5, 0]]}]}
//! ```
//!
//! Dense matrices are row-major lists of `[re, im]` pairs; sparse ones list
//! `[row, col, re, im]`. Numbers may be given as decimal strings.

use serde_json::{json, Value};

use super::{Coefficient, GaussianSeriesModel};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};

fn num(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::invalid("number out of range")),
        Value::String(s) => s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("not a number: {s:?}"))),
        _ => Err(Error::invalid(format!("expected a number, got {v}"))),
    }
}

fn index(v: &Value) -> Result<usize> {
    let x = num(v)?;
    if x < 0.0 || x.fract() != 0.0 {
        return Err(Error::invalid(format!("bad index {x}")));
    }
    Ok(x as usize)
}

fn complex(v: &Value) -> Result<C64> {
    match v {
        Value::Array(p) if p.len() == 2 => Ok(C64::new(num(&p[0])?, num(&p[1])?)),
        Value::Array(p) if p.len() == 1 => Ok(C64::new(num(&p[0])?, 0.0)),
        Value::Number(_) | Value::String(_) => Ok(C64::new(num(v)?, 0.0)),
        _ => Err(Error::invalid(format!("expected [re, im], got {v}"))),
    }
}

fn dense(v: &Value, d: usize) -> Result<CMat> {
    let arr = v.as_array().ok_or_else(|| Error::invalid("matrix must be a list"))?;
    if arr.len() != d * d {
        return Err(Error::dim(format!("matrix has {} entries, expected {}", arr.len(), d * d)));
    }
    let vals = arr.iter().map(complex).collect::<Result<Vec<_>>>()?;
    Ok(CMat::from_row_slice(d, d, &vals))
}

fn coefficient(v: &Value, d: usize) -> Result<Coefficient> {
    if let Some(entries) = v.get("entries") {
        let arr = entries.as_array().ok_or_else(|| Error::invalid("entries must be a list"))?;
        let mut e = Vec::with_capacity(arr.len());
        for t in arr {
            let t = t.as_array().filter(|t| t.len() == 3 || t.len() == 4).ok_or_else(|| Error::invalid("entry must be [row, col, re, im]"))?;
            let im = if t.len() == 4 { num(&t[3])? } else { 0.0 };
            e.push((index(&t[0])?, index(&t[1])?, C64::new(num(&t[2])?, im)));
        }
        return Ok(Coefficient::Sparse(e));
    }
    Ok(Coefficient::Dense(dense(v, d)?))
}

pub fn model_from_value(v: &Value) -> Result<GaussianSeriesModel> {
    let d = v.get("d").ok_or_else(|| Error::invalid("missing field d")).and_then(index)?;
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    let a0 = match v.get("a0") {
        Some(a) => dense(a, d)?,
        None => CMat::zeros(d, d),
    };
    let coeffs = match v.get("coeffs") {
        Some(Value::Array(cs)) => cs.iter().map(|c| coefficient(c, d)).collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(Error::invalid("coeffs must be a list")),
        None => Vec::new(),
    };
    GaussianSeriesModel::new(a0, coeffs)
}

pub fn model_from_json(s: &str) -> Result<GaussianSeriesModel> {
    model_from_value(&serde_json::from_str(s)?)
}

fn dense_value(m: &CMat) -> Value {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out.push(json!([z.re, z.im]));
        }
    }
    Value::Array(out)
}

pub fn model_to_value(m: &GaussianSeriesModel) -> Value {
    let coeffs: Vec<Value> = m
        .coeffs()
        .iter()
        .map(|a| match a {
            Coefficient::Dense(x) => dense_value(x),
            Coefficient::Sparse(e) => json!({"entries": e.iter().map(|&(i, j, z)| json!([i, j, z.re, z.im])).collect::<Vec<_>>()}),
        })
        .collect();
    json!({"d": m.dim(), "a0": dense_value(m.a0()), "coeffs": coeffs})
}

pub fn model_to_json(m: &GaussianSeriesModel) -> String {
    model_to_value(m).to_string()
}

pub(crate) fn matrix_value(m: &CMat) -> Value {
    dense_value(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let m = GaussianSeriesModel::gue(3).unwrap().spiked(2.0, &crate::linalg::CVec::from_element(3, C64::new(1.0, 0.0))).unwrap();
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn decimal_strings_and_errors() {
        let m = model_from_json(r#"{"d": 1, "a0": [["0.1", "0"]], "coeffs": [[[1, 0]]]}"#).unwrap();
        assert_eq!(m.a0()[(0, 0)].re, 0.1);
        assert!(model_from_json(r#"{"d": 2, "a0": [[1,0]]}"#).is_err());
        assert!(model_from_json(r#"{"d": 2, "a0": [[0,0],[1,0],[0,0],[0,0]]}"#).is_err());
    }
}
