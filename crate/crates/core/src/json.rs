//! JSON encodings for models, POVMs and results.
//!
//! A matrix is a list of rows; each entry is `[re, im]` or a bare real number.
//! Non-finite reals are written as the strings `"inf"` and `"-inf"`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fisher::MenosReport;
use crate::hermitian::{c64, Hermitian, C64};
use crate::models::ModelAtPoint;
use crate::povm::Povm;
use crate::saturation::{ChiQResult, SaturationReport};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

type Matrix = Vec<Vec<Entry>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmDoc {
    dim: usize,
    elements: Vec<Matrix>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default)]
    theta: f64,
    rho: Matrix,
    drho: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qfi: Option<f64>,
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Json(e.to_string())
}

fn matrix_to_doc(h: &Hermitian) -> Matrix {
    let n = h.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let z = h.get(i, j);
                    Entry::Complex([z.re, z.im])
                })
                .collect()
        })
        .collect()
}

fn matrix_from_doc(rows: &Matrix, what: &str) -> Result<Hermitian> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{what} must be a non-empty square matrix")));
    }
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| match rows[i][j] {
        Entry::Complex([re, im]) => c64(re, im),
        Entry::Real(re) => c64(re, 0.0),
    });
    Hermitian::new(m)
}

/// `x` as a JSON number, or `"inf"`/`"-inf"`/`"nan"`.
pub fn real_to_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn real_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Json(format!("bad number {n}"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(Error::Json(format!("expected a number, got \"{s}\""))),
        },
        other => Err(Error::Json(format!("expected a number, got {other}"))),
    }
}

pub fn povm_to_json(m: &Povm) -> Value {
    serde_json::to_value(PovmDoc {
        dim: m.dim(),
        elements: m.elements().iter().map(matrix_to_doc).collect(),
    })
    .expect("finite entries serialize")
}

/// Parses and validates a POVM.
pub fn povm_from_json(text: &str) -> Result<Povm> {
    let doc: PovmDoc = serde_json::from_str(text).map_err(json_err)?;
    let elements = doc
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| matrix_from_doc(e, &format!("element {i}")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(e) = elements.iter().find(|e| e.dim() != doc.dim) {
        return Err(Error::dim(doc.dim, e.dim()));
    }
    Povm::new(elements)
}

pub fn model_to_json(model: &ModelAtPoint) -> Value {
    serde_json::to_value(ModelDoc {
        theta: model.theta,
        rho: matrix_to_doc(&model.rho),
        drho: matrix_to_doc(&model.drho),
        qfi: model.qfi_known,
    })
    .expect("finite entries serialize")
}

/// Parses and validates a model.
pub fn model_from_json(text: &str) -> Result<ModelAtPoint> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(json_err)?;
    let rho = matrix_from_doc(&doc.rho, "rho")?;
    let drho = matrix_from_doc(&doc.drho, "drho")?;
    ModelAtPoint::new(doc.theta, rho, drho, doc.qfi)
}

pub fn report_to_json(r: &MenosReport) -> Value {
    json!({
        "chi": real_to_json(r.chi),
        "cfi": real_to_json(r.cfi),
        "l_min": real_to_json(r.l_min),
        "l_max": real_to_json(r.l_max),
        "min_label": r.min_label,
        "max_label": r.max_label,
        "g_max": real_to_json(r.g_max),
        "worst_noise": r.worst_noise.as_ref().map(povm_to_json),
    })
}

pub fn chi_q_to_json(r: &ChiQResult) -> Value {
    json!({
        "theta": r.theta,
        "sigma": r.sigma,
        "phi_s": r.phi_s,
        "phi_a": r.phi_a,
        "chi_q": real_to_json(r.chi_q),
        "cfi": real_to_json(r.cfi),
        "evaluations": r.evaluations,
    })
}

pub fn saturation_to_json(r: &SaturationReport) -> Value {
    json!({
        "saturates": r.saturates,
        "max_condition1_residual": real_to_json(r.max_condition1_residual),
        "max_condition2_residual": real_to_json(r.max_condition2_residual),
        "cfi_gap": real_to_json(r.cfi_gap),
        "qfi": real_to_json(r.qfi),
        "cfi": real_to_json(r.cfi),
    })
}
