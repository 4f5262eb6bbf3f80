//! JSON interchange formats.
//!
//! ```json
//! {"field": {"kind": "Fp", "p": 3}, "rows": [["2", "2"], ["2", "2"]]}
//! {"m_t": <matrix>, "m_t_star": <matrix>}
//! {"support": {"0": ["1", "0"], "-1": ["2", "1"]}}
//! ```
//!
//! Scalars use the string grammar of [`Scalar::parse`]; bare JSON integers
//! are accepted on input. The `field` object may be omitted when the caller
//! supplies a descriptor, and must agree with it when both are present.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dilation::FinSuppSequence;
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldKind, Scalar, DEFAULT_PRECISION};
use crate::linalg::{Matrix, Vector};
use crate::magic::{MagicReport, MagicWitness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub kind: String,
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl FieldJson {
    pub fn to_descriptor(&self) -> Result<FieldDescriptor> {
        match self.kind.as_str() {
            "Fp" => FieldDescriptor::prime_field(self.p),
            "Qp" => FieldDescriptor::padic(self.p, self.precision.unwrap_or(DEFAULT_PRECISION)),
            other => Err(Error::Parse(format!("unknown field kind {other:?}, expected Fp or Qp"))),
        }
    }

    pub fn from_descriptor(desc: FieldDescriptor) -> Self {
        Self {
            kind: match desc.kind() {
                FieldKind::PrimeField => "Fp".into(),
                FieldKind::PadicField => "Qp".into(),
            },
            p: desc.p(),
            precision: desc.precision(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarJson {
    Text(String),
    Int(i64),
}

impl ScalarJson {
    fn to_scalar(&self, desc: FieldDescriptor) -> Result<Scalar> {
        match self {
            ScalarJson::Text(s) => Scalar::parse(s, desc),
            ScalarJson::Int(n) => Ok(Scalar::from_int(*n, desc)),
        }
    }
}

#[derive(Debug, Deserialize)]
struct MatrixJson {
    #[serde(default)]
    field: Option<FieldJson>,
    rows: Vec<Vec<ScalarJson>>,
}

#[derive(Debug, Deserialize)]
struct WitnessJson {
    m_t: MatrixJson,
    m_t_star: MatrixJson,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VectorJson {
    Bare(Vec<ScalarJson>),
    Tagged {
        #[serde(default)]
        field: Option<FieldJson>,
        entries: Vec<ScalarJson>,
    },
}

#[derive(Debug, Deserialize)]
struct SequenceJson {
    #[serde(default)]
    field: Option<FieldJson>,
    support: BTreeMap<String, Vec<ScalarJson>>,
}

fn json_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

/// Picks the descriptor from the document and the caller, requiring
/// agreement when both exist.
pub fn resolve_field(doc: Option<&FieldJson>, fallback: Option<FieldDescriptor>) -> Result<FieldDescriptor> {
    match (doc.map(FieldJson::to_descriptor).transpose()?, fallback) {
        (Some(d), Some(f)) => {
            d.ensure_same(&f)?;
            Ok(d)
        }
        (Some(d), None) | (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::Parse(
            "no field given: add a \"field\" object or pass --p".into(),
        )),
    }
}

fn build_matrix(m: &MatrixJson, desc: FieldDescriptor) -> Result<Matrix> {
    let rows = m
        .rows
        .iter()
        .map(|r| r.iter().map(|s| s.to_scalar(desc)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(desc, rows)
}

fn build_vector(entries: &[ScalarJson], desc: FieldDescriptor) -> Result<Vector> {
    Vector::new(
        desc,
        entries.iter().map(|s| s.to_scalar(desc)).collect::<Result<Vec<_>>>()?,
    )
}

pub fn parse_matrix(text: &str, fallback: Option<FieldDescriptor>) -> Result<Matrix> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| json_err("matrix JSON", e))?;
    let desc = resolve_field(m.field.as_ref(), fallback)?;
    build_matrix(&m, desc)
}

pub fn parse_witness(text: &str, fallback: Option<FieldDescriptor>) -> Result<MagicWitness> {
    let w: WitnessJson = serde_json::from_str(text).map_err(|e| json_err("witness JSON", e))?;
    let desc_t = resolve_field(w.m_t.field.as_ref(), fallback)?;
    let desc_s = resolve_field(w.m_t_star.field.as_ref(), Some(desc_t))?;
    Ok(MagicWitness::new(
        build_matrix(&w.m_t, desc_t)?,
        build_matrix(&w.m_t_star, desc_s)?,
    ))
}

pub fn parse_vector(text: &str, fallback: Option<FieldDescriptor>) -> Result<Vector> {
    let v: VectorJson = serde_json::from_str(text).map_err(|e| json_err("vector JSON", e))?;
    match v {
        VectorJson::Bare(entries) => build_vector(&entries, resolve_field(None, fallback)?),
        VectorJson::Tagged { field, entries } => {
            build_vector(&entries, resolve_field(field.as_ref(), fallback)?)
        }
    }
}

pub fn parse_sequence(text: &str, fallback: Option<FieldDescriptor>) -> Result<FinSuppSequence> {
    let s: SequenceJson = serde_json::from_str(text).map_err(|e| json_err("sequence JSON", e))?;
    let desc = resolve_field(s.field.as_ref(), fallback)?;
    let mut entries = Vec::new();
    for (k, v) in &s.support {
        let index: i64 = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("sequence index {k:?} is not an integer")))?;
        entries.push((index, build_vector(v, desc)?));
    }
    let dim = entries
        .first()
        .map(|(_, v)| v.len())
        .ok_or_else(|| Error::Parse("sequence support is empty; dimension unknown".into()))?;
    FinSuppSequence::from_entries(dim, desc, entries)
}

fn scalars(xs: &[Scalar]) -> Value {
    Value::Array(xs.iter().map(|s| Value::String(s.to_string())).collect())
}

pub fn matrix_rows_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| scalars(&m.row_vec(i))).collect())
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    json!({
        "field": FieldJson::from_descriptor(m.descriptor()),
        "rows": matrix_rows_json(m),
    })
}

pub fn vector_to_json(v: &Vector) -> Value {
    scalars(v.entries())
}

pub fn witness_to_json(w: &MagicWitness) -> Value {
    json!({
        "m_t": matrix_to_json(&w.m_t),
        "m_t_star": matrix_to_json(&w.m_t_star),
    })
}

pub fn sequence_to_json(s: &FinSuppSequence) -> Value {
    let support: serde_json::Map<String, Value> = s
        .support()
        .map(|(k, v)| (k.to_string(), vector_to_json(v)))
        .collect();
    json!({ "support": support })
}

pub fn magic_report_to_json(r: &MagicReport) -> Value {
    let checks: serde_json::Map<String, Value> = r
        .checks
        .iter()
        .map(|c| {
            (
                c.name.to_string(),
                json!({
                    "holds": c.holds,
                    "first_failure": c.first_failure.map(|(i, j)| json!([i, j])),
                }),
            )
        })
        .collect();
    Value::Object(checks)
}
