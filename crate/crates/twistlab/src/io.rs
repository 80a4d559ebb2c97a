//! JSON and CSV file formats.
//!
//! * sequence: `{"dim": N, "entries": [[index, re, im], ...]}`, or the real
//!   shorthand `{"dim": N, "real": [v1, ..., vN]}` (zeros dropped on load)
//! * matrix: `{"rows": r, "cols": c, "re": [...], "im": [...]}`, row-major,
//!   `im` optional
//! * twisted point: `{"y": seq, "x": seq, "map": centralizer}`
//! * defect report: `{"mode", "sup", "ratios", "witness", "meta"}`
//! * spectrum CSV: header `n,s_n`
//!
//! The parsers take untrusted input: they never panic and cap every size
//! at [`MAX_DIM`] / [`MAX_MATRIX_ENTRIES`].

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::centralizer::{CentralizerError, CentralizerSpec};
use crate::diagnostics::{DefectReport, UniformDefectEstimate};
use crate::seq::{CSeq, SeqError};
use crate::spectral::{CMatrix, SingularSpectrum, SpectralError};
use crate::twisted::{TwistedError, TwistedPoint};

pub const MAX_DIM: usize = 1 << 20;
pub const MAX_MATRIX_ENTRIES: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Centralizer(#[from] CentralizerError),
    #[error(transparent)]
    Twisted(#[from] TwistedError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqRepr {
    dim: usize,
    #[serde(default)]
    entries: Option<Vec<(usize, f64, f64)>>,
    #[serde(default)]
    real: Option<Vec<f64>>,
}

impl SeqRepr {
    fn into_seq(self) -> Result<CSeq, FormatError> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(FormatError::Invalid(format!("dim must lie in [1, {MAX_DIM}], got {}", self.dim)));
        }
        match (self.entries, self.real) {
            (Some(entries), None) => Ok(CSeq::from_entries(
                self.dim,
                entries.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))),
            )?),
            (None, Some(real)) => Ok(CSeq::from_real(self.dim, &real)?),
            _ => Err(FormatError::Invalid("sequence needs exactly one of `entries` or `real`".into())),
        }
    }
}

impl Serialize for CSeq {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        struct Entries<'a>(&'a CSeq);
        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
                let mut seq = ser.serialize_seq(Some(self.0.support_len()))?;
                for (k, v) in self.0.iter() {
                    seq.serialize_element(&(k, v.re, v.im))?;
                }
                seq.end()
            }
        }
        let mut map = ser.serialize_map(Some(2))?;
        map.serialize_entry("dim", &self.dim())?;
        map.serialize_entry("entries", &Entries(self))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for CSeq {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        SeqRepr::deserialize(de)?.into_seq().map_err(serde::de::Error::custom)
    }
}

pub fn parse_cseq_json(text: &str) -> Result<CSeq, FormatError> {
    let repr: SeqRepr = serde_json::from_str(text)?;
    repr.into_seq()
}

pub fn cseq_to_json(x: &CSeq) -> String {
    serde_json::to_string(x).expect("sequences always serialize")
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

pub fn parse_matrix_json(text: &str) -> Result<CMatrix, FormatError> {
    let repr: MatrixRepr = serde_json::from_str(text)?;
    let total = repr
        .rows
        .checked_mul(repr.cols)
        .filter(|&t| t <= MAX_MATRIX_ENTRIES && repr.rows <= MAX_DIM && repr.cols <= MAX_DIM)
        .ok_or_else(|| FormatError::Invalid("matrix too large".into()))?;
    if repr.re.len() != total {
        return Err(FormatError::Invalid(format!("`re` has {} entries, expected {total}", repr.re.len())));
    }
    let im = match repr.im {
        Some(im) if im.len() != total => {
            return Err(FormatError::Invalid(format!("`im` has {} entries, expected {total}", im.len())))
        }
        Some(im) => im,
        None => vec![0.0; total],
    };
    let data = repr.re.into_iter().zip(im).map(|(re, im)| Complex64::new(re, im)).collect();
    Ok(CMatrix::new(repr.rows, repr.cols, data)?)
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    let repr = MatrixRepr {
        rows: m.rows(),
        cols: m.cols(),
        re: m.data().iter().map(|v| v.re).collect(),
        im: Some(m.data().iter().map(|v| v.im).collect()),
    };
    serde_json::to_string(&repr).expect("matrices always serialize")
}

pub fn parse_spec_json(text: &str) -> Result<CentralizerSpec, FormatError> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TwistedRepr {
    y: CSeq,
    x: CSeq,
    map: CentralizerSpec,
}

pub fn parse_twisted_point_json(text: &str) -> Result<(TwistedPoint, CentralizerSpec), FormatError> {
    let repr: TwistedRepr = serde_json::from_str(text)?;
    let point = TwistedPoint::new(repr.y, repr.x, repr.map.handle())?;
    Ok((point, repr.map))
}

pub fn twisted_point_to_json(y: &CSeq, x: &CSeq, map: &CentralizerSpec) -> Result<String, FormatError> {
    Ok(serde_json::to_string(&json!({ "y": y, "x": x, "map": map }))?)
}

pub fn defect_report_value(r: &DefectReport) -> Value {
    json!({
        "mode": r.mode,
        "sup": r.sup_ratio,
        "ratios": r.ratios,
        "witness": r.witness,
        "meta": {
            "seed": r.seed,
            "dim": r.witness.dim(),
            "truncation": r.witness.dim(),
            "skipped": r.skipped,
        },
    })
}

pub fn uniform_estimate_value(e: &UniformDefectEstimate) -> Result<Value, FormatError> {
    let per: Vec<Value> = e
        .per_centralizer
        .iter()
        .map(|entry| {
            Ok(json!({
                "centralizer": serde_json::to_value(&entry.centralizer)?,
                "label": entry.centralizer.label(),
                "defect": entry.defect,
            }))
        })
        .collect::<Result<_, serde_json::Error>>()?;
    let dim = e.per_centralizer.first().map(|c| c.witness.dim()).unwrap_or(0);
    Ok(json!({
        "sup": e.sup,
        "per_centralizer": per,
        "meta": { "seed": e.seed, "family_size": e.family_size, "truncation": dim },
    }))
}

/// `n,s_n` table, one row per singular value.
pub fn spectrum_csv(s: &SingularSpectrum) -> String {
    let mut out = String::from("n,s_n\n");
    for (k, v) in s.values.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, v).expect("writing to a string");
    }
    out
}

pub fn parse_spectrum_csv(text: &str) -> Result<SingularSpectrum, FormatError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("n,s_n") {
        return Err(FormatError::Invalid("missing `n,s_n` header".into()));
    }
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (n, s) = line
            .split_once(',')
            .ok_or_else(|| FormatError::Invalid(format!("row {}: expected two fields", row + 1)))?;
        let n: usize = n.trim().parse().map_err(|_| FormatError::Invalid(format!("row {}: bad index", row + 1)))?;
        let s: f64 = s.trim().parse().map_err(|_| FormatError::Invalid(format!("row {}: bad value", row + 1)))?;
        if n != values.len() + 1 {
            return Err(FormatError::Invalid(format!("row {}: index {n} out of order", row + 1)));
        }
        if !(s.is_finite() && s >= 0.0) || values.last().is_some_and(|&prev| s > prev) {
            return Err(FormatError::Invalid(format!("row {}: spectrum must be finite, nonnegative, non-increasing", row + 1)));
        }
        values.push(s);
        if values.len() > MAX_DIM {
            return Err(FormatError::Invalid("spectrum too long".into()));
        }
    }
    Ok(SingularSpectrum { values })
}
