//! Report records and their CSV and JSON encodings.
//!
//! CSV columns, in order: `suite, check, anchor, inputs_digest, values,
//! tolerance, pass, note`. `values` is a `;`-separated list of `name=value`
//! pairs with each number in shortest round-trip form. Run time is not
//! recorded so that reports from repeated runs are byte-identical.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::VerifyError;

pub const CSV_HEADER: [&str; 8] = ["suite", "check", "anchor", "inputs_digest", "values", "tolerance", "pass", "note"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub name: String,
    #[serde(with = "number")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    pub check: String,
    pub anchor: String,
    pub inputs_digest: String,
    pub values: Vec<Value>,
    #[serde(with = "number")]
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl Record {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn values_field(&self) -> String {
        self.values.iter().map(|v| format!("{}={}", v.name, number::text(v.value))).collect::<Vec<_>>().join(";")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, VerifyError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.suite.as_str(),
                &r.check,
                &r.anchor,
                &r.inputs_digest,
                &r.values_field(),
                &number::text(r.tolerance),
                if r.pass { "pass" } else { "fail" },
                &r.note,
            ])?;
        }
        w.into_inner().map_err(|e| VerifyError::Io(e.into_error()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, VerifyError> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, VerifyError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, VerifyError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn emit<W: Write>(&self, format: Format, out: &mut W) -> Result<(), VerifyError> {
        out.write_all(&self.encode(format)?)?;
        Ok(())
    }

    /// SHA-256 of the CSV encoding, hex.
    pub fn digest(&self) -> Result<String, VerifyError> {
        Ok(sha256_hex(&self.to_csv()?))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Finite numbers as JSON numbers, the rest as the strings `inf`, `-inf`,
/// `nan`.
mod number {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn text(v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v.is_infinite() {
            if v > 0.0 { "inf" } else { "-inf" }.into()
        } else {
            format!("{v:?}")
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&text(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}
