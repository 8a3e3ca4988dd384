//! Result documents and their JSON / CSV encodings.
//!
//! Floats are written as `{:.16e}`: 17 significant digits, enough to read
//! back the exact double.

use std::io::{self, Write};

use num_complex::Complex64;
use quasizeros::zeros::{ZeroIndex, ZeroRecord};
use quasizeros::QuasiPolynomial;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Document {
    pub command: &'static str,
    pub params: Value,
    pub results: Vec<Map<String, Value>>,
    pub summary: Value,
    /// CSV header; each result row supplies these keys.
    pub columns: &'static [&'static str],
}

pub const RECORD_COLUMNS: &[&str] = &[
    "nu",
    "re",
    "im",
    "residual",
    "certified",
    "isolation_radius",
    "multiplicity",
];

pub fn record_row(r: &ZeroRecord) -> Map<String, Value> {
    let nu = match r.index {
        ZeroIndex::Branch(nu) => json!(nu),
        ZeroIndex::Origin => json!("origin"),
    };
    let v = json!({
        "nu": nu,
        "re": r.value.re,
        "im": r.value.im,
        "residual": r.residual,
        "certified": r.certified,
        "isolation_radius": r.isolation_radius,
        "multiplicity": r.multiplicity,
    });
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

struct Exact;

impl Formatter for Exact {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", float(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Document {
    pub fn to_json(&self, qp: &QuasiPolynomial) -> Vec<u8> {
        let doc = json!({
            "quasipolynomial": { "k": qp.k(), "a": complex(qp.a()) },
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "summary": self.summary,
        });
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Exact);
        serde::Serialize::serialize(&doc, &mut ser).expect("serializing a Value into memory");
        out.push(b'\n');
        out
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns).expect("writing to memory");
        for row in &self.results {
            let cells = self.columns.iter().map(|c| match row.get(*c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) if n.is_f64() => float(n.as_f64().unwrap_or(f64::NAN)),
                Some(other) => other.to_string(),
            });
            w.write_record(cells).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }
}

/// Read zero records from a document written by `zeros` or `origin`,
/// or from the matching CSV table.
pub fn read_records(
    text: &str,
    is_csv: bool,
) -> Result<(Option<(u32, Complex64)>, Vec<ZeroRecord>), String> {
    if is_csv {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let headers = rd.headers().map_err(|e| e.to_string())?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| format!("CSV is missing the {name} column"))
        };
        let idx: Vec<usize> = RECORD_COLUMNS
            .iter()
            .map(|c| col(c))
            .collect::<Result<_, _>>()?;
        let mut out = Vec::new();
        for row in rd.records() {
            let row = row.map_err(|e| e.to_string())?;
            let get = |i: usize| row.get(idx[i]).unwrap_or("");
            let nu = match get(0) {
                "origin" => json!("origin"),
                s => json!(s.parse::<i64>().map_err(|_| format!("bad nu {s:?}"))?),
            };
            let num = |i: usize| -> Result<f64, String> {
                get(i)
                    .parse::<f64>()
                    .map_err(|_| format!("bad number {:?}", get(i)))
            };
            let m = json!({
                "nu": nu,
                "re": num(1)?,
                "im": num(2)?,
                "residual": num(3)?,
                "certified": get(4) == "true",
                "isolation_radius": num(5)?,
                "multiplicity": get(6).parse::<u32>().map_err(|_| format!("bad multiplicity {:?}", get(6)))?,
            });
            out.push(record_from_value(&m)?);
        }
        return Ok((None, out));
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("not a JSON document: {e}"))?;
    let header = doc.get("quasipolynomial").and_then(|q| {
        let k = q.get("k")?.as_u64()? as u32;
        let a = q.get("a")?;
        Some((
            k,
            Complex64::new(a.get("re")?.as_f64()?, a.get("im")?.as_f64()?),
        ))
    });
    let results = doc
        .get("results")
        .and_then(Value::as_array)
        .ok_or("document has no results array")?;
    let records = results
        .iter()
        .map(record_from_value)
        .collect::<Result<_, _>>()?;
    Ok((header, records))
}

fn record_from_value(v: &Value) -> Result<ZeroRecord, String> {
    let f = |key: &str| {
        v.get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| format!("record is missing numeric field {key}"))
    };
    let index = match v.get("nu") {
        Some(Value::String(s)) if s == "origin" => ZeroIndex::Origin,
        Some(n) => ZeroIndex::Branch(
            n.as_i64()
                .ok_or("record nu must be an integer or \"origin\"")?,
        ),
        None => return Err("record is missing nu".into()),
    };
    let value = Complex64::new(f("re")?, f("im")?);
    let multiplicity = v
        .get("multiplicity")
        .and_then(Value::as_u64)
        .ok_or("record is missing multiplicity")? as u32;
    Ok(ZeroRecord {
        index,
        value,
        residual: f("residual")?,
        seed: value,
        iterations: 0,
        certified: v.get("certified").and_then(Value::as_bool).unwrap_or(false),
        isolation_radius: f("isolation_radius")?,
        multiplicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            -0.5671432904097838,
            1e-300,
            6.02214076e23,
            2.0f64.sqrt(),
            f64::MIN_POSITIVE,
        ] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let v: Value = serde_json::from_str(&s).unwrap();
            assert_eq!(v.as_f64().unwrap().to_bits(), x.to_bits());
        }
    }
}
