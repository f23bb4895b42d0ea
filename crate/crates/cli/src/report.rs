use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Units attached to every reported number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Nats,
    Bits,
    Probability,
    Dimensionless,
}

impl Unit {
    fn label(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
            Unit::Probability => "probability",
            Unit::Dimensionless => "dimensionless",
        }
    }
}

/// JSON number, or a string for values JSON cannot hold.
pub fn num(x: f64) -> Value {
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

/// Hex SHA-256 over the concatenated input files.
pub fn digest(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for chunk in inputs {
        h.update(chunk);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub results: BTreeMap<String, Value>,
    pub diagnostics: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, input_digest: String) -> Self {
        Self {
            command: command.to_string(),
            input_digest,
            results: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64, unit: Unit) {
        self.results
            .insert(name.to_string(), json!({"value": num(value), "units": unit.label()}));
    }

    /// An exponent in nats, or bits when `bits` is set.
    pub fn exponent(&mut self, name: &str, nats: f64, bits: bool) {
        if bits {
            self.scalar(name, nats / std::f64::consts::LN_2, Unit::Bits);
        } else {
            self.scalar(name, nats, Unit::Nats);
        }
    }

    pub fn curve(&mut self, name: &str, columns: &[(&str, Unit)], rows: Vec<Vec<f64>>) {
        let cols: Vec<Value> = columns
            .iter()
            .map(|(n, u)| json!({"name": n, "units": u.label()}))
            .collect();
        let rows: Vec<Value> = rows
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(num).collect()))
            .collect();
        self.results
            .insert(name.to_string(), json!({"columns": cols, "rows": rows}));
    }

    pub fn value(&mut self, name: &str, v: Value) {
        self.results.insert(name.to_string(), v);
    }

    pub fn diag(&mut self, name: &str, v: Value) {
        self.diagnostics.insert(name.to_string(), v);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
