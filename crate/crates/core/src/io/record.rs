use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{BlError, Result};
use crate::exact::ExactPosValue;

/// Digits after the decimal point in decimal renderings.
pub const DECIMAL_DIGITS: usize = 12;

/// An exact value as a prime-to-exponent map (or `"inf"`), with an advisory
/// decimal rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Value>,
    pub decimal: String,
}

fn decimal(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.DECIMAL_DIGITS$}")
    }
}

impl ValueRecord {
    pub fn exact(v: &ExactPosValue) -> Self {
        let exact = match v.to_exponent_strings() {
            Some(map) => serde_json::to_value(map).expect("string map"),
            None => Value::from("inf"),
        };
        ValueRecord {
            exact: Some(exact),
            decimal: decimal(v.to_f64()),
        }
    }

    pub fn approximate(x: f64) -> Self {
        ValueRecord {
            exact: None,
            decimal: decimal(x),
        }
    }

    /// Reads the exact part back.
    pub fn to_exact(&self) -> Result<Option<ExactPosValue>> {
        match &self.exact {
            None => Ok(None),
            Some(Value::String(s)) if s == "inf" => Ok(Some(ExactPosValue::Infinite)),
            Some(v) => {
                let map: BTreeMap<String, String> = serde_json::from_value(v.clone())
                    .map_err(|e| BlError::Parse(format!("exact value: {e}")))?;
                ExactPosValue::from_exponent_strings(&map).map(Some)
            }
        }
    }

    /// Whether the decimal rendering matches the exact value to the printed
    /// precision.
    pub fn is_consistent(&self) -> bool {
        match self.to_exact() {
            Ok(Some(v)) => decimal(v.to_f64()) == self.decimal,
            Ok(None) => true,
            Err(_) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// A verification succeeded.
    Pass,
    /// A verification failed.
    Fail,
    /// A computation finished without a verification step.
    Ok,
    /// A certificate could not be decided within the configured caps.
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub verb: String,
    pub kind: String,
    /// SHA-256 of the canonical datum.
    pub input_digest: String,
    pub status: Status,
    pub verdicts: BTreeMap<String, String>,
    pub values: BTreeMap<String, ValueRecord>,
    pub maximizers: Vec<Value>,
    pub details: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ResultRecord {
    pub fn new(verb: &str, kind: &str, input_digest: String) -> Self {
        ResultRecord {
            verb: verb.into(),
            kind: kind.into(),
            input_digest,
            status: Status::Ok,
            verdicts: BTreeMap::new(),
            values: BTreeMap::new(),
            maximizers: Vec::new(),
            details: BTreeMap::new(),
            notes: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Into<String>) {
        self.verdicts.insert(key.into(), value.into());
    }

    pub fn value(&mut self, key: &str, value: ValueRecord) {
        self.values.insert(key.into(), value);
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    /// The same record without timings, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.timings_ms.clear();
        if let Some(Value::Array(items)) = r.details.get_mut("records") {
            for item in items.iter_mut() {
                if let Some(obj) = item.as_object_mut() {
                    obj.remove("timings_ms");
                }
            }
        }
        r
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} [{}] {:?}", self.verb, self.kind, self.status);
        let _ = writeln!(out, "  digest: {}", self.input_digest);
        for (k, v) in &self.verdicts {
            let _ = writeln!(out, "  {k}: {v}");
        }
        for (k, v) in &self.values {
            match v.to_exact() {
                Ok(Some(e)) => {
                    let _ = writeln!(out, "  {k} = {} ({e})", v.decimal);
                }
                _ => {
                    let _ = writeln!(out, "  {k} = {}", v.decimal);
                }
            }
        }
        for m in &self.maximizers {
            let _ = writeln!(out, "  maximizer: {m}");
        }
        for (k, v) in &self.details {
            if k == "records" {
                continue;
            }
            let _ = writeln!(out, "  {k}: {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        for (k, v) in &self.timings_ms {
            let _ = writeln!(out, "  time {k}: {v:.3} ms");
        }
        out
    }
}
