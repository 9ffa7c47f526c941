//! Report values and their json/text renderings.
//!
//! Every number in a report is an exact integer or a `{"num", "den"}`
//! rational; the only floats are `"approx"` display fields.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{Map, Value};

use entropy_core::{EntropyValue, Error};

use crate::{CliError, ExitClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Overall outcome, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Inconclusive,
    HypothesisFailure,
    Violated,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
            Status::HypothesisFailure => "hypothesis_failure",
            Status::Violated => "violated",
        }
    }

    pub fn exit_class(self) -> ExitClass {
        match self {
            Status::Ok => ExitClass::Success,
            Status::Inconclusive => ExitClass::Inconclusive,
            Status::HypothesisFailure => ExitClass::Hypothesis,
            Status::Violated => ExitClass::Internal,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub status: Status,
    pub body: Map<String, Value>,
}

impl Report {
    pub fn new() -> Self {
        Report {
            status: Status::Ok,
            body: Map::new(),
        }
    }

    pub fn note(&mut self, s: Status) {
        self.status = self.status.max(s);
    }

    pub fn insert(&mut self, key: &str, v: impl Into<Value>) {
        self.body.insert(key.to_string(), v.into());
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("status".into(), self.status.name().into());
        m.extend(self.body.clone());
        Value::Object(m)
    }
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}

/// An exact integer as a json number of any size.
pub fn int(n: impl std::fmt::Display) -> Value {
    n.to_string().parse().expect("integers are valid json")
}

pub fn ints<'a, T: std::fmt::Display + 'a>(xs: impl IntoIterator<Item = &'a T>) -> Value {
    Value::Array(xs.into_iter().map(int).collect())
}

pub fn opt_int(n: Option<&BigUint>) -> Value {
    n.map_or(Value::Null, int)
}

pub fn rational(q: &BigRational) -> Value {
    let mut m = Map::new();
    m.insert("num".into(), int(q.numer()));
    m.insert("den".into(), int(q.denom()));
    Value::Object(m)
}

pub fn entropy(e: &EntropyValue) -> Value {
    match e {
        EntropyValue::Infinite => "infinite".into(),
        EntropyValue::LogOf(q) => {
            let mut m = Map::new();
            m.insert("log_of".into(), rational(q));
            Value::Object(m)
        }
    }
}

/// `key` as an exact entropy plus its float display field.
pub fn put_entropy(m: &mut Map<String, Value>, key: &str, e: &EntropyValue) {
    m.insert(key.into(), entropy(e));
    if let EntropyValue::LogOf(_) = e {
        let approx = serde_json::Number::from_f64(e.ln()).map_or(Value::Null, Value::Number);
        let name = if key == "entropy" { "approx".to_string() } else { format!("{key}_approx") };
        m.insert(name, approx);
    }
}

/// Folds a core error into a report entry when it is a reportable status
/// rather than a fault of the instance.
pub fn entry_error(e: Error) -> Result<(Map<String, Value>, Status), CliError> {
    let mut m = Map::new();
    match e {
        Error::Inconclusive { budget } => {
            m.insert("status".into(), "inconclusive".into());
            m.insert("budget".into(), int(budget));
            Ok((m, Status::Inconclusive))
        }
        Error::Hypothesis(_) | Error::NotSurjective(_) | Error::NotInvertible(_) => {
            m.insert("status".into(), "hypothesis_failure".into());
            m.insert("message".into(), e.to_string().into());
            Ok((m, Status::HypothesisFailure))
        }
        other => Err(CliError::from_core(other)),
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string(&r.to_value()).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            text(&r.to_value(), 0, &mut out);
            out
        }
    }
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| x.is_number()) => {
            Some(format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        }
        Value::Object(m) if m.len() == 1 && m.contains_key("log_of") => {
            let q = &m["log_of"];
            let (num, den) = (&q["num"], &q["den"]);
            let one = |v: &Value| v.as_u64() == Some(1);
            Some(if one(den) {
                if one(num) {
                    "0".into()
                } else {
                    format!("log {num}")
                }
            } else {
                format!("log ({num}/{den})")
            })
        }
        Value::Object(m) if m.len() == 2 && m.contains_key("num") && m.contains_key("den") => {
            Some(format!("{}/{}", m["num"], m["den"]))
        }
        _ => None,
    }
}

fn text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match inline(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                match inline(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        text(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other).unwrap_or_default())),
    }
}

/// `log q` rendered for humans.
pub fn describe(e: &EntropyValue) -> String {
    match e {
        EntropyValue::Infinite => "infinite".into(),
        EntropyValue::LogOf(q) if q.is_one() => "0".into(),
        EntropyValue::LogOf(q) => format!("log {q}"),
    }
}
