//! Flat, ordered key-value reports shared by the oracle, simulation, and CLI.

use std::fmt;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Int(v) => write!(f, "{v}"),
            Field::Real(v) => write!(f, "{v:e}"),
            Field::Bool(v) => write!(f, "{v}"),
            Field::Text(v) => f.write_str(v),
        }
    }
}

impl From<&Field> for Value {
    fn from(field: &Field) -> Self {
        match field {
            Field::Int(v) => Value::from(*v),
            Field::Real(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Field::Bool(v) => Value::Bool(*v),
            Field::Text(v) => Value::String(v.clone()),
        }
    }
}

/// Keys keep insertion order; rendering is byte-for-byte deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Field)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, field: Field) -> &mut Self {
        self.entries.push((key.into(), field));
        self
    }

    pub fn int(&mut self, key: impl Into<String>, v: impl TryInto<i64>) -> &mut Self {
        self.push(key, Field::Int(v.try_into().unwrap_or(i64::MAX)))
    }

    pub fn real(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.push(key, Field::Real(v))
    }

    pub fn flag(&mut self, key: impl Into<String>, v: bool) -> &mut Self {
        self.push(key, Field::Bool(v))
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.push(key, Field::Text(v.into()))
    }

    /// Appends every entry of `other` under `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: &Report) -> &mut Self {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}.{k}"), v.clone()));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, Field)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One `key=value` line per entry, LF-terminated.
    pub fn to_kv(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v)))
            .collect();
        Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_and_json_keep_order() {
        let mut r = Report::new();
        r.int("checks", 3)
            .real("gap", 1.5e-9)
            .flag("ok", true)
            .text("name", "x");
        assert_eq!(r.to_kv(), "checks=3\ngap=1.5e-9\nok=true\nname=x\n");
        let json = serde_json::to_string(&r.to_json()).unwrap();
        assert_eq!(json, r#"{"checks":3,"gap":1.5e-9,"ok":true,"name":"x"}"#);
    }

    #[test]
    fn merge_prefixes_keys() {
        let mut inner = Report::new();
        inner.int("n", 1);
        let mut outer = Report::new();
        outer.merge("oracle", &inner);
        assert_eq!(outer.get("oracle.n"), Some(&Field::Int(1)));
    }
}
