//! JSON residual reports. Keys serialize in sorted order, so equal inputs
//! give byte-identical output.

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// Pass iff `value < tol`.
    Below,
    /// Pass iff `value > tol` (negative controls).
    Above,
    /// Pass iff `lo ≤ value ≤ hi`.
    Within(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
}

impl Check {
    pub fn below(name: &str, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::Below,
            tol,
        }
    }

    pub fn above(name: &str, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::Above,
            tol,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::Within(lo, hi),
            tol: f64::NAN,
        }
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.tol,
            Bound::Above => self.value > self.tol,
            Bound::Within(lo, hi) => lo <= self.value && self.value <= hi,
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), self.name.clone().into());
        m.insert("value".into(), num(self.value));
        m.insert("pass".into(), self.pass().into());
        match self.bound {
            Bound::Below => {
                m.insert("below".into(), num(self.tol));
            }
            Bound::Above => {
                m.insert("above".into(), num(self.tol));
            }
            Bound::Within(lo, hi) => {
                m.insert("within".into(), Value::Array(vec![num(lo), num(hi)]));
            }
        }
        Value::Object(m)
    }
}

/// JSON number, or a string for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(v.to_string()))
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub params: Map<String, Value>,
    pub checks: Vec<Check>,
    pub info: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub fn info(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.info.insert(key.into(), v.into());
        self
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass()).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), self.command.clone().into());
        m.insert("params".into(), Value::Object(self.params.clone()));
        m.insert(
            "checks".into(),
            Value::Array(self.checks.iter().map(Check::to_json).collect()),
        );
        m.insert("info".into(), Value::Object(self.info.clone()));
        m.insert("pass".into(), self.passed().into());
        Value::Object(m)
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}
