//! Mixed real/integer search spaces and their bijection with the unit cube.
//!
//! Each parameter carries a domain scale (`linear`, `log`, `logit`). Encoding
//! applies the scale and then maps `[s(lower), s(upper)]` affinely onto
//! `[0, 1]`, so uniform sampling in the cube is log-uniform for `log`
//! parameters. Integers are relaxed to the continuum and rounded on decode.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
    Logit,
}

impl Scale {
    fn forward(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.ln(),
            Scale::Logit => (v / (1.0 - v)).ln(),
        }
    }

    fn inverse(self, s: f64) -> f64 {
        match self {
            Scale::Linear => s,
            Scale::Log => s.exp(),
            Scale::Logit => 1.0 / (1.0 + (-s).exp()),
        }
    }
}

/// One dimension of a design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub kind: Kind,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
}

impl Parameter {
    pub fn new(name: impl Into<String>, kind: Kind, lower: f64, upper: f64, scale: Scale) -> Result<Self> {
        let p = Parameter { name: name.into(), kind, lower, upper, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn real(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        Self::new(name, Kind::Real, lower, upper, Scale::Linear)
    }

    pub fn log_real(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        Self::new(name, Kind::Real, lower, upper, Scale::Log)
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Result<Self> {
        Self::new(name, Kind::Integer, lower as f64, upper as f64, Scale::Linear)
    }

    fn invalid(&self, message: impl Into<String>) -> Error {
        Error::InvalidParameter { name: self.name.clone(), message: message.into() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(self.invalid("name must not be empty"));
        }
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(self.invalid("bounds must be finite"));
        }
        if self.lower >= self.upper {
            return Err(self.invalid(format!("lower ({}) must be < upper ({})", self.lower, self.upper)));
        }
        match self.scale {
            Scale::Linear => {}
            Scale::Log if self.lower <= 0.0 => {
                return Err(self.invalid("log scale requires lower > 0"));
            }
            Scale::Logit if self.lower <= 0.0 || self.upper >= 1.0 => {
                return Err(self.invalid("logit scale requires 0 < lower and upper < 1"));
            }
            _ => {}
        }
        if self.kind == Kind::Integer {
            if self.lower.fract() != 0.0 || self.upper.fract() != 0.0 {
                return Err(self.invalid("integer bounds must be integral"));
            }
            if self.upper - self.lower < 1.0 {
                return Err(self.invalid("integer range must span at least one step"));
            }
        }
        Ok(())
    }

    /// Map a value in `[lower, upper]` to `[0, 1]`.
    pub fn encode_value(&self, v: f64) -> f64 {
        let lo = self.scale.forward(self.lower);
        let hi = self.scale.forward(self.upper);
        ((self.scale.forward(v) - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Inverse of [`Parameter::encode_value`]; integers are rounded to the nearest value.
    pub fn decode_value(&self, u: f64) -> Value {
        let u = u.clamp(0.0, 1.0);
        let lo = self.scale.forward(self.lower);
        let hi = self.scale.forward(self.upper);
        let v = match u {
            // hit the bounds exactly rather than through exp/ln round trips
            0.0 => self.lower,
            1.0 => self.upper,
            _ => self.scale.inverse(lo + u * (hi - lo)).clamp(self.lower, self.upper),
        };
        match self.kind {
            Kind::Real => Value::Real(v),
            Kind::Integer => Value::Int(v.round().clamp(self.lower, self.upper) as i64),
        }
    }

    fn check_value(&self, v: Value) -> Result<()> {
        let x = v.as_f64();
        if !x.is_finite() || x < self.lower || x > self.upper {
            return Err(Error::InvalidConfiguration(format!(
                "`{}` = {} outside [{}, {}]",
                self.name, x, self.lower, self.upper
            )));
        }
        if self.kind == Kind::Integer && x.fract() != 0.0 {
            return Err(Error::InvalidConfiguration(format!("`{}` must be integral, got {}", self.name, x)));
        }
        Ok(())
    }
}

/// A scalar parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Real(x) => x,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x}"),
        }
    }
}

/// An assignment of a value to every parameter of a space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    pub values: BTreeMap<String, Value>,
}

impl Configuration {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).map(|v| v.as_f64())
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.values.insert(name.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serialises")
    }
}

impl<S: Into<String>> FromIterator<(S, Value)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Self {
        Configuration { values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceDocument {
    params: Vec<Parameter>,
}

/// Ordered list of parameters. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDocument", into = "SpaceDocument")]
pub struct DesignSpace {
    params: Vec<Parameter>,
}

impl TryFrom<SpaceDocument> for DesignSpace {
    type Error = Error;

    fn try_from(doc: SpaceDocument) -> Result<Self> {
        DesignSpace::new(doc.params)
    }
}

impl From<DesignSpace> for SpaceDocument {
    fn from(space: DesignSpace) -> Self {
        SpaceDocument { params: space.params }
    }
}

fn parse_err(field: String, message: impl Into<String>) -> Error {
    Error::Parse { field, message: message.into() }
}

impl DesignSpace {
    pub fn new(params: Vec<Parameter>) -> Result<Self> {
        if params.is_empty() {
            return Err(parse_err("params".into(), "at least one parameter is required"));
        }
        for (i, p) in params.iter().enumerate() {
            p.validate()?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::InvalidParameter { name: p.name.clone(), message: "duplicate name".into() });
            }
        }
        Ok(DesignSpace { params })
    }

    /// Parse the JSON space document
    /// `{"params":[{"name":..,"kind":..,"lower":..,"upper":..,"scale":..}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Json = serde_json::from_str(text).map_err(|e| parse_err("<document>".into(), e.to_string()))?;
        let list = doc
            .get("params")
            .ok_or_else(|| parse_err("params".into(), "missing"))?
            .as_array()
            .ok_or_else(|| parse_err("params".into(), "expected an array"))?;
        let mut params = Vec::with_capacity(list.len());
        for (i, entry) in list.iter().enumerate() {
            let at = |f: &str| format!("params[{i}].{f}");
            let str_field = |f: &str| -> Result<String> {
                entry
                    .get(f)
                    .ok_or_else(|| parse_err(at(f), "missing"))?
                    .as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| parse_err(at(f), "expected a string"))
            };
            let num_field = |f: &str| -> Result<f64> {
                entry
                    .get(f)
                    .ok_or_else(|| parse_err(at(f), "missing"))?
                    .as_f64()
                    .ok_or_else(|| parse_err(at(f), "expected a number"))
            };
            let name = str_field("name")?;
            let kind = match str_field("kind")?.as_str() {
                "real" => Kind::Real,
                "integer" => Kind::Integer,
                other => return Err(parse_err(at("kind"), format!("unknown kind `{other}`"))),
            };
            let scale = match entry.get("scale") {
                None => Scale::Linear,
                Some(_) => match str_field("scale")?.as_str() {
                    "linear" => Scale::Linear,
                    "log" => Scale::Log,
                    "logit" => Scale::Logit,
                    other => return Err(parse_err(at("scale"), format!("unknown scale `{other}`"))),
                },
            };
            let lower = num_field("lower")?;
            let upper = num_field("upper")?;
            params.push(Parameter::new(name, kind, lower, upper, scale)?);
        }
        Self::new(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("design space serialises")
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn validate(&self, c: &Configuration) -> Result<()> {
        if c.values.len() != self.params.len() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                c.values.len()
            )));
        }
        for p in &self.params {
            let v = c
                .values
                .get(&p.name)
                .ok_or_else(|| Error::InvalidConfiguration(format!("missing `{}`", p.name)))?;
            p.check_value(*v)?;
        }
        Ok(())
    }

    pub fn encode(&self, c: &Configuration) -> Result<Vec<f64>> {
        self.validate(c)?;
        Ok(self.params.iter().map(|p| p.encode_value(c.values[&p.name].as_f64())).collect())
    }

    pub fn decode(&self, u: &[f64]) -> Result<Configuration> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        Ok(self.params.iter().zip(u).map(|(p, &ui)| (p.name.clone(), p.decode_value(ui))).collect())
    }

    /// Draw `n` configurations uniformly in the encoded cube.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Configuration> {
        (0..n)
            .map(|_| {
                let u: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
                self.decode(&u).expect("dimension matches")
            })
            .collect()
    }
}
