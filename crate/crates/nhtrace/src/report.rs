//! Criterion lines and the per-run report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// How an expected value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// From an independent closed form, quadrature or counting argument.
    Derived,
    /// Holds by construction.
    Trivial,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Derived => "derived",
            Self::Trivial => "trivial",
        }
    }
}

/// One pass/fail check with its expected value and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub measured: Value,
    pub expected: Value,
    pub tolerance: String,
    pub provenance: Provenance,
    /// What the expected value is.
    pub basis: String,
    pub pass: bool,
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

impl Criterion {
    fn new(name: &str, measured: Value, expected: Value, tolerance: String, pass: bool) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            provenance: Provenance::Derived,
            basis: String::new(),
            pass,
        }
    }

    /// `|measured − expected| <= tol`.
    pub fn absolute(name: &str, measured: f64, expected: f64, tol: f64) -> Self {
        let pass = (measured - expected).abs() <= tol;
        Self::new(name, num(measured), num(expected), format!("± {tol}"), pass)
    }

    /// `|measured − expected| <= rel·|expected|`.
    pub fn relative(name: &str, measured: f64, expected: f64, rel: f64) -> Self {
        let pass = (measured - expected).abs() <= rel * expected.abs();
        Self::new(name, num(measured), num(expected), format!("± {}%", rel * 100.0), pass)
    }

    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, num(measured), num(bound), "upper bound".into(), measured <= bound)
    }

    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, num(measured), num(bound), "lower bound".into(), measured >= bound)
    }

    pub fn label(name: &str, measured: &str, expected: &str) -> Self {
        Self::new(name, measured.into(), expected.into(), "exact".into(), measured == expected)
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::new(name, ok.into(), true.into(), "exact".into(), ok)
    }

    pub fn derived(mut self, basis: &str) -> Self {
        self.provenance = Provenance::Derived;
        self.basis = basis.into();
        self
    }

    pub fn trivial(mut self, basis: &str) -> Self {
        self.provenance = Provenance::Trivial;
        self.basis = basis.into();
        self
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e5) => format!("{x:.4e}"),
            Some(x) => format!("{}", (x * 1e6).round() / 1e6),
            None => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "NaN".into(),
        other => other.to_string(),
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {}, expected {} ({}) [{}: {}]",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            show(&self.measured),
            show(&self.expected),
            self.tolerance,
            self.provenance.as_str(),
            self.basis
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub recipe: String,
    pub config: ExperimentConfig,
    /// Named scalar results that are not themselves criteria.
    pub measured: BTreeMap<String, f64>,
    pub criteria: Vec<Criterion>,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub runtime_seconds: f64,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            recipe: config.recipe.as_str().into(),
            config: config.clone(),
            measured: BTreeMap::new(),
            criteria: Vec::new(),
            outputs: Vec::new(),
            runtime_seconds: 0.0,
            pass: true,
        }
    }

    pub fn measure(&mut self, name: &str, value: f64) {
        self.measured.insert(name.into(), value);
    }

    pub fn check(&mut self, criterion: Criterion) {
        self.pass &= criterion.pass;
        self.criteria.push(criterion);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.pass)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} {} ({:.2} s)",
            self.recipe,
            if self.pass { "PASS" } else { "FAIL" },
            self.runtime_seconds
        )?;
        for c in &self.criteria {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}
