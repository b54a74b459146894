//! Plot-ready CSV tables and JSON sidecars.
//!
//! Floats are written in Rust's shortest round-trip form, so the same numbers
//! always give the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use nhtrace_core::dixmier::{DixmierEstimate, PartialSums, TauberianSequence};
use nhtrace_core::quantization::Symbol;
use nhtrace_core::trace::{AsymptoticFit, FitKind, TraceCurve};
use nhtrace_core::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};

/// Collects files under one output directory and remembers their names.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn claim(&mut self, name: &str) -> PathBuf {
        self.written.push(name.into());
        self.root.join(name)
    }

    /// A CSV table with a header row.
    pub fn table<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        let path = self.claim(name);
        let err = |source| Error::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.serialize(row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.claim(name);
        let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// `mode_label, re, im`.
    pub fn coefficients(&mut self, name: &str, labels: &[i64], coeffs: &[Complex64]) -> Result<()> {
        self.table(
            name,
            &["mode_label", "re", "im"],
            labels.iter().zip(coeffs).map(|(l, c)| (l, c.re, c.im)),
        )
    }

    /// `x_index, mode_label, re, im` plus a `.json` sidecar with the class.
    pub fn symbol(&mut self, name: &str, symbol: &Symbol) -> Result<()> {
        let g = symbol.grid_len();
        self.table(
            name,
            &["x_index", "mode_label", "re", "im"],
            symbol.labels().iter().enumerate().flat_map(|(k, &label)| {
                (0..g).map(move |i| {
                    let v = symbol.value(i, k);
                    (i, label, v.re, v.im)
                })
            }),
        )?;
        let class = symbol.class();
        let sidecar = Path::new(name).with_extension("json");
        self.json(
            &sidecar.to_string_lossy(),
            &json!({"m": class.order, "rho": class.rho, "delta": class.delta, "name": symbol.name()}),
        )
    }

    /// `t, trace_re, trace_im, tail_fraction`.
    pub fn trace(&mut self, name: &str, curve: &TraceCurve) -> Result<()> {
        self.table(
            name,
            &["t", "trace_re", "trace_im", "tail_fraction"],
            curve
                .t
                .iter()
                .zip(&curve.values)
                .zip(&curve.tail_fraction)
                .map(|((t, v), f)| (t, v.re, v.im, f)),
        )
    }

    pub fn fit(&mut self, name: &str, fit: &AsymptoticFit) -> Result<()> {
        let value_key = match fit.kind {
            FitKind::PowerLaw => "exponent",
            FitKind::LogSingularity | FitKind::Expansion => "coefficient",
        };
        let mut body = json!({
            "kind": fit.kind.as_str(),
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "window": [fit.window.0, fit.window.1],
            "coeffs": fit.coeffs,
        });
        body[value_key] = json!(fit.value);
        if let Some(c) = fit.condition {
            body["condition"] = json!(c);
        }
        self.json(name, &body)
    }

    /// `N, partial_sum`.
    pub fn partial_sums(&mut self, name: &str, sums: &PartialSums) -> Result<()> {
        self.table(name, &["N", "partial_sum"], sums.n.iter().zip(&sums.values))
    }

    /// `p, tauberian_value, tail_fraction`.
    pub fn tauberian(&mut self, name: &str, seq: &TauberianSequence) -> Result<()> {
        self.table(
            name,
            &["p", "tauberian_value", "tail_fraction"],
            seq.p.iter().zip(&seq.values).zip(&seq.tail_fraction).map(|((p, v), f)| (p, v, f)),
        )
    }

    pub fn verdict(&mut self, name: &str, estimate: &DixmierEstimate) -> Result<()> {
        self.json(
            name,
            &json!({
                "classification": estimate.classification.as_str(),
                "limit_partial": estimate.limit_partial(),
                "limit_tauberian": estimate.limit_tauberian(),
                "agreement": estimate.agreement(),
            }),
        )
    }
}
