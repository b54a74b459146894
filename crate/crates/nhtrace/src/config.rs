//! TOML experiment configuration.
//!
//! Every recipe reads the sections it needs and ignores the rest; unknown keys
//! are rejected. Complete examples live in `crates/nhtrace/configs/`.

use std::fmt;
use std::path::{Path, PathBuf};

use nhtrace_core::spectral::minimum_grid;
use nhtrace_core::{ModelId, Spectrum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeName {
    WeylFit,
    PlancherelSuite,
    HeatExponent,
    LogSingularity,
    CutoffTrace,
    ExpansionCoeffs,
    DixmierMultiplier,
    DixmierXdependent,
    CalculusChecks,
}

impl RecipeName {
    pub const ALL: [RecipeName; 9] = [
        Self::WeylFit,
        Self::PlancherelSuite,
        Self::HeatExponent,
        Self::LogSingularity,
        Self::CutoffTrace,
        Self::ExpansionCoeffs,
        Self::DixmierMultiplier,
        Self::DixmierXdependent,
        Self::CalculusChecks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::WeylFit => "weyl_fit",
            Self::PlancherelSuite => "plancherel_suite",
            Self::HeatExponent => "heat_exponent",
            Self::LogSingularity => "log_singularity",
            Self::CutoffTrace => "cutoff_trace",
            Self::ExpansionCoeffs => "expansion_coeffs",
            Self::DixmierMultiplier => "dixmier_multiplier",
            Self::DixmierXdependent => "dixmier_xdependent",
            Self::CalculusChecks => "calculus_checks",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::WeylFit => "log-log fit of the eigenvalue counting function",
            Self::PlancherelSuite => "Plancherel identity and inversion on random band-limited functions",
            Self::HeatExponent => "small-t exponent of Tr(<xi>^m e^{-t M_q})",
            Self::LogSingularity => "log coefficient at m = -Q and the power/log dichotomy",
            Self::CutoffTrace => "Tr(<xi>^m psi(t E)): plateau at m = -Q, exponent otherwise",
            Self::ExpansionCoeffs => "leading coefficients of the small-t heat expansion",
            Self::DixmierMultiplier => "partial-sum and Tauberian Dixmier estimates of <xi>^m",
            Self::DixmierXdependent => "Dixmier estimate of a(x)<xi>^m against the mean of a",
            Self::CalculusChecks => "symbol roundtrip, composition, parametrix and L2 bounds",
        }
    }
}

impl fmt::Display for RecipeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `dirichlet_interval`, `periodic_circle` or `twisted_h`.
    pub id: String,
    pub h: Option<f64>,
    pub modes: usize,
    /// Quadrature nodes; defaults to the anti-aliasing minimum.
    pub grid: Option<usize>,
}

impl ModelSpec {
    pub fn new(model: ModelId, h: Option<f64>, modes: usize) -> Self {
        Self {
            id: model.as_str().into(),
            h,
            modes,
            grid: None,
        }
    }

    pub fn model_id(&self) -> Result<ModelId> {
        ModelId::parse(&self.id).ok_or_else(|| {
            let names: Vec<_> = ModelId::ALL.iter().map(|m| m.as_str()).collect();
            Error::config("model.id", format!("unknown model `{}`, expected one of {names:?}", self.id))
        })
    }

    pub fn twist(&self) -> Result<Option<f64>> {
        Ok(match self.model_id()? {
            ModelId::TwistedH => Some(
                self.h
                    .ok_or_else(|| Error::config("model.h", "required for twisted_h"))?,
            ),
            _ => None,
        })
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Ok(Spectrum::build(self.model_id()?, self.twist()?, self.modes)?)
    }

    fn validate(&self) -> Result<()> {
        let model = self.model_id()?;
        if self.modes == 0 {
            return Err(Error::config("model.modes", "must be at least 1"));
        }
        if let Some(h) = self.twist()? {
            Spectrum::build(model, Some(h), 1).map_err(|e| Error::config("model.h", e.to_string()))?;
        }
        if let Some(g) = self.grid {
            let need = minimum_grid(model, self.modes);
            if g < need {
                return Err(Error::config(
                    "model.grid",
                    format!("{g} nodes cannot resolve {} modes (need {need})", self.modes),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `⟨ξ⟩^m`.
    #[default]
    BracketPower,
    /// `a(x)·⟨ξ⟩^m` with `a` from [`Amplitude`].
    AmplitudeBracketPower,
}

/// Positive `x`-profiles, in the phase `θ = 2π (x − a)/(b − a)` of the domain `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    /// `1 + cos²θ`.
    OnePlusCosSquared,
    /// `2 + sin θ`.
    TwoPlusSin,
}

impl Amplitude {
    pub fn eval(self, theta: f64) -> f64 {
        match self {
            Self::OnePlusCosSquared => 1.0 + theta.cos() * theta.cos(),
            Self::TwoPlusSin => 2.0 + theta.sin(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::OnePlusCosSquared => "one_plus_cos_squared",
            Self::TwoPlusSin => "two_plus_sin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    #[serde(default)]
    pub kind: SymbolKind,
    pub m: Option<f64>,
    pub amplitude: Option<Amplitude>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiName {
    Bump,
    Exp,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerSpec {
    pub q: Option<f64>,
    pub psi: Option<PsiName>,
    /// Bump center.
    pub c: Option<f64>,
    /// Bump radius.
    pub r: Option<f64>,
}

impl RegularizerSpec {
    pub fn q(&self) -> f64 {
        self.q.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// `t` window in units of `Λ^{-q}`, `Λ` the largest retained bracket.
    pub window: Option<[f64; 2]>,
    pub points_per_decade: Option<usize>,
    /// Bracket window of the Weyl fit.
    pub lambda_window: Option<[f64; 2]>,
    /// Correction terms beyond the leading one in the expansion fit.
    pub terms: Option<usize>,
    /// Truncation for the power/log model comparison.
    pub dichotomy_modes: Option<usize>,
    /// `t` window of the comparison, in units of `Λ^{-q}`.
    pub dichotomy_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlancherelSpec {
    pub functions: Option<usize>,
    /// Random coefficients are drawn on modes with `⟨ξ⟩ <= band_fraction·max⟨ξ⟩`.
    pub band_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DixmierSpec {
    pub p_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalculusCheck {
    Roundtrip,
    Composition,
    Parametrix,
    Norms,
}

impl CalculusCheck {
    pub const ALL: [CalculusCheck; 4] = [Self::Roundtrip, Self::Composition, Self::Parametrix, Self::Norms];
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusSpec {
    pub checks: Option<Vec<CalculusCheck>>,
    pub roundtrip_modes: Option<usize>,
    pub roundtrip_symbols: Option<usize>,
    /// `h` of the twisted model used by the roundtrip check.
    pub twist: Option<f64>,
    pub composition_modes: Option<usize>,
    pub composition_window: Option<[f64; 2]>,
    pub parametrix_modes: Option<Vec<usize>>,
    pub parametrix_band: Option<[f64; 2]>,
    pub norm_modes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: RecipeName,
    #[serde(default)]
    pub seed: u64,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default)]
    pub plancherel: PlancherelSpec,
    #[serde(default)]
    pub dixmier: DixmierSpec,
    #[serde(default)]
    pub calculus: CalculusSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn check_window(field: &str, w: Option<[f64; 2]>) -> Result<()> {
    match w {
        Some([lo, hi]) if !(lo > 0.0 && hi > lo && hi.is_finite()) => {
            Err(Error::config(field, format!("need 0 < lo < hi, got [{lo}, {hi}]")))
        }
        _ => Ok(()),
    }
}

fn check_positive(field: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::config(field, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn check_count(field: &str, v: Option<usize>, min: usize) -> Result<()> {
    match v {
        Some(n) if n < min => Err(Error::config(field, format!("must be at least {min}, got {n}"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn new(recipe: RecipeName) -> Self {
        Self {
            recipe,
            seed: 0,
            model: None,
            symbol: SymbolSpec::default(),
            regularizer: RegularizerSpec::default(),
            fit: FitSpec::default(),
            plancherel: PlancherelSpec::default(),
            dixmier: DixmierSpec::default(),
            calculus: CalculusSpec::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn with_model(mut self, model: ModelId, h: Option<f64>, modes: usize) -> Self {
        self.model = Some(ModelSpec::new(model, h, modes));
        self
    }

    pub fn with_order(mut self, m: f64) -> Self {
        self.symbol.m = Some(m);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The model section; every recipe except `calculus_checks` needs one.
    pub fn model(&self) -> Result<&ModelSpec> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::config("model", format!("recipe {} needs a [model] section", self.recipe)))
    }

    pub fn order(&self, default: f64) -> f64 {
        self.symbol.m.unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        if self.recipe != RecipeName::CalculusChecks {
            self.model()?.validate()?;
        }
        if let Some(m) = self.symbol.m {
            if !m.is_finite() {
                return Err(Error::config("symbol.m", "must be finite"));
            }
        }
        check_positive("regularizer.q", self.regularizer.q)?;
        check_positive("regularizer.r", self.regularizer.r)?;
        if let Some(c) = self.regularizer.c {
            if !(c - self.regularizer.r.unwrap_or(0.5) > 0.0) {
                return Err(Error::config("regularizer.c", "the bump must vanish near 0 (need c > r)"));
            }
        }
        check_window("fit.window", self.fit.window)?;
        check_window("fit.lambda_window", self.fit.lambda_window)?;
        check_window("fit.dichotomy_window", self.fit.dichotomy_window)?;
        check_count("fit.points_per_decade", self.fit.points_per_decade, 1)?;
        check_count("fit.dichotomy_modes", self.fit.dichotomy_modes, 1)?;
        check_count("plancherel.functions", self.plancherel.functions, 1)?;
        if let Some(b) = self.plancherel.band_fraction {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::config("plancherel.band_fraction", format!("must lie in (0, 1], got {b}")));
            }
        }
        if let Some(p) = &self.dixmier.p_grid {
            if p.len() < 3 {
                return Err(Error::config("dixmier.p_grid", "needs at least 3 points"));
            }
            if p.iter().any(|p| !(*p > 1.0 && *p <= 2.0)) || p.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::config("dixmier.p_grid", "must decrease strictly inside (1, 2]"));
            }
        }
        self.validate_calculus()?;
        self.validate_recipe()
    }

    fn validate_calculus(&self) -> Result<()> {
        let c = &self.calculus;
        if matches!(&c.checks, Some(v) if v.is_empty()) {
            return Err(Error::config("calculus.checks", "must name at least one check"));
        }
        check_count("calculus.roundtrip_modes", c.roundtrip_modes, 1)?;
        check_count("calculus.roundtrip_symbols", c.roundtrip_symbols, 1)?;
        check_count("calculus.composition_modes", c.composition_modes, 4)?;
        check_window("calculus.composition_window", c.composition_window)?;
        if let Some(h) = c.twist {
            Spectrum::build(ModelId::TwistedH, Some(h), 1)
                .map_err(|e| Error::config("calculus.twist", e.to_string()))?;
        }
        if let Some(modes) = &c.parametrix_modes {
            if modes.len() < 2 || modes.windows(2).any(|w| w[1] != 2 * w[0]) {
                return Err(Error::config(
                    "calculus.parametrix_modes",
                    "needs at least two truncations, each doubling the previous",
                ));
            }
        }
        if let Some([lo, hi]) = c.parametrix_band {
            if !(lo > 0.0 && hi > lo && hi <= 1.0) {
                return Err(Error::config("calculus.parametrix_band", "need 0 < lo < hi <= 1"));
            }
        }
        if matches!(&c.norm_modes, Some(v) if v.is_empty() || v.contains(&0)) {
            return Err(Error::config("calculus.norm_modes", "needs positive truncations"));
        }
        Ok(())
    }

    /// Recipes that only make sense at `m = -Q`.
    fn require_critical_order(&self) -> Result<()> {
        let model = self.model()?;
        let big_q = Spectrum::build(model.model_id()?, model.twist()?, 1)?.weyl_q();
        match self.symbol.m {
            Some(m) if (m + big_q).abs() > 1e-9 => Err(Error::config(
                "symbol.m",
                format!("recipe {} needs m = -Q = {}, got {m}", self.recipe, -big_q),
            )),
            _ => Ok(()),
        }
    }

    fn validate_recipe(&self) -> Result<()> {
        match self.recipe {
            RecipeName::ExpansionCoeffs => {
                if self.model()?.model_id()? == ModelId::TwistedH {
                    return Err(Error::config("model.id", "the expansion fit needs a self-adjoint model"));
                }
            }
            RecipeName::DixmierXdependent => {
                if self.symbol.amplitude.is_none() {
                    return Err(Error::config("symbol.amplitude", "required by dixmier_xdependent"));
                }
                self.require_critical_order()?;
            }
            RecipeName::LogSingularity => self.require_critical_order()?,
            RecipeName::CutoffTrace => {
                if self.regularizer.psi == Some(PsiName::Exp) {
                    let model = self.model()?;
                    let big_q = Spectrum::build(model.model_id()?, model.twist()?, 1)?.weyl_q();
                    if self.order(-big_q) <= -big_q {
                        return Err(Error::config(
                            "regularizer.psi",
                            "exp is not integrable against ds/s; the m <= -Q case needs a bump",
                        ));
                    }
                }
            }
            RecipeName::CalculusChecks if self.model.is_some() => {
                return Err(Error::config(
                    "model",
                    "calculus_checks fixes its models; use the [calculus] section",
                ));
            }
            _ => {}
        }
        if self.symbol.kind == SymbolKind::AmplitudeBracketPower
            && !matches!(self.recipe, RecipeName::DixmierXdependent)
        {
            return Err(Error::config(
                "symbol.kind",
                format!("amplitude symbols are only supported by dixmier_xdependent, not {}", self.recipe),
            ));
        }
        Ok(())
    }
}
