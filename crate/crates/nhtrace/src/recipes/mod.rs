//! Named experiments. Each recipe reads its config sections, writes CSV/JSON
//! tables and fills an [`ExperimentReport`].

mod calculus;
mod dixmier;
mod spectral;
mod traces;

use std::path::PathBuf;
use std::time::Instant;

use nhtrace_core::trace::{log_spaced, POINTS_PER_DECADE};
use nhtrace_core::{SpectralSystem, Spectrum};

use crate::cache::{load_system, CacheKey, SystemCache};
use crate::config::{ExperimentConfig, ModelSpec, RecipeName};
use crate::error::Result;
use crate::output::OutputDir;
use crate::report::ExperimentReport;

pub use calculus::random_order_zero_symbol;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
    pub cache: Option<SystemCache>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            threads: None,
            cache: None,
        }
    }

    pub fn with_cache(mut self, cache: SystemCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// What a recipe needs besides its config.
pub(crate) struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub cache: Option<&'a SystemCache>,
    pub out: OutputDir,
    pub report: ExperimentReport,
}

impl Context<'_> {
    pub fn system(&self, spec: &ModelSpec) -> Result<SpectralSystem> {
        let key = CacheKey::new(spec.model_id()?, spec.twist()?, spec.modes, spec.grid);
        load_system(self.cache, &key)
    }

    pub fn points_per_decade(&self) -> usize {
        self.config.fit.points_per_decade.unwrap_or(POINTS_PER_DECADE)
    }
}

/// `[a, b]·Λ^{-q}` with `Λ` the largest retained bracket.
pub(crate) fn relative_window(s: &Spectrum, q: f64, w: [f64; 2]) -> (f64, f64) {
    let top = s.max_bracket().powf(q);
    (w[0] / top, w[1] / top)
}

pub(crate) fn t_grid(window: (f64, f64), per_decade: usize) -> Result<Vec<f64>> {
    Ok(log_spaced(window.0, window.1, per_decade)?)
}

/// Runs one recipe end to end and writes `report.json` next to its tables.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let mut ctx = Context {
        config,
        cache: opts.cache.as_ref(),
        out: OutputDir::create(&opts.out_dir)?,
        report: ExperimentReport::new(config),
    };
    pool.install(|| match config.recipe {
        RecipeName::WeylFit => spectral::weyl_fit(&mut ctx),
        RecipeName::PlancherelSuite => spectral::plancherel_suite(&mut ctx),
        RecipeName::HeatExponent => traces::heat_exponent(&mut ctx),
        RecipeName::LogSingularity => traces::log_singularity(&mut ctx),
        RecipeName::CutoffTrace => traces::cutoff_trace(&mut ctx),
        RecipeName::ExpansionCoeffs => traces::expansion_coeffs(&mut ctx),
        RecipeName::DixmierMultiplier => dixmier::dixmier_multiplier(&mut ctx),
        RecipeName::DixmierXdependent => dixmier::dixmier_xdependent(&mut ctx),
        RecipeName::CalculusChecks => calculus::calculus_checks(&mut ctx),
    })?;
    let Context { out, mut report, .. } = ctx;
    report.outputs = out.written().to_vec();
    report.outputs.push("report.json".into());
    report.runtime_seconds = start.elapsed().as_secs_f64();
    let path = out.root().join("report.json");
    report.write_json(&path)?;
    Ok(report)
}
