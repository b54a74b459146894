//! The ten acceptance criteria, each assembled from recipe runs.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use nhtrace_core::ModelId;

use crate::cache::SystemCache;
use crate::config::{Amplitude, CalculusCheck, ExperimentConfig, RecipeName, SymbolKind};
use crate::error::Result;
use crate::recipes::{run, RunOptions};
use crate::report::{Criterion, ExperimentReport};

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

const ALL_MODELS: [(ModelId, Option<f64>); 3] = [
    (ModelId::DirichletInterval, None),
    (ModelId::PeriodicCircle, None),
    (ModelId::TwistedH, Some(2.0)),
];
const SELF_ADJOINT: [ModelId; 2] = [ModelId::DirichletInterval, ModelId::PeriodicCircle];

#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub cache: Option<SystemCache>,
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "Plancherel identity on three models, 256 modes, 100 random functions",
        2 => "Weyl exponent on three models at 512 modes",
        3 => "symbol roundtrip on circle and twisted models, 20 random order-0 symbols",
        4 => "heat-trace exponents for (m, q) in {0, 1} x {1, 2} at 4096 modes",
        5 => "log coefficient at m = -Q and the power/log dichotomy",
        6 => "leading heat coefficient a0 on the Dirichlet interval",
        7 => "cutoff trace: plateau at m = -Q, exponent at m = 0",
        8 => "Dixmier partial-sum and Tauberian estimators agree at 4096 modes",
        9 => "Dixmier classification by order and x-dependent scaling",
        10 => "composition defect, parametrix residual and uniform L2 bounds",
        _ => "unknown criterion",
    }
}

/// Wall-clock limit of a criterion, in seconds.
pub fn budget(id: u8) -> Option<f64> {
    match id {
        1 => Some(10.0),
        4 => Some(30.0),
        8 => Some(60.0),
        _ => None,
    }
}

fn model(recipe: RecipeName, model: ModelId, h: Option<f64>, modes: usize) -> ExperimentConfig {
    ExperimentConfig::new(recipe).with_model(model, h, modes)
}

/// The recipe configurations that make up criterion `id`, with a tag each.
pub fn configs(id: u8) -> Vec<(String, ExperimentConfig)> {
    let tag = |c: &ExperimentConfig, extra: &str| {
        let m = c.model.as_ref().map_or("fixed", |m| m.id.as_str()).to_string();
        format!("{}_{m}{extra}", c.recipe)
    };
    let mut out = Vec::new();
    let mut push = |c: ExperimentConfig, extra: &str| out.push((tag(&c, extra), c));
    match id {
        1 => {
            for (m, h) in ALL_MODELS {
                let mut c = model(RecipeName::PlancherelSuite, m, h, 256);
                c.seed = 1;
                c.plancherel.functions = Some(100);
                push(c, "");
            }
        }
        2 => {
            for (m, h) in ALL_MODELS {
                push(model(RecipeName::WeylFit, m, h, 512), "");
            }
        }
        3 => {
            let mut c = ExperimentConfig::new(RecipeName::CalculusChecks);
            c.seed = 3;
            c.calculus.checks = Some(vec![CalculusCheck::Roundtrip]);
            c.calculus.roundtrip_symbols = Some(20);
            push(c, "_roundtrip");
        }
        4 => {
            for m in SELF_ADJOINT {
                for (order, q) in [(0.0, 1.0), (1.0, 1.0), (0.0, 2.0), (1.0, 2.0)] {
                    let mut c = model(RecipeName::HeatExponent, m, None, 4096).with_order(order);
                    c.regularizer.q = Some(q);
                    push(c, &format!("_m{order}_q{q}"));
                }
            }
        }
        5 => {
            for m in SELF_ADJOINT {
                push(model(RecipeName::LogSingularity, m, None, 4096).with_order(-1.0), "");
            }
        }
        6 => push(model(RecipeName::ExpansionCoeffs, ModelId::DirichletInterval, None, 4096).with_order(0.0), ""),
        7 => {
            for m in SELF_ADJOINT {
                for order in [-1.0, 0.0] {
                    push(model(RecipeName::CutoffTrace, m, None, 4096).with_order(order), &format!("_m{order}"));
                }
            }
        }
        8 => {
            for m in SELF_ADJOINT {
                push(model(RecipeName::DixmierMultiplier, m, None, 4096).with_order(-1.0), "");
            }
        }
        9 => {
            for order in [-0.5, -1.0, -1.5] {
                let c = model(RecipeName::DixmierMultiplier, ModelId::PeriodicCircle, None, 4096).with_order(order);
                push(c, &format!("_m{order}"));
            }
            let mut c = model(RecipeName::DixmierXdependent, ModelId::PeriodicCircle, None, 256).with_order(-1.0);
            c.symbol.kind = SymbolKind::AmplitudeBracketPower;
            c.symbol.amplitude = Some(Amplitude::OnePlusCosSquared);
            push(c, "");
        }
        10 => {
            let mut c = ExperimentConfig::new(RecipeName::CalculusChecks);
            c.calculus.checks = Some(vec![CalculusCheck::Composition, CalculusCheck::Parametrix, CalculusCheck::Norms]);
            push(c, "");
        }
        _ => {}
    }
    out
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub reports: Vec<ExperimentReport>,
    /// Runtime budget check, when the criterion has one.
    pub timing: Option<Criterion>,
    pub runtime_seconds: f64,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.timing.as_ref().is_none_or(|t| t.pass)
    }

    pub fn checks(&self) -> usize {
        self.reports.iter().map(|r| r.criteria.len()).sum::<usize>() + usize::from(self.timing.is_some())
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {}: {} ({} runs, {} checks, {:.1} s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            title(self.id),
            self.reports.len(),
            self.checks(),
            self.runtime_seconds
        )?;
        for r in &self.reports {
            for c in r.failures() {
                write!(f, "\n    {} / {c}", r.recipe)?;
            }
        }
        if let Some(t) = self.timing.as_ref().filter(|t| !t.pass) {
            write!(f, "\n    {t}")?;
        }
        Ok(())
    }
}

pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for (tag, config) in configs(id) {
        let run_opts = RunOptions {
            out_dir: opts.out_dir.join(format!("criterion_{id:02}")).join(tag),
            threads: opts.threads,
            cache: opts.cache.clone(),
        };
        reports.push(run(&config, &run_opts)?);
    }
    let runtime_seconds = start.elapsed().as_secs_f64();
    let timing = budget(id).map(|limit| {
        Criterion::at_most("runtime seconds", runtime_seconds, limit).trivial("wall-clock budget")
    });
    Ok(CriterionOutcome {
        id,
        reports,
        timing,
        runtime_seconds,
    })
}
