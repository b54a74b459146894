use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhtrace::acceptance::{self, AcceptanceOptions, CRITERIA};
use nhtrace::cache::SystemCache;
use nhtrace::{run, Error, ExperimentConfig, RecipeName, RunOptions};

/// Regularized traces, Dixmier estimates and symbol calculus on model spectral systems.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (default: the config's output.dir, else out/<recipe>)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for the parallel parts of a recipe
    #[arg(long)]
    threads: Option<usize>,
    /// Build every spectral system from scratch and store nothing
    #[arg(long)]
    no_cache: bool,
    /// Directory of cached spectral systems
    #[arg(long, default_value = ".nhtrace-cache")]
    cache_dir: PathBuf,
}

impl Common {
    fn cache(&self) -> Option<SystemCache> {
        (!self.no_cache).then(|| SystemCache::new(&self.cache_dir))
    }
}

#[derive(Args)]
struct RecipeArgs {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    #[command(name = "weyl_fit")]
    WeylFit(RecipeArgs),
    #[command(name = "plancherel_suite")]
    PlancherelSuite(RecipeArgs),
    #[command(name = "heat_exponent")]
    HeatExponent(RecipeArgs),
    #[command(name = "log_singularity")]
    LogSingularity(RecipeArgs),
    #[command(name = "cutoff_trace")]
    CutoffTrace(RecipeArgs),
    #[command(name = "expansion_coeffs")]
    ExpansionCoeffs(RecipeArgs),
    #[command(name = "dixmier_multiplier")]
    DixmierMultiplier(RecipeArgs),
    #[command(name = "dixmier_xdependent")]
    DixmierXdependent(RecipeArgs),
    #[command(name = "calculus_checks")]
    CalculusChecks(RecipeArgs),
    /// Print the recipe names
    ListRecipes,
    /// Run the acceptance suite
    Verify {
        /// Run every criterion
        #[arg(long, conflicts_with = "criterion")]
        all: bool,
        /// Run only these criteria (1-10)
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        criterion: Vec<u8>,
        #[command(flatten)]
        common: Common,
    },
}

fn run_recipe(recipe: RecipeName, args: RecipeArgs) -> Result<bool, Error> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.recipe != recipe {
        return Err(Error::Config {
            field: "recipe".into(),
            reason: format!("{} holds a {} config, not {recipe}", args.config.display(), config.recipe),
        });
    }
    let out_dir = args
        .common
        .out_dir
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(recipe.as_str()));
    let opts = RunOptions {
        out_dir: out_dir.clone(),
        threads: args.common.threads,
        cache: args.common.cache(),
    };
    let report = run(&config, &opts)?;
    print!("{report}");
    println!("wrote {} files to {}", report.outputs.len(), out_dir.display());
    Ok(report.pass)
}

fn verify(all: bool, criterion: Vec<u8>, common: Common) -> Result<bool, Error> {
    let ids = if all { CRITERIA.to_vec() } else { criterion };
    if ids.is_empty() {
        return Err(Error::Config {
            field: "verify".into(),
            reason: "pass --all or at least one --criterion".into(),
        });
    }
    let opts = AcceptanceOptions {
        out_dir: common.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join("acceptance")),
        threads: common.threads,
        cache: common.cache(),
    };
    let mut pass = true;
    for id in ids {
        let outcome = acceptance::run_criterion(id, &opts)?;
        println!("{outcome}");
        pass &= outcome.pass();
    }
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListRecipes => {
            for r in RecipeName::ALL {
                println!("{:<20} {}", r.as_str(), r.summary());
            }
            Ok(true)
        }
        Command::Verify { all, criterion, common } => verify(all, criterion, common),
        Command::WeylFit(a) => run_recipe(RecipeName::WeylFit, a),
        Command::PlancherelSuite(a) => run_recipe(RecipeName::PlancherelSuite, a),
        Command::HeatExponent(a) => run_recipe(RecipeName::HeatExponent, a),
        Command::LogSingularity(a) => run_recipe(RecipeName::LogSingularity, a),
        Command::CutoffTrace(a) => run_recipe(RecipeName::CutoffTrace, a),
        Command::ExpansionCoeffs(a) => run_recipe(RecipeName::ExpansionCoeffs, a),
        Command::DixmierMultiplier(a) => run_recipe(RecipeName::DixmierMultiplier, a),
        Command::DixmierXdependent(a) => run_recipe(RecipeName::DixmierXdependent, a),
        Command::CalculusChecks(a) => run_recipe(RecipeName::CalculusChecks, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
