//! Command-line front end.
//!
//! Four commands: `estimate` (one information-matrix estimate), `study`
//! (replicated comparison of estimator variants), `oracle` (the model's
//! reference matrix), and `list-models`. Configuration comes from an
//! optional `--config` file overridden by flags; the fully resolved
//! configuration, defaults included, is echoed in the output header.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 I/O error.

mod config;

pub use config::{ModelName, ModelSettings, NoiseKind, RawConfig, Settings};

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::experiments::{
    render_study, resolve_oracle, run_study_with_progress, OracleSettings, OracleSource,
    OutputFormat, StudyConfig, StudyMeta,
};
use crate::models::Model;
use crate::numerics::SymmetricMatrix;
use crate::rng::RngStream;
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "fim-mc",
    about = "Monte Carlo estimation of the Fisher information matrix",
    version
)]
pub struct CliArgs {
    #[command(subcommand)]
    command: CliCommand,

    /// Configuration file ([model]/[estimator]/[study] sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Model name (signal-plus-noise, mixture, scalar-normal, scalar-variance).
    #[arg(long, global = true)]
    model: Option<String>,

    /// Estimator variant(s), comma separated: basic, feedback, indep, feedback-indep.
    #[arg(long, global = true, value_delimiter = ',')]
    variant: Option<Vec<String>>,

    /// Hessian-sample inputs: gradient or loglik-only.
    #[arg(long = "input-mode", global = true)]
    input_mode: Option<String>,

    /// Number of pseudo datasets (outer average).
    #[arg(short = 'N', long = "num-datasets", global = true)]
    num_datasets: Option<usize>,

    /// Hessian samples per dataset (inner average).
    #[arg(short = 'M', long = "inner-samples", global = true)]
    samples_per_dataset: Option<usize>,

    /// Perturbation half-width.
    #[arg(short = 'c', long = "half-width", global = true)]
    c: Option<f64>,

    /// Inner half-width for likelihood-only mode (defaults to c).
    #[arg(long = "c-tilde", global = true)]
    c_tilde: Option<f64>,

    /// Replications per study.
    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Master seed; omitted selects one from system entropy and records it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Share pseudo-data streams across variants (default).
    #[arg(long, global = true, overrides_with = "unpaired")]
    paired: bool,

    /// Give each variant independent pseudo-data streams.
    #[arg(long, global = true, overrides_with = "paired")]
    unpaired: bool,

    /// Output format: text, csv, jsonl.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Output path (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for study replications.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Replications for the Monte Carlo oracle fallback.
    #[arg(long = "oracle-reps", global = true)]
    oracle_reps: Option<usize>,

    /// Seed for the Monte Carlo oracle (kept separate so caches persist).
    #[arg(long = "oracle-seed", global = true)]
    oracle_seed: Option<u64>,

    /// Oracle cache directory.
    #[arg(long = "cache-dir", global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum CliCommand {
    /// Run one estimator and print the information-matrix estimate.
    Estimate,
    /// Run a replicated comparison study and write records plus a summary.
    Study,
    /// Print the model's analytic or Monte Carlo reference matrix.
    Oracle,
    /// List built-in models and their capabilities.
    ListModels,
}

/// Parses argv and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match CliArgs::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            // Help and version are successful exits.
            if e.use_stderr() {
                eprintln!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fim-mc: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: CliArgs) -> Result<()> {
    let settings = merge_settings(&args)?;
    match args.command {
        CliCommand::ListModels => {
            emit(&args_out(&args), &list_models_text())?;
            Ok(())
        }
        CliCommand::Estimate => run_estimate(&settings),
        CliCommand::Oracle => run_oracle(&settings),
        CliCommand::Study => run_study_command(&settings),
    }
}

fn args_out(args: &CliArgs) -> Option<PathBuf> {
    args.out.clone()
}

/// Defaults < config file < flags.
fn merge_settings(args: &CliArgs) -> Result<Settings> {
    let mut settings = Settings::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        settings.apply_file(&RawConfig::parse(&text)?)?;
    }
    if let Some(model) = &args.model {
        settings.model.name = model.parse()?;
    }
    if let Some(variants) = &args.variant {
        settings.estimator.variants = variants
            .iter()
            .map(|v| v.trim().parse())
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(mode) = &args.input_mode {
        settings.estimator.input_mode = mode.parse()?;
    }
    if let Some(n) = args.num_datasets {
        settings.estimator.num_datasets = n;
    }
    if let Some(m) = args.samples_per_dataset {
        settings.estimator.samples_per_dataset = m;
    }
    if let Some(c) = args.c {
        settings.estimator.c = c;
    }
    if let Some(c_tilde) = args.c_tilde {
        settings.estimator.c_tilde = Some(c_tilde);
    }
    if let Some(reps) = args.reps {
        settings.study.replications = reps;
    }
    if let Some(seed) = args.seed {
        settings.study.seed = Some(seed);
    }
    if args.paired {
        settings.study.paired = true;
    }
    if args.unpaired {
        settings.study.paired = false;
    }
    if let Some(format) = &args.format {
        settings.study.format = format.parse()?;
    }
    if let Some(out) = &args.out {
        settings.study.out = Some(out.clone());
    }
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        settings.study.threads = Some(threads);
    }
    if let Some(reps) = args.oracle_reps {
        settings.study.oracle_reps = reps;
    }
    if let Some(seed) = args.oracle_seed {
        settings.study.oracle_seed = seed;
    }
    if let Some(dir) = &args.cache_dir {
        settings.study.cache_dir = dir.clone();
    }
    Ok(settings)
}

/// Resolves the master seed, drawing one from entropy when absent.
fn resolve_seed(settings: &Settings) -> (u64, bool) {
    match settings.study.seed {
        Some(seed) => (seed, true),
        None => (rand::random::<u64>(), false),
    }
}

/// Builds the model and validates every requested estimator against it.
/// This is the parse-time capability gate: misconfigured variants fail here,
/// before any sampling starts.
fn prepare(
    settings: &Settings,
    seed: u64,
) -> Result<(Box<dyn Model + Send + Sync>, Vec<EstimatorConfig>)> {
    let model = settings.model.build(seed)?;
    let estimators = settings.estimator.estimator_configs(seed)?;
    for est in &estimators {
        est.validate_against(model.as_ref())?;
    }
    Ok((model, estimators))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn list_models_text() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:<14} capabilities", "model", "dim(theta)");
    let rows = [
        (
            "signal-plus-noise",
            "d + d(d+1)/2",
            "gradient, per-datum, hessian, analytic fim",
        ),
        (
            "mixture",
            "5",
            "gradient, per-datum, hessian, monte-carlo oracle",
        ),
        (
            "scalar-normal",
            "1",
            "gradient, per-datum, hessian, analytic fim",
        ),
        (
            "scalar-variance",
            "1",
            "gradient, per-datum, hessian, analytic fim",
        ),
    ];
    for (name, dim, caps) in rows {
        let _ = writeln!(out, "{name:<20} {dim:<14} {caps}");
    }
    let _ = writeln!(
        out,
        "\nset `black-box = true` in [model] to hide everything but likelihood values"
    );
    out
}

/// Renders a matrix document (estimate/oracle output) in the configured
/// format, with the configuration echo up front.
fn render_matrix_document(
    matrix: &SymmetricMatrix,
    format: OutputFormat,
    echo: &[(String, String)],
) -> Result<String> {
    let mut out = String::new();
    match format {
        OutputFormat::Text | OutputFormat::Csv => {
            for (key, value) in echo {
                let _ = writeln!(out, "# {key} = {value}");
            }
            let _ = writeln!(out, "# order = {}", matrix.order());
            let separator = if format == OutputFormat::Text { " " } else { "," };
            for i in 0..matrix.order() {
                let row: Vec<String> = (0..matrix.order())
                    .map(|j| format!("{:.12e}", matrix.get(i, j)))
                    .collect();
                let _ = writeln!(out, "{}", row.join(separator));
            }
        }
        OutputFormat::JsonLines => {
            let entries: std::collections::BTreeMap<&str, &str> = echo
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect();
            let rows: Vec<Vec<f64>> = (0..matrix.order())
                .map(|i| (0..matrix.order()).map(|j| matrix.get(i, j)).collect())
                .collect();
            let config = serde_json::json!({"kind": "config", "entries": entries});
            let record = serde_json::json!({
                "kind": "matrix",
                "order": matrix.order(),
                "rows": rows,
            });
            let _ = writeln!(out, "{config}");
            let _ = writeln!(out, "{record}");
        }
    }
    Ok(out)
}

fn run_estimate(settings: &Settings) -> Result<()> {
    let (seed, seed_given) = resolve_seed(settings);
    let (model, estimators) = prepare(settings, seed)?;
    if estimators.len() != 1 {
        return Err(Error::Config(format!(
            "estimate runs exactly one variant; got {}",
            estimators.len()
        )));
    }
    let theta = model.theta_star();
    let fim = estimate(
        model.as_ref(),
        &theta,
        &estimators[0],
        &RngStream::from_seed(seed),
    )?;
    let mut echo = settings.echo(seed, seed_given);
    echo.insert(0, ("command".into(), "estimate".into()));
    let doc = render_matrix_document(fim.matrix(), settings.study.format, &echo)?;
    emit(&settings.study.out, &doc)
}

fn run_oracle(settings: &Settings) -> Result<()> {
    let (seed, seed_given) = resolve_seed(settings);
    let model = settings.model.build(seed)?;
    let theta = model.theta_star();
    let oracle_settings = OracleSettings {
        mc_reps: settings.study.oracle_reps,
        mc_seed: settings.study.oracle_seed,
        cache_dir: Some(settings.study.cache_dir.clone()),
    };
    let oracle = resolve_oracle(model.as_ref(), &theta, &oracle_settings)?;
    if let OracleSource::MonteCarlo {
        reps, from_cache, ..
    } = oracle.source
    {
        if reps < 1_000_000 {
            eprintln!(
                "fim-mc: oracle uses {reps} Monte Carlo replications; \
                 reference runs use 1000000"
            );
        }
        if from_cache {
            eprintln!("fim-mc: oracle loaded from cache");
        }
    }
    let mut echo = settings.echo(seed, seed_given);
    echo.insert(0, ("command".into(), "oracle".into()));
    echo.push((
        "oracle.source".into(),
        match oracle.source {
            OracleSource::Analytic => "analytic".into(),
            OracleSource::MonteCarlo { reps, seed, .. } => {
                format!("monte-carlo reps={reps} seed={seed}")
            }
        },
    ));
    let doc = render_matrix_document(&oracle.matrix, settings.study.format, &echo)?;
    emit(&settings.study.out, &doc)
}

fn run_study_command(settings: &Settings) -> Result<()> {
    let (seed, seed_given) = resolve_seed(settings);
    let (model, estimators) = prepare(settings, seed)?;
    let study = StudyConfig {
        estimators,
        replications: settings.study.replications,
        paired: settings.study.paired,
        seed,
        theta: None,
        oracle: OracleSettings {
            mc_reps: settings.study.oracle_reps,
            mc_seed: settings.study.oracle_seed,
            cache_dir: Some(settings.study.cache_dir.clone()),
        },
    };
    let progress = |done: usize, total: usize| {
        eprint!("\rreplication {done}/{total}");
        if done == total {
            eprintln!();
        }
    };
    let outcome = match settings.study.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_study_with_progress(model.as_ref(), &study, &progress))
        }
        None => run_study_with_progress(model.as_ref(), &study, &progress),
    };
    let (results, summary) = outcome?;
    let mut meta = StudyMeta::new();
    meta.set("command", "study");
    for (key, value) in settings.echo(seed, seed_given) {
        meta.set(&key, value);
    }
    let doc = render_study(&results, &summary, settings.study.format, &meta)?;
    emit(&settings.study.out, &doc)
}
