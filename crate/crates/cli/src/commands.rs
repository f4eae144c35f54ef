//! The `st2e` subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use st2e_core::{
    affordable_kappa_grid, build_ensemble, default_kappa_grid, stream_from_seed, substream_seed, tune_kappa,
    Dataset, ScenarioOverrides, ScreeningConfig, St2Config, TuningCurve,
};

use crate::benchmark::{render_summary, run_benchmark, BenchmarkOptions, KappaChoice};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest_csv;
use crate::report::{tuning_csv, ReportConfig, SelectionReport, ThresholdRule};

/// Largest number of candidate groups a single step may evaluate for a grid
/// point to stay in the default tuning grid.
pub const TUNE_CANDIDATE_BUDGET: u64 = 100_000;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "ST2E_THREADS";

#[derive(Debug, Parser)]
#[command(name = "st2e", version, about = "Variable selection with stochastic stepwise ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank and select the predictors of a CSV dataset.
    Select(SelectArgs),
    /// Trace diversity and strength over a kappa grid.
    Tune(TuneArgs),
    /// Replicate a built-in simulation scenario.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Args)]
pub struct KappaArgs {
    /// Greediness parameter (> 1). Defaults to e.
    #[arg(long, conflicts_with = "auto_tune")]
    pub kappa: Option<f64>,
    /// Pick kappa at the diversity peak of a grid sweep.
    #[arg(long)]
    pub auto_tune: bool,
    /// Comma-separated kappa grid for tuning.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Ensemble size per grid point when tuning.
    #[arg(long, default_value_t = 100)]
    pub tune_size: usize,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub response: String,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, default_value_t = 300)]
    pub ensemble_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ThresholdRule::Mean)]
    pub threshold: ThresholdRule,
    /// Screen each path down to this many variables on a bootstrap sample.
    #[arg(long)]
    pub sis: Option<usize>,
    /// Center and scale predictors, center the response.
    #[arg(long)]
    pub standardize: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// motivating, benchmark8, corr40 or largep120.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

impl ScenarioArgs {
    fn overrides(&self) -> ScenarioOverrides {
        ScenarioOverrides { alpha: self.alpha, n: self.n, sigma: self.sigma }
    }
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, conflicts_with = "scenario", requires = "response")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated kappa grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub ensemble_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub sis: Option<usize>,
    #[arg(long)]
    pub standardize: bool,
    /// Write the CSV curve here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 300)]
    pub ensemble_size: usize,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Screening size; `largep120` uses n - 1 unless --no-sis is given.
    #[arg(long, conflicts_with = "no_sis")]
    pub sis: Option<usize>,
    #[arg(long)]
    pub no_sis: bool,
    /// Write the JSON summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Applies `ST2E_THREADS` to the global rayon pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}

/// Runs a parsed command and maps the outcome to an exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = configure_threads().and_then(|_| match cli.command {
        Command::Select(a) => cmd_select(&a),
        Command::Tune(a) => cmd_tune(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn screening_for(sis: Option<usize>, dataset: &Dataset) -> CliResult<Option<ScreeningConfig>> {
    let Some(q) = sis else { return Ok(None) };
    let s = ScreeningConfig::new(q);
    s.validate(dataset.p(), dataset.n())?;
    Ok(Some(s))
}

/// Default grid restricted to what a pool of `m` variables can afford.
pub fn default_grid_for(m: usize) -> Vec<f64> {
    affordable_kappa_grid(&default_kappa_grid(), m, 0.5, TUNE_CANDIDATE_BUDGET)
}

fn check_grid(grid: &[f64]) -> CliResult<()> {
    if grid.is_empty() || grid.iter().any(|k| !(*k > 1.0) || !k.is_finite()) {
        return Err(CliError::Input("every grid value must be a finite number > 1".into()));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_select(args: &SelectArgs) -> CliResult<()> {
    let start = Instant::now();
    let ingested = ingest_csv(&args.data, &args.response, args.standardize)?;
    for name in &ingested.constant_columns {
        eprintln!("warning: column `{name}` is constant");
    }
    let dataset = ingested.dataset;
    if args.ensemble_size == 0 {
        return Err(CliError::Input("--ensemble-size must be at least 1".into()));
    }
    let screening = screening_for(args.sis, &dataset)?;
    let m = screening.as_ref().map_or(dataset.p(), |s| s.q);

    let tuning: Option<TuningCurve> = if args.kappa.auto_tune {
        let grid = args.kappa.grid.clone().unwrap_or_else(|| default_grid_for(m));
        check_grid(&grid)?;
        Some(tune_kappa(
            &dataset,
            &St2Config::default(),
            &grid,
            args.kappa.tune_size,
            substream_seed(args.seed, u64::MAX),
            screening.as_ref(),
        )?)
    } else {
        None
    };
    let kappa = tuning.as_ref().map(|t| t.chosen_kappa).or(args.kappa.kappa).unwrap_or(std::f64::consts::E);
    let config = St2Config::with_kappa(kappa);
    config.validate()?;
    let ensemble = build_ensemble(&dataset, &config, args.ensemble_size, args.seed, screening.as_ref())?;

    let report_config = ReportConfig {
        data: args.data.display().to_string(),
        response: args.response.clone(),
        standardize: args.standardize,
        ensemble_size: args.ensemble_size,
        kappa,
        kappa_tuned: tuning.is_some(),
        lambda: config.lambda,
        max_sweeps: config.max_sweeps,
        threshold: args.threshold,
        sis_q: screening.as_ref().map(|s| s.q),
        seed: args.seed,
    };
    let report = SelectionReport::build(
        report_config,
        dataset.names(),
        &ensemble,
        tuning.as_ref(),
        start.elapsed().as_secs_f64(),
    );
    if let Some(out) = &args.out {
        write_file(out, &report.to_json()?)?;
    }
    print!("{}", report.render_text());
    Ok(())
}

pub fn cmd_tune(args: &TuneArgs) -> CliResult<()> {
    let (dataset, screening) = match (&args.data, &args.scenario.scenario) {
        (Some(path), None) => {
            let response = args.response.as_deref().ok_or_else(|| CliError::Input("--response is required".into()))?;
            let ds = ingest_csv(path, response, args.standardize)?.dataset;
            let s = screening_for(args.sis, &ds)?;
            (ds, s)
        }
        (None, Some(name)) => {
            let spec = st2e_core::builtin_scenario(name, &args.scenario.overrides())?;
            let mut rng = stream_from_seed(substream_seed(args.seed, u64::MAX));
            let ds = st2e_core::generate(&spec, &mut rng)?;
            let s = match args.sis {
                Some(q) => Some(ScreeningConfig::new(q)),
                None if name == "largep120" => Some(ScreeningConfig::for_sample_size(ds.n())),
                None => None,
            };
            if let Some(s) = &s {
                s.validate(ds.p(), ds.n())?;
            }
            (ds, s)
        }
        _ => return Err(CliError::Input("give exactly one of --data or --scenario".into())),
    };
    let m = screening.as_ref().map_or(dataset.p(), |s| s.q);
    let grid = args.grid.clone().unwrap_or_else(|| default_grid_for(m));
    check_grid(&grid)?;
    let curve = tune_kappa(
        &dataset,
        &St2Config::default(),
        &grid,
        args.ensemble_size,
        substream_seed(args.seed, u64::MAX - 1),
        screening.as_ref(),
    )?;
    let csv = tuning_csv(&curve);
    match &args.out {
        Some(out) => {
            write_file(out, &csv)?;
            for p in &curve.points {
                println!("ln(kappa)={:>6.3}  diversity={:.4}  strength={:.4}", p.kappa.ln(), p.diversity, p.strength);
            }
            println!("chosen kappa {}", curve.chosen_kappa);
        }
        None => {
            print!("{csv}");
            eprintln!("chosen kappa {}", curve.chosen_kappa);
        }
    }
    Ok(())
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let name = args
        .scenario
        .scenario
        .clone()
        .ok_or_else(|| CliError::Input("--scenario is required".into()))?;
    let spec = st2e_core::builtin_scenario(&name, &args.scenario.overrides())?;
    let screening = if args.no_sis {
        Some(ScreeningConfig { enabled: false, ..ScreeningConfig::new(1) })
    } else {
        args.sis.map(ScreeningConfig::new)
    };
    if let Some(s) = screening.as_ref().filter(|s| s.enabled) {
        s.validate(spec.p, spec.n)?;
    }
    let m = match (&screening, name.as_str()) {
        (Some(s), _) if s.enabled => s.q,
        (None, "largep120") => spec.n - 1,
        _ => spec.p,
    };
    let kappa = if args.kappa.auto_tune {
        let grid = args.kappa.grid.clone().unwrap_or_else(|| default_grid_for(m));
        check_grid(&grid)?;
        KappaChoice::Tuned { grid, size: args.kappa.tune_size }
    } else {
        KappaChoice::Fixed(args.kappa.kappa.unwrap_or(std::f64::consts::E))
    };
    let opts = BenchmarkOptions {
        scenario: name,
        overrides: args.scenario.overrides(),
        reps: args.reps,
        ensemble_size: args.ensemble_size,
        kappa,
        seed: args.seed,
        screening,
    };
    let summary = run_benchmark(&opts)?;
    if let Some(out) = &args.out {
        write_file(out, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    }
    print!("{}", render_summary(&summary));
    println!("elapsed {:.2}s", summary.wall_seconds);
    Ok(())
}
