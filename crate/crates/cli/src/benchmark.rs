//! Monte Carlo replication of the simulation scenarios.
//!
//! Replicate `r` draws its data from substream `2r` of the master seed and
//! builds its ensemble with master seed `substream(2r + 1)`, so any replicate
//! can be rerun alone. Auto-tuning uses one pilot dataset drawn from
//! substream `u64::MAX`; the chosen kappa is then used for every replicate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use st2e_core::{
    build_ensemble, builtin_scenario, generate, importance, perf, stream_from_seed,
    substream_seed, threshold_mean, tune_kappa, ScenarioOverrides, ScenarioSpec, ScreeningConfig,
    St2Config, TuningCurve, VariableSubset,
};

use crate::error::CliResult;

/// How kappa is chosen for a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaChoice {
    Fixed(f64),
    /// Diversity peak over `grid` with ensembles of `size` paths.
    Tuned { grid: Vec<f64>, size: usize },
}

impl KappaChoice {
    /// The default grid, minus the kappa values too expensive for a search
    /// pool of `pool` variables.
    pub fn tuned_default(pool: usize) -> Self {
        KappaChoice::Tuned { grid: crate::commands::default_grid_for(pool), size: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub scenario: String,
    pub overrides: ScenarioOverrides,
    pub reps: usize,
    pub ensemble_size: usize,
    pub kappa: KappaChoice,
    pub seed: u64,
    /// `None` picks `q = n - 1` for `largep120` and no screening otherwise.
    pub screening: Option<ScreeningConfig>,
}

impl BenchmarkOptions {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            overrides: ScenarioOverrides::default(),
            reps: 100,
            ensemble_size: 300,
            kappa: KappaChoice::Fixed(std::f64::consts::E),
            seed: 0,
            screening: None,
        }
    }
}

/// Selection-count statistics of one variable group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub name: String,
    /// Zero-based variable indices.
    pub variables: Vec<usize>,
    pub min: usize,
    /// Lower-middle order statistic.
    pub median: usize,
    pub max: usize,
    pub mean: f64,
    /// `|group| - (selections in group) / reps`.
    pub avg_zero_coefficients: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    pub kappa: f64,
    pub diversity: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub alpha: Option<f64>,
    pub reps: usize,
    pub ensemble_size: usize,
    pub kappa: f64,
    pub tuning: Option<Vec<TuningRow>>,
    pub screening_q: Option<usize>,
    pub seed: u64,
    pub groups: Vec<GroupStats>,
    pub perf: f64,
    /// Times each variable was selected, out of `reps`.
    pub counts: Vec<usize>,
    /// Selected variables of every replicate.
    pub selections: Vec<Vec<usize>>,
    pub wall_seconds: f64,
}

impl BenchmarkSummary {
    pub fn group(&self, name: &str) -> Option<&GroupStats> {
        self.groups.iter().find(|g| g.name == name)
    }
}

/// Per-variable counts and group statistics from per-replicate selections.
pub fn summarize_groups(selections: &[Vec<usize>], p: usize, groups: &[(String, Vec<usize>)]) -> (Vec<usize>, Vec<GroupStats>) {
    let mut counts = vec![0usize; p];
    for sel in selections {
        for &j in sel {
            counts[j] += 1;
        }
    }
    let reps = selections.len().max(1) as f64;
    let stats = groups
        .iter()
        .map(|(name, vars)| {
            let mut c: Vec<usize> = vars.iter().map(|&j| counts[j]).collect();
            c.sort_unstable();
            let total: usize = c.iter().sum();
            let (min, median, max) = if c.is_empty() { (0, 0, 0) } else { (c[0], c[(c.len() - 1) / 2], c[c.len() - 1]) };
            GroupStats {
                name: name.clone(),
                variables: vars.clone(),
                min,
                median,
                max,
                mean: if c.is_empty() { 0.0 } else { total as f64 / c.len() as f64 },
                avg_zero_coefficients: vars.len() as f64 - total as f64 / reps,
            }
        })
        .collect();
    (counts, stats)
}

fn resolve_screening(opts: &BenchmarkOptions, spec: &ScenarioSpec) -> Option<ScreeningConfig> {
    match &opts.screening {
        Some(s) => Some(s.clone()).filter(|s| s.enabled),
        None if spec.name == "largep120" => Some(ScreeningConfig::for_sample_size(spec.n)),
        None => None,
    }
}

pub fn tune_on_pilot(
    spec: &ScenarioSpec,
    grid: &[f64],
    size: usize,
    seed: u64,
    screening: Option<&ScreeningConfig>,
) -> CliResult<TuningCurve> {
    let mut rng = stream_from_seed(substream_seed(seed, u64::MAX));
    let pilot = generate(spec, &mut rng)?;
    Ok(tune_kappa(&pilot, &St2Config::default(), grid, size, substream_seed(seed, u64::MAX - 1), screening)?)
}

pub fn run_benchmark(opts: &BenchmarkOptions) -> CliResult<BenchmarkSummary> {
    let start = std::time::Instant::now();
    if opts.reps == 0 {
        return Err(crate::CliError::Input("--reps must be at least 1".into()));
    }
    let spec = builtin_scenario(&opts.scenario, &opts.overrides)?;
    let screening = resolve_screening(opts, &spec);
    let (kappa, tuning) = match &opts.kappa {
        KappaChoice::Fixed(k) => (*k, None),
        KappaChoice::Tuned { grid, size } => {
            let curve = tune_on_pilot(&spec, grid, *size, opts.seed, screening.as_ref())?;
            let rows = curve
                .points
                .iter()
                .map(|p| TuningRow { kappa: p.kappa, diversity: p.diversity, strength: p.strength })
                .collect();
            (curve.chosen_kappa, Some(rows))
        }
    };
    let config = St2Config::with_kappa(kappa);

    let mut selections = Vec::with_capacity(opts.reps);
    let mut runs = Vec::with_capacity(opts.reps);
    for r in 0..opts.reps as u64 {
        let mut rng = stream_from_seed(substream_seed(opts.seed, 2 * r));
        let data = generate(&spec, &mut rng)?;
        let ensemble =
            build_ensemble(&data, &config, opts.ensemble_size, substream_seed(opts.seed, 2 * r + 1), screening.as_ref())?;
        let selected = threshold_mean(&importance(&ensemble));
        selections.push(selected.indices().to_vec());
        runs.push(selected);
    }

    let truth = spec.truth();
    let mut groups: Vec<(String, Vec<usize>)> = vec![
        ("signal".into(), truth.signal().indices().to_vec()),
        ("noise".into(), truth.noise().indices().to_vec()),
    ];
    groups.extend(spec.groups.iter().map(|(name, g): &(String, VariableSubset)| (name.clone(), g.indices().to_vec())));
    let (counts, group_stats) = summarize_groups(&selections, spec.p, &groups);

    Ok(BenchmarkSummary {
        scenario: spec.name.clone(),
        n: spec.n,
        p: spec.p,
        sigma: spec.sigma,
        alpha: (spec.name == "motivating").then(|| spec.beta[0]),
        reps: opts.reps,
        ensemble_size: opts.ensemble_size,
        kappa,
        tuning,
        screening_q: screening.map(|s| s.q),
        seed: opts.seed,
        groups: group_stats,
        perf: perf(&runs, &truth),
        counts,
        selections,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Text table in min/median/max layout. Numbers match the JSON at the printed precision.
pub fn render_summary(s: &BenchmarkSummary) -> String {
    let mut out = String::new();
    let alpha = s.alpha.map(|a| format!(", alpha={a}")).unwrap_or_default();
    let sis = s.screening_q.map(|q| format!(", SIS q={q}")).unwrap_or_default();
    let _ = writeln!(
        out,
        "scenario {} (n={}, p={}, sigma={}{alpha}{sis}) reps={} B={} kappa={:.4}",
        s.scenario, s.n, s.p, s.sigma, s.reps, s.ensemble_size, s.kappa
    );
    let _ = writeln!(out, "{:<8} {:>5} {:>5} {:>6} {:>5} {:>9} {:>9}", "group", "size", "min", "median", "max", "mean", "avg_zero");
    for g in &s.groups {
        let _ = writeln!(
            out,
            "{:<8} {:>5} {:>5} {:>6} {:>5} {:>9.2} {:>9.2}",
            g.name,
            g.variables.len(),
            g.min,
            g.median,
            g.max,
            g.mean,
            g.avg_zero_coefficients
        );
    }
    let _ = writeln!(out, "perf {:.4}", s.perf);
    out
}
