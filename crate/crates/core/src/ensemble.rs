//! Ensembles of ST2 paths and the statistics computed from them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{null_objective, AicScorer, Dataset, Truth, VariableSubset};
use crate::screening::{screened_path_with, ScreeningConfig};
use crate::search::{num_candidate_groups, run_path_scored, PathResult, St2Config};
use crate::stream_from_seed;

/// `B x p` matrix of 0/1 selection indicators, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMatrix {
    rows: usize,
    p: usize,
    entries: Vec<u8>,
    path_objectives: Vec<f64>,
    null_objective: f64,
}

impl EnsembleMatrix {
    /// Builds a matrix from explicit rows; every entry must be 0 or 1.
    pub fn from_rows(rows: &[Vec<u8>], path_objectives: Vec<f64>, null_objective: f64) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || p == 0 {
            return Err(Error::InvalidConfig("ensemble matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidConfig("ensemble rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidConfig("ensemble entries must be 0 or 1".into()));
        }
        if path_objectives.len() != rows.len() {
            return Err(Error::InvalidConfig(format!(
                "{} path objectives for {} rows",
                path_objectives.len(),
                rows.len()
            )));
        }
        Ok(Self { rows: rows.len(), p, entries: rows.concat(), path_objectives, null_objective })
    }

    fn from_paths(paths: &[PathResult], p: usize, null_objective: f64) -> Self {
        let mut entries = vec![0u8; paths.len() * p];
        for (b, path) in paths.iter().enumerate() {
            for j in path.subset.iter() {
                entries[b * p + j] = 1;
            }
        }
        Self {
            rows: paths.len(),
            p,
            entries,
            path_objectives: paths.iter().map(|r| r.objective).collect(),
            null_objective,
        }
    }

    /// Ensemble size `B`.
    pub fn size(&self) -> usize {
        self.rows
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, b: usize) -> &[u8] {
        &self.entries[b * self.p..(b + 1) * self.p]
    }

    pub fn get(&self, b: usize, j: usize) -> u8 {
        self.entries[b * self.p + j]
    }

    pub fn column_sum(&self, j: usize) -> usize {
        (0..self.rows).map(|b| self.get(b, j) as usize).sum()
    }

    pub fn path_objectives(&self) -> &[f64] {
        &self.path_objectives
    }

    pub fn null_objective(&self) -> f64 {
        self.null_objective
    }

    /// Subset encoded by row `b`.
    pub fn row_subset(&self, b: usize) -> VariableSubset {
        VariableSubset::new(self.row(b).iter().enumerate().filter(|(_, &v)| v == 1).map(|(j, _)| j).collect())
            .expect("row indices are increasing")
    }
}

/// Per-variable importance `R(j)`: the fraction of paths selecting `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(pub Vec<f64>);

impl ImportanceVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningPoint {
    pub kappa: f64,
    pub diversity: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub points: Vec<TuningPoint>,
    pub chosen_kappa: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`.
///
/// Two SplitMix64 finalizer rounds: `mix(mix(master) ^ (index * 0xD1B54A32D192ED03))`.
/// Used for ensemble paths and benchmark replicates so that any single
/// stream can be rebuilt without replaying the others.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn collect_paths<F>(count: usize, path: F) -> Result<Vec<PathResult>>
where
    F: Fn(usize) -> Result<PathResult> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(path).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(path).collect()
    }
}

/// Runs `size` independent paths; row `b` always comes from substream `b`.
pub fn build_ensemble(
    dataset: &Dataset,
    config: &St2Config,
    size: usize,
    master_seed: u64,
    screening: Option<&ScreeningConfig>,
) -> Result<EnsembleMatrix> {
    config.validate()?;
    if size == 0 {
        return Err(Error::InvalidConfig("ensemble size must be at least 1".into()));
    }
    let screening = screening.filter(|s| s.enabled);
    if let Some(s) = screening {
        s.validate(dataset.p(), dataset.n())?;
    }
    let scorer = AicScorer::new(dataset);
    let paths = collect_paths(size, |b| {
        let mut rng = stream_from_seed(substream_seed(master_seed, b as u64));
        match screening {
            Some(s) => screened_path_with(&scorer, dataset, config, s, &mut rng),
            None => Ok(run_path_scored(&scorer, config, &mut rng).finish(dataset)),
        }
    })?;
    Ok(EnsembleMatrix::from_paths(&paths, dataset.p(), null_objective(dataset)?))
}

/// Column means of the ensemble matrix.
pub fn importance(ensemble: &EnsembleMatrix) -> ImportanceVector {
    let b = ensemble.size() as f64;
    ImportanceVector((0..ensemble.p()).map(|j| ensemble.column_sum(j) as f64 / b).collect())
}

/// Variables whose importance is strictly above the average importance.
pub fn threshold_mean(importance: &ImportanceVector) -> VariableSubset {
    let r = importance.values();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    // values within rounding of the mean count as ties, not exceedances
    let slack = 1e-12 * r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    VariableSubset::new(r.iter().enumerate().filter(|(_, &v)| v - mean > slack).map(|(j, _)| j).collect())
        .expect("increasing indices")
}

/// Rank of every variable (1 = most important); ties go to the lower index.
pub fn ranks(importance: &ImportanceVector) -> Vec<usize> {
    let r = importance.values();
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    let mut rank = vec![0; r.len()];
    for (pos, &j) in order.iter().enumerate() {
        rank[j] = pos + 1;
    }
    rank
}

/// Average over variables of the unbiased column variance of the indicators.
pub fn diversity(ensemble: &EnsembleMatrix) -> Result<f64> {
    let rows = ensemble.size();
    if rows < 2 {
        return Err(Error::DegenerateEnsemble(rows));
    }
    let bf = rows as f64;
    let total: f64 = (0..ensemble.p())
        .map(|j| {
            let mean = ensemble.column_sum(j) as f64 / bf;
            let ss: f64 = (0..rows)
                .map(|b| {
                    let d = ensemble.get(b, j) as f64 - mean;
                    d * d
                })
                .sum();
            ss / (bf - 1.0)
        })
        .sum();
    Ok(total / ensemble.p() as f64)
}

/// Mean relative improvement `|F_b - F0| / |F0|` of the paths over the null model.
///
/// The denominator is taken in absolute value: under the crate's AIC
/// convention `F0` is usually negative.
pub fn strength(ensemble: &EnsembleMatrix) -> Result<f64> {
    let f0 = ensemble.null_objective();
    if f0.abs() < 1e-12 {
        return Err(Error::NullObjectiveZero);
    }
    let objectives = ensemble.path_objectives();
    Ok(objectives.iter().map(|f| (f - f0).abs() / f0.abs()).sum::<f64>() / objectives.len() as f64)
}

/// Twelve log-spaced values with `ln kappa = 0.25, 0.5, ..., 3.0`.
pub fn default_kappa_grid() -> Vec<f64> {
    (1..=12).map(|i| libm::exp(0.25 * i as f64)).collect()
}

/// Largest number of candidate groups any single step can evaluate on a pool of `m`.
pub fn worst_case_candidates(m: usize, lambda: f64, kappa: f64) -> u64 {
    if m == 0 {
        return 0;
    }
    let upper = (libm::floor(lambda * m as f64 + 0.5) as usize).clamp(1, m);
    (1..=upper).map(|g| num_candidate_groups(m, g, kappa)).max().unwrap_or(1)
}

/// Drops the grid values whose worst-case step would evaluate more than
/// `max_candidates` groups on a pool of `m` variables. If every value would be
/// dropped, the largest one is kept.
pub fn affordable_kappa_grid(grid: &[f64], m: usize, lambda: f64, max_candidates: u64) -> Vec<f64> {
    let kept: Vec<f64> =
        grid.iter().copied().filter(|&k| worst_case_candidates(m, lambda, k) <= max_candidates).collect();
    if kept.is_empty() {
        grid.iter().copied().fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k)))).into_iter().collect()
    } else {
        kept
    }
}

/// Sweeps `grid`, building an ensemble of `size` paths per value, and picks the
/// kappa with the largest diversity (ties go to the larger kappa).
///
/// All grid points share `master_seed`.
pub fn tune_kappa(
    dataset: &Dataset,
    base: &St2Config,
    grid: &[f64],
    size: usize,
    master_seed: u64,
    screening: Option<&ScreeningConfig>,
) -> Result<TuningCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("kappa grid is empty".into()));
    }
    if size < 2 {
        return Err(Error::DegenerateEnsemble(size));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &kappa in grid {
        let config = St2Config { kappa, ..base.clone() };
        let ensemble = build_ensemble(dataset, &config, size, master_seed, screening)?;
        points.push(TuningPoint { kappa, diversity: diversity(&ensemble)?, strength: strength(&ensemble)? });
    }
    let chosen = points
        .iter()
        .fold(None::<TuningPoint>, |best, pt| match best {
            Some(b) if b.diversity > pt.diversity => Some(b),
            Some(b) if b.diversity == pt.diversity && b.kappa >= pt.kappa => Some(b),
            _ => Some(*pt),
        })
        .expect("non-empty grid");
    Ok(TuningCurve { points, chosen_kappa: chosen.kappa })
}

/// `ASF(signal) - ASF(noise)` over a set of selection runs.
pub fn perf(runs: &[VariableSubset], truth: &Truth) -> f64 {
    let asf = |group: &VariableSubset| {
        if group.is_empty() || runs.is_empty() {
            return 0.0;
        }
        let hits: usize = runs.iter().map(|run| group.iter().filter(|&j| run.contains(j)).count()).sum();
        hits as f64 / (runs.len() * group.len()) as f64
    };
    asf(truth.signal()) - asf(truth.noise())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> EnsembleMatrix {
        EnsembleMatrix::from_rows(
            &[vec![1, 1, 1, 0, 0], vec![1, 1, 0, 1, 0], vec![1, 1, 0, 0, 1]],
            vec![0.0; 3],
            -1.0,
        )
        .unwrap()
    }

    #[test]
    fn worked_example_importance_and_threshold() {
        let e = worked_example();
        let r = importance(&e);
        assert_eq!(r.values(), &[1.0, 1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(threshold_mean(&r).indices(), &[0, 1]);
        assert!((diversity(&e).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn threshold_edge_cases() {
        assert!(threshold_mean(&ImportanceVector(vec![0.4; 6])).is_empty());
        assert_eq!(threshold_mean(&ImportanceVector(vec![0.9, 0.1, 0.1, 0.1])).indices(), &[0]);
    }

    #[test]
    fn strength_arithmetic() {
        let e = EnsembleMatrix::from_rows(&[vec![1, 0], vec![0, 1]], vec![-12.0, -14.0], -10.0).unwrap();
        assert!((strength(&e).unwrap() - 0.3).abs() < 1e-12);
        let zero = EnsembleMatrix::from_rows(&[vec![0, 0]], vec![0.0], 0.0).unwrap();
        assert_eq!(strength(&zero), Err(Error::NullObjectiveZero));
        let null = EnsembleMatrix::from_rows(&[vec![0, 0], vec![0, 0]], vec![-3.0, -3.0], -3.0).unwrap();
        assert_eq!(strength(&null).unwrap(), 0.0);
    }

    #[test]
    fn diversity_needs_two_rows() {
        let e = EnsembleMatrix::from_rows(&[vec![1, 0]], vec![0.0], -1.0).unwrap();
        assert_eq!(diversity(&e), Err(Error::DegenerateEnsemble(1)));
        let same = EnsembleMatrix::from_rows(&[vec![1, 0], vec![1, 0]], vec![0.0; 2], -1.0).unwrap();
        assert_eq!(diversity(&same).unwrap(), 0.0);
    }

    #[test]
    fn perf_counting() {
        let truth = Truth::from_signal(&[0], 3).unwrap();
        let runs = [VariableSubset::new(vec![0]).unwrap(), VariableSubset::new(vec![0, 1]).unwrap()];
        assert!((perf(&runs, &truth) - 0.75).abs() < 1e-15);
        let all = [VariableSubset::full(3)];
        assert_eq!(perf(&all, &truth), 0.0);
        let exact = [VariableSubset::new(vec![0]).unwrap()];
        assert_eq!(perf(&exact, &truth), 1.0);
    }

    #[test]
    fn ranks_break_ties_by_index() {
        let r = ImportanceVector(vec![0.5, 0.9, 0.5, 0.1]);
        assert_eq!(ranks(&r), vec![2, 1, 3, 4]);
    }

    #[test]
    fn rejects_non_binary_entries() {
        assert!(EnsembleMatrix::from_rows(&[vec![2, 0]], vec![0.0], -1.0).is_err());
    }

    #[test]
    fn affordable_grid_drops_the_greedy_end() {
        let grid = default_kappa_grid();
        assert_eq!(affordable_kappa_grid(&grid, 8, 0.5, 100_000), grid);
        let wide = affordable_kappa_grid(&grid, 40, 0.5, 100_000);
        assert!(wide.len() < grid.len());
        assert!(wide.iter().all(|&k| worst_case_candidates(40, 0.5, k) <= 100_000));
        assert_eq!(affordable_kappa_grid(&[1.01, 1.02], 200, 0.5, 10), vec![1.02]);
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = default_kappa_grid();
        assert_eq!(g.len(), 12);
        assert!((libm::log(g[0]) - 0.25).abs() < 1e-12);
        assert!((libm::log(g[11]) - 3.0).abs() < 1e-12);
    }
}
