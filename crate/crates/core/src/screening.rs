//! Bootstrap + sure-independence screening for problems with `p >= n`.
//!
//! Before each path a bootstrap sample is drawn and the `q` predictors with
//! the largest absolute marginal correlation with the response on that sample
//! are kept. The path then searches only over those `q` columns, on the
//! original rows by default or on the bootstrap rows when `fit_on_bootstrap`
//! is set. Each path is capped at `q` variables; the ensemble as a whole is not.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{aic, AicScorer, Dataset, VariableSubset};
use crate::search::{run_path_scored, PathResult, St2Config};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreeningConfig {
    /// Variables retained per path.
    pub q: usize,
    pub enabled: bool,
    /// Run the search on the bootstrap rows instead of the original ones.
    pub fit_on_bootstrap: bool,
}

impl ScreeningConfig {
    pub fn new(q: usize) -> Self {
        Self { q, enabled: true, fit_on_bootstrap: false }
    }

    /// `q = n - 1`.
    pub fn for_sample_size(n: usize) -> Self {
        Self::new(n.saturating_sub(1))
    }

    pub fn validate(&self, p: usize, n: usize) -> Result<()> {
        if self.q == 0 || self.q > p {
            return Err(Error::InvalidConfig(format!("screening size q = {} must lie in 1..={p}", self.q)));
        }
        if p >= n && self.q >= n {
            return Err(Error::InvalidConfig(format!(
                "screening size q = {} must be below n = {n} when p >= n",
                self.q
            )));
        }
        Ok(())
    }
}

/// `n` row indices drawn uniformly with replacement.
pub fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Resamples the rows of `dataset` with replacement.
pub fn bootstrap_sample<R: Rng + ?Sized>(dataset: &Dataset, rng: &mut R) -> Dataset {
    dataset.select_rows(&bootstrap_indices(dataset.n(), rng))
}

/// Absolute Pearson correlation of every column with the response.
///
/// Constant columns get 0.
pub fn marginal_correlations(dataset: &Dataset) -> Result<Vec<f64>> {
    let nf = dataset.n() as f64;
    let y = dataset.response();
    let ym = y.iter().sum::<f64>() / nf;
    let syy: f64 = y.iter().map(|v| (v - ym) * (v - ym)).sum();
    if !(syy > 0.0) {
        return Err(Error::ZeroVarianceResponse);
    }
    Ok((0..dataset.p())
        .map(|j| {
            let x = dataset.column(j);
            let xm = x.iter().sum::<f64>() / nf;
            let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (xi, yi)| {
                let dx = xi - xm;
                (sxy + dx * (yi - ym), sxx + dx * dx)
            });
            if sxx > 0.0 {
                (sxy / libm::sqrt(sxx * syy)).abs()
            } else {
                0.0
            }
        })
        .collect())
}

/// Top `q` variables by absolute marginal correlation; ties go to the lower index.
pub fn sis_screen(dataset: &Dataset, q: usize) -> Result<VariableSubset> {
    if q > dataset.p() {
        return Err(Error::InvalidConfig(format!("cannot keep {q} of {} variables", dataset.p())));
    }
    let corr = marginal_correlations(dataset)?;
    let mut order: Vec<usize> = (0..dataset.p()).collect();
    order.sort_by(|&a, &b| corr[b].total_cmp(&corr[a]).then(a.cmp(&b)));
    order.truncate(q);
    VariableSubset::new(order)
}

pub(crate) fn screened_path_with<R: Rng + ?Sized>(
    full: &AicScorer,
    dataset: &Dataset,
    config: &St2Config,
    screening: &ScreeningConfig,
    rng: &mut R,
) -> Result<PathResult> {
    let boot = bootstrap_sample(dataset, rng);
    let kept = sis_screen(&boot, screening.q)?;
    let columns = kept.indices();
    if screening.fit_on_bootstrap {
        let sub = boot.select_columns(columns);
        let mut result = run_path_scored(&AicScorer::new(&sub), config, rng).finish(&sub);
        result.subset = result.subset.map_through(columns);
        return Ok(result);
    }
    let raw = run_path_scored(&full.restrict(columns), config, rng);
    let subset = raw.subset.map_through(columns);
    let objective = aic(dataset, &subset).unwrap_or(raw.objective);
    let result = PathResult {
        subset,
        objective,
        sweeps: raw.sweeps,
        terminated_by: raw.terminated_by,
        trace: raw.trace,
    };
    Ok(result)
}

/// One screened ST2 path; returned indices refer to the original columns.
pub fn run_screened_path<R: Rng + ?Sized>(
    dataset: &Dataset,
    config: &St2Config,
    screening: &ScreeningConfig,
    rng: &mut R,
) -> Result<PathResult> {
    config.validate()?;
    screening.validate(dataset.p(), dataset.n())?;
    screened_path_with(&AicScorer::new(dataset), dataset, config, screening, rng)
}
