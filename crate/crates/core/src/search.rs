//! One stochastic stepwise (ST2) path.
//!
//! A path starts at the null model and alternates a forward step and a
//! backward step. Each step draws a group size `g` uniformly from
//! `1..=round(lambda * m)` (with `m` the number of addable or deletable
//! variables), draws the number of candidate groups
//! `k = floor(C(m, g)^(1/kappa) + 0.5)`, samples `k` groups of size `g`
//! independently, and moves to the best candidate only if it strictly lowers
//! the objective. The path stops after the first sweep in which neither step
//! moves, or after `max_sweeps` sweeps.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{aic, AicScorer, Dataset, VariableSubset};

/// Objective minimized along a path. Only AIC is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveKind {
    #[default]
    Aic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct St2Config {
    /// Greediness: smaller values evaluate more candidate groups per step. Must exceed 1.
    pub kappa: f64,
    /// Cap on the group size as a fraction of the pool, in `(0, 1)`.
    pub lambda: f64,
    pub objective: ObjectiveKind,
    /// Hard limit on forward+backward sweeps.
    pub max_sweeps: usize,
    pub rng_seed: u64,
}

impl Default for St2Config {
    fn default() -> Self {
        Self {
            kappa: core::f64::consts::E,
            lambda: 0.5,
            objective: ObjectiveKind::Aic,
            max_sweeps: 50,
            rng_seed: 0,
        }
    }
}

impl St2Config {
    pub fn with_kappa(kappa: f64) -> Self {
        Self { kappa, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 1.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!("kappa must be > 1, got {}", self.kappa)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Sizes drawn for one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepPlan {
    pub direction: Direction,
    /// Number of variables that could be added (forward) or deleted (backward).
    pub pool_size: usize,
    pub group_size: usize,
    pub group_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub subset: VariableSubset,
    pub accepted: bool,
    pub plan: StepPlan,
    pub objective_before: f64,
    /// Equal to `objective_before` when the step is rejected.
    pub objective_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    Guard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub subset: VariableSubset,
    /// `aic(dataset, subset)` for the dataset the path ran on.
    pub objective: f64,
    pub sweeps: usize,
    pub terminated_by: Termination,
    /// Objective after every accepted move, starting with the null model.
    pub trace: Vec<f64>,
}

/// Draws `g` uniformly from `{1, ..., max(1, floor(lambda m + 0.5))}`.
pub fn sample_group_size<R: Rng + ?Sized>(m: usize, lambda: f64, rng: &mut R) -> usize {
    debug_assert!(m >= 1);
    let upper = (libm::floor(lambda * m as f64 + 0.5) as usize).clamp(1, m.max(1));
    rng.random_range(1..=upper)
}

fn ln_binomial(m: usize, g: usize) -> f64 {
    libm::lgamma(m as f64 + 1.0) - libm::lgamma(g as f64 + 1.0) - libm::lgamma((m - g) as f64 + 1.0)
}

/// `C(m, g)` rounded to an integer, saturating at `u64::MAX`.
pub fn binomial(m: usize, g: usize) -> u64 {
    if g > m {
        return 0;
    }
    libm::round(libm::exp(ln_binomial(m, g))) as u64
}

/// `k = floor(C(m, g)^(1/kappa) + 0.5)`, clamped to `[1, C(m, g)]`.
pub fn num_candidate_groups(m: usize, g: usize, kappa: f64) -> u64 {
    debug_assert!(g >= 1 && g <= m);
    let total = binomial(m, g).max(1);
    let k = libm::floor(libm::exp(ln_binomial(m, g) / kappa) + 0.5) as u64;
    k.clamp(1, total)
}

/// Draws one group of `g` members of `pool`, returned sorted.
///
/// `pool` is used as scratch space and is left permuted.
fn draw_group<R: Rng + ?Sized>(pool: &mut [usize], g: usize, rng: &mut R, out: &mut Vec<usize>) {
    let (chosen, _) = pool.partial_shuffle(rng, g);
    out.clear();
    out.extend_from_slice(chosen);
    out.sort_unstable();
}

/// `k` independent uniform draws of `g` distinct members of `pool`.
///
/// Groups are drawn independently, so the same group may appear more than once.
pub fn sample_candidate_groups<R: Rng + ?Sized>(
    pool: &[usize],
    g: usize,
    k: usize,
    rng: &mut R,
) -> Vec<VariableSubset> {
    assert!(g <= pool.len(), "group size exceeds the pool");
    let mut scratch = pool.to_vec();
    let mut group = Vec::with_capacity(g);
    (0..k)
        .map(|_| {
            draw_group(&mut scratch, g, rng, &mut group);
            VariableSubset::new(group.clone()).expect("pool members are distinct")
        })
        .collect()
}

/// Advances `idx` to the next `g`-combination of `0..m` in lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let g = idx.len();
    let mut i = g;
    while i > 0 {
        i -= 1;
        if idx[i] < m - g + i {
            idx[i] += 1;
            for t in i + 1..g {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Visits the candidate groups of a step. When `k` reaches `C(m, g)` every
/// group is enumerated once instead of sampled; otherwise `k` independent draws
/// are made. Groups are handed over as sorted positions into `pool`.
fn for_each_candidate<R, F>(pool_size: usize, g: usize, k: u64, rng: &mut R, mut visit: F)
where
    R: Rng + ?Sized,
    F: FnMut(&[usize]),
{
    if k >= binomial(pool_size, g) {
        let mut idx: Vec<usize> = (0..g).collect();
        loop {
            visit(&idx);
            if !next_combination(&mut idx, pool_size) {
                break;
            }
        }
    } else {
        let mut scratch: Vec<usize> = (0..pool_size).collect();
        let mut group = Vec::with_capacity(g);
        for _ in 0..k {
            draw_group(&mut scratch, g, rng, &mut group);
            visit(&group);
        }
    }
}

fn rejected(current: &VariableSubset, plan: StepPlan, before: f64) -> StepOutcome {
    StepOutcome {
        subset: current.clone(),
        accepted: false,
        plan,
        objective_before: before,
        objective_after: before,
    }
}

/// Forward step against a prepared scorer.
pub fn forward_step_scored<R: Rng + ?Sized>(
    scorer: &AicScorer,
    current: &VariableSubset,
    config: &St2Config,
    rng: &mut R,
) -> StepOutcome {
    let pool: Vec<usize> = (0..scorer.p()).filter(|&j| !current.contains(j)).collect();
    let h = current.len();
    let ctx = scorer.forward_context(current.indices());
    let before = ctx
        .as_ref()
        .map_or(f64::INFINITY, |c| scorer.objective_from_rss(c.base_rss(), h));
    let mut plan = StepPlan { direction: Direction::Forward, pool_size: pool.len(), group_size: 0, group_count: 0 };
    let Some(ctx) = ctx else { return rejected(current, plan, before) };
    if pool.is_empty() {
        return rejected(current, plan, before);
    }
    let g = sample_group_size(pool.len(), config.lambda, rng);
    let k = num_candidate_groups(pool.len(), g, config.kappa);
    plan.group_size = g;
    plan.group_count = k;

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut members = Vec::with_capacity(g);
    let mut scratch = Vec::new();
    for_each_candidate(pool.len(), g, k, rng, |positions| {
        members.clear();
        members.extend(positions.iter().map(|&i| pool[i]));
        if let Some(rss) = ctx.rss_with(&members, &mut scratch) {
            let obj = scorer.objective_from_rss(rss, h + g);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, members.clone()));
            }
        }
    });

    match best {
        Some((obj, group)) if obj < before => StepOutcome {
            subset: current.union(&group),
            accepted: true,
            plan,
            objective_before: before,
            objective_after: obj,
        },
        _ => rejected(current, plan, before),
    }
}

/// Backward step against a prepared scorer.
pub fn backward_step_scored<R: Rng + ?Sized>(
    scorer: &AicScorer,
    current: &VariableSubset,
    config: &St2Config,
    rng: &mut R,
) -> StepOutcome {
    let h = current.len();
    let mut plan = StepPlan { direction: Direction::Backward, pool_size: h, group_size: 0, group_count: 0 };
    if h == 0 {
        return rejected(current, plan, scorer.null_objective());
    }
    let Some(ctx) = scorer.backward_context(current.indices()) else {
        return rejected(current, plan, f64::INFINITY);
    };
    let before = scorer.objective_from_rss(ctx.base_rss(), h);
    let g = sample_group_size(h, config.lambda, rng);
    let k = num_candidate_groups(h, g, config.kappa);
    plan.group_size = g;
    plan.group_count = k;

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut scratch = Vec::new();
    for_each_candidate(h, g, k, rng, |positions| {
        if let Some(rss) = ctx.rss_without(positions, &mut scratch) {
            let obj = scorer.objective_from_rss(rss, h - g);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, positions.to_vec()));
            }
        }
    });

    match best {
        Some((obj, positions)) if obj < before => {
            let removed: Vec<usize> = positions.iter().map(|&i| current.indices()[i]).collect();
            StepOutcome {
                subset: current.difference(&removed),
                accepted: true,
                plan,
                objective_before: before,
                objective_after: obj,
            }
        }
        _ => rejected(current, plan, before),
    }
}

/// Forward step: try adding a random group of excluded variables.
pub fn forward_step<R: Rng + ?Sized>(
    dataset: &Dataset,
    current: &VariableSubset,
    config: &St2Config,
    rng: &mut R,
) -> Result<StepOutcome> {
    config.validate()?;
    current.check_bounds(dataset.p())?;
    Ok(forward_step_scored(&AicScorer::new(dataset), current, config, rng))
}

/// Backward step: try deleting a random group of included variables.
pub fn backward_step<R: Rng + ?Sized>(
    dataset: &Dataset,
    current: &VariableSubset,
    config: &St2Config,
    rng: &mut R,
) -> Result<StepOutcome> {
    config.validate()?;
    current.check_bounds(dataset.p())?;
    Ok(backward_step_scored(&AicScorer::new(dataset), current, config, rng))
}

/// Path outcome on the scorer's own objective values.
pub(crate) struct RawPath {
    pub subset: VariableSubset,
    pub objective: f64,
    pub sweeps: usize,
    pub terminated_by: Termination,
    pub trace: Vec<f64>,
}

pub(crate) fn run_path_scored<R: Rng + ?Sized>(scorer: &AicScorer, config: &St2Config, rng: &mut R) -> RawPath {
    let mut current = VariableSubset::empty();
    let mut objective = scorer.null_objective();
    let mut trace = alloc::vec![objective];
    for sweep in 1..=config.max_sweeps {
        let mut moved = false;
        if current.len() < scorer.p() {
            let step = forward_step_scored(scorer, &current, config, rng);
            if step.accepted {
                current = step.subset;
                objective = step.objective_after;
                trace.push(objective);
                moved = true;
            }
        }
        if !current.is_empty() {
            let step = backward_step_scored(scorer, &current, config, rng);
            if step.accepted {
                current = step.subset;
                objective = step.objective_after;
                trace.push(objective);
                moved = true;
            }
        }
        if !moved {
            return RawPath { subset: current, objective, sweeps: sweep, terminated_by: Termination::Converged, trace };
        }
    }
    RawPath { subset: current, objective, sweeps: config.max_sweeps, terminated_by: Termination::Guard, trace }
}

impl RawPath {
    /// Reports the objective through the QR fit on `dataset`.
    pub(crate) fn finish(self, dataset: &Dataset) -> PathResult {
        let objective = aic(dataset, &self.subset).unwrap_or(self.objective);
        PathResult {
            subset: self.subset,
            objective,
            sweeps: self.sweeps,
            terminated_by: self.terminated_by,
            trace: self.trace,
        }
    }
}

/// Runs one ST2 path from the null model.
pub fn run_st2_path<R: Rng + ?Sized>(dataset: &Dataset, config: &St2Config, rng: &mut R) -> Result<PathResult> {
    config.validate()?;
    let scorer = AicScorer::new(dataset);
    Ok(run_path_scored(&scorer, config, rng).finish(dataset))
}
