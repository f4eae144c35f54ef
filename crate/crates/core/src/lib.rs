//! Stochastic stepwise ensembles (ST2E) for variable selection in linear regression.
//!
//! Each ensemble member is one stochastic stepwise path: a forward/backward
//! search over predictor subsets in which every step adds or removes a
//! randomly sized group of variables, chosen as the best of a random sample of
//! candidate groups under AIC. Stacking the final subsets of `B` independent
//! paths yields a `B x p` binary matrix whose column means rank the variables.
//!
//! The crate is `no_std` (with `alloc`) when built without default features.
//! The `parallel` feature (on by default) runs ensemble paths on rayon.
//!
//! Module map:
//!
//! - [`model`]: datasets, subsets, least-squares fits and the AIC objective.
//! - [`search`]: a single ST2 path.
//! - [`ensemble`]: ensemble construction, importance, thresholding, diversity,
//!   strength and the kappa sweep.
//! - [`screening`]: bootstrap + marginal-correlation screening for `p > n`.
//! - [`simgen`]: built-in simulation scenarios.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod linalg;

pub mod ensemble;
pub mod model;
pub mod screening;
pub mod search;
pub mod simgen;

pub use error::{Error, Result};
pub use ensemble::{
    affordable_kappa_grid, build_ensemble, default_kappa_grid, diversity, importance, perf, ranks, strength,
    substream_seed, threshold_mean, tune_kappa, worst_case_candidates, EnsembleMatrix, ImportanceVector, TuningCurve,
    TuningPoint,
};
pub use model::{aic, fit_ols, null_objective, AicScorer, Dataset, FitResult, Truth, VariableSubset};
pub use screening::{bootstrap_sample, run_screened_path, sis_screen, ScreeningConfig};
pub use search::{
    backward_step, forward_step, num_candidate_groups, run_st2_path, sample_candidate_groups,
    sample_group_size, Direction, ObjectiveKind, PathResult, St2Config, StepOutcome, StepPlan,
    Termination,
};
pub use simgen::{builtin_scenario, correlated_normal, generate, ScenarioOverrides, ScenarioSpec, SCENARIO_NAMES};

/// Random stream used for every path, bootstrap and simulation draw.
pub type Stream = rand_chacha::ChaCha8Rng;

/// Builds a [`Stream`] from a 64-bit seed.
pub fn stream_from_seed(seed: u64) -> Stream {
    use rand::SeedableRng;
    Stream::seed_from_u64(seed)
}
