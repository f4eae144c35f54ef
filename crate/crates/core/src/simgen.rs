//! Built-in simulation scenarios with ground-truth labels.
//!
//! | name         | p   | default n | sigma | design                                      |
//! |--------------|-----|-----------|-------|---------------------------------------------|
//! | `motivating` | 20  | 100       | 3     | `alpha x1 + 2 x2 + 3 x3`, corr 0.7 in {1,2,3} |
//! | `benchmark8` | 8   | 50        | 1     | `3 x1 + 1.5 x2 + 2 x5`, corr `0.5^|i-j|`      |
//! | `corr40`     | 40  | 100       | 6     | two 0.9-correlated blocks of three signals    |
//! | `largep120`  | 120 | 50        | 50    | 60 frozen signals, four 30-blocks             |
//!
//! The 60 `largep120` coefficients were drawn once from a normal with mean 3
//! and variance 0.5 and are shipped in `data/largep120_beta.txt`
//! (SHA-256 `6fab111674431c02e1dcf258de2c63876878c06624e88ae3fc89b5fd772e3efb`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Dataset, Truth, VariableSubset};

/// Frozen coefficient file for `largep120`, one value per line.
pub const LARGEP120_BETA: &str = include_str!("../data/largep120_beta.txt");

pub const SCENARIO_NAMES: [&str; 4] = ["motivating", "benchmark8", "corr40", "largep120"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub beta: Vec<f64>,
    pub sigma: f64,
    /// `p x p`, row-major.
    pub correlation: Vec<f64>,
    pub signal_set: VariableSubset,
    /// Extra named variable groups reported by benchmarks (e.g. weak/strong signals).
    pub groups: Vec<(String, VariableSubset)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScenarioOverrides {
    /// Weak-signal coefficient of `motivating`.
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub sigma: Option<f64>,
}

impl ScenarioSpec {
    fn assemble(name: &str, n: usize, beta: Vec<f64>, sigma: f64, correlation: Vec<f64>) -> Self {
        let p = beta.len();
        let signal_set =
            VariableSubset::new(beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect())
                .expect("increasing");
        Self { name: name.into(), n, p, beta, sigma, correlation, signal_set, groups: Vec::new() }
    }

    /// Symmetric, unit diagonal, positive definite, finite sizes and coefficients.
    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        if self.beta.len() != p || self.correlation.len() != p * p {
            return Err(Error::InvalidConfig(format!("scenario `{}` has inconsistent dimensions", self.name)));
        }
        if self.n < 2 || !(self.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("scenario `{}` needs n >= 2 and sigma >= 0", self.name)));
        }
        for i in 0..p {
            if self.correlation[i * p + i] != 1.0 {
                return Err(Error::NotPositiveDefinite);
            }
            for j in 0..i {
                if self.correlation[i * p + j] != self.correlation[j * p + i] {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        cholesky_factor(&self.correlation, p).map(|_| ())
    }

    pub fn truth(&self) -> Truth {
        Truth::from_signal(self.signal_set.indices(), self.p).expect("signal set within range")
    }
}

fn cholesky_factor(sigma: &[f64], p: usize) -> Result<Vec<f64>> {
    let mut l = sigma.to_vec();
    let reference: Vec<f64> = (0..p).map(|i| sigma[i * p + i]).collect();
    if !linalg::cholesky_in_place(&mut l, p, &reference, 1e-12) {
        return Err(Error::NotPositiveDefinite);
    }
    for i in 0..p {
        for j in i + 1..p {
            l[i * p + j] = 0.0;
        }
    }
    Ok(l)
}

/// `n` iid rows from `N(0, sigma)`, returned column-major (`n x p`).
///
/// Each row is `L z` with `L` the lower Cholesky factor and `z` drawn in
/// column order.
pub fn correlated_normal<R: Rng + ?Sized>(n: usize, sigma: &[f64], p: usize, rng: &mut R) -> Result<Vec<f64>> {
    if sigma.len() != p * p {
        return Err(Error::InvalidConfig("correlation matrix has the wrong size".into()));
    }
    let l = cholesky_factor(sigma, p)?;
    let mut x = vec![0.0; n * p];
    let mut z = vec![0.0; p];
    for i in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for j in 0..p {
            x[j * n + i] = (0..=j).map(|t| l[j * p + t] * z[t]).sum();
        }
    }
    Ok(x)
}

/// Draws predictors, then noise, and returns `y = X beta + sigma eps` with truth attached.
pub fn generate<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Dataset> {
    let (n, p) = (spec.n, spec.p);
    if spec.beta.len() != p {
        return Err(Error::InvalidConfig("beta length differs from p".into()));
    }
    let x = correlated_normal(n, &spec.correlation, p, rng)?;
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let eps: f64 = rng.sample(StandardNormal);
            (0..p).map(|j| x[j * n + i] * spec.beta[j]).sum::<f64>() + spec.sigma * eps
        })
        .collect();
    Dataset::from_column_major(n, p, x, y, Dataset::default_names(p))?.with_truth(spec.truth())
}

fn identity(p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        m[i * p + i] = 1.0;
    }
    m
}

fn fill_block(m: &mut [f64], p: usize, rows: core::ops::Range<usize>, cols: core::ops::Range<usize>, value: f64) {
    for i in rows {
        for j in cols.clone() {
            if i != j {
                m[i * p + j] = value;
            }
        }
    }
}

fn largep120_beta() -> Vec<f64> {
    LARGEP120_BETA
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().expect("frozen coefficient file is numeric"))
        .collect()
}

/// Returns the named built-in scenario with overrides applied.
pub fn builtin_scenario(name: &str, overrides: &ScenarioOverrides) -> Result<ScenarioSpec> {
    let mut spec = match name {
        "motivating" => {
            let p = 20;
            let alpha = overrides.alpha.unwrap_or(1.0);
            let mut beta = vec![0.0; p];
            beta[..3].copy_from_slice(&[alpha, 2.0, 3.0]);
            let mut corr = identity(p);
            fill_block(&mut corr, p, 0..3, 0..3, 0.7);
            let mut spec = ScenarioSpec::assemble(name, 100, beta, 3.0, corr);
            spec.groups = vec![
                ("weak".into(), VariableSubset::from_sorted(vec![0])),
                ("strong".into(), VariableSubset::from_sorted(vec![1, 2])),
            ];
            spec
        }
        "benchmark8" => {
            let p = 8;
            let beta = vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
            let mut corr = vec![0.0; p * p];
            for i in 0..p {
                for j in 0..p {
                    corr[i * p + j] = libm::pow(0.5, (i as f64 - j as f64).abs());
                }
            }
            ScenarioSpec::assemble(name, 50, beta, 1.0, corr)
        }
        "corr40" => {
            let p = 40;
            let mut beta = vec![0.0; p];
            beta[..6].copy_from_slice(&[3.0, 3.0, -2.0, 3.0, 3.0, -2.0]);
            let mut corr = identity(p);
            fill_block(&mut corr, p, 0..3, 0..3, 0.9);
            fill_block(&mut corr, p, 3..6, 3..6, 0.9);
            ScenarioSpec::assemble(name, 100, beta, 6.0, corr)
        }
        "largep120" => {
            let p = 120;
            let beta = largep120_beta();
            let mut corr = identity(p);
            for block in 0..4 {
                let r = block * 30..(block + 1) * 30;
                fill_block(&mut corr, p, r.clone(), r, 0.7);
            }
            fill_block(&mut corr, p, 30..60, 60..90, 0.2);
            fill_block(&mut corr, p, 60..90, 30..60, 0.2);
            ScenarioSpec::assemble(name, 50, beta, 50.0, corr)
        }
        other => return Err(Error::UnknownScenario(other.into())),
    };
    if let Some(n) = overrides.n {
        spec.n = n;
    }
    if let Some(sigma) = overrides.sigma {
        spec.sigma = sigma;
    }
    spec.validate()?;
    Ok(spec)
}
