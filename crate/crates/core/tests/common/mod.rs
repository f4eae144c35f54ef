#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use st2e_core::{stream_from_seed, Dataset, VariableSubset};

/// Gaussian design with `y = X beta + noise`, all drawn from `seed`.
pub fn gaussian_dataset(seed: u64, n: usize, beta: &[f64], noise: f64) -> Dataset {
    let p = beta.len();
    let mut rng = stream_from_seed(seed);
    let cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y = (0..n)
        .map(|i| {
            let signal: f64 = (0..p).map(|j| beta[j] * cols[j][i]).sum();
            signal + noise * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Dataset::from_columns(cols, y, Dataset::default_names(p)).unwrap()
}

/// Random dataset with `p` predictors, the first half carrying signal.
pub fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let beta: Vec<f64> = (0..p).map(|j| if j < p.div_ceil(2) { 1.0 + j as f64 * 0.25 } else { 0.0 }).collect();
    gaussian_dataset(seed, n, &beta, 1.5)
}

/// Dense solve by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for t in c..k {
                a[r][t] -= f * a[c][t];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|t| a[r][t] * x[t]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Residual sum of squares from the normal equations of `[1, X_S]`.
pub fn normal_equations_rss(ds: &Dataset, subset: &[usize]) -> f64 {
    let n = ds.n();
    let design: Vec<Vec<f64>> = std::iter::once(vec![1.0; n])
        .chain(subset.iter().map(|&j| ds.column(j).to_vec()))
        .collect();
    let k = design.len();
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (0..n).map(|i| design[a][i] * design[b][i]).sum()).collect())
        .collect();
    let rhs: Vec<f64> = (0..k).map(|a| (0..n).map(|i| design[a][i] * ds.response()[i]).sum()).collect();
    let coef = solve(gram, rhs);
    (0..n)
        .map(|i| {
            let fit: f64 = (0..k).map(|a| coef[a] * design[a][i]).sum();
            (ds.response()[i] - fit).powi(2)
        })
        .sum()
}

/// Independent AIC: `n ln(rss / n) + 2 (d + 1)`.
pub fn aic_oracle(ds: &Dataset, subset: &[usize]) -> f64 {
    let n = ds.n() as f64;
    n * (normal_equations_rss(ds, subset) / n).ln() + 2.0 * (subset.len() as f64 + 1.0)
}

/// Every subset of `0..p`, as sorted index lists.
pub fn all_subsets(p: usize) -> Vec<Vec<usize>> {
    (0u32..1 << p).map(|mask| (0..p).filter(|&j| mask >> j & 1 == 1).collect()).collect()
}

/// Every `g`-subset of `pool`.
pub fn combinations(pool: &[usize], g: usize) -> Vec<Vec<usize>> {
    all_subsets(pool.len())
        .into_iter()
        .filter(|s| s.len() == g)
        .map(|s| s.into_iter().map(|i| pool[i]).collect())
        .collect()
}

pub fn subset(v: &[usize]) -> VariableSubset {
    VariableSubset::new(v.to_vec()).unwrap()
}
