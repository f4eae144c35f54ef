//! Datasets, candidate subsets, least-squares fits and the AIC objective.
//!
//! Every model carries an intercept that is never selectable. The objective
//! is `n ln(RSS / n) + 2 (d + 1)` with `d` the number of selected predictors;
//! Gaussian constants are dropped because only differences and ratios of
//! objective values are ever consumed. An exact fit would send the logarithm
//! to minus infinity, so RSS is clamped below at `1e-12 * |y|^2`.
//!
//! Variable indices are zero-based throughout the crate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;

/// Multiplier on `|y|^2` giving the smallest RSS fed to the logarithm.
pub const RSS_FLOOR_FACTOR: f64 = 1e-12;

/// Ground-truth labels of a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    signal: VariableSubset,
    noise: VariableSubset,
}

impl Truth {
    /// Labels `signal` as the true variables and everything else in `0..p` as noise.
    pub fn from_signal(signal: &[usize], p: usize) -> Result<Self> {
        let signal = VariableSubset::new(signal.to_vec())?;
        signal.check_bounds(p)?;
        let noise = VariableSubset::from_sorted((0..p).filter(|j| !signal.contains(*j)).collect());
        Ok(Self { signal, noise })
    }

    pub fn signal(&self) -> &VariableSubset {
        &self.signal
    }

    pub fn noise(&self) -> &VariableSubset {
        &self.noise
    }

    fn is_partition_of(&self, p: usize) -> bool {
        self.signal.len() + self.noise.len() == p
            && self.signal.iter().chain(self.noise.iter()).all(|j| j < p)
            && self.signal.iter().all(|j| !self.noise.contains(j))
    }
}

/// An ordered set of predictor columns. The empty subset is the null model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VariableSubset(Vec<usize>);

impl VariableSubset {
    /// Sorts `indices`; rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset(format!("duplicate index in {indices:?}")));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(p: usize) -> Self {
        Self((0..p).collect())
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &[usize]) -> Self {
        let mut v: Vec<usize> = self.0.iter().chain(other.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn difference(&self, other: &[usize]) -> Self {
        Self(self.0.iter().copied().filter(|j| !other.contains(j)).collect())
    }

    /// Maps positions of a restricted problem back to original column numbers.
    pub fn map_through(&self, columns: &[usize]) -> Self {
        let mut v: Vec<usize> = self.0.iter().map(|&i| columns[i]).collect();
        v.sort_unstable();
        Self(v)
    }

    pub(crate) fn check_bounds(&self, p: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= p => Err(Error::InvalidSubset(format!(
                "index {last} out of range for {p} variables"
            ))),
            _ => Ok(()),
        }
    }
}

/// Predictors, response, names and optional ground truth.
///
/// Predictors are stored column-major: column `j` is `x[j*n..(j+1)*n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    names: Vec<String>,
    truth: Option<Truth>,
}

impl Dataset {
    pub fn from_columns(columns: Vec<Vec<f64>>, response: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = response.len();
        let p = columns.len();
        if let Some((j, _)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "column {j} has a different length than the response ({n})"
            )));
        }
        let x = columns.into_iter().flatten().collect();
        Self::from_column_major(n, p, x, response, names)
    }

    pub fn from_column_major(
        n: usize,
        p: usize,
        x: Vec<f64>,
        response: Vec<f64>,
        names: Vec<String>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need n >= 2 observations, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidDataset("need at least one predictor".into()));
        }
        if x.len() != n * p || response.len() != n {
            return Err(Error::InvalidDataset("predictor/response shape mismatch".into()));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite predictor at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite response at row {i}")));
        }
        if names.len() != p {
            return Err(Error::InvalidDataset(format!("expected {p} names, got {}", names.len())));
        }
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDataset("variable names must be distinct".into()));
        }
        Ok(Self { n, p, x, y: response, names, truth: None })
    }

    pub fn with_truth(mut self, truth: Truth) -> Result<Self> {
        if !truth.is_partition_of(self.p) {
            return Err(Error::InvalidDataset("truth labels do not partition the variables".into()));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    /// `x1, x2, ..., xp`.
    pub fn default_names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("x{j}")).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn truth(&self) -> Option<&Truth> {
        self.truth.as_ref()
    }

    /// New dataset made of the given rows (repeats allowed), names and truth kept.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let n = rows.len();
        let mut x = Vec::with_capacity(n * self.p);
        for j in 0..self.p {
            let col = self.column(j);
            x.extend(rows.iter().map(|&i| col[i]));
        }
        Dataset {
            n,
            p: self.p,
            x,
            y: rows.iter().map(|&i| self.y[i]).collect(),
            names: self.names.clone(),
            truth: self.truth.clone(),
        }
    }

    /// New dataset restricted to `columns` (in that order); truth labels are carried over.
    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(self.n * columns.len());
        for &j in columns {
            x.extend_from_slice(self.column(j));
        }
        let truth = self.truth.as_ref().map(|t| {
            let (signal, noise): (Vec<usize>, Vec<usize>) =
                (0..columns.len()).partition(|&i| t.signal.contains(columns[i]));
            Truth { signal: VariableSubset(signal), noise: VariableSubset(noise) }
        });
        Dataset {
            n: self.n,
            p: columns.len(),
            x,
            y: self.y.clone(),
            names: columns.iter().map(|&j| self.names[j].clone()).collect(),
            truth,
        }
    }

    /// Smallest RSS fed to the logarithm in the objective.
    pub fn rss_floor(&self) -> f64 {
        rss_floor_for(&self.y)
    }
}

fn rss_floor_for(y: &[f64]) -> f64 {
    (RSS_FLOOR_FACTOR * y.iter().map(|v| v * v).sum::<f64>()).max(f64::MIN_POSITIVE)
}

/// `n ln(max(rss, floor) / n) + 2 (d + 1)`.
pub fn aic_from_rss(n: usize, rss: f64, d: usize, floor: f64) -> f64 {
    let nf = n as f64;
    nf * libm::log(rss.max(floor) / nf) + 2.0 * (d as f64 + 1.0)
}

/// Least-squares fit of an intercept plus the subset's columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Intercept first, then one coefficient per subset member in index order.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub objective: f64,
}

pub fn fit_ols(dataset: &Dataset, subset: &VariableSubset) -> Result<FitResult> {
    subset.check_bounds(dataset.p)?;
    let n = dataset.n;
    let k = subset.len() + 1;
    if k > n {
        return Err(Error::TooManyVariables { vars: subset.len(), n });
    }
    let mut design = vec![1.0; n * k];
    for (c, j) in subset.iter().enumerate() {
        design[(c + 1) * n..(c + 2) * n].copy_from_slice(dataset.column(j));
    }
    let beta = linalg::qr_least_squares(&design, n, k, &dataset.y).ok_or(Error::RankDeficient)?;
    let rss = (0..n)
        .map(|i| {
            let fitted: f64 = (0..k).map(|c| design[c * n + i] * beta[c]).sum();
            let r = dataset.y[i] - fitted;
            r * r
        })
        .sum::<f64>();
    let objective = aic_from_rss(n, rss, subset.len(), dataset.rss_floor());
    Ok(FitResult { coefficients: beta, rss, objective })
}

pub fn aic(dataset: &Dataset, subset: &VariableSubset) -> Result<f64> {
    fit_ols(dataset, subset).map(|f| f.objective)
}

/// Objective of the intercept-only model.
pub fn null_objective(dataset: &Dataset) -> Result<f64> {
    aic(dataset, &VariableSubset::empty())
}

/// Fast AIC evaluation from centered cross-products.
///
/// Holds `C = Xc^T Xc`, `s = Xc^T yc` and `yc^T yc` for the centered data,
/// which gives the intercept model's RSS for any subset from a Cholesky
/// factor of `C_SS`. The search evaluates thousands of candidate subsets per
/// path, and this keeps each one independent of `n`. A subset is singular
/// when a Cholesky pivot drops to `1e-10` of the variable's own centered sum
/// of squares, which is stricter than the QR rank test in [`fit_ols`].
#[derive(Debug, Clone)]
pub struct AicScorer {
    n: usize,
    p: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    syy: f64,
    rss_floor: f64,
}

impl AicScorer {
    pub fn new(dataset: &Dataset) -> Self {
        let (n, p) = (dataset.n, dataset.p);
        let nf = n as f64;
        let centered: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let col = dataset.column(j);
                let m = col.iter().sum::<f64>() / nf;
                col.iter().map(|v| v - m).collect()
            })
            .collect();
        let ym = dataset.y.iter().sum::<f64>() / nf;
        let yc: Vec<f64> = dataset.y.iter().map(|v| v - ym).collect();
        let mut gram = vec![0.0; p * p];
        for a in 0..p {
            for b in a..p {
                let v: f64 = centered[a].iter().zip(&centered[b]).map(|(u, w)| u * w).sum();
                gram[a * p + b] = v;
                gram[b * p + a] = v;
            }
        }
        let xty = centered.iter().map(|c| c.iter().zip(&yc).map(|(u, w)| u * w).sum()).collect();
        let syy = yc.iter().map(|v| v * v).sum();
        Self { n, p, gram, xty, syy, rss_floor: dataset.rss_floor() }
    }

    /// Scorer for the sub-problem made of `columns` (position `i` maps to `columns[i]`).
    pub fn restrict(&self, columns: &[usize]) -> Self {
        let q = columns.len();
        let mut gram = Vec::with_capacity(q * q);
        for &a in columns {
            gram.extend(columns.iter().map(|&b| self.gram[a * self.p + b]));
        }
        Self {
            n: self.n,
            p: q,
            gram,
            xty: columns.iter().map(|&a| self.xty[a]).collect(),
            syy: self.syy,
            rss_floor: self.rss_floor,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn objective_from_rss(&self, rss: f64, d: usize) -> f64 {
        aic_from_rss(self.n, rss, d, self.rss_floor)
    }

    pub fn null_objective(&self) -> f64 {
        self.objective_from_rss(self.syy, 0)
    }

    #[inline]
    fn diag(&self, j: usize) -> f64 {
        self.gram[j * self.p + j]
    }

    fn factor(&self, subset: &[usize]) -> Option<Vec<f64>> {
        let h = subset.len();
        let mut l = Vec::with_capacity(h * h);
        for &a in subset {
            l.extend(subset.iter().map(|&b| self.gram[a * self.p + b]));
        }
        let reference: Vec<f64> = subset.iter().map(|&j| self.diag(j)).collect();
        linalg::cholesky_in_place(&mut l, h, &reference, linalg::GRAM_PIVOT_TOL).then_some(l)
    }

    /// RSS of the intercept model on `subset`, or `None` if it is singular or too large.
    pub fn rss(&self, subset: &[usize]) -> Option<f64> {
        let h = subset.len();
        if h + 1 > self.n {
            return None;
        }
        if h == 0 {
            return Some(self.syy);
        }
        let l = self.factor(subset)?;
        let mut z: Vec<f64> = subset.iter().map(|&j| self.xty[j]).collect();
        linalg::forward_substitute(&l, h, &mut z);
        Some((self.syy - z.iter().map(|v| v * v).sum::<f64>()).max(0.0))
    }

    pub fn objective(&self, subset: &[usize]) -> Option<f64> {
        self.rss(subset).map(|rss| self.objective_from_rss(rss, subset.len()))
    }

    pub(crate) fn forward_context(&self, base: &[usize]) -> Option<ForwardContext<'_>> {
        let h = base.len();
        let l = if h == 0 { Vec::new() } else { self.factor(base)? };
        let mut zcols = vec![0.0; self.p * h];
        for j in 0..self.p {
            let col = &mut zcols[j * h..(j + 1) * h];
            for (t, &b) in base.iter().enumerate() {
                col[t] = self.gram[b * self.p + j];
            }
            linalg::forward_substitute(&l, h, col);
        }
        let mut z: Vec<f64> = base.iter().map(|&j| self.xty[j]).collect();
        linalg::forward_substitute(&l, h, &mut z);
        let rss = (self.syy - z.iter().map(|v| v * v).sum::<f64>()).max(0.0);
        Some(ForwardContext { scorer: self, h, zcols, z, rss })
    }

    pub(crate) fn backward_context(&self, base: &[usize]) -> Option<BackwardContext<'_>> {
        let h = base.len();
        let l = self.factor(base)?;
        let pinv = linalg::inverse_from_cholesky(&l, h);
        let mut z: Vec<f64> = base.iter().map(|&j| self.xty[j]).collect();
        linalg::forward_substitute(&l, h, &mut z);
        let rss = (self.syy - z.iter().map(|v| v * v).sum::<f64>()).max(0.0);
        linalg::backward_substitute_transposed(&l, h, &mut z);
        Some(BackwardContext { scorer: self, base: base.to_vec(), pinv, beta: z, rss })
    }
}

/// Current model factored once so that each added group costs `O(g^2 h + g^3)`.
pub(crate) struct ForwardContext<'a> {
    scorer: &'a AicScorer,
    h: usize,
    /// `L^{-1} C_{S,j}` for every column `j`, stored contiguously per column.
    zcols: Vec<f64>,
    z: Vec<f64>,
    rss: f64,
}

impl ForwardContext<'_> {
    pub(crate) fn base_rss(&self) -> f64 {
        self.rss
    }

    /// RSS after adding `group` (disjoint from the base), `None` when singular or too large.
    pub(crate) fn rss_with(&self, group: &[usize], scratch: &mut Vec<f64>) -> Option<f64> {
        let g = group.len();
        let s = self.scorer;
        if self.h + g + 1 > s.n {
            return None;
        }
        let h = self.h;
        scratch.clear();
        scratch.resize(g * g + 2 * g, 0.0);
        let (m, rest) = scratch.split_at_mut(g * g);
        let (w, reference) = rest.split_at_mut(g);
        for (a, &ja) in group.iter().enumerate() {
            let za = &self.zcols[ja * h..(ja + 1) * h];
            for (b, &jb) in group.iter().enumerate().take(a + 1) {
                let zb = &self.zcols[jb * h..(jb + 1) * h];
                let dot: f64 = za.iter().zip(zb).map(|(u, v)| u * v).sum();
                m[a * g + b] = s.gram[ja * s.p + jb] - dot;
            }
            w[a] = s.xty[ja] - za.iter().zip(&self.z).map(|(u, v)| u * v).sum::<f64>();
            reference[a] = s.diag(ja);
        }
        if !linalg::cholesky_in_place(m, g, reference, linalg::GRAM_PIVOT_TOL) {
            return None;
        }
        linalg::forward_substitute(m, g, w);
        Some((self.rss - w.iter().map(|v| v * v).sum::<f64>()).max(0.0))
    }
}

/// Current model's inverse cross-product and coefficients, for group deletions.
pub(crate) struct BackwardContext<'a> {
    scorer: &'a AicScorer,
    base: Vec<usize>,
    pinv: Vec<f64>,
    beta: Vec<f64>,
    rss: f64,
}

impl BackwardContext<'_> {
    pub(crate) fn base_rss(&self) -> f64 {
        self.rss
    }

    /// RSS after deleting the base members at `positions` (sorted, within `0..h`).
    pub(crate) fn rss_without(&self, positions: &[usize], scratch: &mut Vec<f64>) -> Option<f64> {
        let g = positions.len();
        let h = self.base.len();
        if g == h {
            return Some(self.scorer.syy);
        }
        scratch.clear();
        scratch.resize(g * g + 2 * g, 0.0);
        let (a, rest) = scratch.split_at_mut(g * g);
        let (b, reference) = rest.split_at_mut(g);
        for (r, &pr) in positions.iter().enumerate() {
            for (c, &pc) in positions.iter().enumerate() {
                a[r * g + c] = self.pinv[pr * h + pc];
            }
            b[r] = self.beta[pr];
            reference[r] = self.pinv[pr * h + pr];
        }
        if linalg::cholesky_in_place(a, g, reference, 1e-14) {
            linalg::forward_substitute(a, g, b);
            Some(self.rss + b.iter().map(|v| v * v).sum::<f64>())
        } else {
            // ill-conditioned inverse block; refactor the reduced model directly
            let kept: Vec<usize> = (0..h)
                .filter(|i| positions.binary_search(i).is_err())
                .map(|i| self.base[i])
                .collect();
            self.scorer.rss(&kept)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn tiny(x: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
        let p = x.len();
        Dataset::from_columns(x, y, Dataset::default_names(p)).unwrap()
    }

    #[test]
    fn exact_line_has_zero_rss() {
        let ds = tiny(vec![vec![0.0, 1.0, 2.0]], vec![0.0, 1.0, 2.0]);
        let fit = fit_ols(&ds, &VariableSubset::full(1)).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
        assert!(fit.objective.is_finite());
    }

    #[test]
    fn null_model_is_the_mean() {
        let ds = tiny(vec![vec![0.0, 1.0, 2.0]], vec![1.0, 2.0, 2.0]);
        let fit = fit_ols(&ds, &VariableSubset::empty()).unwrap();
        assert!((fit.coefficients[0] - 5.0 / 3.0).abs() < 1e-12);
        assert!((fit.rss - 2.0 / 3.0).abs() < 1e-12);
        // 3 ln((2/3)/3) + 2
        let expected = 3.0 * libm::log(2.0 / 9.0) + 2.0;
        assert!((fit.objective - expected).abs() < 1e-12);
        assert!((expected - (-2.5123)).abs() < 1e-4);
        assert_eq!(null_objective(&ds).unwrap(), aic(&ds, &VariableSubset::empty()).unwrap());
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let a = vec![0.3, 1.0, -2.0, 4.0, 0.5];
        let ds = tiny(vec![a.clone(), a], vec![1.0, 2.0, 0.0, 3.0, 1.0]);
        assert_eq!(fit_ols(&ds, &VariableSubset::full(2)), Err(Error::RankDeficient));
        let scorer = AicScorer::new(&ds);
        assert!(scorer.rss(&[0, 1]).is_none());
    }

    #[test]
    fn too_many_variables() {
        let ds = tiny(vec![vec![0.0, 1.0], vec![1.0, 3.0]], vec![1.0, 2.0]);
        assert_eq!(
            fit_ols(&ds, &VariableSubset::full(2)),
            Err(Error::TooManyVariables { vars: 2, n: 2 })
        );
    }

    #[test]
    fn constant_response_stays_finite() {
        let ds = tiny(vec![vec![0.0, 1.0, 2.0, 5.0]], vec![2.0; 4]);
        let f0 = null_objective(&ds).unwrap();
        assert!(f0.is_finite());
        assert!(aic(&ds, &VariableSubset::full(1)).unwrap().is_finite());
    }

    #[test]
    fn dataset_validation() {
        let err = Dataset::from_columns(vec![vec![1.0, f64::NAN]], vec![1.0, 2.0], vec!["a".to_string()]);
        assert!(matches!(err, Err(Error::InvalidDataset(_))));
        let dup = Dataset::from_columns(
            vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            vec![1.0, 2.0],
            vec!["a".to_string(), "a".to_string()],
        );
        assert!(matches!(dup, Err(Error::InvalidDataset(_))));
        let one = Dataset::from_columns(vec![vec![1.0]], vec![1.0], vec!["a".to_string()]);
        assert!(matches!(one, Err(Error::InvalidDataset(_))));
        assert!(VariableSubset::new(vec![2, 1, 2]).is_err());
        assert_eq!(VariableSubset::new(vec![3, 1]).unwrap().indices(), &[1, 3]);
    }

    #[test]
    fn truth_must_partition() {
        let t = Truth::from_signal(&[0, 2], 4).unwrap();
        assert_eq!(t.noise().indices(), &[1, 3]);
        assert!(Truth::from_signal(&[5], 4).is_err());
    }
}
