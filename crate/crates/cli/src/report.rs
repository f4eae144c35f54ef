//! Selection reports (JSON + ranked text table) and tuning-curve CSV.
//!
//! Field names of the JSON report are frozen in `schema/selection_report.schema.json`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use st2e_core::{
    diversity, importance, ranks, strength, threshold_mean, EnsembleMatrix, ImportanceVector, TuningCurve,
};

use crate::benchmark::TuningRow;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule {
    /// Select variables whose importance is strictly above the mean importance.
    Mean,
    /// Rank only.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub data: String,
    pub response: String,
    pub standardize: bool,
    pub ensemble_size: usize,
    pub kappa: f64,
    pub kappa_tuned: bool,
    pub lambda: f64,
    pub max_sweeps: usize,
    pub threshold: ThresholdRule,
    pub sis_q: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub name: String,
    /// One-based position among the predictors, in input order.
    pub index: usize,
    pub importance: f64,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ensemble_size: usize,
    pub kappa: f64,
    pub lambda: f64,
    /// Absent when the ensemble has a single member.
    pub diversity: Option<f64>,
    pub strength: Option<f64>,
    pub null_objective: f64,
    pub master_seed: u64,
    pub tuning: Option<Vec<TuningRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub report_version: u32,
    pub config: ReportConfig,
    pub variables: Vec<VariableRecord>,
    pub diagnostics: Diagnostics,
    /// Shown in the text output only, so that JSON reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl SelectionReport {
    pub fn build(
        config: ReportConfig,
        names: &[String],
        ensemble: &EnsembleMatrix,
        tuning: Option<&TuningCurve>,
        wall_seconds: f64,
    ) -> Self {
        let r: ImportanceVector = importance(ensemble);
        let rank = ranks(&r);
        let selected = match config.threshold {
            ThresholdRule::Mean => Some(threshold_mean(&r)),
            ThresholdRule::None => None,
        };
        let variables = names
            .iter()
            .enumerate()
            .map(|(j, name)| VariableRecord {
                name: name.clone(),
                index: j + 1,
                importance: r.values()[j],
                rank: rank[j],
                selected: selected.as_ref().map(|s| s.contains(j)),
            })
            .collect();
        let diagnostics = Diagnostics {
            ensemble_size: ensemble.size(),
            kappa: config.kappa,
            lambda: config.lambda,
            diversity: diversity(ensemble).ok(),
            strength: strength(ensemble).ok(),
            null_objective: ensemble.null_objective(),
            master_seed: config.seed,
            tuning: tuning.map(tuning_rows),
        };
        Self { report_version: REPORT_VERSION, config, variables, diagnostics, wall_seconds }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n")
    }

    /// Variables ordered by rank.
    pub fn ranked(&self) -> Vec<&VariableRecord> {
        let mut v: Vec<&VariableRecord> = self.variables.iter().collect();
        v.sort_by_key(|r| r.rank);
        v
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let d = &self.diagnostics;
        let _ = writeln!(
            out,
            "B={} kappa={:.4}{} lambda={} seed={}",
            d.ensemble_size,
            d.kappa,
            if self.config.kappa_tuned { " (tuned)" } else { "" },
            d.lambda,
            d.master_seed
        );
        let fmt_opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "diversity={} strength={} null_objective={:.4}",
            fmt_opt(d.diversity),
            fmt_opt(d.strength),
            d.null_objective
        );
        let _ = writeln!(out, "{:>4}  {:<16} {:>10}  {}", "rank", "variable", "importance", "selected");
        for v in self.ranked() {
            let sel = match v.selected {
                Some(true) => "*",
                Some(false) => "",
                None => "-",
            };
            let _ = writeln!(out, "{:>4}  {:<16} {:>10.4}  {}", v.rank, v.name, v.importance, sel);
        }
        let _ = writeln!(out, "elapsed {:.2}s", self.wall_seconds);
        out
    }
}

pub fn tuning_rows(curve: &TuningCurve) -> Vec<TuningRow> {
    curve.points.iter().map(|p| TuningRow { kappa: p.kappa, diversity: p.diversity, strength: p.strength }).collect()
}

/// `kappa,diversity,strength` with one row per grid point.
pub fn tuning_csv(curve: &TuningCurve) -> String {
    let mut out = String::from("kappa,diversity,strength\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.kappa, p.diversity, p.strength);
    }
    out
}
