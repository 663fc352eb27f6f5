//! Regret, AUOC and time-to-threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `r_k = min_{j≤k} g_j − g*`.
pub fn regret_curve(g_values: &[f64], g_star: f64) -> Result<Vec<f64>> {
    if g_values.is_empty() {
        return Err(Error::Dimension("regret curve needs at least one value".into()));
    }
    let mut best = f64::INFINITY;
    Ok(g_values
        .iter()
        .map(|&g| {
            best = best.min(g);
            (best - g_star).max(0.0)
        })
        .collect())
}

/// `r_k / r_0`; an all-zero curve when the start is already optimal.
pub fn normalized_regret(regret: &[f64]) -> Vec<f64> {
    match regret.first() {
        Some(&r0) if r0 > 0.0 => regret.iter().map(|r| r / r0).collect(),
        _ => vec![0.0; regret.len()],
    }
}

/// Mean of `r_k / r_0` over the curve, where `r_0` is its first entry.
/// A zero start is a degenerate success and scores 0.
pub fn auoc(regret: &[f64]) -> f64 {
    if regret.is_empty() {
        return 0.0;
    }
    normalized_regret(regret).iter().sum::<f64>() / regret.len() as f64
}

/// First 1-based index with `r_k ≤ ε`.
pub fn time_to_threshold(regret: &[f64], epsilon: f64) -> Option<usize> {
    regret.iter().position(|&r| r <= epsilon).map(|i| i + 1)
}

/// Success fraction and median hitting index, as reported in TT tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtAggregate {
    pub epsilon: f64,
    pub success_fraction: f64,
    pub median_iterations: Option<f64>,
    pub successes: usize,
    pub runs: usize,
}

pub fn aggregate_tt(epsilon: f64, hits: &[Option<usize>]) -> TtAggregate {
    let mut ok: Vec<f64> = hits.iter().flatten().map(|&k| k as f64).collect();
    ok.sort_by(f64::total_cmp);
    TtAggregate {
        epsilon,
        success_fraction: if hits.is_empty() { 0.0 } else { ok.len() as f64 / hits.len() as f64 },
        median_iterations: if ok.is_empty() { None } else { Some(quantile_sorted(&ok, 0.5)) },
        successes: ok.len(),
        runs: hits.len(),
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Minimum, quartiles, median and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            min: quantile_sorted(&v, 0.0),
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: quantile_sorted(&v, 1.0),
        }
    }
}
