//! Synthetic check that the acquisition tracks the true worst-case error as
//! the surrogate's mean error and spread vanish.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::error_model::ErrorMoments;
use crate::functional::FunctionalGrid;

use super::acquisition_value;

/// Analytic error surface `e(θ, λ) = s(θ)·(0.75 + 0.25 cos 2πλ)²` on a
/// dense 1-D design grid, where `s(θ) = min(1, 100|θ − θ*|)` spikes down
/// to zero at `θ*`, so `g(θ) = max_λ e = s(θ)`.
#[derive(Debug, Clone)]
pub struct ProbeSurface {
    pub designs: Vec<f64>,
    pub grid: FunctionalGrid,
    pub minimizer: f64,
}

impl ProbeSurface {
    /// `n_designs` equispaced designs in `[0, 1]`, `n_lambda` equispaced
    /// points in `[0, 1]` with unit-mass trapezoid weights.
    pub fn new(n_designs: usize, n_lambda: usize) -> Result<Self> {
        if n_designs < 2 {
            return Err(Error::Dimension("probe needs at least two designs".into()));
        }
        let designs: Vec<f64> = (0..n_designs).map(|i| i as f64 / (n_designs - 1) as f64).collect();
        let minimizer = designs[(n_designs * 37) / 100];
        let grid = FunctionalGrid::uniform(0.0, 1.0, n_lambda)?.normalized();
        Ok(Self { designs, grid, minimizer })
    }

    pub fn error(&self, theta: f64, lambda: f64) -> f64 {
        let s = (100.0 * (theta - self.minimizer).abs()).min(1.0);
        s * (0.75 + 0.25 * (2.0 * PI * lambda).cos()).powi(2)
    }

    pub fn worst_case(&self, theta: f64) -> f64 {
        self.grid.points().iter().map(|&l| self.error(theta, l)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Half the separation between the smallest and second-smallest `g`
    /// over the design grid.
    pub fn minimizer_gap(&self) -> f64 {
        let mut g: Vec<f64> = self.designs.iter().map(|&t| self.worst_case(t)).collect();
        g.sort_by(f64::total_cmp);
        0.5 * (g[1] - g[0])
    }

    /// Moments with `|μ_e − e| ≤ Δ` and `Σ_m w_m σ_e = U` at every design.
    pub fn synthetic_moments(&self, theta: f64, delta: f64, spread: f64) -> ErrorMoments {
        let pts = self.grid.points();
        let mu_e = pts.iter().map(|&l| self.error(theta, l) + delta * (7.0 * theta + 3.0 * l).cos()).collect();
        let shape: Vec<f64> = pts.iter().map(|&l| 1.0 + 0.5 * (5.0 * theta + 2.0 * PI * l).sin()).collect();
        let mass: f64 = shape.iter().zip(self.grid.weights()).map(|(s, w)| s * w).sum();
        let sd_e = shape.iter().map(|s| spread * s / mass).collect();
        ErrorMoments { mu_e, sd_e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub sup_gap: f64,
    pub bound: f64,
    pub argmin_alpha: usize,
    pub argmin_g: usize,
}

impl ProbeResult {
    pub fn within_bound(&self) -> bool {
        self.sup_gap <= self.bound + 1e-12
    }
}

/// `sup_θ |α(θ) − g(θ)|` for synthetic moments with mean error `delta` and
/// integrated spread `spread`, alongside the bound `delta + κ·spread`.
pub fn consistency_probe(surface: &ProbeSurface, delta: f64, spread: f64, kappa: f64) -> ProbeResult {
    let mut sup_gap = 0.0f64;
    let (mut best_a, mut best_g) = ((f64::INFINITY, 0), (f64::INFINITY, 0));
    for (i, &t) in surface.designs.iter().enumerate() {
        let alpha = acquisition_value(&surface.synthetic_moments(t, delta, spread), &surface.grid, kappa);
        let g = surface.worst_case(t);
        sup_gap = sup_gap.max((alpha - g).abs());
        if alpha < best_a.0 {
            best_a = (alpha, i);
        }
        if g < best_g.0 {
            best_g = (g, i);
        }
    }
    ProbeResult { sup_gap, bound: delta + kappa * spread, argmin_alpha: best_a.1, argmin_g: best_g.1 }
}
