//! Worst-case-error acquisition, adaptive κ schedule, candidate pools and
//! the sequential optimization loop.

mod probe;
mod run;

pub use probe::{consistency_probe, ProbeResult, ProbeSurface};
pub use run::{pool_seed, run, seed_designs, Surrogate};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{mix_seed, Sobol};
use crate::error::{dim_check, Error, Result};
use crate::error_model::ErrorMoments;
use crate::fpca::DEFAULT_EXPLAINED_THRESHOLD;
use crate::functional::{DesignBox, FunctionalGrid};

/// Tunables of the optimizer. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    /// Seed designs; `None` means `max(10, 2d)`.
    pub n0: Option<usize>,
    /// Total oracle evaluations, seeds included.
    pub budget: usize,
    pub kappa0: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub decay: f64,
    pub boost: f64,
    pub patience: usize,
    pub pool_global: usize,
    pub pool_local: usize,
    pub top_q: f64,
    pub local_frac: f64,
    pub exclusion_radius: f64,
    pub exploit_every: usize,
    pub refit_every: usize,
    /// Relative reconstruction error of a new curve that forces an FPCA refit.
    pub drift_tolerance: f64,
    pub explained_threshold: f64,
    pub gp_starts: usize,
    pub gp_evals: usize,
    pub seed: u64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            n0: None,
            budget: 30,
            kappa0: 2.0,
            kappa_min: 0.1,
            kappa_max: 10.0,
            decay: 0.9,
            boost: 1.5,
            patience: 5,
            pool_global: 512,
            pool_local: 128,
            top_q: 0.25,
            local_frac: 0.05,
            exclusion_radius: 1e-3,
            exploit_every: 5,
            refit_every: 10,
            drift_tolerance: 0.05,
            explained_threshold: DEFAULT_EXPLAINED_THRESHOLD,
            gp_starts: 8,
            gp_evals: 200,
            seed: 0,
        }
    }
}

impl AcquisitionConfig {
    pub fn n0_for(&self, dim: usize) -> usize {
        self.n0.unwrap_or((2 * dim).max(10))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |k: &str, why: &str| Err(Error::Config(format!("{k}: {why}")));
        let n0 = self.n0_for(dim);
        if n0 < 2 {
            return bad("n0", "must be at least 2");
        }
        if self.budget < n0 {
            return bad("budget", &format!("must be at least n0 = {n0}, got {}", self.budget));
        }
        if !(self.kappa_min >= 0.0 && self.kappa_min <= self.kappa_max) {
            return bad("kappa_min", "need 0 <= kappa_min <= kappa_max");
        }
        if !(self.kappa0 >= self.kappa_min && self.kappa0 <= self.kappa_max) {
            return bad("kappa0", "must lie in [kappa_min, kappa_max]");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad("decay", "must lie in (0, 1]");
        }
        if !(self.boost >= 1.0) {
            return bad("boost", "must be >= 1");
        }
        if self.patience == 0 {
            return bad("patience", "must be positive");
        }
        if self.pool_global == 0 {
            return bad("pool_global", "must be positive");
        }
        if !(self.top_q > 0.0 && self.top_q <= 1.0) {
            return bad("top_q", "must lie in (0, 1]");
        }
        if !(self.local_frac >= 0.0) {
            return bad("local_frac", "must be >= 0");
        }
        if !(self.exclusion_radius >= 0.0) {
            return bad("exclusion_radius", "must be >= 0");
        }
        if self.refit_every == 0 {
            return bad("refit_every", "must be positive");
        }
        if !(self.explained_threshold > 0.0 && self.explained_threshold <= 1.0) {
            return bad("explained_threshold", "must lie in (0, 1]");
        }
        if self.gp_starts == 0 || self.gp_evals == 0 {
            return bad("gp_starts", "GP search needs at least one start and one evaluation");
        }
        Ok(())
    }

    /// κ used at sequential iteration `iter` (1-based): zero on exploitation steps.
    pub fn is_exploit(&self, iter: usize) -> bool {
        self.exploit_every > 0 && iter.is_multiple_of(self.exploit_every)
    }
}

/// `max_m μ_e[m] − κ Σ_m w_m σ_e[m]`.
pub fn acquisition_value(err: &ErrorMoments, grid: &FunctionalGrid, kappa: f64) -> f64 {
    let spread: f64 = err.sd_e.iter().zip(grid.weights()).map(|(s, w)| s * w).sum();
    err.worst_mean() - kappa * spread
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaState {
    pub kappa: f64,
    pub stagnation_count: usize,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSchedule {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub decay: f64,
    pub boost: f64,
    pub patience: usize,
}

impl From<&AcquisitionConfig> for KappaSchedule {
    fn from(c: &AcquisitionConfig) -> Self {
        Self { kappa_min: c.kappa_min, kappa_max: c.kappa_max, decay: c.decay, boost: c.boost, patience: c.patience }
    }
}

impl KappaState {
    pub fn new(kappa: f64, best_so_far: f64) -> Self {
        Self { kappa, stagnation_count: 0, best_so_far }
    }
}

/// Decays κ on improvement, boosts it after `patience` stalls in a row.
pub fn update_kappa(state: KappaState, new_g: f64, sched: &KappaSchedule) -> KappaState {
    let mut s = state;
    if new_g < s.best_so_far - 1e-12 {
        s.best_so_far = new_g;
        s.kappa = (s.kappa * sched.decay).max(sched.kappa_min);
        s.stagnation_count = 0;
    } else {
        s.stagnation_count += 1;
        if s.stagnation_count >= sched.patience {
            s.kappa = (s.kappa * sched.boost).min(sched.kappa_max);
            s.stagnation_count = 0;
        }
    }
    s.kappa = s.kappa.clamp(sched.kappa_min, sched.kappa_max);
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub global_candidates: Vec<Vec<f64>>,
    pub local_candidates: Vec<Vec<f64>>,
    pub exclusion_radius: f64,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.global_candidates.len() + self.local_candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global candidates first, then local ones.
    pub fn candidates(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.global_candidates.iter().chain(&self.local_candidates)
    }
}

/// Pool sizes and local spread for [`build_pool`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSpec {
    pub global: usize,
    pub local: usize,
    pub local_frac: f64,
    pub exclusion_radius: f64,
}

impl From<&AcquisitionConfig> for PoolSpec {
    fn from(c: &AcquisitionConfig) -> Self {
        Self { global: c.pool_global, local: c.pool_local, local_frac: c.local_frac, exclusion_radius: c.exclusion_radius }
    }
}

/// Scrambled Sobol global points for a given pool seed, mapped into the box.
pub fn global_pool(design_box: &DesignBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut sobol = Sobol::scrambled(design_box.dim(), seed);
    (0..n).map(|_| design_box.from_unit(&sobol.next_point())).collect()
}

fn too_close(design_box: &DesignBox, x: &[f64], evaluated_unit: &[Vec<f64>], radius: f64) -> bool {
    if radius <= 0.0 {
        return false;
    }
    let u = design_box.to_unit(x);
    let r2 = radius * radius;
    evaluated_unit
        .iter()
        .any(|e| e.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < r2)
}

/// Global Sobol candidates plus Gaussian perturbations of the incumbent,
/// minus anything within the exclusion radius (unit-box metric) of an
/// evaluated design.
pub fn build_pool(design_box: &DesignBox, incumbent: &[f64], evaluated: &[Vec<f64>], seed: u64, spec: &PoolSpec) -> Result<CandidatePool> {
    dim_check("incumbent", design_box.dim(), incumbent.len())?;
    design_box.check(incumbent)?;
    let evaluated_unit: Vec<Vec<f64>> = evaluated.iter().map(|e| design_box.to_unit(e)).collect();
    let keep = |x: &Vec<f64>| !too_close(design_box, x, &evaluated_unit, spec.exclusion_radius);

    let global: Vec<Vec<f64>> = global_pool(design_box, spec.global, seed).into_iter().filter(keep).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x10CA1));
    let local: Vec<Vec<f64>> = (0..spec.local)
        .map(|_| {
            let mut x: Vec<f64> = incumbent
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    c + z * spec.local_frac * design_box.width(i)
                })
                .collect();
            design_box.clip(&mut x);
            x
        })
        .filter(keep)
        .collect();
    if global.is_empty() && local.is_empty() {
        return Err(Error::PoolExhausted { radius: spec.exclusion_radius });
    }
    Ok(CandidatePool { global_candidates: global, local_candidates: local, exclusion_radius: spec.exclusion_radius })
}

/// [`build_pool`], halving the exclusion radius until the pool is nonempty.
pub fn build_pool_relaxed(design_box: &DesignBox, incumbent: &[f64], evaluated: &[Vec<f64>], seed: u64, spec: &PoolSpec) -> Result<CandidatePool> {
    let mut s = *spec;
    loop {
        match build_pool(design_box, incumbent, evaluated, seed, &s) {
            Err(Error::PoolExhausted { radius }) if radius > 0.0 => {
                log::warn!("candidate pool exhausted at radius {radius}; halving");
                s.exclusion_radius = if radius < 1e-12 { 0.0 } else { radius * 0.5 };
            }
            other => return other,
        }
    }
}

/// Outcome of [`select_next`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub theta: Vec<f64>,
    pub acquisition: f64,
    pub worst_mean: f64,
}

/// Ranks candidates by `max_m μ_e`, keeps the best `top_q` fraction, and
/// returns the acquisition minimizer among them. Ties go to the lower index.
pub fn select_next<F>(candidates: &[Vec<f64>], moments: F, grid: &FunctionalGrid, kappa: f64, top_q: f64) -> Result<Selection>
where
    F: Fn(&[f64]) -> Result<ErrorMoments> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::PoolExhausted { radius: 0.0 });
    }
    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|c| moments(c).map(|m| (m.worst_mean(), acquisition_value(&m, grid, kappa))))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0).then(a.cmp(&b)));
    let keep = ((top_q * candidates.len() as f64).ceil() as usize).clamp(1, candidates.len());
    let best = order[..keep]
        .iter()
        .copied()
        .min_by(|&a, &b| scored[a].1.total_cmp(&scored[b].1).then(a.cmp(&b)))
        .expect("nonempty");
    Ok(Selection { index: best, theta: candidates[best].clone(), acquisition: scored[best].1, worst_mean: scored[best].0 })
}
