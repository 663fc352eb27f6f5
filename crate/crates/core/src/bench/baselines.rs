//! Non-adaptive space filling and GP-on-g with Expected Improvement.

use std::time::Instant;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::acquisition::{build_pool_relaxed, pool_seed, seed_designs, AcquisitionConfig, PoolSpec};
use crate::design::{mix_seed, Sobol};
use crate::error::{Error, Result};
use crate::functional::{worst_case, Target};
use crate::gp::{GpFitOptions, GpModel};
use crate::oracles::Oracle;

use super::metrics::regret_curve;
use super::record::RunRecord;

const SALT_SFD: u64 = 0x5FD;
const SALT_GPG: u64 = 0x6060;

/// Offset inside the log transform of `g`.
pub const LOG_OFFSET: f64 = 1e-12;

fn evaluate_g(oracle: &dyn Oracle, target: &Target, theta: &[f64]) -> f64 {
    match oracle.evaluate(theta).and_then(|r| worst_case(&r, target)) {
        Ok(g) => g,
        Err(e) => {
            log::warn!("{}: evaluation failed at {theta:?}: {e}; skipping", oracle.name());
            f64::INFINITY
        }
    }
}

fn record(method: &str, oracle: &dyn Oracle, seed: u64, n0: usize, designs: Vec<Vec<f64>>, g: Vec<f64>, wall: Vec<f64>) -> Result<RunRecord> {
    let best = (0..g.len()).min_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap_or(0);
    Ok(RunRecord {
        method: method.into(),
        oracle: oracle.name().to_string(),
        seed,
        n0,
        regret: regret_curve(&g, 0.0)?,
        incumbent: designs[best].clone(),
        designs,
        g_values: g,
        recommended: None,
        trace: Vec::new(),
        hyperparameters: Vec::new(),
        wall_clock: wall,
    })
}

/// Shared Latin-hypercube seeds followed by a scrambled Sobol continuation.
pub fn sfd_baseline(oracle: &dyn Oracle, target: &Target, budget: usize, n0: usize, seed: u64) -> Result<RunRecord> {
    if budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let b = oracle.design_box();
    let mut designs = seed_designs(b, n0.min(budget), seed);
    let mut sobol = Sobol::scrambled(b.dim(), mix_seed(seed, SALT_SFD));
    while designs.len() < budget {
        designs.push(b.from_unit(&sobol.next_point()));
    }
    let mut g = Vec::with_capacity(budget);
    let mut wall = Vec::with_capacity(budget);
    for x in &designs {
        let t = Instant::now();
        g.push(evaluate_g(oracle, target, x));
        wall.push(t.elapsed().as_secs_f64());
    }
    record("sfd", oracle, seed, n0.min(budget), designs, g, wall)
}

/// `EI = (f_best − μ)Φ(z) + σφ(z)`, `z = (f_best − μ)/σ`; `max(f_best − μ, 0)` at `σ = 0`.
pub fn expected_improvement(mu: f64, sigma: f64, f_best: f64) -> f64 {
    let diff = f_best - mu;
    if !(sigma > 0.0) {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    let n = Normal::standard();
    (diff * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

/// GP on `log(g + 1e-12)`, next design = EI maximizer over the shared pool.
/// Seeds and pool seeds match [`crate::acquisition::run`] for the same `config.seed`.
pub fn gp_on_g_baseline(oracle: &dyn Oracle, target: &Target, config: &AcquisitionConfig) -> Result<RunRecord> {
    let b = oracle.design_box();
    config.validate(b.dim())?;
    let n0 = config.n0_for(b.dim());
    let seed = config.seed;
    let pool_spec = PoolSpec::from(config);

    let mut designs = Vec::with_capacity(config.budget);
    let mut g = Vec::with_capacity(config.budget);
    let mut wall = Vec::with_capacity(config.budget);
    for x in seed_designs(b, n0, seed) {
        let t = Instant::now();
        g.push(evaluate_g(oracle, target, &x));
        wall.push(t.elapsed().as_secs_f64());
        designs.push(x);
    }

    for iter in 1..=config.budget - n0 {
        let ok: Vec<usize> = (0..g.len()).filter(|&i| g[i].is_finite()).collect();
        if ok.len() < 2 {
            return Err(Error::InsufficientData(format!("{}: fewer than two successful evaluations", oracle.name())));
        }
        let xs: Vec<Vec<f64>> = ok.iter().map(|&i| designs[i].clone()).collect();
        let ys: Vec<f64> = ok.iter().map(|&i| (g[i] + LOG_OFFSET).ln()).collect();
        let opts = GpFitOptions {
            starts: config.gp_starts,
            evals_per_start: config.gp_evals,
            seed: mix_seed(seed, SALT_GPG + iter as u64),
            fixed_noise: None,
        };
        let gp = GpModel::fit(&xs, &ys, b, &opts)?;
        let f_best = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let incumbent = xs[ys.iter().enumerate().min_by(|a, c| a.1.total_cmp(c.1)).expect("nonempty").0].clone();

        let pool = build_pool_relaxed(b, &incumbent, &designs, pool_seed(seed, iter), &pool_spec)?;
        let preds: Vec<(f64, f64)> = pool.candidates().map(|c| gp.predict(c)).collect::<Result<_>>()?;
        let candidates: Vec<&Vec<f64>> = pool.candidates().collect();
        let pick = if preds.iter().all(|(_, v)| *v <= 0.0) {
            argmin_by(&preds, |p| p.0)
        } else {
            argmin_by(&preds, |p| -expected_improvement(p.0, p.1.sqrt(), f_best))
        };
        let x = candidates[pick].clone();
        let t = Instant::now();
        g.push(evaluate_g(oracle, target, &x));
        wall.push(t.elapsed().as_secs_f64());
        designs.push(x);
    }
    record("gp_on_g", oracle, seed, n0, designs, g, wall)
}

fn argmin_by<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    (0..items.len()).min_by(|&a, &b| key(&items[a]).total_cmp(&key(&items[b])).then(a.cmp(&b))).expect("nonempty")
}
