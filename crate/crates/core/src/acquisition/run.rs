use std::time::Instant;

use crate::bench::metrics::regret_curve;
use crate::bench::record::{IterationTrace, RunRecord};
use crate::design::{latin_hypercube, mix_seed};
use crate::error::{Error, Result};
use crate::error_model::{deviation_moments, error_moments, ErrorMoments};
use crate::fpca::FpcaModel;
use crate::functional::{worst_case, DesignBox, FunctionalResponse, Target};
use crate::gp::{fit_scores, GpFitOptions, GpModel};
use crate::oracles::Oracle;

use super::{build_pool_relaxed, select_next, update_kappa, AcquisitionConfig, KappaSchedule, KappaState, PoolSpec};

const SALT_SEEDS: u64 = 0x5EED;
const SALT_POOL: u64 = 0x9001;
const SALT_GP: u64 = 0x6A55;

/// Latin-hypercube seed designs shared by every method for a given seed.
pub fn seed_designs(design_box: &DesignBox, n0: usize, seed: u64) -> Vec<Vec<f64>> {
    latin_hypercube(n0, design_box.dim(), mix_seed(seed, SALT_SEEDS))
        .iter()
        .map(|u| design_box.from_unit(u))
        .collect()
}

/// Candidate-pool seed for sequential iteration `iter`, shared across methods.
pub fn pool_seed(seed: u64, iter: usize) -> u64 {
    mix_seed(mix_seed(seed, SALT_POOL), iter as u64)
}

/// FPCA basis plus one GP per retained score.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub fpca: FpcaModel,
    pub score_models: Vec<GpModel>,
    pub target: Target,
}

impl Surrogate {
    /// Fits score GPs on `curves` projected onto `fpca`.
    pub fn fit(fpca: FpcaModel, designs: &[Vec<f64>], curves: &[FunctionalResponse], design_box: &DesignBox, target: &Target, opts: &GpFitOptions) -> Result<Self> {
        let scores = fpca.score_table(curves)?;
        let score_models = fit_scores(designs, &scores.rows, design_box, opts)?;
        Ok(Self { fpca, score_models, target: target.clone() })
    }

    pub fn moments(&self, theta: &[f64]) -> Result<ErrorMoments> {
        Ok(error_moments(&deviation_moments(&self.fpca, &self.score_models, &self.target, theta)?))
    }
}

struct History {
    designs: Vec<Vec<f64>>,
    g: Vec<f64>,
    ok_designs: Vec<Vec<f64>>,
    ok_curves: Vec<FunctionalResponse>,
    wall: Vec<f64>,
}

impl History {
    fn evaluate(&mut self, oracle: &dyn Oracle, target: &Target, theta: Vec<f64>) -> Option<FunctionalResponse> {
        let start = Instant::now();
        let outcome = oracle.evaluate(&theta).and_then(|r| worst_case(&r, target).map(|g| (r, g)));
        self.wall.push(start.elapsed().as_secs_f64());
        self.designs.push(theta.clone());
        match outcome {
            Ok((resp, g)) => {
                self.g.push(g);
                self.ok_designs.push(theta);
                self.ok_curves.push(resp.clone());
                Some(resp)
            }
            Err(e) => {
                log::warn!("{}: evaluation failed at {theta:?}: {e}; skipping", oracle.name());
                self.g.push(f64::INFINITY);
                None
            }
        }
    }

    fn incumbent(&self) -> Vec<f64> {
        let i = (0..self.g.len()).min_by(|&a, &b| self.g[a].total_cmp(&self.g[b])).unwrap_or(0);
        self.designs[i].clone()
    }
}

/// Sequential MM-FBO on `oracle` against `target`.
pub fn run(oracle: &dyn Oracle, target: &Target, config: &AcquisitionConfig) -> Result<RunRecord> {
    let design_box = oracle.design_box();
    let grid = oracle.grid();
    let d = design_box.dim();
    config.validate(d)?;
    let n0 = config.n0_for(d);
    let seed = config.seed;

    let mut h = History { designs: Vec::new(), g: Vec::new(), ok_designs: Vec::new(), ok_curves: Vec::new(), wall: Vec::new() };
    for x in seed_designs(design_box, n0, seed) {
        h.evaluate(oracle, target, x);
    }
    if h.ok_curves.len() < 2 {
        return Err(Error::InsufficientData(format!("{}: fewer than two successful seed evaluations", oracle.name())));
    }

    let sched = KappaSchedule::from(config);
    let pool_spec = PoolSpec::from(config);
    let mut kappa = KappaState::new(config.kappa0, h.g.iter().cloned().fold(f64::INFINITY, f64::min));
    let mut basis: Option<FpcaModel> = None;
    let mut drifted = false;
    let mut trace = Vec::new();

    for iter in 1..=config.budget - n0 {
        let refit = basis.is_none() || drifted || (iter - 1) % config.refit_every == 0;
        if refit {
            basis = Some(FpcaModel::fit(&h.ok_curves, grid, config.explained_threshold)?);
        }
        let fpca = basis.clone().expect("basis fitted above");
        let opts = gp_options(config, mix_seed(seed, SALT_GP + iter as u64));
        let surrogate = Surrogate::fit(fpca, &h.ok_designs, &h.ok_curves, design_box, target, &opts)?;

        let pool = build_pool_relaxed(design_box, &h.incumbent(), &h.designs, pool_seed(seed, iter), &pool_spec)?;
        let candidates: Vec<Vec<f64>> = pool.candidates().cloned().collect();
        let exploit = config.is_exploit(iter);
        let k = if exploit { 0.0 } else { kappa.kappa };
        let sel = select_next(&candidates, |x| surrogate.moments(x), grid, k, config.top_q)?;
        trace.push(IterationTrace {
            iteration: iter,
            kappa: k,
            exploit,
            n_components: surrogate.fpca.n_components(),
            fpca_refit: refit,
            pool_size: candidates.len(),
            exclusion_radius: pool.exclusion_radius,
            acquisition: sel.acquisition,
            predicted_worst: sel.worst_mean,
        });

        drifted = match h.evaluate(oracle, target, sel.theta) {
            Some(resp) => surrogate.fpca.relative_reconstruction_error(&resp)? > config.drift_tolerance,
            None => false,
        };
        kappa = update_kappa(kappa, *h.g.last().expect("just evaluated"), &sched);
    }

    let (recommended, hyperparameters) = match recommend(&h, grid, design_box, target, config) {
        Ok((r, s)) => (Some(r), s.score_models.iter().map(GpModel::summary).collect()),
        Err(e) => {
            log::warn!("{}: no model-based recommendation: {e}", oracle.name());
            (None, Vec::new())
        }
    };
    Ok(RunRecord {
        method: "mmfbo".into(),
        oracle: oracle.name().to_string(),
        seed,
        n0,
        regret: regret_curve(&h.g, 0.0)?,
        incumbent: h.incumbent(),
        designs: h.designs,
        g_values: h.g,
        recommended,
        trace,
        hyperparameters,
        wall_clock: h.wall,
    })
}

fn gp_options(config: &AcquisitionConfig, seed: u64) -> GpFitOptions {
    GpFitOptions { starts: config.gp_starts, evals_per_start: config.gp_evals, seed, fixed_noise: None }
}

/// Evaluated design minimizing the predicted `max_m μ_e` under a final fit.
fn recommend(h: &History, grid: &crate::functional::FunctionalGrid, design_box: &DesignBox, target: &Target, config: &AcquisitionConfig) -> Result<(Vec<f64>, Surrogate)> {
    let fpca = FpcaModel::fit(&h.ok_curves, grid, config.explained_threshold)?;
    let opts = gp_options(config, mix_seed(config.seed, SALT_GP));
    let s = Surrogate::fit(fpca, &h.ok_designs, &h.ok_curves, design_box, target, &opts)?;
    let mut best = (f64::INFINITY, 0);
    for (i, x) in h.ok_designs.iter().enumerate() {
        let w = s.moments(x)?.worst_mean();
        if w < best.0 {
            best = (w, i);
        }
    }
    Ok((h.ok_designs[best.1].clone(), s))
}
