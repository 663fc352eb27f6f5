//! Gaussian-process regression with a squared-exponential ARD kernel.
//!
//! Inputs are rescaled to the unit box and targets standardized before the
//! covariance is factorized; [`KernelParams`] are always reported in the
//! original target units. The prior mean is the constant training-target
//! mean. Hyperparameters maximize the log marginal likelihood through a
//! multi-start bounded coordinate search in log space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{mix_seed, Sobol};
use crate::error::{dim_check, Error, Result};
use crate::functional::DesignBox;

pub const JITTER_FLOOR: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-4;

const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-2, 1e1);
const SIGNAL_BOUNDS: (f64, f64) = (1e-4, 1e2);
const NOISE_BOUNDS: (f64, f64) = (1e-8, 1.0);
const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn new(signal_variance: f64, lengthscales: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return Err(Error::Domain(format!("signal variance must be positive, got {signal_variance}")));
        }
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Domain(format!("lengthscales must be positive, got {lengthscales:?}")));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::Domain(format!("noise variance must be nonnegative, got {noise_variance}")));
        }
        Ok(Self { signal_variance, lengthscales, noise_variance })
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            signal_variance: self.signal_variance * factor,
            lengthscales: self.lengthscales.clone(),
            noise_variance: self.noise_variance * factor,
        }
    }
}

/// Hyperparameter search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GpFitOptions {
    pub starts: usize,
    pub evals_per_start: usize,
    pub seed: u64,
    /// Fixed noise variance in target units; `Some(0.0)` leaves only the jitter floor.
    pub fixed_noise: Option<f64>,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        Self { starts: 8, evals_per_start: 200, seed: 0, fixed_noise: None }
    }
}

impl GpFitOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// A conditioned GP: training data plus the cached Cholesky factor and solve.
#[derive(Debug, Clone)]
pub struct GpModel {
    design_box: DesignBox,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    target_mean: f64,
    target_scale: f64,
    /// Standardized-unit hyperparameters used in the factorization.
    std_params: KernelParams,
    jitter: f64,
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    lml: f64,
}

/// Cholesky factorization of a symmetric matrix, escalating diagonal jitter
/// from [`JITTER_FLOOR`] by ×10 up to [`JITTER_MAX`]. Returns the factor and
/// the jitter that succeeded.
pub fn factorize_with_jitter(matrix: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = JITTER_FLOOR;
    let mut attempts = 0;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        attempts += 1;
        let mut m = matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(m) {
            if ch.l_dirty().diagonal().iter().all(|d| d.is_finite() && *d > 0.0) {
                return Ok((ch, jitter));
            }
        }
        jitter *= 10.0;
    }
    Err(Error::Conditioning { max_jitter: JITTER_MAX, attempts })
}

fn kernel_matrix(inputs: &[Vec<f64>], params: &KernelParams) -> DMatrix<f64> {
    let n = inputs.len();
    let inv_l2: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = params.signal_variance + params.noise_variance;
        for j in 0..i {
            let v = params.signal_variance * (-0.5 * sq_dist(&inputs[i], &inputs[j], &inv_l2)).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64], inv_l2: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(inv_l2)
        .map(|((x, y), w)| (x - y) * (x - y) * w)
        .sum()
}

/// Exact Gaussian log evidence of `targets` under a constant mean `mean`
/// and the given kernel, for inputs already in unit-box coordinates.
pub fn log_marginal_likelihood(unit_inputs: &[Vec<f64>], targets: &[f64], mean: f64, params: &KernelParams) -> Result<f64> {
    dim_check("targets vs inputs", unit_inputs.len(), targets.len())?;
    if let Some(x) = unit_inputs.first() {
        dim_check("lengthscales vs input dimension", x.len(), params.lengthscales.len())?;
    }
    let centered: Vec<f64> = targets.iter().map(|y| y - mean).collect();
    let (lml, _, _, _) = evidence(unit_inputs, &centered, params)?;
    Ok(lml)
}

type Evidence = (f64, DMatrix<f64>, DVector<f64>, f64);

fn evidence(inputs: &[Vec<f64>], centered: &[f64], params: &KernelParams) -> Result<Evidence> {
    let n = inputs.len();
    let k = kernel_matrix(inputs, params);
    let (chol, jitter) = factorize_with_jitter(&k)?;
    let y = DVector::from_column_slice(centered);
    let alpha = chol.solve(&y);
    let l = chol.unpack();
    let log_det: f64 = l.diagonal().iter().map(|d| d.ln()).sum();
    let lml = -0.5 * y.dot(&alpha) - log_det - 0.5 * n as f64 * LN_2PI;
    Ok((lml, l, alpha, jitter))
}

impl GpModel {
    /// Fits hyperparameters by maximizing the log marginal likelihood.
    pub fn fit(inputs: &[Vec<f64>], targets: &[f64], design_box: &DesignBox, opts: &GpFitOptions) -> Result<Self> {
        let (unit, centered, mean, scale) = prepare(inputs, targets, design_box)?;
        let d = design_box.dim();
        let fixed_noise = opts.fixed_noise.map(|v| v / (scale * scale));

        // log-space parameter vector: [ln ℓ_1..ℓ_d, ln s², ln σ²]
        let mut lo = vec![LENGTHSCALE_BOUNDS.0.ln(); d];
        let mut hi = vec![LENGTHSCALE_BOUNDS.1.ln(); d];
        lo.push(SIGNAL_BOUNDS.0.ln());
        hi.push(SIGNAL_BOUNDS.1.ln());
        if fixed_noise.is_none() {
            lo.push(NOISE_BOUNDS.0.ln());
            hi.push(NOISE_BOUNDS.1.ln());
        }
        let decode = |z: &[f64]| KernelParams {
            lengthscales: z[..d].iter().map(|v| v.exp()).collect(),
            signal_variance: z[d].exp(),
            noise_variance: fixed_noise.unwrap_or_else(|| z[d + 1].exp()),
        };
        let objective = |z: &[f64]| match evidence(&unit, &centered, &decode(z)) {
            Ok((lml, ..)) if lml.is_finite() => lml,
            _ => f64::NEG_INFINITY,
        };

        let mut sobol = Sobol::scrambled(lo.len(), opts.seed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..opts.starts.max(1) {
            let u = sobol.next_point();
            let start: Vec<f64> = u.iter().enumerate().map(|(i, v)| lo[i] + v * (hi[i] - lo[i])).collect();
            let (val, z) = coordinate_search(&objective, start, &lo, &hi, opts.evals_per_start.max(1));
            if val.is_finite() && best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, z));
            }
        }
        let (_, z) = best.ok_or(Error::Conditioning { max_jitter: JITTER_MAX, attempts: opts.starts })?;
        Self::condition_standardized(design_box, targets, unit, centered, mean, scale, decode(&z))
    }

    /// Conditions on the data with fixed hyperparameters (target units).
    pub fn condition(inputs: &[Vec<f64>], targets: &[f64], design_box: &DesignBox, params: &KernelParams) -> Result<Self> {
        dim_check("lengthscales vs box dimension", design_box.dim(), params.lengthscales.len())?;
        let (unit, centered, mean, scale) = prepare(inputs, targets, design_box)?;
        let std_params = params.scaled(1.0 / (scale * scale));
        Self::condition_standardized(design_box, targets, unit, centered, mean, scale, std_params)
    }

    #[allow(clippy::too_many_arguments)]
    fn condition_standardized(
        design_box: &DesignBox,
        targets: &[f64],
        unit: Vec<Vec<f64>>,
        centered: Vec<f64>,
        mean: f64,
        scale: f64,
        std_params: KernelParams,
    ) -> Result<Self> {
        let (lml_std, chol_l, alpha, jitter) = evidence(&unit, &centered, &std_params)?;
        // evidence in target units differs by the Jacobian of the standardization
        let lml = lml_std - targets.len() as f64 * scale.ln();
        Ok(Self {
            design_box: design_box.clone(),
            inputs: unit,
            targets: targets.to_vec(),
            target_mean: mean,
            target_scale: scale,
            std_params,
            jitter,
            chol_l,
            alpha,
            lml,
        })
    }

    /// Posterior mean and latent variance at `query` (box coordinates).
    pub fn predict(&self, query: &[f64]) -> Result<(f64, f64)> {
        self.design_box.check(query)?;
        Ok(self.predict_unit(&self.design_box.to_unit(query)))
    }

    /// Same as [`predict`](Self::predict) for a query already in unit-box coordinates.
    pub fn predict_unit(&self, u: &[f64]) -> (f64, f64) {
        let p = &self.std_params;
        let inv_l2: Vec<f64> = p.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        let kstar = DVector::from_iterator(
            self.inputs.len(),
            self.inputs.iter().map(|x| p.signal_variance * (-0.5 * sq_dist(x, u, &inv_l2)).exp()),
        );
        let mean_std = kstar.dot(&self.alpha);
        let v = self
            .chol_l
            .solve_lower_triangular(&kstar)
            .expect("Cholesky factor has a positive diagonal");
        let var_std = (p.signal_variance - v.dot(&v)).clamp(0.0, p.signal_variance + p.noise_variance);
        let s2 = self.target_scale * self.target_scale;
        (self.target_mean + self.target_scale * mean_std, var_std * s2)
    }

    /// Hyperparameters in target units.
    pub fn params(&self) -> KernelParams {
        self.std_params.scaled(self.target_scale * self.target_scale)
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn n_train(&self) -> usize {
        self.targets.len()
    }

    /// Diagonal jitter added in standardized units.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Jitter expressed as a variance in target units.
    pub fn jitter_variance(&self) -> f64 {
        self.jitter * self.target_scale * self.target_scale
    }

    pub fn design_box(&self) -> &DesignBox {
        &self.design_box
    }

    /// Log evidence at the fitted hyperparameters, in target units.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    pub fn summary(&self) -> GpSummary {
        GpSummary {
            params: self.params(),
            target_mean: self.target_mean,
            log_marginal_likelihood: self.lml,
            jitter: self.jitter,
            n_train: self.targets.len(),
        }
    }
}

/// Serializable hyperparameter record of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpSummary {
    pub params: KernelParams,
    pub target_mean: f64,
    pub log_marginal_likelihood: f64,
    pub jitter: f64,
    pub n_train: usize,
}

/// One independent GP per score column.
pub fn fit_scores(inputs: &[Vec<f64>], score_rows: &[Vec<f64>], design_box: &DesignBox, opts: &GpFitOptions) -> Result<Vec<GpModel>> {
    dim_check("score rows vs inputs", inputs.len(), score_rows.len())?;
    let m = score_rows.first().map_or(0, Vec::len);
    if m == 0 {
        return Err(Error::Dimension("score table has no columns".into()));
    }
    (0..m)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = score_rows.iter().map(|r| r[i]).collect();
            let o = GpFitOptions { seed: mix_seed(opts.seed, i as u64), ..opts.clone() };
            GpModel::fit(inputs, &col, design_box, &o)
        })
        .collect()
}

type Prepared = (Vec<Vec<f64>>, Vec<f64>, f64, f64);

fn prepare(inputs: &[Vec<f64>], targets: &[f64], design_box: &DesignBox) -> Result<Prepared> {
    dim_check("targets vs inputs", inputs.len(), targets.len())?;
    if inputs.is_empty() {
        return Err(Error::InsufficientData("GP needs at least one training point".into()));
    }
    if targets.iter().any(|y| !y.is_finite()) {
        return Err(Error::Domain("GP targets must be finite".into()));
    }
    for x in inputs {
        design_box.check(x)?;
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    let scale = if var > 1e-300 && var.sqrt() > 1e-12 * mean.abs() { var.sqrt() } else { 1.0 };
    let unit = inputs.iter().map(|x| design_box.to_unit(x)).collect();
    let centered = targets.iter().map(|y| (y - mean) / scale).collect();
    Ok((unit, centered, mean, scale))
}

/// Bounded compass search maximizing `f`; returns the best value and point.
fn coordinate_search<F: Fn(&[f64]) -> f64>(f: &F, start: Vec<f64>, lo: &[f64], hi: &[f64], max_evals: usize) -> (f64, Vec<f64>) {
    let mut x = start;
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.25 * (b - a)).collect();
    while evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evals >= max_evals {
                    break;
                }
                let mut y = x.clone();
                y[i] = (y[i] + dir * step[i]).clamp(lo[i], hi[i]);
                if y[i] == x[i] {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step.iter().all(|s| *s < 1e-4) {
                break;
            }
        }
    }
    (fx, x)
}
