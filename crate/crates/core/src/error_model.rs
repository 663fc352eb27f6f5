//! Moments of the deviation process `h = f − f*` and of the squared error
//! `e = h²` under Gaussian score posteriors.
//!
//! With independent scores `c_i ~ N(m_i, v_i)` and a diagonal residual
//! variance `σ_r²`, each grid point carries `h ~ N(μ_h, σ_h²)`. Then
//! `e / σ_h²` is noncentral chi-square with one degree of freedom and
//! noncentrality `(μ_h/σ_h)²`, so `E[e] = μ_h² + σ_h²` and
//! `Var[e] = 2σ_h⁴ + 4μ_h²σ_h²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};
use crate::fpca::FpcaModel;
use crate::functional::Target;
use crate::gp::GpModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationMoments {
    pub mu_h: Vec<f64>,
    pub var_h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMoments {
    pub mu_e: Vec<f64>,
    pub sd_e: Vec<f64>,
}

impl ErrorMoments {
    /// `max_m μ_e`, the exploitation part of the acquisition.
    pub fn worst_mean(&self) -> f64 {
        self.mu_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl DeviationMoments {
    pub fn new(mu_h: Vec<f64>, var_h: Vec<f64>) -> Result<Self> {
        dim_check("deviation variance", mu_h.len(), var_h.len())?;
        if var_h.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("deviation variance must be nonnegative".into()));
        }
        if mu_h.iter().any(|m| !m.is_finite()) {
            return Err(Error::Domain("deviation mean must be finite".into()));
        }
        Ok(Self { mu_h, var_h })
    }
}

/// Deviation moments at a design from per-score posteriors `(mean_i, var_i)`.
///
/// Returns the moments and the number of multiply-adds spent combining the
/// scores, which is `2·T·M` for the diagonal posterior.
pub fn deviation_moments_from_posteriors(
    fpca: &FpcaModel,
    posteriors: &[(f64, f64)],
    target: &Target,
) -> Result<(DeviationMoments, usize)> {
    let t = fpca.grid().len();
    dim_check("target length", t, target.len())?;
    dim_check("score posteriors", fpca.n_components(), posteriors.len())?;
    let mut mu_h: Vec<f64> = fpca
        .mean_curve()
        .iter()
        .zip(target.values())
        .map(|(m, f)| m - f)
        .collect();
    let mut var_h = fpca.residual_variance().to_vec();
    let mut ops = 0;
    for (phi, &(mean, var)) in fpca.eigenfunctions().iter().zip(posteriors) {
        for ((mu, v), p) in mu_h.iter_mut().zip(var_h.iter_mut()).zip(phi) {
            *mu += p * mean;
            *v += p * p * var;
        }
        ops += 2 * t;
    }
    Ok((DeviationMoments { mu_h, var_h }, ops))
}

/// Deviation moments at `theta` from the FPCA model and the score surrogates.
pub fn deviation_moments(fpca: &FpcaModel, score_models: &[GpModel], target: &Target, theta: &[f64]) -> Result<DeviationMoments> {
    dim_check("score models", fpca.n_components(), score_models.len())?;
    let posteriors = score_models
        .iter()
        .map(|gp| gp.predict(theta))
        .collect::<Result<Vec<_>>>()?;
    Ok(deviation_moments_from_posteriors(fpca, &posteriors, target)?.0)
}

/// Elementwise `μ_e = μ_h² + σ_h²`, `σ_e = sqrt(2σ_h⁴ + 4μ_h²σ_h²)`.
pub fn error_moments(dev: &DeviationMoments) -> ErrorMoments {
    let (mu_e, sd_e) = dev
        .mu_h
        .iter()
        .zip(&dev.var_h)
        .map(|(&m, &v)| {
            let m2 = m * m;
            (m2 + v, (2.0 * v * v + 4.0 * m2 * v).sqrt())
        })
        .unzip();
    ErrorMoments { mu_e, sd_e }
}

/// Density of `e = Z²`, `Z ~ N(μ_h, σ_h²)`, at `y > 0`.
pub fn error_pdf(y: f64, mu_h: f64, sigma_h: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("error density needs y > 0, got {y}")));
    }
    if !(sigma_h > 0.0) {
        return Err(Error::Domain(format!("error density needs sigma_h > 0, got {sigma_h}")));
    }
    let s2 = sigma_h * sigma_h;
    let x = (mu_h * y.sqrt() / s2).abs();
    // ln cosh x = x + ln(1 + e^{-2x}) - ln 2
    let ln_cosh = x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
    let ln_pdf = -(sigma_h * (2.0 * PI * y).sqrt()).ln() - (y + mu_h * mu_h) / (2.0 * s2) + ln_cosh;
    Ok(ln_pdf.exp())
}

/// `Cov(e(λ), e(λ')) = 2K_h² + 4μ_h μ_h' K_h`.
pub fn error_covariance(mu: f64, mu_p: f64, k_h: f64) -> f64 {
    2.0 * k_h * k_h + 4.0 * mu * mu_p * k_h
}

/// Cross-grid covariance of the deviation process under diagonal score
/// posterior variances and diagonal residual variance.
pub fn deviation_covariance(fpca: &FpcaModel, score_vars: &[f64], m: usize, m_p: usize) -> Result<f64> {
    dim_check("score variances", fpca.n_components(), score_vars.len())?;
    let mut k: f64 = fpca
        .eigenfunctions()
        .iter()
        .zip(score_vars)
        .map(|(phi, v)| phi[m] * phi[m_p] * v)
        .sum();
    if m == m_p {
        k += fpca.residual_variance()[m];
    }
    Ok(k)
}
