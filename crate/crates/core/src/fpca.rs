//! Functional principal component analysis on a common grid.
//!
//! The weighted covariance operator is discretized as `W^{1/2} S W^{1/2}`,
//! where `S` is the sample covariance of the curves and `W` the diagonal
//! quadrature-weight matrix. Back-transforming its eigenvectors by
//! `W^{-1/2}` yields eigenfunctions orthonormal under `Σ_m w_m φ_i φ_j`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};
use crate::functional::{FunctionalGrid, FunctionalResponse};

pub const DEFAULT_EXPLAINED_THRESHOLD: f64 = 0.99;
pub const DEFAULT_CORRELATION_WARNING: f64 = 0.3;

/// Fitted mean curve, eigenfunctions, and residual variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaModel {
    grid: FunctionalGrid,
    mean_curve: Vec<f64>,
    /// Column-major `T × M`: `eigenfunctions[i]` is `φ_i` on the grid.
    eigenfunctions: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    residual_variance: Vec<f64>,
    explained_ratio: f64,
}

/// Score matrix with any cross-correlation warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    /// `N × M`, row per curve.
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl ScoreTable {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

impl FpcaModel {
    /// Fits on `curves`, keeping the smallest number of components whose
    /// cumulative eigenvalue fraction reaches `explained_threshold`.
    pub fn fit(curves: &[FunctionalResponse], grid: &FunctionalGrid, explained_threshold: f64) -> Result<Self> {
        let n = curves.len();
        let t = grid.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!("FPCA needs at least 2 curves, got {n}")));
        }
        if !(explained_threshold > 0.0 && explained_threshold <= 1.0) {
            return Err(Error::Domain(format!("explained threshold must lie in (0, 1], got {explained_threshold}")));
        }
        for c in curves {
            dim_check("curve length", t, c.len())?;
        }
        if grid.weights().iter().any(|w| *w <= 0.0) {
            return Err(Error::Domain("FPCA needs strictly positive grid weights".into()));
        }

        let mut mean = vec![0.0; t];
        for c in curves {
            for (m, v) in mean.iter_mut().zip(c.values()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        // rows: weighted, centered curves
        let centered = DMatrix::from_fn(n, t, |j, m| (curves[j].values()[m] - mean[m]) * sqrt_w[m]);
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..t).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let all_values: Vec<f64> = order
            .iter()
            .map(|&k| {
                let v = eig.eigenvalues[k];
                if v < 0.0 { 0.0 } else { v }
            })
            .collect();
        let total: f64 = all_values.iter().sum();

        let max_m = (n - 1).min(t).max(1);
        let m = if total <= 0.0 {
            1
        } else {
            let mut cum = 0.0;
            let mut m = max_m;
            for (i, v) in all_values.iter().enumerate().take(max_m) {
                cum += v;
                if cum / total >= explained_threshold * (1.0 - 1e-12) {
                    m = i + 1;
                    break;
                }
            }
            m
        };

        let eigenfunctions: Vec<Vec<f64>> = order[..m]
            .iter()
            .map(|&k| {
                let mut phi: Vec<f64> = (0..t).map(|r| eig.eigenvectors[(r, k)] / sqrt_w[r]).collect();
                let pivot = phi
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                if phi[pivot] < 0.0 {
                    phi.iter_mut().for_each(|v| *v = -*v);
                }
                phi
            })
            .collect();
        let eigenvalues = all_values[..m].to_vec();
        let explained_ratio = if total > 0.0 { eigenvalues.iter().sum::<f64>() / total } else { 1.0 };

        let mut model = Self {
            grid: grid.clone(),
            mean_curve: mean,
            eigenfunctions,
            eigenvalues,
            residual_variance: vec![0.0; t],
            explained_ratio: explained_ratio.min(1.0),
        };

        let mut resid_var = vec![0.0; t];
        for c in curves {
            let r = model.residual(c)?;
            for (acc, v) in resid_var.iter_mut().zip(&r) {
                *acc += v * v;
            }
        }
        model.residual_variance = resid_var.into_iter().map(|v| v / (n as f64 - 1.0)).collect();
        Ok(model)
    }

    pub fn grid(&self) -> &FunctionalGrid {
        &self.grid
    }

    pub fn mean_curve(&self) -> &[f64] {
        &self.mean_curve
    }

    pub fn n_components(&self) -> usize {
        self.eigenfunctions.len()
    }

    pub fn eigenfunction(&self, i: usize) -> &[f64] {
        &self.eigenfunctions[i]
    }

    pub fn eigenfunctions(&self) -> &[Vec<f64>] {
        &self.eigenfunctions
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn residual_variance(&self) -> &[f64] {
        &self.residual_variance
    }

    pub fn explained_ratio(&self) -> f64 {
        self.explained_ratio
    }

    /// `c_i = Σ_m w_m (f(λ_m) − f̄(λ_m)) φ_i(λ_m)`.
    pub fn scores(&self, curve: &FunctionalResponse) -> Result<Vec<f64>> {
        dim_check("curve length", self.grid.len(), curve.len())?;
        let centered: Vec<f64> = curve
            .values()
            .iter()
            .zip(&self.mean_curve)
            .map(|(v, m)| v - m)
            .collect();
        Ok(self
            .eigenfunctions
            .iter()
            .map(|phi| self.grid.inner(&centered, phi))
            .collect())
    }

    /// `f̄ + Φ c` on the grid.
    pub fn reconstruct(&self, scores: &[f64]) -> Result<FunctionalResponse> {
        dim_check("score vector", self.n_components(), scores.len())?;
        let mut out = self.mean_curve.clone();
        for (phi, c) in self.eigenfunctions.iter().zip(scores) {
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
        FunctionalResponse::from_values(out)
    }

    /// Curve minus its rank-M reconstruction.
    pub fn residual(&self, curve: &FunctionalResponse) -> Result<Vec<f64>> {
        let rec = self.reconstruct(&self.scores(curve)?)?;
        Ok(curve.values().iter().zip(rec.values()).map(|(a, b)| a - b).collect())
    }

    /// Weighted-L² residual norm relative to the centered curve norm.
    pub fn relative_reconstruction_error(&self, curve: &FunctionalResponse) -> Result<f64> {
        let r = self.residual(curve)?;
        let centered: Vec<f64> = curve
            .values()
            .iter()
            .zip(&self.mean_curve)
            .map(|(v, m)| v - m)
            .collect();
        let num = self.grid.inner(&r, &r).sqrt();
        let den = self.grid.inner(&centered, &centered).sqrt();
        Ok(if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 })
    }

    pub fn score_table(&self, curves: &[FunctionalResponse]) -> Result<ScoreTable> {
        self.score_table_with_threshold(curves, DEFAULT_CORRELATION_WARNING)
    }

    /// Scores for every curve; pairs of score columns whose sample
    /// correlation exceeds `corr_threshold` in magnitude are reported.
    pub fn score_table_with_threshold(&self, curves: &[FunctionalResponse], corr_threshold: f64) -> Result<ScoreTable> {
        let rows = curves.iter().map(|c| self.scores(c)).collect::<Result<Vec<_>>>()?;
        let mut warnings = Vec::new();
        let m = self.n_components();
        if rows.len() >= 3 {
            let cols: Vec<Vec<f64>> = (0..m).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
            for i in 0..m {
                for j in (i + 1)..m {
                    if let Some(r) = correlation(&cols[i], &cols[j]) {
                        if r.abs() > corr_threshold {
                            warnings.push(format!(
                                "scores {i} and {j} have sample correlation {r:.3} (threshold {corr_threshold})"
                            ));
                        }
                    }
                }
            }
        }
        Ok(ScoreTable { rows, warnings })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        let t = model.grid.len();
        dim_check("mean curve", t, model.mean_curve.len())?;
        dim_check("residual variance", t, model.residual_variance.len())?;
        dim_check("eigenvalue count", model.eigenfunctions.len(), model.eigenvalues.len())?;
        for phi in &model.eigenfunctions {
            dim_check("eigenfunction length", t, phi.len())?;
        }
        Ok(model)
    }
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let den = (saa * sbb).sqrt();
    (den > 1e-300).then(|| sab / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> FunctionalGrid {
        FunctionalGrid::uniform(0.0, 1.0, 41).unwrap()
    }

    /// Orthonormal modes under the trapezoid weights, built by weighted Gram-Schmidt.
    fn modes(grid: &FunctionalGrid, k: usize) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for i in 0..k {
            let mut v: Vec<f64> = grid
                .points()
                .iter()
                .map(|x| (std::f64::consts::PI * (i + 1) as f64 * x).sin() + 0.3 * x)
                .collect();
            for u in &out {
                let p = grid.inner(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
            let nrm = grid.inner(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
            out.push(v);
        }
        out
    }

    fn curve(vals: Vec<f64>) -> FunctionalResponse {
        FunctionalResponse::from_values(vals).unwrap()
    }

    #[test]
    fn identical_curves_give_zero_spectrum() {
        let g = grid();
        let c = curve(g.points().iter().map(|x| x * x).collect());
        let model = FpcaModel::fit(&vec![c.clone(); 5], &g, 0.99).unwrap();
        assert_eq!(model.n_components(), 1);
        assert!(model.eigenvalues().iter().all(|v| v.abs() < 1e-12));
        assert!(model.residual_variance().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rank_one_sample() {
        let g = grid();
        let phi = &modes(&g, 1)[0];
        let mean: Vec<f64> = g.points().iter().map(|x| 1.0 + x).collect();
        let a = 0.7;
        let n = 6;
        let curves: Vec<_> = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { a } else { -a };
                curve(mean.iter().zip(phi).map(|(m, p)| m + s * p).collect())
            })
            .collect();
        let model = FpcaModel::fit(&curves, &g, 0.99).unwrap();
        assert_eq!(model.n_components(), 1);
        let expected = a * a * n as f64 / (n as f64 - 1.0);
        assert!((model.eigenvalues()[0] - expected).abs() < 1e-10);
        let dot = g.inner(model.eigenfunction(0), phi);
        assert!((dot.abs() - 1.0).abs() < 1e-10);
        for (m, want) in model.mean_curve().iter().zip(&mean) {
            assert!((m - want).abs() < 1e-12);
        }
    }

    #[test]
    fn three_mode_synthesis_is_exact() {
        let g = grid();
        let basis = modes(&g, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean: Vec<f64> = g.points().iter().map(|x| (2.0 * x).cos()).collect();
        let curves: Vec<_> = (0..12)
            .map(|_| {
                let c: Vec<f64> = (0..3).map(|i| rng.random_range(-1.0..1.0) * (3.0 - i as f64)).collect();
                let mut v = mean.clone();
                for (ci, phi) in c.iter().zip(&basis) {
                    v.iter_mut().zip(phi).for_each(|(a, p)| *a += ci * p);
                }
                curve(v)
            })
            .collect();
        let model = FpcaModel::fit(&curves, &g, 0.999).unwrap();
        assert_eq!(model.n_components(), 3);
        for c in &curves {
            let r = model.residual(c).unwrap();
            assert!(g.inner(&r, &r).sqrt() < 1e-10);
        }
        for i in 0..3 {
            for j in 0..3 {
                let ip = g.inner(model.eigenfunction(i), model.eigenfunction(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scores_and_reconstruct() {
        let g = grid();
        let basis = modes(&g, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let curves: Vec<_> = (0..8)
            .map(|_| {
                let a: f64 = rng.random_range(-2.0..2.0);
                let b: f64 = rng.random_range(-0.5..0.5);
                curve(basis[0].iter().zip(&basis[1]).map(|(p, q)| a * p + b * q).collect())
            })
            .collect();
        let model = FpcaModel::fit(&curves, &g, 0.999).unwrap();
        let m = model.n_components();
        assert_eq!(m, 2);

        let mean = curve(model.mean_curve().to_vec());
        assert!(model.scores(&mean).unwrap().iter().all(|c| c.abs() < 1e-14));

        let shifted = curve(model.mean_curve().iter().zip(model.eigenfunction(0)).map(|(a, p)| a + 2.0 * p).collect());
        let s = model.scores(&shifted).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-10 && s[1].abs() < 1e-10);

        // direct quadrature loop
        let arbitrary = curve(g.points().iter().map(|x| (5.0 * x).sin()).collect());
        let s = model.scores(&arbitrary).unwrap();
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..g.len() {
                acc += g.weights()[k] * (arbitrary.values()[k] - model.mean_curve()[k]) * model.eigenfunction(i)[k];
            }
            assert!((s[i] - acc).abs() < 1e-12);
        }

        assert_eq!(model.reconstruct(&vec![0.0; m]).unwrap().values(), model.mean_curve());
        assert!(matches!(model.reconstruct(&[1.0]), Err(Error::Dimension(_))));

        // truncating further never reduces the reconstruction error
        let full = model.residual(&arbitrary).unwrap();
        let mut truncated = s.clone();
        truncated[m - 1] = 0.0;
        let rec = model.reconstruct(&truncated).unwrap();
        let r2: Vec<f64> = arbitrary.values().iter().zip(rec.values()).map(|(a, b)| a - b).collect();
        assert!(g.inner(&full, &full) <= g.inner(&r2, &r2) + 1e-15);
    }

    #[test]
    fn score_table_properties() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let curves: Vec<_> = (0..15)
            .map(|_| {
                let a: f64 = rng.random_range(0.5..2.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                curve(g.points().iter().map(|x| a * (3.0 * x).sin() + b * x * x).collect())
            })
            .collect();
        let model = FpcaModel::fit(&curves, &g, 0.999).unwrap();
        let table = model.score_table(&curves).unwrap();
        for i in 0..model.n_components() {
            let col = table.column(i);
            assert!(col.iter().sum::<f64>().abs() / (col.len() as f64) < 1e-8);
        }
        // training scores are uncorrelated by construction
        assert!(table.warnings.is_empty());

        let same = model.score_table(&vec![curves[0].clone(); 4]).unwrap();
        assert!(same.rows.windows(2).all(|w| w[0] == w[1]));

        // strongly coupled new curves trigger a warning
        let coupled: Vec<_> = (0..6)
            .map(|j| {
                let c = j as f64 * 0.3;
                curve(
                    model
                        .mean_curve()
                        .iter()
                        .zip(model.eigenfunction(0))
                        .zip(model.eigenfunction(1))
                        .map(|((m, p), q)| m + c * p + c * q)
                        .collect(),
                )
            })
            .collect();
        let t = model.score_table(&coupled).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn errors_and_json() {
        let g = grid();
        let c = curve(vec![0.0; 41]);
        assert!(matches!(FpcaModel::fit(&[c.clone()], &g, 0.9), Err(Error::InsufficientData(_))));
        let short = curve(vec![0.0; 3]);
        assert!(matches!(FpcaModel::fit(&[c.clone(), short.clone()], &g, 0.9), Err(Error::Dimension(_))));

        let curves: Vec<_> = (0..4).map(|j| curve(g.points().iter().map(|x| x * j as f64).collect())).collect();
        let model = FpcaModel::fit(&curves, &g, 0.99).unwrap();
        assert!(matches!(model.scores(&short), Err(Error::Dimension(_))));
        let back = FpcaModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
    }
}
