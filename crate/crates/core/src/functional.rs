//! Discrete functional-data primitives.
//!
//! A [`FunctionalGrid`] holds the sorted index points `λ_1 < … < λ_T` of the
//! observation grid together with quadrature weights. Responses and targets
//! are plain value vectors checked against a grid at construction. The
//! worst-case objective is evaluated on the grid only; the gap to the
//! continuous supremum is controlled by [`fill_distance`] and
//! [`discretization_gap_bound`].

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};

/// Sorted observation grid with nonnegative quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FunctionalGrid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Dimension(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        dim_check("grid weights", points.len(), weights.len())?;
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("grid points must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("grid weights must be finite and nonnegative".into()));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Domain("grid weights must have positive total mass".into()));
        }
        Ok(Self { points, weights })
    }

    /// Grid with trapezoid-rule weights on the given points.
    pub fn trapezoid(points: Vec<f64>) -> Result<Self> {
        let weights = trapezoid_weights(&points);
        Self::new(points, weights)
    }

    /// `n` equally spaced points on `[lo, hi]` with trapezoid weights.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Domain(format!(
                "uniform grid needs n >= 2 and lo < hi (n={n}, lo={lo}, hi={hi})"
            )));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
            .collect();
        Self::trapezoid(points)
    }

    /// Same points, weights rescaled to unit total mass.
    pub fn normalized(&self) -> Self {
        let total: f64 = self.weights.iter().sum();
        Self {
            points: self.points.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Fill distance of the grid with respect to its own span.
    pub fn fill_distance(&self) -> f64 {
        fill_distance(self, self.lo(), self.hi()).expect("grid lies inside its own span")
    }

    /// Weighted inner product `Σ_m w_m a_m b_m`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a)
            .zip(b)
            .map(|((w, x), y)| w * x * y)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,w\n");
        for (p, w) in self.points.iter().zip(&self.weights) {
            let _ = writeln!(out, "{},{}", fmt_f64(*p), fmt_f64(*w));
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let (points, weights) = read_two_column_csv(reader, "lambda", "w")?;
        Self::new(points, weights)
    }
}

pub fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let half = 0.5 * (points[i + 1] - points[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

/// One sampled response curve `f(θ, λ_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionalResponse {
    values: Vec<f64>,
}

impl FunctionalResponse {
    pub fn new(values: Vec<f64>, grid: &FunctionalGrid) -> Result<Self> {
        dim_check("response length", grid.len(), values.len())?;
        Self::from_values(values)
    }

    /// Response not yet tied to a grid; only finiteness is checked.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite response value at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_csv(&self, grid: &FunctionalGrid) -> Result<String> {
        curve_to_csv(grid, &self.values)
    }

    pub fn from_csv<R: Read>(reader: R, grid: &FunctionalGrid) -> Result<Self> {
        let (points, values) = read_two_column_csv(reader, "lambda", "value")?;
        dim_check("curve length", grid.len(), points.len())?;
        if points.iter().zip(grid.points()).any(|(a, b)| a != b) {
            return Err(Error::Dimension("curve points differ from grid".into()));
        }
        Self::new(values, grid)
    }
}

/// Reference curve `f*(λ_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Target {
    values: Vec<f64>,
}

impl Target {
    pub fn new(values: Vec<f64>, grid: &FunctionalGrid) -> Result<Self> {
        let resp = FunctionalResponse::new(values, grid)?;
        Ok(Self { values: resp.into_values() })
    }

    pub fn from_response(resp: FunctionalResponse) -> Self {
        Self { values: resp.into_values() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Axis-aligned box of admissible designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DesignBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        dim_check("box bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Dimension("design box must have dimension >= 1".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Domain(format!("box dimension {i}: need lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        Self { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Membership with a relative slack of 1e-12 per dimension.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, v)| {
                let slack = 1e-12 * self.width(i);
                *v >= self.lower[i] - slack && *v <= self.upper[i] + slack
            })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        dim_check("design dimension", self.dim(), x.len())?;
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("design {x:?} outside box")))
        }
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| (v - self.lower[i]) / self.width(i))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, v)| self.lower[i] + v * self.width(i))
            .collect()
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// `e_m = (f(θ, λ_m) − f*(λ_m))²`.
pub fn pointwise_error(resp: &FunctionalResponse, target: &Target) -> Result<Vec<f64>> {
    dim_check("response vs target", target.len(), resp.len())?;
    Ok(resp
        .values()
        .iter()
        .zip(target.values())
        .map(|(f, t)| (f - t) * (f - t))
        .collect())
}

/// Grid worst case `g_T(θ) = max_m e(θ, λ_m)`.
pub fn worst_case(resp: &FunctionalResponse, target: &Target) -> Result<f64> {
    Ok(pointwise_error(resp, target)?.into_iter().fold(0.0, f64::max))
}

/// Quadrature approximation of the weighted integrated squared error.
pub fn integrated_error(resp: &FunctionalResponse, target: &Target, grid: &FunctionalGrid) -> Result<f64> {
    dim_check("response vs grid", grid.len(), resp.len())?;
    let e = pointwise_error(resp, target)?;
    Ok(e.iter().zip(grid.weights()).map(|(e, w)| e * w).sum())
}

/// Largest distance from a point of `[lo, hi]` to its nearest grid point.
pub fn fill_distance(grid: &FunctionalGrid, domain_lo: f64, domain_hi: f64) -> Result<f64> {
    if !(domain_lo <= domain_hi) {
        return Err(Error::Domain(format!("empty domain [{domain_lo}, {domain_hi}]")));
    }
    if grid.lo() < domain_lo || grid.hi() > domain_hi {
        return Err(Error::Domain(format!(
            "grid [{}, {}] not contained in domain [{domain_lo}, {domain_hi}]",
            grid.lo(),
            grid.hi()
        )));
    }
    let interior = grid
        .points()
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]))
        .fold(0.0, f64::max);
    Ok(interior.max(grid.lo() - domain_lo).max(domain_hi - grid.hi()))
}

/// Upper bound `L·h_T` on `g(θ) − g_T(θ)` for an `L`-Lipschitz error.
pub fn discretization_gap_bound(lipschitz: f64, fill: f64) -> Result<f64> {
    if !(lipschitz >= 0.0) || !(fill >= 0.0) {
        return Err(Error::Domain(format!(
            "Lipschitz constant and fill distance must be nonnegative (L={lipschitz}, h={fill})"
        )));
    }
    Ok(lipschitz * fill)
}

/// Shortest round-trip formatting used by every text artifact.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:?}")
    }
}

pub fn curve_to_csv(grid: &FunctionalGrid, values: &[f64]) -> Result<String> {
    dim_check("curve length", grid.len(), values.len())?;
    let mut out = String::from("lambda,value\n");
    for (p, v) in grid.points().iter().zip(values) {
        let _ = writeln!(out, "{},{}", fmt_f64(*p), fmt_f64(*v));
    }
    Ok(out)
}

fn read_two_column_csv<R: Read>(reader: R, first: &str, second: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))??;
    let expected = format!("{first},{second}");
    if header.trim() != expected {
        return Err(Error::Parse(format!("expected header `{expected}`, got `{}`", header.trim())));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing `{name}`", lineno + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {name}: {e}", lineno + 2)))
        };
        a.push(next(first)?);
        b.push(next(second)?);
    }
    Ok((a, b))
}

/// Writes a set of curves as a JSON array of arrays.
pub fn write_curves_json<W: Write>(writer: W, curves: &[FunctionalResponse]) -> Result<()> {
    serde_json::to_writer(writer, curves)?;
    Ok(())
}

pub fn read_curves_json<R: Read>(reader: R, grid: &FunctionalGrid) -> Result<Vec<FunctionalResponse>> {
    let raw: Vec<Vec<f64>> = serde_json::from_reader(reader)?;
    raw.into_iter().map(|v| FunctionalResponse::new(v, grid)).collect()
}
