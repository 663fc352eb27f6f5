//! Method-of-lines PDE oracles: 1-D heat diffusion and vapor-phase
//! infiltration (VPI) reaction-diffusion.

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};
use crate::functional::{trapezoid_weights, FunctionalGrid, FunctionalResponse};

use super::ode::rk4_on_grid;

/// Safety factor applied to explicit stability limits.
pub const STABILITY_SAFETY: f64 = 0.4;

/// Mid-depth temperature `u(L/2, t)` for `u_t = κ u_xx + q` on `[0, L]` with
/// Dirichlet ends `T_L`, `T_R` and `u(x, 0) = a + b sin(πx/L)`.
/// `intervals` spatial cells (rounded up to even so `L/2` is a node).
pub fn heat_response(theta: &[f64], grid: &FunctionalGrid, intervals: usize, time_scale: f64) -> Result<FunctionalResponse> {
    dim_check("heat design", 7, theta.len())?;
    let [kappa, len, tl, tr, q, a, b] = [theta[0], theta[1], theta[2], theta[3], theta[4], theta[5], theta[6]];
    if !(kappa > 0.0 && len > 0.0) {
        return Err(Error::Domain(format!("need kappa > 0 and L > 0, got ({kappa}, {len})")));
    }
    let n = intervals.max(2).div_ceil(2) * 2;
    let dx = len / n as f64;
    let inv_dx2 = 1.0 / (dx * dx);
    let max_step = time_scale * STABILITY_SAFETY * dx * dx / kappa;
    let u0: Vec<f64> = (1..n)
        .map(|i| a + b * (std::f64::consts::PI * i as f64 * dx / len).sin())
        .collect();
    let m = n - 1;
    let states = rk4_on_grid(
        |_, u, du| {
            for i in 0..m {
                let left = if i == 0 { tl } else { u[i - 1] };
                let right = if i + 1 == m { tr } else { u[i + 1] };
                du[i] = kappa * (left - 2.0 * u[i] + right) * inv_dx2 + q;
            }
        },
        &u0,
        grid.points(),
        max_step,
        |_| {},
    );
    let mid = n / 2 - 1;
    FunctionalResponse::new(states.into_iter().map(|u| u[mid]).collect(), grid)
}

/// Scalar reported by the VPI oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VpiReadout {
    /// Spatial integral of `C_free + C_product`.
    #[default]
    Uptake,
    /// Spatial integral of `C_product` alone.
    ProductOnly,
}

/// Fixed physical constants and discretization for the VPI film.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VpiSettings {
    pub film_thickness: f64,
    pub polymer_initial: f64,
    pub intervals: usize,
    pub readout: VpiReadout,
}

impl Default for VpiSettings {
    fn default() -> Self {
        Self { film_thickness: 1.0, polymer_initial: 1.0, intervals: 64, readout: VpiReadout::Uptake }
    }
}

/// Nodal concentrations on `x_j = j·dx`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VpiState {
    pub free: Vec<f64>,
    pub product: Vec<f64>,
    pub polymer: Vec<f64>,
}

/// Nondimensional groups `(Da, C_s/C⁰, K′C⁰)` with `Da = k C⁰ L² / D₀`.
pub fn vpi_groups(theta: &[f64], settings: &VpiSettings) -> Result<[f64; 3]> {
    dim_check("VPI design", 4, theta.len())?;
    let [d0, k, kh, cs] = [theta[0], theta[1], theta[2], theta[3]];
    let c0 = settings.polymer_initial;
    let l = settings.film_thickness;
    Ok([k * c0 * l * l / d0, cs / c0, kh * c0])
}

/// Integrates the VPI system and returns the nodal state at each time.
/// The face value `C_s` applies for `t > 0`; the first snapshot is the
/// initial condition with `C_free ≡ 0`.
///
/// `∂C_f/∂t = ∂/∂x(D ∂C_f/∂x) − k C_f C_p`, `∂C_p/∂t = −k C_f C_p`,
/// `∂C_r/∂t = k C_f C_p` with `D = D₀ exp(−K′ C_r)` evaluated pointwise,
/// `C_f(0, t) = C_s` and zero flux at `x = L`.
pub fn vpi_states(theta: &[f64], times: &[f64], settings: &VpiSettings, time_scale: f64) -> Result<Vec<VpiState>> {
    dim_check("VPI design", 4, theta.len())?;
    let [d0, k, kh, cs] = [theta[0], theta[1], theta[2], theta[3]];
    if !(d0 > 0.0 && k >= 0.0 && kh >= 0.0 && cs > 0.0) {
        return Err(Error::Domain(format!("need D0 > 0, k >= 0, K' >= 0, C_s > 0, got {theta:?}")));
    }
    let c0 = settings.polymer_initial;
    let len = settings.film_thickness;
    if !(c0 >= 0.0 && len > 0.0) || settings.intervals < 2 {
        return Err(Error::Config(format!("invalid VPI settings {settings:?}")));
    }
    let n = settings.intervals;
    let dx = len / n as f64;
    let inv_dx2 = 1.0 / (dx * dx);
    let diffusive = STABILITY_SAFETY * dx * dx / d0;
    let reactive = if k > 0.0 { STABILITY_SAFETY / (k * cs.max(c0)) } else { f64::INFINITY };
    let max_step = time_scale * diffusive.min(reactive);

    // Layout: free at nodes 1..=N, then product and polymer at nodes 0..=N.
    let nf = n;
    let np = n + 1;
    let mut y0 = vec![0.0; nf + 2 * np];
    for v in &mut y0[nf + np..] {
        *v = c0;
    }
    let mut diff = vec![0.0; np];
    let states = rk4_on_grid(
        |_, y, dy| {
            let (free, rest) = y.split_at(nf);
            let (prod, poly) = rest.split_at(np);
            let cf = |j: usize| if j == 0 { cs } else { free[j - 1] };
            for (j, d) in diff.iter_mut().enumerate() {
                *d = d0 * (-kh * prod[j]).exp();
            }
            for j in 0..np {
                let rate = k * cf(j) * poly[j];
                dy[nf + j] = rate;
                dy[nf + np + j] = -rate;
                if j == 0 {
                    continue;
                }
                let (right, d_right) = if j == n { (cf(n - 1), diff[n - 1]) } else { (cf(j + 1), diff[j + 1]) };
                let flux_r = 0.5 * (diff[j] + d_right) * (right - cf(j));
                let flux_l = 0.5 * (diff[j] + diff[j - 1]) * (cf(j) - cf(j - 1));
                dy[j - 1] = (flux_r - flux_l) * inv_dx2 - rate;
            }
        },
        &y0,
        times,
        max_step,
        |y| {
            for v in &mut y[..nf] {
                *v = v.max(0.0);
            }
        },
    );
    Ok(states
        .into_iter()
        .enumerate()
        .map(|(i, y)| {
            let mut free = Vec::with_capacity(np);
            free.push(if i == 0 { 0.0 } else { cs });
            free.extend_from_slice(&y[..nf]);
            VpiState { free, product: y[nf..nf + np].to_vec(), polymer: y[nf + np..].to_vec() }
        })
        .collect())
}

/// Uptake curve `H(t)`: trapezoid spatial integral of the chosen readout.
pub fn vpi_response(theta: &[f64], grid: &FunctionalGrid, settings: &VpiSettings, time_scale: f64) -> Result<FunctionalResponse> {
    let states = vpi_states(theta, grid.points(), settings, time_scale)?;
    let xs: Vec<f64> = (0..=settings.intervals)
        .map(|j| j as f64 * settings.film_thickness / settings.intervals as f64)
        .collect();
    let w = trapezoid_weights(&xs);
    let totals = states
        .iter()
        .map(|s| {
            let integrand = |j: usize| match settings.readout {
                VpiReadout::Uptake => s.free[j].max(0.0) + s.product[j].max(0.0),
                VpiReadout::ProductOnly => s.product[j].max(0.0),
            };
            (0..w.len()).map(|j| w[j] * integrand(j)).sum()
        })
        .collect();
    FunctionalResponse::new(totals, grid)
}
