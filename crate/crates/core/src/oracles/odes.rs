//! ODE oracles: mass-spring-damper step response, SIR infections, and
//! Lotka-Volterra prey population.

use crate::error::{dim_check, Error, Result};
use crate::functional::{FunctionalGrid, FunctionalResponse};

use super::ode::rk4_on_grid;

/// Displacement `y(t)` of `ÿ + 2ζω_n ẏ + ω_n² y = 1`, `y(0) = ẏ(0) = 0`.
pub fn msd_response(theta: &[f64], grid: &FunctionalGrid, max_step: f64) -> Result<FunctionalResponse> {
    dim_check("mass-spring-damper design", 2, theta.len())?;
    let (zeta, wn) = (theta[0], theta[1]);
    if !(zeta > 0.0 && wn > 0.0) {
        return Err(Error::Domain(format!("need zeta > 0 and omega_n > 0, got ({zeta}, {wn})")));
    }
    let states = rk4_on_grid(
        |_, s, ds| {
            ds[0] = s[1];
            ds[1] = 1.0 - 2.0 * zeta * wn * s[1] - wn * wn * s[0];
        },
        &[0.0, 0.0],
        grid.points(),
        max_step,
        |_| {},
    );
    FunctionalResponse::new(states.into_iter().map(|s| s[0]).collect(), grid)
}

/// Full `(S, I, R)` trajectory of the SIR model.
pub fn sir_states(theta: &[f64], times: &[f64], max_step: f64) -> Result<Vec<[f64; 3]>> {
    dim_check("SIR design", 3, theta.len())?;
    let (beta, gamma, i0) = (theta[0], theta[1], theta[2]);
    if !(beta >= 0.0 && gamma >= 0.0) {
        return Err(Error::Domain(format!("need beta, gamma >= 0, got ({beta}, {gamma})")));
    }
    if !(i0 > 0.0 && i0 < 1.0) {
        return Err(Error::Domain(format!("initial infected fraction must lie in (0, 1), got {i0}")));
    }
    let states = rk4_on_grid(
        |_, s, ds| {
            let infection = beta * s[0] * s[1];
            let recovery = gamma * s[1];
            ds[0] = -infection;
            ds[1] = infection - recovery;
            ds[2] = recovery;
        },
        &[1.0 - i0, i0, 0.0],
        times,
        max_step,
        |_| {},
    );
    Ok(states.into_iter().map(|s| [s[0], s[1], s[2]]).collect())
}

/// Infected fraction `I(t)`, clamped at zero.
pub fn sir_response(theta: &[f64], grid: &FunctionalGrid, max_step: f64) -> Result<FunctionalResponse> {
    let states = sir_states(theta, grid.points(), max_step)?;
    FunctionalResponse::new(states.into_iter().map(|s| s[1].max(0.0)).collect(), grid)
}

/// `(x, y)` trajectory of the Lotka-Volterra system from the given initial state.
pub fn lv_states(theta: &[f64], initial: [f64; 2], times: &[f64], max_step: f64) -> Result<Vec<[f64; 2]>> {
    dim_check("Lotka-Volterra design", 4, theta.len())?;
    if theta.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Domain(format!("Lotka-Volterra parameters must be positive, got {theta:?}")));
    }
    let (alpha, beta, delta, gamma) = (theta[0], theta[1], theta[2], theta[3]);
    let states = rk4_on_grid(
        |_, s, ds| {
            ds[0] = alpha * s[0] - beta * s[0] * s[1];
            ds[1] = delta * s[0] * s[1] - gamma * s[1];
        },
        &initial,
        times,
        max_step,
        |_| {},
    );
    Ok(states.into_iter().map(|s| [s[0], s[1]]).collect())
}

/// Prey population `x(t)` with `x(0) = y(0) = 1`.
pub fn lv_response(theta: &[f64], grid: &FunctionalGrid, max_step: f64) -> Result<FunctionalResponse> {
    let states = lv_states(theta, [1.0, 1.0], grid.points(), max_step)?;
    FunctionalResponse::new(states.into_iter().map(|s| s[0]).collect(), grid)
}

/// First integral `δx − γ ln x + βy − α ln y` of the Lotka-Volterra system.
pub fn lv_invariant(theta: &[f64], x: f64, y: f64) -> f64 {
    let (alpha, beta, delta, gamma) = (theta[0], theta[1], theta[2], theta[3]);
    delta * x - gamma * x.ln() + beta * y - alpha * y.ln()
}
