//! Function-valued simulation oracles and their default catalog.
//!
//! | name   | design                         | horizon  |
//! |--------|--------------------------------|----------|
//! | `msd`  | `(ζ, ω_n)`                     | `[0, 10]`|
//! | `sir`  | `(β, γ, I₀)`                   | `[0, 40]`|
//! | `lv`   | `(α, β, δ, γ)`                 | `[0, 10]`|
//! | `heat` | `(κ, L, T_L, T_R, q, a, b)`    | `[0, 2]` |
//! | `vpi`  | `(D₀, k, K′, C_s)`             | `[0, 1]` |
//!
//! Every catalog grid has 101 equispaced points with trapezoid weights
//! normalized to unit mass.

pub mod ode;
pub mod odes;
pub mod pdes;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::design::mix_seed;
use crate::error::{Error, Result};
use crate::functional::{worst_case, DesignBox, FunctionalGrid, FunctionalResponse, Target};

pub use odes::{lv_response, msd_response, sir_response};
pub use pdes::{heat_response, vpi_groups, vpi_response, vpi_states, VpiReadout, VpiSettings, VpiState};

/// Names accepted by [`OracleSpec::by_name`].
pub const CATALOG: [&str; 5] = ["msd", "sir", "lv", "heat", "vpi"];

/// Anything that maps a design to a curve on a fixed grid.
pub trait Oracle: Sync {
    fn name(&self) -> &str;
    fn design_box(&self) -> &DesignBox;
    fn grid(&self) -> &FunctionalGrid;
    fn evaluate(&self, theta: &[f64]) -> Result<FunctionalResponse>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Msd,
    Sir,
    Lv,
    Heat,
    Vpi,
}

/// Integrator settings shared by all simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Largest RK4 step for the ODE oracles.
    pub max_step: f64,
    /// Multiplier on the PDE stability step (1 = default, 0.5 = halved).
    pub pde_step_scale: f64,
    /// Spatial cells for the heat oracle.
    pub heat_intervals: usize,
    pub vpi: VpiSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_step: 0.01, pde_step_scale: 1.0, heat_intervals: 64, vpi: VpiSettings::default() }
    }
}

impl SolverSettings {
    /// Same settings with every time step halved.
    pub fn halved(&self) -> Self {
        Self { max_step: 0.5 * self.max_step, pde_step_scale: 0.5 * self.pde_step_scale, ..self.clone() }
    }
}

/// A configured oracle: simulator, box, grid, reference design and settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub name: String,
    pub kind: OracleKind,
    pub parameters: Vec<String>,
    pub design_box: DesignBox,
    pub grid: FunctionalGrid,
    pub reference: Vec<f64>,
    pub settings: SolverSettings,
    /// Standard deviation of additive observation noise (0 = off).
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn catalog_grid(lo: f64, hi: f64) -> FunctionalGrid {
    FunctionalGrid::uniform(lo, hi, 101).expect("static grid").normalized()
}

impl OracleSpec {
    pub fn msd() -> Self {
        Self::build("msd", OracleKind::Msd, &["zeta", "omega_n"], &[0.1, 0.5], &[1.0, 2.5], &[0.35, 1.4], (0.0, 10.0))
    }

    pub fn sir() -> Self {
        Self::build("sir", OracleKind::Sir, &["beta", "gamma", "i0"], &[0.2, 0.05, 0.005], &[1.0, 0.3, 0.05], &[0.55, 0.15, 0.02], (0.0, 40.0))
    }

    pub fn lv() -> Self {
        Self::build("lv", OracleKind::Lv, &["alpha", "beta", "delta", "gamma"], &[0.5; 4], &[1.5; 4], &[1.1, 0.9, 0.8, 1.2], (0.0, 10.0))
    }

    pub fn heat() -> Self {
        Self::build(
            "heat",
            OracleKind::Heat,
            &["kappa", "length", "t_left", "t_right", "source", "a", "b"],
            &[0.05, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
            &[0.5, 2.0, 1.0, 1.0, 2.0, 1.0, 1.0],
            &[0.2, 1.0, 0.3, 0.7, 1.0, 0.4, 0.6],
            (0.0, 2.0),
        )
    }

    pub fn vpi() -> Self {
        Self::build(
            "vpi",
            OracleKind::Vpi,
            &["d0", "k", "k_hinder", "c_s"],
            &[0.05, 1.0, 0.0, 0.2],
            &[0.5, 20.0, 3.0, 1.0],
            &[0.2, 8.0, 1.5, 0.6],
            (0.0, 1.0),
        )
    }

    fn build(name: &str, kind: OracleKind, params: &[&str], lo: &[f64], hi: &[f64], reference: &[f64], horizon: (f64, f64)) -> Self {
        Self {
            name: name.to_string(),
            kind,
            parameters: names(params),
            design_box: DesignBox::new(lo.to_vec(), hi.to_vec()).expect("static box"),
            grid: catalog_grid(horizon.0, horizon.1),
            reference: reference.to_vec(),
            settings: SolverSettings::default(),
            noise_sd: 0.0,
            noise_seed: 0,
        }
    }

    /// Looks up a catalog oracle; the error lists valid names.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "msd" => Ok(Self::msd()),
            "sir" => Ok(Self::sir()),
            "lv" => Ok(Self::lv()),
            "heat" => Ok(Self::heat()),
            "vpi" => Ok(Self::vpi()),
            other => Err(Error::Config(format!("unknown oracle '{other}'; available: {}", CATALOG.join(", ")))),
        }
    }

    pub fn catalog() -> Vec<Self> {
        CATALOG.iter().map(|n| Self::by_name(n).expect("catalog name")).collect()
    }

    pub fn dim(&self) -> usize {
        self.design_box.dim()
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_noise(mut self, sd: f64, seed: u64) -> Self {
        self.noise_sd = sd;
        self.noise_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.parameters.len() != self.dim() {
            return Err(Error::Config(format!("{}: {} parameter names for a {}-d box", self.name, self.parameters.len(), self.dim())));
        }
        self.design_box.check(&self.reference)?;
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config(format!("{}: noise_sd must be finite and >= 0", self.name)));
        }
        if self.grid.lo() < 0.0 {
            return Err(Error::Config(format!("{}: time grid must start at or after 0", self.name)));
        }
        Ok(())
    }

    /// Noise-free simulator output.
    pub fn simulate(&self, theta: &[f64]) -> Result<FunctionalResponse> {
        let s = &self.settings;
        let g = &self.grid;
        match self.kind {
            OracleKind::Msd => msd_response(theta, g, s.max_step),
            OracleKind::Sir => sir_response(theta, g, s.max_step),
            OracleKind::Lv => lv_response(theta, g, s.max_step),
            OracleKind::Heat => heat_response(theta, g, s.heat_intervals, s.pde_step_scale),
            OracleKind::Vpi => vpi_response(theta, g, &s.vpi, s.pde_step_scale),
        }
    }
}

impl Oracle for OracleSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn design_box(&self) -> &DesignBox {
        &self.design_box
    }

    fn grid(&self) -> &FunctionalGrid {
        &self.grid
    }

    fn evaluate(&self, theta: &[f64]) -> Result<FunctionalResponse> {
        let clean = self.simulate(theta)?;
        if clean.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Oracle { oracle: self.name.clone(), reason: format!("non-finite output at {theta:?}") });
        }
        if self.noise_sd == 0.0 {
            return Ok(clean);
        }
        // Noise depends only on (seed, θ) so repeated calls agree.
        let key = theta.iter().fold(self.noise_seed, |acc, v| mix_seed(acc, v.to_bits()));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let normal = Normal::new(0.0, self.noise_sd).map_err(|e| Error::Config(e.to_string()))?;
        let noisy = clean.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
        FunctionalResponse::new(noisy, &self.grid)
    }
}

/// Noise-free reference curve at the oracle's reference design.
pub fn make_target(spec: &OracleSpec) -> Result<Target> {
    spec.validate()?;
    Ok(Target::from_response(spec.simulate(&spec.reference)?))
}

/// True worst-case error `g(θ) = max_λ (f(θ, λ) − f*(λ))²` of an oracle.
pub fn true_objective(oracle: &dyn Oracle, target: &Target, theta: &[f64]) -> Result<f64> {
    worst_case(&oracle.evaluate(theta)?, target)
}
