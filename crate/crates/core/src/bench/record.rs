use serde::Serialize;

use crate::functional::fmt_f64;
use crate::gp::GpSummary;

/// Diagnostics for one sequential MM-FBO iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub kappa: f64,
    pub exploit: bool,
    pub n_components: usize,
    pub fpca_refit: bool,
    pub pool_size: usize,
    pub exclusion_radius: f64,
    pub acquisition: f64,
    pub predicted_worst: f64,
}

/// One optimization trajectory. `g_values[k]` is `+inf` when the oracle
/// failed at `designs[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub oracle: String,
    pub seed: u64,
    pub n0: usize,
    pub designs: Vec<Vec<f64>>,
    pub g_values: Vec<f64>,
    pub regret: Vec<f64>,
    /// Evaluated design with the smallest true `g`.
    pub incumbent: Vec<f64>,
    /// Evaluated design with the smallest predicted `max μ_e` (MM-FBO only).
    pub recommended: Option<Vec<f64>>,
    pub trace: Vec<IterationTrace>,
    /// Final score-surrogate hyperparameters (MM-FBO only).
    pub hyperparameters: Vec<GpSummary>,
    /// Seconds per evaluation; excluded from serialized output.
    #[serde(skip)]
    pub wall_clock: Vec<f64>,
}

impl RunRecord {
    pub fn budget(&self) -> usize {
        self.g_values.len()
    }

    /// Regret from the end of seeding onward; its first entry is `r_0`.
    pub fn sequential_regret(&self) -> &[f64] {
        let start = self.n0.clamp(1, self.regret.len().max(1)) - 1;
        &self.regret[start..]
    }

    pub fn final_regret(&self) -> f64 {
        *self.regret.last().unwrap_or(&f64::NAN)
    }

    /// `iter,theta_1..theta_d,g,regret` rows with round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let d = self.designs.first().map_or(0, Vec::len);
        let mut out = String::from("iter");
        for i in 1..=d {
            out.push_str(&format!(",theta_{i}"));
        }
        out.push_str(",g,regret\n");
        for (k, x) in self.designs.iter().enumerate() {
            out.push_str(&(k + 1).to_string());
            for v in x {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push_str(&format!(",{},{}\n", fmt_f64(self.g_values[k]), fmt_f64(self.regret[k])));
        }
        out
    }
}
