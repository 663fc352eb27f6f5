//! TOML experiment configuration.
//!
//! ```toml
//! oracle = "msd"
//! budget = 30
//! methods = ["mmfbo", "gp_on_g", "sfd"]
//! replications = 10
//! seed = 0
//! epsilons = [0.1, 0.05]
//! out = "results"
//!
//! [acquisition]
//! kappa0 = 2.0
//! top_q = 0.25
//! ```

use std::path::{Path, PathBuf};

use mmfbo::acquisition::AcquisitionConfig;
use mmfbo::bench::{Method, StudyConfig};
use mmfbo::oracles::{OracleSpec, VpiReadout};
use serde::{Deserialize, Serialize};

/// Optimizer keys under `[acquisition]`; budget and seed live at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionKeys {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    pub kappa0: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub decay: f64,
    pub boost: f64,
    pub patience: usize,
    pub pool_global: usize,
    pub pool_local: usize,
    pub top_q: f64,
    pub local_frac: f64,
    pub exclusion_radius: f64,
    pub exploit_every: usize,
    pub refit_every: usize,
    pub drift_tolerance: f64,
    pub explained_threshold: f64,
    pub gp_starts: usize,
    pub gp_evals: usize,
}

impl Default for AcquisitionKeys {
    fn default() -> Self {
        let d = AcquisitionConfig::default();
        Self {
            n0: d.n0,
            kappa0: d.kappa0,
            kappa_min: d.kappa_min,
            kappa_max: d.kappa_max,
            decay: d.decay,
            boost: d.boost,
            patience: d.patience,
            pool_global: d.pool_global,
            pool_local: d.pool_local,
            top_q: d.top_q,
            local_frac: d.local_frac,
            exclusion_radius: d.exclusion_radius,
            exploit_every: d.exploit_every,
            refit_every: d.refit_every,
            drift_tolerance: d.drift_tolerance,
            explained_threshold: d.explained_threshold,
            gp_starts: d.gp_starts,
            gp_evals: d.gp_evals,
        }
    }
}

impl AcquisitionKeys {
    fn to_config(&self, budget: usize, seed: u64) -> AcquisitionConfig {
        AcquisitionConfig {
            n0: self.n0,
            budget,
            kappa0: self.kappa0,
            kappa_min: self.kappa_min,
            kappa_max: self.kappa_max,
            decay: self.decay,
            boost: self.boost,
            patience: self.patience,
            pool_global: self.pool_global,
            pool_local: self.pool_local,
            top_q: self.top_q,
            local_frac: self.local_frac,
            exclusion_radius: self.exclusion_radius,
            exploit_every: self.exploit_every,
            refit_every: self.refit_every,
            drift_tolerance: self.drift_tolerance,
            explained_threshold: self.explained_threshold,
            gp_starts: self.gp_starts,
            gp_evals: self.gp_evals,
            seed,
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_replications() -> usize {
    10
}

fn default_epsilons() -> Vec<f64> {
    vec![0.10, 0.05]
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub oracle: String,
    pub budget: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Additive Gaussian observation noise on every oracle call.
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub vpi_readout: VpiReadout,
    #[serde(default)]
    pub acquisition: AcquisitionKeys,
}

impl ExperimentConfig {
    pub fn new(oracle: &str, budget: usize) -> Self {
        Self {
            oracle: oracle.to_string(),
            budget,
            methods: default_methods(),
            replications: default_replications(),
            seed: 0,
            epsilons: default_epsilons(),
            out: default_out(),
            jobs: None,
            noise_sd: 0.0,
            vpi_readout: VpiReadout::default(),
            acquisition: AcquisitionKeys::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn oracle_spec(&self) -> Result<OracleSpec, String> {
        let mut spec = OracleSpec::by_name(&self.oracle).map_err(|e| format!("oracle: {e}"))?;
        spec.settings.vpi.readout = self.vpi_readout;
        Ok(spec.with_noise(self.noise_sd, self.seed))
    }

    /// Fully validated study configuration with `replications` overridden.
    pub fn study(&self, replications: usize) -> Result<StudyConfig, String> {
        let spec = self.oracle_spec()?;
        let acquisition = self.acquisition.to_config(self.budget, self.seed);
        let n0 = acquisition.n0_for(spec.dim());
        if self.budget <= n0 {
            return Err(format!("budget: must exceed n0 = {n0}, got {}", self.budget));
        }
        let mut methods: Vec<Method> = Vec::new();
        for m in &self.methods {
            if !methods.contains(m) {
                methods.push(*m);
            }
        }
        let study = StudyConfig {
            oracle: spec,
            methods,
            replications,
            seed: self.seed,
            epsilons: self.epsilons.clone(),
            acquisition,
            jobs: self.jobs,
        };
        study.validate().map_err(|e| match e {
            mmfbo::Error::Config(m) => m,
            other => other.to_string(),
        })?;
        Ok(study)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.study(self.replications).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse("oracle = \"sir\"\nbudget = 25\n").unwrap();
        assert_eq!(c, ExperimentConfig::new("sir", 25));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = ExperimentConfig::parse("oracle = \"msd\"\nbudget = 30\nbugdet = 3\n").unwrap_err();
        assert!(err.contains("bugdet"), "{err}");
        let err = ExperimentConfig::parse("oracle = \"msd\"\nbudget = 30\n[acquisition]\nkapa0 = 1.0\n").unwrap_err();
        assert!(err.contains("kapa0"), "{err}");
    }

    #[test]
    fn missing_and_mistyped_keys() {
        assert!(ExperimentConfig::parse("oracle = \"msd\"\n").unwrap_err().contains("budget"));
        assert!(ExperimentConfig::parse("oracle = \"msd\"\nbudget = \"many\"\n").is_err());
        let c = ExperimentConfig::parse("oracle = \"nope\"\nbudget = 30\n").unwrap();
        let err = c.validate().unwrap_err();
        assert!(err.contains("msd") && err.contains("vpi"), "{err}");
    }

    #[test]
    fn defaults_round_trip() {
        for name in mmfbo::oracles::CATALOG {
            let mut c = ExperimentConfig::new(name, 30);
            c.acquisition.n0 = Some(12);
            c.jobs = Some(2);
            assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
        }
    }

    #[test]
    fn budget_must_exceed_seeds() {
        let c = ExperimentConfig::new("heat", 14);
        assert!(c.validate().unwrap_err().contains("budget"));
        let mut c = ExperimentConfig::new("msd", 30);
        c.replications = 0;
        assert!(c.validate().is_err());
    }
}
