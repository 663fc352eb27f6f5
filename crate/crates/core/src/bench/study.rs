//! Paired-replication studies and their on-disk layout.
//!
//! ```text
//! <out>/summary.json                 StudySummary
//! <out>/runs/<method>_rep<r>.csv      iter,theta_1..theta_d,g,regret
//! <out>/plot/regret_<method>.csv      iter,median,q1,q3            (budget rows)
//! <out>/plot/normalized_<method>.csv  step,median,q1,q3            (budget - n0 + 1 rows)
//! <out>/plot/final_regret.csv         method,min,q1,median,q3,max
//! <out>/plot/auoc.csv                 method,min,q1,median,q3,max
//! <out>/plot/tt.csv                   method,epsilon,success_fraction,median_iterations
//! ```

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{run, AcquisitionConfig};
use crate::design::mix_seed;
use crate::error::{Error, Result};
use crate::functional::fmt_f64;
use crate::oracles::{make_target, OracleSpec};

use super::baselines::{gp_on_g_baseline, sfd_baseline};
use super::metrics::{aggregate_tt, auoc, normalized_regret, quantile_sorted, time_to_threshold, FiveNumber, TtAggregate};
use super::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mmfbo,
    GpOnG,
    Sfd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mmfbo, Method::GpOnG, Method::Sfd];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mmfbo => "mmfbo",
            Method::GpOnG => "gp_on_g",
            Method::Sfd => "sfd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmfbo" => Ok(Method::Mmfbo),
            "gp_on_g" => Ok(Method::GpOnG),
            "sfd" => Ok(Method::Sfd),
            other => Err(Error::Config(format!("unknown method '{other}'; expected mmfbo, gp_on_g or sfd"))),
        }
    }
}

/// Seed of replication `rep`; every method in that replication shares it.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    mix_seed(seed, rep as u64)
}

/// Runs one method once.
pub fn run_method(method: Method, spec: &OracleSpec, config: &AcquisitionConfig) -> Result<RunRecord> {
    let target = make_target(spec)?;
    match method {
        Method::Mmfbo => run(spec, &target, config),
        Method::GpOnG => gp_on_g_baseline(spec, &target, config),
        Method::Sfd => {
            config.validate(spec.dim())?;
            sfd_baseline(spec, &target, config.budget, config.n0_for(spec.dim()), config.seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub oracle: OracleSpec,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub acquisition: AcquisitionConfig,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl StudyConfig {
    pub fn new(oracle: OracleSpec, budget: usize, replications: usize, seed: u64) -> Self {
        Self {
            oracle,
            methods: Method::ALL.to_vec(),
            replications,
            seed,
            epsilons: vec![0.10, 0.05],
            acquisition: AcquisitionConfig { budget, ..AcquisitionConfig::default() },
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        self.acquisition.validate(self.oracle.dim())?;
        if self.replications == 0 {
            return Err(Error::Config("replications: must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods: at least one method is required".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilons: thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// A failed study with whatever runs completed.
#[derive(Debug)]
pub struct StudyFailure {
    pub error: Error,
    pub partial: Vec<RunRecord>,
}

impl fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "study aborted after {} completed runs: {}", self.partial.len(), self.error)
    }
}

impl std::error::Error for StudyFailure {}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub records: Vec<RunRecord>,
    pub summary: StudySummary,
}

/// All `(replication, method)` runs with shared seeds and pools, aggregated.
pub fn run_study(config: &StudyConfig) -> std::result::Result<StudyResult, StudyFailure> {
    config.validate().map_err(|error| StudyFailure { error, partial: Vec::new() })?;
    let jobs: Vec<(usize, Method)> = (0..config.replications)
        .flat_map(|r| config.methods.iter().map(move |&m| (r, m)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(rep, method)| {
                let acq = AcquisitionConfig { seed: replication_seed(config.seed, rep), ..config.acquisition.clone() };
                log::info!("{} rep {rep} {method}", config.oracle.name);
                run_method(method, &config.oracle, &acq)
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| StudyFailure { error: Error::Config(format!("jobs: {e}")), partial: Vec::new() })?
            .install(work),
        None => work(),
    };
    let mut records = Vec::with_capacity(outcomes.len());
    let mut first_err = None;
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(e) if first_err.is_none() => first_err = Some(e),
            Err(_) => {}
        }
    }
    if let Some(error) = first_err {
        return Err(StudyFailure { error, partial: records });
    }
    let summary = summarize(config, &records).map_err(|error| StudyFailure { error, partial: records.clone() })?;
    Ok(StudyResult { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub median: Vec<f64>,
    pub q1: Vec<f64>,
    pub q3: Vec<f64>,
}

impl Band {
    fn of(curves: &[&[f64]]) -> Self {
        let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
        let mut band = Band { median: Vec::with_capacity(len), q1: Vec::with_capacity(len), q3: Vec::with_capacity(len) };
        for k in 0..len {
            let mut col: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            col.sort_by(f64::total_cmp);
            band.median.push(quantile_sorted(&col, 0.5));
            band.q1.push(quantile_sorted(&col, 0.25));
            band.q3.push(quantile_sorted(&col, 0.75));
        }
        band
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Regret per evaluation, `budget` entries.
    pub regret: Band,
    /// `r_k / r_0` from the end of seeding, `budget − n0 + 1` entries.
    pub normalized_regret: Band,
    pub final_regret: FiveNumber,
    pub auoc: FiveNumber,
    /// Per-replication values in replication order.
    pub final_regret_values: Vec<f64>,
    pub auoc_values: Vec<f64>,
    pub tt: Vec<TtAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub oracle: String,
    pub budget: usize,
    pub n0: usize,
    pub replications: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub methods: Vec<MethodSummary>,
}

impl StudySummary {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Aggregates records keyed by `(method, seed)`; input order is irrelevant.
pub fn summarize(config: &StudyConfig, records: &[RunRecord]) -> Result<StudySummary> {
    let mut methods = Vec::new();
    for &m in &config.methods {
        let mut runs: Vec<&RunRecord> = records.iter().filter(|r| r.method == m.as_str()).collect();
        runs.sort_by_key(|r| (0..config.replications).position(|i| replication_seed(config.seed, i) == r.seed));
        if runs.len() != config.replications {
            return Err(Error::InsufficientData(format!("{m}: {} of {} replications", runs.len(), config.replications)));
        }
        let regrets: Vec<&[f64]> = runs.iter().map(|r| r.regret.as_slice()).collect();
        let normalized: Vec<Vec<f64>> = runs.iter().map(|r| normalized_regret(r.sequential_regret())).collect();
        let normalized_refs: Vec<&[f64]> = normalized.iter().map(Vec::as_slice).collect();
        let finals: Vec<f64> = runs.iter().map(|r| r.final_regret()).collect();
        let auocs: Vec<f64> = runs.iter().map(|r| auoc(r.sequential_regret())).collect();
        let tt = config
            .epsilons
            .iter()
            .map(|&eps| aggregate_tt(eps, &normalized.iter().map(|n| time_to_threshold(n, eps)).collect::<Vec<_>>()))
            .collect();
        methods.push(MethodSummary {
            method: m,
            regret: Band::of(&regrets),
            normalized_regret: Band::of(&normalized_refs),
            final_regret: FiveNumber::of(&finals),
            auoc: FiveNumber::of(&auocs),
            final_regret_values: finals,
            auoc_values: auocs,
            tt,
        });
    }
    Ok(StudySummary {
        oracle: config.oracle.name.clone(),
        budget: config.acquisition.budget,
        n0: config.acquisition.n0_for(config.oracle.dim()),
        replications: config.replications,
        seed: config.seed,
        epsilons: config.epsilons.clone(),
        methods,
    })
}

fn band_csv(header: &str, band: &Band) -> String {
    let mut s = format!("{header},median,q1,q3\n");
    for k in 0..band.median.len() {
        s.push_str(&format!("{},{},{},{}\n", k + 1, fmt_f64(band.median[k]), fmt_f64(band.q1[k]), fmt_f64(band.q3[k])));
    }
    s
}

fn five_csv(rows: &[(Method, FiveNumber)]) -> String {
    let mut s = String::from("method,min,q1,median,q3,max\n");
    for (m, f) in rows {
        s.push_str(&format!("{m},{},{},{},{},{}\n", fmt_f64(f.min), fmt_f64(f.q1), fmt_f64(f.median), fmt_f64(f.q3), fmt_f64(f.max)));
    }
    s
}

/// Plot-ready tables derived from a summary, as `(relative path, contents)`.
pub fn plot_files(summary: &StudySummary) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for m in &summary.methods {
        files.push((format!("plot/regret_{}.csv", m.method), band_csv("iter", &m.regret)));
        files.push((format!("plot/normalized_{}.csv", m.method), band_csv("step", &m.normalized_regret)));
    }
    files.push(("plot/final_regret.csv".into(), five_csv(&summary.methods.iter().map(|m| (m.method, m.final_regret)).collect::<Vec<_>>())));
    files.push(("plot/auoc.csv".into(), five_csv(&summary.methods.iter().map(|m| (m.method, m.auoc)).collect::<Vec<_>>())));
    let mut tt = String::from("method,epsilon,success_fraction,median_iterations\n");
    for m in &summary.methods {
        for a in &m.tt {
            let med = a.median_iterations.map_or_else(String::new, fmt_f64);
            tt.push_str(&format!("{},{},{},{}\n", m.method, fmt_f64(a.epsilon), fmt_f64(a.success_fraction), med));
        }
    }
    files.push(("plot/tt.csv".into(), tt));
    files
}

/// Per-run CSV path relative to the output directory.
pub fn run_csv_name(record: &RunRecord, rep: usize) -> String {
    format!("runs/{}_rep{rep}.csv", record.method)
}

fn write_rel(dir: &Path, rel: &str, contents: &str) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Writes per-run CSVs. Replication indices follow `config`'s seed order.
pub fn write_runs(dir: &Path, config: &StudyConfig, records: &[RunRecord]) -> Result<Vec<String>> {
    let mut written = Vec::new();
    for r in records {
        let rep = (0..config.replications)
            .position(|i| replication_seed(config.seed, i) == r.seed)
            .unwrap_or(usize::MAX);
        let rel = run_csv_name(r, rep);
        write_rel(dir, &rel, &r.to_csv())?;
        written.push(rel);
    }
    Ok(written)
}

/// Writes the summary, per-run CSVs and plot tables under `dir`.
pub fn write_study(dir: &Path, config: &StudyConfig, result: &StudyResult) -> Result<Vec<String>> {
    let mut written = write_runs(dir, config, &result.records)?;
    write_rel(dir, "summary.json", &result.summary.to_json()?)?;
    written.push("summary.json".into());
    for (rel, contents) in plot_files(&result.summary) {
        write_rel(dir, &rel, &contents)?;
        written.push(rel);
    }
    Ok(written)
}
