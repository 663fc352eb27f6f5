//! Baselines, metrics and the paired-replication study.

pub mod baselines;
pub mod metrics;
pub mod record;
pub mod study;

pub use baselines::{expected_improvement, gp_on_g_baseline, sfd_baseline};
pub use metrics::{aggregate_tt, auoc, normalized_regret, regret_curve, time_to_threshold, FiveNumber, TtAggregate};
pub use record::{IterationTrace, RunRecord};
pub use study::{run_method, run_study, summarize, Band, Method, MethodSummary, StudyConfig, StudyFailure, StudyResult, StudySummary};
