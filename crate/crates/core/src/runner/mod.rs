//! Configuration, single runs, campaigns and result files.

pub mod campaign;
pub mod config;
pub mod export;
pub mod run;

pub use campaign::{run_campaign, summarize, CampaignResult, CampaignSummary, FinalResult, SummaryCell};
pub use config::RunConfig;
pub use run::{run_ci_emo, MetricContext, RunRecord, RunStatus, TrajectoryPoint};
