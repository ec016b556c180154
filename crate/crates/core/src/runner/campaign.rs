use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{wilcoxon_rank_sum, Verdict};
use crate::runner::config::RunConfig;
use crate::runner::run::{run_with_context, MetricContext, RunRecord, RunStatus};

/// Significance level for all campaign comparisons.
pub const ALPHA: f64 = 0.05;

/// Final metrics of one campaign run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalResult {
    pub run_id: String,
    pub problem: String,
    pub variant: String,
    pub seed: u64,
    pub completed: bool,
    pub igd_plus: f64,
    pub hv: f64,
}

impl FinalResult {
    pub fn from_record(r: &RunRecord) -> Self {
        Self {
            run_id: r.run_id.clone(),
            problem: problem_label(&r.config),
            variant: r.config.variant().label(),
            seed: r.config.seed,
            completed: r.status == RunStatus::Completed,
            igd_plus: r.final_igd_plus(),
            hv: r.final_hv(),
        }
    }
}

fn problem_label(c: &RunConfig) -> String {
    match c.m {
        Some(m) if m != 2 => format!("{}-M{m}", c.problem),
        _ => c.problem.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub problem: String,
    pub variant: String,
    pub runs: usize,
    pub failed: usize,
    pub igd_plus_mean: f64,
    pub igd_plus_std: f64,
    pub hv_mean: f64,
    pub hv_std: f64,
    /// IGD+ comparison against the baseline variant; `None` for the baseline.
    pub verdict_igd_plus: Option<Verdict>,
    /// HV comparison against the baseline variant (larger HV is better).
    pub verdict_hv: Option<Verdict>,
}

impl SummaryCell {
    /// A cell is incomplete when any of its runs failed.
    pub fn is_incomplete(&self) -> bool {
        self.failed > 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub baseline: String,
    pub cells: Vec<SummaryCell>,
}

impl CampaignSummary {
    pub fn cell(&self, problem: &str, variant: &str) -> Option<&SummaryCell> {
        self.cells
            .iter()
            .find(|c| c.problem == problem && c.variant == variant)
    }
}

/// Outcome of one campaign job.
#[derive(Debug)]
pub enum RunOutcome {
    Finished(Box<RunRecord>),
    Failed { run_id: String, error: Error },
}

#[derive(Debug)]
pub struct CampaignResult {
    pub outcomes: Vec<RunOutcome>,
    pub finals: Vec<FinalResult>,
    pub summary: CampaignSummary,
}

impl CampaignResult {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.outcomes.iter().filter_map(|o| match o {
            RunOutcome::Finished(r) => Some(r.as_ref()),
            RunOutcome::Failed { .. } => None,
        })
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Default baseline: the full method.
pub const BASELINE_VARIANT: &str = "CI-EMO";

/// Aggregates final metrics per (problem, variant) and compares each variant
/// with `baseline` on the same problem by rank-sum test. Only completed runs
/// enter the statistics.
pub fn summarize(finals: &[FinalResult], baseline: &str) -> CampaignSummary {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<&FinalResult>> = HashMap::new();
    for f in finals {
        let key = (f.problem.clone(), f.variant.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(f);
    }
    let completed = |key: &(String, String), pick: fn(&FinalResult) -> f64| -> Vec<f64> {
        groups[key]
            .iter()
            .filter(|f| f.completed)
            .map(|f| pick(f))
            .collect()
    };
    let cells = order
        .iter()
        .map(|key| {
            let igd = completed(key, |f| f.igd_plus);
            let hv = completed(key, |f| f.hv);
            let (igd_plus_mean, igd_plus_std) = mean_std(&igd);
            let (hv_mean, hv_std) = mean_std(&hv);
            let base_key = (key.0.clone(), baseline.to_string());
            let (verdict_igd_plus, verdict_hv) = if key.1 != baseline && groups.contains_key(&base_key) {
                let base_igd = completed(&base_key, |f| f.igd_plus);
                let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
                let base_hv = completed(&base_key, |f| f.hv);
                (
                    wilcoxon_rank_sum(&igd, &base_igd, ALPHA).ok(),
                    wilcoxon_rank_sum(&neg(&hv), &neg(&base_hv), ALPHA).ok(),
                )
            } else {
                (None, None)
            };
            let runs = groups[key].len();
            SummaryCell {
                problem: key.0.clone(),
                variant: key.1.clone(),
                runs,
                failed: runs - igd.len(),
                igd_plus_mean,
                igd_plus_std,
                hv_mean,
                hv_std,
                verdict_igd_plus,
                verdict_hv,
            }
        })
        .collect();
    CampaignSummary {
        baseline: baseline.to_string(),
        cells,
    }
}

/// Runs every config `repeats` times with seeds `config.seed + r`, using up
/// to `parallelism` worker threads. Failed runs are recorded and the
/// campaign continues.
pub fn run_campaign(configs: &[RunConfig], repeats: usize, parallelism: usize) -> Result<CampaignResult> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let mut jobs = Vec::with_capacity(configs.len() * repeats);
    for c in configs {
        for r in 0..repeats {
            let mut job = c.clone();
            job.seed = c.seed + r as u64;
            jobs.push(job);
        }
    }

    // Reference fronts are shared by every run on the same instance.
    let mut contexts: HashMap<String, MetricContext> = HashMap::new();
    for c in configs {
        let resolved = c.resolved()?;
        let key = context_key(&resolved);
        if !contexts.contains_key(&key) {
            let spec = resolved.problem_spec()?;
            contexts.insert(key, MetricContext::new(&spec, resolved.reference_size)?);
        }
    }

    let run_one = |job: &RunConfig| -> RunOutcome {
        let attempt = job.resolved().and_then(|c| {
            let spec = c.problem_spec()?;
            run_with_context(&c, &spec, &contexts[&context_key(&c)])
        });
        match attempt {
            Ok(r) => {
                log::info!(
                    "{}: IGD+ {:.4e}, HV {:.4e}",
                    r.run_id,
                    r.final_igd_plus(),
                    r.final_hv()
                );
                RunOutcome::Finished(Box::new(r))
            }
            Err(error) => {
                log::error!("{}: {error}", job.run_id());
                RunOutcome::Failed {
                    run_id: job.run_id(),
                    error,
                }
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<RunOutcome> = pool.install(|| jobs.par_iter().map(run_one).collect());

    let finals: Vec<FinalResult> = outcomes
        .iter()
        .zip(&jobs)
        .map(|(o, job)| match o {
            RunOutcome::Finished(r) => FinalResult::from_record(r),
            RunOutcome::Failed { run_id, .. } => FinalResult {
                run_id: run_id.clone(),
                problem: problem_label(&job.resolved().unwrap_or_else(|_| job.clone())),
                variant: job.variant().label(),
                seed: job.seed,
                completed: false,
                igd_plus: f64::NAN,
                hv: f64::NAN,
            },
        })
        .collect();
    let summary = summarize(&finals, BASELINE_VARIANT);
    Ok(CampaignResult {
        outcomes,
        finals,
        summary,
    })
}

fn context_key(c: &RunConfig) -> String {
    format!("{}:{:?}:{:?}:{:?}", c.problem, c.d, c.m, c.reference_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(problem: &str, variant: &str, seed: u64, igd: f64) -> FinalResult {
        FinalResult {
            run_id: format!("{problem}_{variant}_seed{seed}"),
            problem: problem.into(),
            variant: variant.into(),
            seed,
            completed: true,
            igd_plus: igd,
            hv: 1.0 - igd,
        }
    }

    #[test]
    fn summary_statistics_and_verdicts() {
        let mut finals = Vec::new();
        for s in 0..10 {
            finals.push(fr("ZDT1", "CI-EMO", s, 0.01 + 0.001 * s as f64));
            finals.push(fr("ZDT1", "rand-EMO", s, 0.5 + 0.001 * s as f64));
        }
        let mut failed = fr("ZDT1", "rand-EMO", 99, f64::NAN);
        failed.completed = false;
        finals.push(failed);
        let summary = summarize(&finals, BASELINE_VARIANT);
        assert_eq!(summary.cells.len(), 2);
        let base = summary.cell("ZDT1", "CI-EMO").unwrap();
        assert!((base.igd_plus_mean - 0.0145).abs() < 1e-12);
        assert_eq!(base.verdict_igd_plus, None);
        let rand = summary.cell("ZDT1", "rand-EMO").unwrap();
        assert_eq!(rand.verdict_igd_plus, Some(Verdict::Worse));
        assert_eq!(rand.verdict_hv, Some(Verdict::Worse));
        assert_eq!(rand.runs, 11);
        assert!(rand.is_incomplete());
    }

    #[test]
    fn single_run_mean_is_that_run() {
        let summary = summarize(&[fr("DTLZ2", "CI-EMO", 0, 0.25)], BASELINE_VARIANT);
        assert_eq!(summary.cells[0].igd_plus_mean, 0.25);
        assert_eq!(summary.cells[0].igd_plus_std, 0.0);
    }
}
