//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! `ACCEPTANCE_SEEDS` lowers the number of seeds per cell for a quick look
//! (the criteria are defined for 21). `ACCEPTANCE_OUT` writes every run and
//! the campaign tables under that directory.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ciemo::infill::InfillVariant;
use ciemo::runner::campaign::{run_campaign, summarize, FinalResult, BASELINE_VARIANT};
use ciemo::runner::export;
use ciemo::runner::run::MetricContext;
use ciemo::{run_ci_emo, ProblemKind, RunConfig, RunRecord, Verdict};

const SEEDS: usize = 21;
const PROBLEMS: [ProblemKind; 6] = [
    ProblemKind::Zdt1,
    ProblemKind::Zdt2,
    ProblemKind::Zdt3,
    ProblemKind::Zdt6,
    ProblemKind::Dtlz2,
    ProblemKind::Dtlz7,
];
/// f1 gap that separates two pieces of a disconnected front.
const SEGMENT_GAP: f64 = 0.05;
/// A segment counts as hit when a final point lies this close to it.
const HIT_RADIUS: f64 = 0.05;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, ok: bool, text: String) {
        println!("{} criterion {id}: {text}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }

    fn suite(&mut self, id: usize, name: &str, failures: Vec<String>) {
        let ok = failures.is_empty();
        let detail = failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
        let text = if ok {
            format!("{name}: all checks pass")
        } else {
            format!("{name}: {} failed checks, e.g. {detail}", failures.len())
        };
        self.line(id, ok, text);
    }
}

/// Splits the sampled true front into pieces separated by f1 gaps.
fn front_segments(reference: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let mut pts = reference.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut segments: Vec<Vec<Vec<f64>>> = Vec::new();
    for p in pts {
        match segments.last_mut() {
            Some(s) if p[0] - s.last().unwrap()[0] <= SEGMENT_GAP => s.push(p),
            _ => segments.push(vec![p]),
        }
    }
    segments
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn hits_all(front: &[Vec<f64>], segments: &[Vec<Vec<f64>>]) -> bool {
    segments
        .iter()
        .all(|s| s.iter().any(|r| front.iter().any(|p| dist(p, r) <= HIT_RADIUS)))
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn main() -> ExitCode {
    let seeds: usize = std::env::var("ACCEPTANCE_SEEDS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(SEEDS);
    let out = std::env::var("ACCEPTANCE_OUT").ok();
    let mut report = Report { failed: 0 };

    // Oracle suites first: they take seconds.
    let mut gp = common::suites::gp_fixture();
    gp.extend(common::suites::gp_interpolation_and_variance(10_000));
    report.suite(6, "GP oracle suite", gp);
    let mut metric = common::suites::hv_monte_carlo(50, 1_000_000);
    metric.extend(common::suites::igd_plus_fixtures());
    metric.extend(common::suites::sort_vs_peeling(200));
    report.suite(7, "metric oracle suite", metric);
    report.suite(8, "indicator bound suite", common::suites::indicator_bounds(1000));

    let ci = InfillVariant::default();
    let mut groups: Vec<RunConfig> = Vec::new();
    for p in PROBLEMS {
        groups.push(RunConfig::new(p).with_variant(&ci));
        groups.push(RunConfig::new(p).with_variant(&InfillVariant::random()));
    }
    groups.push(RunConfig::new(ProblemKind::Dtlz7).with_variant(&InfillVariant::only("3").unwrap()));
    groups.push(RunConfig::new(ProblemKind::Dtlz7).with_variant(&InfillVariant { q: 10, ..ci }));

    let started = Instant::now();
    let mut finals: Vec<FinalResult> = Vec::new();
    let mut records: Vec<RunRecord> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let t = Instant::now();
        let result = match run_campaign(std::slice::from_ref(g), seeds, 1) {
            Ok(r) => r,
            Err(e) => {
                println!("FAIL campaign: {e}");
                return ExitCode::FAILURE;
            }
        };
        eprintln!(
            "[{}/{}] {} x{seeds} in {:.0?} (total {:.0?})",
            i + 1,
            groups.len(),
            g.run_id().trim_end_matches(&format!("_seed{}", g.seed)),
            t.elapsed(),
            started.elapsed()
        );
        finals.extend(result.finals.iter().cloned());
        records.extend(result.records().cloned());
    }
    let summary = summarize(&finals, BASELINE_VARIANT);
    if let Some(dir) = &out {
        let root = Path::new(dir);
        let written = records
            .iter()
            .try_for_each(|r| export::write_run(root, r).map(drop))
            .and_then(|_| export::write_finals(&root.join("finals.csv"), &finals))
            .and_then(|_| export::write_summary(&root.join("summary.csv"), &summary));
        if let Err(e) = written {
            eprintln!("could not write results: {e}");
        }
    }

    let cell = |problem: &str, variant: &str| summary.cell(problem, variant);
    let describe = |problem: &str, variant: &str| match cell(problem, variant) {
        Some(c) => format!("{:.4e} ± {:.2e} over {} runs", c.igd_plus_mean, c.igd_plus_std, c.runs),
        None => "no completed runs".into(),
    };
    let mean_igd = |problem: &str, variant: &str| {
        cell(problem, variant)
            .filter(|c| !c.is_incomplete())
            .map_or(f64::INFINITY, |c| c.igd_plus_mean)
    };

    let run_seconds: Vec<f64> = records
        .iter()
        .filter(|r| r.config.problem == ProblemKind::Zdt1 && r.config.variant() == ci)
        .map(|r| {
            let t = &r.timings;
            (t.gp_fit + t.search + t.select + t.evaluate).as_secs_f64()
        })
        .collect();
    let per_run = mean(run_seconds.iter().copied());
    let m = mean_igd("ZDT1", BASELINE_VARIANT);
    report.line(
        1,
        m <= 8.0e-3 && per_run <= 180.0,
        format!(
            "ZDT1 mean IGD+ {} (limit 8.0e-3), {per_run:.1} s per run (limit 180 s)",
            describe("ZDT1", BASELINE_VARIANT)
        ),
    );

    let m = mean_igd("DTLZ2", BASELINE_VARIANT);
    report.line(
        2,
        m <= 1.0e-2,
        format!("DTLZ2 mean IGD+ {} (limit 1.0e-2)", describe("DTLZ2", BASELINE_VARIANT)),
    );

    let dtlz7 = RunConfig::new(ProblemKind::Dtlz7).problem_spec().unwrap();
    let segments = front_segments(MetricContext::new(&dtlz7, None).unwrap().reference());
    let hit = records
        .iter()
        .filter(|r| r.config.problem == ProblemKind::Dtlz7 && r.config.variant() == ci)
        .filter(|r| r.is_complete() && hits_all(&r.final_front, &segments))
        .count();
    let need = (18 * seeds).div_ceil(21);
    let m = mean_igd("DTLZ7", BASELINE_VARIANT);
    report.line(
        3,
        m <= 6.0e-3 && hit >= need,
        format!(
            "DTLZ7 mean IGD+ {} (limit 6.0e-3); all {} front segments hit in {hit}/{seeds} runs (need {need})",
            describe("DTLZ7", BASELINE_VARIANT),
            segments.len()
        ),
    );

    let i3 = InfillVariant::only("3").unwrap().label();
    let i3_verdict = cell("DTLZ7", &i3).and_then(|c| c.verdict_igd_plus);
    let ratio = mean_igd("DTLZ7", &i3) / mean_igd("DTLZ7", BASELINE_VARIANT);
    let rand = InfillVariant::random().label();
    let mut losses = Vec::new();
    for p in PROBLEMS {
        if cell(p.name(), &rand).and_then(|c| c.verdict_igd_plus) == Some(Verdict::Worse) {
            losses.push(p.name());
        }
    }
    report.line(
        4,
        i3_verdict == Some(Verdict::Worse) && ratio >= 50.0 && losses.len() >= 4,
        format!(
            "I3-only on DTLZ7 {} (verdict {}), ratio {ratio:.1} (need ≥ 50); rand-EMO loses on {}/6 [{}] (need ≥ 4)",
            describe("DTLZ7", &i3),
            i3_verdict.map_or("none", Verdict::symbol),
            losses.len(),
            losses.join(", ")
        ),
    );

    let q10 = InfillVariant { q: 10, ..ci }.label();
    let q_verdict = cell("DTLZ7", &q10).and_then(|c| c.verdict_igd_plus);
    report.line(
        5,
        q_verdict == Some(Verdict::Worse),
        format!(
            "DTLZ7 q=10 {} vs q=1 {} (verdict {}, need -)",
            describe("DTLZ7", &q10),
            describe("DTLZ7", BASELINE_VARIANT),
            q_verdict.map_or("none", Verdict::symbol)
        ),
    );

    let first = records
        .iter()
        .find(|r| r.config.problem == ProblemKind::Zdt1 && r.config.variant() == ci)
        .expect("ZDT1 record");
    let identical = (|| -> ciemo::Result<bool> {
        let again = run_ci_emo(&first.config)?;
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let da = export::write_run(a.path(), first)?;
        let db = export::write_run(b.path(), &again)?;
        let read = |d: &Path| std::fs::read(d.join("runs.csv")).unwrap();
        Ok(read(&da) == read(&db))
    })();
    let (ok, text) = match identical {
        Ok(true) => (true, format!("{} rerun gives a byte-identical runs.csv", first.run_id)),
        Ok(false) => (false, format!("{} rerun changed runs.csv", first.run_id)),
        Err(e) => (false, format!("rerun failed: {e}")),
    };
    report.line(9, ok, text);

    if seeds != SEEDS {
        println!("note: {seeds} seeds per cell instead of {SEEDS}");
    }
    println!("{} of 9 criteria failed, {:.0?} total", report.failed, started.elapsed());
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
