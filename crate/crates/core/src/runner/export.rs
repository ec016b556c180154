//! CSV and TOML output of runs and campaigns.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::Verdict;
use crate::runner::campaign::{CampaignSummary, FinalResult};
use crate::runner::config::RunConfig;
use crate::runner::run::{EvaluationLog, RunRecord, TrajectoryPoint};

fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `runs.csv`, `trajectory.csv` and `config.toml` under
/// `root/<run_id>/` and returns that directory.
pub fn write_run(root: &Path, record: &RunRecord) -> Result<PathBuf> {
    let dir = root.join(&record.run_id);
    create_dir(&dir)?;
    write_evaluations(&dir.join("runs.csv"), &record.run_id, &record.evaluations)?;
    write_trajectory(&dir.join("trajectory.csv"), &record.run_id, &record.trajectory)?;
    let cfg = dir.join("config.toml");
    fs::write(&cfg, record.config.to_toml_string()).map_err(|e| Error::io(&cfg, e))?;
    Ok(dir)
}

pub fn write_evaluations(path: &Path, run_id: &str, rows: &[EvaluationLog]) -> Result<()> {
    let (d, m) = rows.first().map_or((0, 0), |r| (r.x.len(), r.f.len()));
    let mut w = writer(path)?;
    let mut header = vec!["run_id".to_string(), "eval_index".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("f{i}")));
    header.extend(["r1", "r2", "r3", "i1", "i2", "i3"].map(String::from));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        let mut rec = vec![run_id.to_string(), r.eval_index.to_string()];
        rec.extend(r.x.iter().map(|&v| fmt(v)));
        rec.extend(r.f.iter().map(|&v| fmt(v)));
        for group in [r.weights, r.indicators] {
            match group {
                Some(g) => rec.extend(g.iter().map(|&v| fmt(v))),
                None => rec.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory(path: &Path, run_id: &str, points: &[TrajectoryPoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["run_id", "eval_index", "igd_plus", "hv"])
        .map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([run_id.to_string(), p.eval_index.to_string(), fmt(p.igd_plus), fmt(p.hv)])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads the evaluations back from a `runs.csv` file.
pub fn read_evaluations(path: &Path) -> Result<Vec<EvaluationLog>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    let d = headers.iter().filter(|h| h.starts_with('x')).count();
    let m = headers.iter().filter(|h| h.starts_with('f')).count();
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Config(format!("{}: bad number {s:?}", path.display())))
    };
    let triple = |fields: &[&str]| -> Result<Option<[f64; 3]>> {
        if fields.iter().all(|s| s.is_empty()) {
            return Ok(None);
        }
        Ok(Some([parse(fields[0])?, parse(fields[1])?, parse(fields[2])?]))
    };
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let fields: Vec<&str> = row.iter().collect();
        if fields.len() != 2 + d + m + 6 {
            return Err(Error::Config(format!(
                "{}: expected {} columns, found {}",
                path.display(),
                2 + d + m + 6,
                fields.len()
            )));
        }
        let eval_index = fields[1]
            .parse()
            .map_err(|_| Error::Config(format!("{}: bad eval_index {:?}", path.display(), fields[1])))?;
        let x = fields[2..2 + d].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let f = fields[2 + d..2 + d + m].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let base = 2 + d + m;
        out.push(EvaluationLog {
            eval_index,
            x,
            f,
            weights: triple(&fields[base..base + 3])?,
            indicators: triple(&fields[base + 3..base + 6])?,
        });
    }
    Ok(out)
}

fn verdict(v: Option<Verdict>) -> String {
    v.map_or(String::new(), |v| v.symbol().to_string())
}

pub fn write_summary(path: &Path, summary: &CampaignSummary) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "problem",
        "variant",
        "runs",
        "failed",
        "igd_plus_mean",
        "igd_plus_std",
        "igd_plus_verdict",
        "hv_mean",
        "hv_std",
        "hv_verdict",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for c in &summary.cells {
        w.write_record([
            c.problem.clone(),
            c.variant.clone(),
            c.runs.to_string(),
            c.failed.to_string(),
            fmt(c.igd_plus_mean),
            fmt(c.igd_plus_std),
            verdict(c.verdict_igd_plus),
            fmt(c.hv_mean),
            fmt(c.hv_std),
            verdict(c.verdict_hv),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_finals(path: &Path, finals: &[FinalResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["run_id", "problem", "variant", "seed", "completed", "igd_plus", "hv"])
        .map_err(|e| Error::csv(path, e))?;
    for f in finals {
        w.write_record([
            f.run_id.clone(),
            f.problem.clone(),
            f.variant.clone(),
            f.seed.to_string(),
            f.completed.to_string(),
            fmt(f.igd_plus),
            fmt(f.hv),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_finals(path: &Path) -> Result<Vec<FinalResult>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let bad = || Error::Config(format!("{}: malformed row {:?}", path.display(), row));
        if row.len() != 7 {
            return Err(bad());
        }
        out.push(FinalResult {
            run_id: row[0].to_string(),
            problem: row[1].to_string(),
            variant: row[2].to_string(),
            seed: row[3].parse().map_err(|_| bad())?,
            completed: row[4].parse().map_err(|_| bad())?,
            igd_plus: row[5].parse().map_err(|_| bad())?,
            hv: row[6].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Loads `config.toml` from a run directory.
pub fn read_run_config(dir: &Path) -> Result<RunConfig> {
    RunConfig::load(&dir.join("config.toml"))
}
