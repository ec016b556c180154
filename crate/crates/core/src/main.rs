use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ciemo::error::{Error, Result};
use ciemo::infill::{IndicatorMask, InfillVariant, WeightMode};
use ciemo::problems::ProblemKind;
use ciemo::runner::campaign::{run_campaign, summarize, BASELINE_VARIANT};
use ciemo::runner::export;
use ciemo::runner::run::{MetricContext, TrajectoryRecorder};
use ciemo::runner::{run_ci_emo, CampaignSummary, RunConfig};

#[derive(Parser)]
#[command(name = "ciemo", version, about = "Composite-indicator infill for expensive multi-objective optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization.
    Run {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a grid of problems and variants with repeated seeds.
    Campaign {
        /// Comma-separated problem names; `DTLZ2:3` sets three objectives.
        #[arg(long, value_delimiter = ',', default_value = "ZDT1")]
        problems: Vec<String>,
        /// Comma-separated variant shorthands (ci, rand, i3, no-i1, no-norm, sw, q10, ...).
        #[arg(long, value_delimiter = ',', default_value = "ci,rand")]
        variants: Vec<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute metrics of a finished run from its `runs.csv` and `config.toml`.
    Metrics {
        /// Run directory.
        dir: PathBuf,
    },
    /// Print the summary table of a campaign from its `finals.csv`.
    Report {
        /// `finals.csv` or the directory holding it.
        path: PathBuf,
        #[arg(long, default_value = BASELINE_VARIANT)]
        baseline: String,
    },
}

/// Every configuration key, each optional. Flags override the `--config` file.
#[derive(Args, Default)]
struct Overrides {
    /// TOML file with run settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long = "n_total", alias = "n-total")]
    n_total: Option<usize>,
    #[arg(long = "t_max", alias = "t-max")]
    t_max: Option<usize>,
    /// Indicator subset, e.g. `123` or `23`.
    #[arg(long)]
    indicators: Option<IndicatorMask>,
    /// `random` or `one`.
    #[arg(long)]
    weights: Option<WeightMode>,
    #[arg(long)]
    normalize: Option<bool>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "random_pick", alias = "random-pick")]
    random_pick: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "metric_cadence", alias = "metric-cadence")]
    metric_cadence: Option<usize>,
    #[arg(long = "eta_c", alias = "eta-c")]
    eta_c: Option<f64>,
    #[arg(long = "p_c", alias = "p-c")]
    p_c: Option<f64>,
    #[arg(long = "eta_m", alias = "eta-m")]
    eta_m: Option<f64>,
    #[arg(long = "p_m", alias = "p-m")]
    p_m: Option<f64>,
    #[arg(long = "reference_size", alias = "reference-size")]
    reference_size: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long = "out_dir", alias = "out-dir")]
    out_dir: Option<String>,
}

impl Overrides {
    fn apply(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() { c.$field = v; }
            )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() { c.$field = self.$field.clone(); }
            )*};
        }
        set!(problem, t_max, indicators, weights, normalize, q, random_pick, seed, metric_cadence, eta_c, p_c, eta_m, repeats);
        set_opt!(d, m, n0, n_total, p_m, reference_size, out_dir);
        Ok(c)
    }
}

fn parse_problem(spec: &str) -> Result<(ProblemKind, Option<usize>)> {
    match spec.split_once(':') {
        Some((name, m)) => {
            let m = m
                .parse()
                .map_err(|_| Error::Config(format!("bad objective count in `{spec}`")))?;
            Ok((name.parse()?, Some(m)))
        }
        None => Ok((spec.parse()?, None)),
    }
}

fn print_summary(summary: &CampaignSummary) {
    println!(
        "{:<12} {:<20} {:>4} {:>14} {:>12} {:>3} {:>14} {:>12} {:>3}",
        "problem", "variant", "runs", "IGD+ mean", "IGD+ std", "", "HV mean", "HV std", ""
    );
    for c in &summary.cells {
        let v = |v: Option<ciemo::Verdict>| v.map_or("", |v| v.symbol());
        let flag = if c.is_incomplete() {
            format!(" ({} failed)", c.failed)
        } else {
            String::new()
        };
        println!(
            "{:<12} {:<20} {:>4} {:>14.4e} {:>12.4e} {:>3} {:>14.4e} {:>12.4e} {:>3}{flag}",
            c.problem,
            c.variant,
            c.runs,
            c.igd_plus_mean,
            c.igd_plus_std,
            v(c.verdict_igd_plus),
            c.hv_mean,
            c.hv_std,
            v(c.verdict_hv),
        );
    }
}

fn cmd_run(overrides: &Overrides) -> Result<()> {
    let config = overrides.apply()?;
    let record = run_ci_emo(&config)?;
    println!(
        "{}: {} evaluations, IGD+ {:.6e}, HV {:.6e}, {} non-dominated",
        record.run_id,
        record.evaluations.len(),
        record.final_igd_plus(),
        record.final_hv(),
        record.final_front.len()
    );
    log::info!(
        "timings: gp_fit {:?}, search {:?}, select {:?}, evaluate {:?}",
        record.timings.gp_fit,
        record.timings.search,
        record.timings.select,
        record.timings.evaluate
    );
    if let Some(out) = &record.config.out_dir {
        let dir = export::write_run(Path::new(out), &record)?;
        println!("wrote {}", dir.display());
    }
    if !record.is_complete() {
        log::warn!("{}: {:?}", record.run_id, record.status);
    }
    Ok(())
}

fn cmd_campaign(problems: &[String], variants: &[String], parallelism: usize, overrides: &Overrides) -> Result<()> {
    let base = overrides.apply()?;
    let mut configs = Vec::new();
    for p in problems {
        let (kind, m) = parse_problem(p)?;
        for v in variants {
            let variant = InfillVariant::from_shorthand(v)?;
            let mut c = base.clone().with_variant(&variant);
            c.problem = kind;
            if m.is_some() {
                c.m = m;
            }
            configs.push(c);
        }
    }
    let result = run_campaign(&configs, base.repeats, parallelism)?;
    if let Some(out) = &base.out_dir {
        let root = Path::new(out);
        for r in result.records() {
            export::write_run(root, r)?;
        }
        export::write_finals(&root.join("finals.csv"), &result.finals)?;
        export::write_summary(&root.join("summary.csv"), &result.summary)?;
        println!("wrote {}", root.display());
    }
    print_summary(&result.summary);
    Ok(())
}

fn cmd_metrics(dir: &Path) -> Result<()> {
    let config = export::read_run_config(dir)?.resolved()?;
    let rows = export::read_evaluations(&dir.join("runs.csv"))?;
    let spec = config.problem_spec()?;
    let ctx = MetricContext::new(&spec, config.reference_size)?;
    let n0 = config.n0.unwrap_or(rows.len()).min(rows.len());
    let mut rec = TrajectoryRecorder::new(&ctx, n0, rows.len(), config.metric_cadence);
    for r in &rows {
        rec.observe(r.eval_index, &r.f)?;
    }
    let report = ctx.report(rec.front())?;
    let points = rec.into_points();
    let out = dir.join("trajectory.csv");
    export::write_trajectory(&out, &config.run_id(), &points)?;
    println!(
        "{}: {} evaluations, IGD+ {:.6e}, HV {:.6e}, {} non-dominated",
        config.run_id(),
        rows.len(),
        report.igd_plus,
        report.hv,
        report.n_solutions
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_report(path: &Path, baseline: &str) -> Result<()> {
    let file = if path.is_dir() {
        path.join("finals.csv")
    } else {
        path.to_path_buf()
    };
    let finals = export::read_finals(&file)?;
    print_summary(&summarize(&finals, baseline));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { overrides } => cmd_run(overrides),
        Command::Campaign {
            problems,
            variants,
            parallelism,
            overrides,
        } => cmd_campaign(problems, variants, *parallelism, overrides),
        Command::Metrics { dir } => cmd_metrics(dir),
        Command::Report { path, baseline } => cmd_report(path, baseline),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
