use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::database::Database;
use crate::error::{Error, Result};
use crate::infill::select;
use crate::metrics::{hypervolume, igd_plus, normalize_by, MetricReport};
use crate::moea::{das_dennis, lattice_density_for, sa_nsga3};
use crate::pareto::{dominates_unchecked, DecisionVector, ObjectiveVector};
use crate::problems::{default_reference_size, evaluate, true_front_reference, EvaluationBudget, ProblemSpec};
use crate::runner::config::RunConfig;
use crate::sampling::{latin_hypercube, RngStream};
use crate::surrogate::{fit_gp, GpModel, GpOptions};

/// Reference data for scoring archives of one problem instance.
///
/// IGD+ is measured in raw objective units against the sampled true front.
/// Hypervolume is measured after mapping the front's ideal/nadir to 0/1,
/// with the reference point at 1.1 in every objective.
#[derive(Debug, Clone)]
pub struct MetricContext {
    reference: Vec<ObjectiveVector>,
    ideal: Vec<f64>,
    nadir: Vec<f64>,
    ref_point: Vec<f64>,
}

impl MetricContext {
    pub fn new(spec: &ProblemSpec, reference_size: Option<usize>) -> Result<Self> {
        let n = reference_size.unwrap_or_else(|| default_reference_size(spec.m()));
        let reference = true_front_reference(spec, n)?;
        let m = spec.m();
        let ideal = (0..m)
            .map(|i| reference.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let nadir = (0..m)
            .map(|i| reference.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self {
            reference,
            ideal,
            nadir,
            ref_point: vec![1.1; m],
        })
    }

    pub fn reference(&self) -> &[ObjectiveVector] {
        &self.reference
    }

    pub fn igd_plus(&self, front: &[ObjectiveVector]) -> Result<f64> {
        igd_plus(front, &self.reference)
    }

    pub fn hypervolume(&self, front: &[ObjectiveVector]) -> Result<f64> {
        if self.ref_point.len() > 3 {
            return Ok(f64::NAN);
        }
        hypervolume(&normalize_by(front, &self.ideal, &self.nadir), &self.ref_point)
    }

    pub fn report(&self, front: &[ObjectiveVector]) -> Result<MetricReport> {
        Ok(MetricReport {
            igd_plus: self.igd_plus(front)?,
            hv: self.hypervolume(front)?,
            n_solutions: front.len(),
            reference_meta: format!(
                "{} true-front points; HV on front-normalized objectives, reference point 1.1",
                self.reference.len()
            ),
        })
    }
}

/// Incrementally maintained non-dominated set of an archive.
#[derive(Debug, Clone, Default)]
pub struct FrontTracker {
    front: Vec<ObjectiveVector>,
}

impl FrontTracker {
    pub fn insert(&mut self, f: &[f64]) {
        if self.front.iter().any(|p| dominates_unchecked(p, f)) {
            return;
        }
        self.front.retain(|p| !dominates_unchecked(f, p));
        self.front.push(f.to_vec());
    }

    pub fn front(&self) -> &[ObjectiveVector] {
        &self.front
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub eval_index: usize,
    pub igd_plus: f64,
    pub hv: f64,
}

/// Records archive metrics at `n0` and then every `cadence` evaluations,
/// plus the final evaluation.
pub struct TrajectoryRecorder<'a> {
    ctx: &'a MetricContext,
    n0: usize,
    n_total: usize,
    cadence: usize,
    tracker: FrontTracker,
    points: Vec<TrajectoryPoint>,
}

impl<'a> TrajectoryRecorder<'a> {
    pub fn new(ctx: &'a MetricContext, n0: usize, n_total: usize, cadence: usize) -> Self {
        Self {
            ctx,
            n0,
            n_total,
            cadence: cadence.max(1),
            tracker: FrontTracker::default(),
            points: Vec::new(),
        }
    }

    /// Feeds the `eval_index`-th evaluated objective vector.
    pub fn observe(&mut self, eval_index: usize, f: &[f64]) -> Result<()> {
        self.tracker.insert(f);
        if eval_index >= self.n0
            && ((eval_index - self.n0).is_multiple_of(self.cadence) || eval_index == self.n_total)
        {
            let front = self.tracker.front();
            self.points.push(TrajectoryPoint {
                eval_index,
                igd_plus: self.ctx.igd_plus(front)?,
                hv: self.ctx.hypervolume(front)?,
            });
        }
        Ok(())
    }

    pub fn front(&self) -> &[ObjectiveVector] {
        self.tracker.front()
    }

    pub fn into_points(self) -> Vec<TrajectoryPoint> {
        self.points
    }
}

/// One row of the per-evaluation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationLog {
    pub eval_index: usize,
    pub x: DecisionVector,
    pub f: ObjectiveVector,
    /// Weights drawn for the slot that produced this point.
    pub weights: Option<[f64; 3]>,
    /// I1/I2/I3 of the chosen candidate.
    pub indicators: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub gp_fit: Duration,
    pub search: Duration,
    pub select: Duration,
    pub evaluate: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    /// The run stopped early; the archive holds everything evaluated so far.
    Aborted(String),
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: String,
    /// Resolved configuration.
    pub config: RunConfig,
    pub evaluations: Vec<EvaluationLog>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub final_front: Vec<ObjectiveVector>,
    pub final_metrics: MetricReport,
    pub iterations: usize,
    pub timings: PhaseTimings,
    pub status: RunStatus,
}

// Wall-clock timings are excluded: two executions of the same configuration
// compare equal.
impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.run_id == other.run_id
            && self.config == other.config
            && self.evaluations == other.evaluations
            && self.trajectory == other.trajectory
            && self.final_front == other.final_front
            && self.final_metrics == other.final_metrics
            && self.iterations == other.iterations
            && self.status == other.status
    }
}

impl RunRecord {
    pub fn final_igd_plus(&self) -> f64 {
        self.final_metrics.igd_plus
    }

    pub fn final_hv(&self) -> f64 {
        self.final_metrics.hv
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// Fits one model per objective on the whole archive.
pub fn fit_models(db: &Database, spec: &ProblemSpec, opts: &GpOptions) -> Result<Vec<GpModel>> {
    let x: Vec<Vec<f64>> = db.samples().iter().map(|s| s.x.clone()).collect();
    (0..db.m())
        .into_par_iter()
        .map(|i| {
            let y: Vec<f64> = db.samples().iter().map(|s| s.f[i]).collect();
            fit_gp(&x, &y, spec.lower(), spec.upper(), opts)
        })
        .collect()
}

/// Runs the full optimization loop: Latin hypercube initialization, then
/// {fit surrogates, surrogate-assisted search, composite-indicator selection,
/// true evaluation} until the evaluation budget is spent.
pub fn run_ci_emo(config: &RunConfig) -> Result<RunRecord> {
    let config = config.resolved()?;
    let spec = config.problem_spec()?;
    let ctx = MetricContext::new(&spec, config.reference_size)?;
    run_with_context(&config, &spec, &ctx)
}

pub(crate) fn run_with_context(
    config: &RunConfig,
    spec: &ProblemSpec,
    ctx: &MetricContext,
) -> Result<RunRecord> {
    let n0 = config.n0.expect("resolved");
    let n_total = config.n_total.expect("resolved");
    let variant = config.variant();
    let search = config.search_params();
    let gp_opts = GpOptions::default();
    let refs = das_dennis(spec.m(), lattice_density_for(spec.m(), n0));

    let mut init_rng = RngStream::new(config.seed, "init");
    let mut moea_rng = RngStream::new(config.seed, "moea");
    let mut weight_rng = RngStream::new(config.seed, "weights");

    let mut budget = EvaluationBudget::new(n_total);
    let mut db = Database::new(spec.d(), spec.m());
    let mut recorder = TrajectoryRecorder::new(ctx, n0, n_total, config.metric_cadence);
    let mut log = Vec::with_capacity(n_total);
    let mut timings = PhaseTimings::default();

    let started = Instant::now();
    for x in latin_hypercube(n0, spec, &mut init_rng)? {
        let f = evaluate(spec, &x, &mut budget)?;
        let s = db.push(x, f)?;
        recorder.observe(s.eval_index, &s.f)?;
        log.push(EvaluationLog {
            eval_index: s.eval_index,
            x: s.x.clone(),
            f: s.f.clone(),
            weights: None,
            indicators: None,
        });
    }
    timings.evaluate += started.elapsed();

    let mut status = RunStatus::Completed;
    let mut iterations = 0;
    while !budget.is_exhausted() {
        let t = Instant::now();
        let models = match fit_models(&db, spec, &gp_opts) {
            Ok(m) => m,
            Err(e @ Error::IllConditioned { .. }) => {
                log::warn!("{}: aborting after {} evaluations: {e}", config.run_id(), db.len());
                status = RunStatus::Aborted(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        timings.gp_fit += t.elapsed();

        let t = Instant::now();
        let pstar = sa_nsga3(
            &db,
            &models,
            &refs,
            spec.lower(),
            spec.upper(),
            &search,
            &mut moea_rng,
        )?;
        timings.search += t.elapsed();

        let t = Instant::now();
        let mut slot_variant = variant;
        slot_variant.q = variant.q.min(budget.remaining()).min(pstar.len());
        let chosen = select(&pstar, &db, &slot_variant, spec.lower(), spec.upper(), &mut weight_rng)?;
        timings.select += t.elapsed();

        let t = Instant::now();
        for (x, slot) in chosen.points.into_iter().zip(chosen.slots) {
            let f = evaluate(spec, &x, &mut budget)?;
            let s = db.push(x, f)?;
            recorder.observe(s.eval_index, &s.f)?;
            log.push(EvaluationLog {
                eval_index: s.eval_index,
                x: s.x.clone(),
                f: s.f.clone(),
                weights: slot.weights,
                indicators: slot.indicators,
            });
        }
        timings.evaluate += t.elapsed();
        iterations += 1;
    }

    let final_front = db.nondominated_objectives();
    let final_metrics = ctx.report(&final_front)?;
    Ok(RunRecord {
        run_id: config.run_id(),
        config: config.clone(),
        evaluations: log,
        trajectory: recorder.into_points(),
        final_front,
        final_metrics,
        iterations,
        timings,
        status,
    })
}
