//! Expensive multi-objective optimization with Gaussian-process surrogates
//! and composite-indicator infill selection.
//!
//! A run starts from a Latin hypercube design, then repeats: fit one GP per
//! objective, evolve a surrogate population with NSGA-III, pick new points
//! by a weighted sum of distribution, diversity and convergence indicators,
//! and evaluate them on the true problem.

pub mod database;
pub mod error;
pub mod infill;
mod linalg;
pub mod metrics;
pub mod moea;
pub mod pareto;
pub mod problems;
pub mod runner;
pub mod sampling;
pub mod surrogate;

pub use database::{Database, EvaluatedSample};
pub use error::{Error, Result};
pub use infill::{select, IndicatorMask, InfillVariant, Selection, WeightMode};
pub use metrics::{hypervolume, igd_plus, wilcoxon_rank_sum, Verdict};
pub use moea::{das_dennis, sa_nsga3, ReferenceVectorSet, SearchParams, SurrogatePopulation};
pub use pareto::{dominates, fast_nondominated_sort, nondominated_subset, DecisionVector, ObjectiveVector};
pub use problems::{evaluate, EvaluationBudget, ProblemKind, ProblemSpec};
pub use runner::{run_campaign, run_ci_emo, RunConfig, RunRecord};
pub use sampling::{latin_hypercube, RngStream};
pub use surrogate::{fit_gp, GpModel, GpOptions, Prediction};
