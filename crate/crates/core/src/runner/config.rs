use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infill::{IndicatorMask, InfillVariant, WeightMode};
use crate::moea::{SearchParams, VariationParams};
use crate::problems::{ProblemKind, ProblemSpec};

/// Full parameterization of one run. Serialized as a flat TOML table; every
/// key has a CLI flag of the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Initial design size; default `min(11d - 1, 100)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    /// Total expensive evaluations; default 200 for two objectives, 300 otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total: Option<usize>,
    pub t_max: usize,
    pub indicators: IndicatorMask,
    pub weights: WeightMode,
    pub normalize: bool,
    pub q: usize,
    pub random_pick: bool,
    pub seed: u64,
    pub metric_cadence: usize,
    pub eta_c: f64,
    pub p_c: f64,
    pub eta_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_size: Option<usize>,
    /// Campaign repeat count (ignored by single runs).
    pub repeats: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let variation = VariationParams::default();
        Self {
            problem: ProblemKind::Zdt1,
            d: None,
            m: None,
            n0: None,
            n_total: None,
            t_max: SearchParams::default().t_max,
            indicators: IndicatorMask::ALL,
            weights: WeightMode::Random,
            normalize: true,
            q: 1,
            random_pick: false,
            seed: 0,
            metric_cadence: 1,
            eta_c: variation.eta_c,
            p_c: variation.p_c,
            eta_m: variation.eta_m,
            p_m: None,
            reference_size: None,
            repeats: 21,
            out_dir: None,
        }
    }
}

/// `11d - 1`, capped at 100.
pub fn default_initial_samples(d: usize) -> usize {
    (11 * d).saturating_sub(1).min(100)
}

pub fn default_budget(m: usize) -> usize {
    if m == 2 {
        200
    } else {
        300
    }
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            ..Self::default()
        }
    }

    pub fn with_variant(mut self, v: &InfillVariant) -> Self {
        self.indicators = v.indicators;
        self.weights = v.weights;
        self.normalize = v.normalize;
        self.q = v.q;
        self.random_pick = v.random_pick;
        self
    }

    pub fn variant(&self) -> InfillVariant {
        InfillVariant {
            indicators: self.indicators,
            weights: self.weights,
            normalize: self.normalize,
            q: self.q,
            random_pick: self.random_pick,
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.problem, self.d, self.m)
    }

    /// Fills every defaulted dimension/budget field and validates the result.
    pub fn resolved(&self) -> Result<RunConfig> {
        let spec = self.problem_spec()?;
        let mut c = self.clone();
        c.d = Some(spec.d());
        c.m = Some(spec.m());
        let n0 = c.n0.unwrap_or_else(|| default_initial_samples(spec.d()));
        let n_total = c.n_total.unwrap_or_else(|| default_budget(spec.m()));
        c.n0 = Some(n0);
        c.n_total = Some(n_total);
        if n0 < 2 {
            return Err(Error::Config(format!("n0 = {n0}, need at least 2")));
        }
        if n0 > n_total {
            return Err(Error::Config(format!("n0 = {n0} exceeds n_total = {n_total}")));
        }
        if c.q == 0 {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if c.metric_cadence == 0 {
            return Err(Error::Config("metric_cadence must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&c.p_c) || c.p_m.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Config("probabilities must lie in [0, 1]".into()));
        }
        Ok(c)
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            t_max: self.t_max,
            variation: VariationParams {
                eta_c: self.eta_c,
                p_c: self.p_c,
                eta_m: self.eta_m,
                p_m: self.p_m,
                ..VariationParams::default()
            },
        }
    }

    /// `<PROBLEM>[-M<m>]_<variant>_seed<seed>`.
    pub fn run_id(&self) -> String {
        let m = match self.m {
            Some(m) if m != 2 => format!("-M{m}"),
            _ => String::new(),
        };
        format!(
            "{}{}_{}_seed{}",
            self.problem,
            m,
            self.variant().label(),
            self.seed
        )
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}
