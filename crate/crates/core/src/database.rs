use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::pareto::{nondominated_unchecked, DecisionVector, ObjectiveVector};

/// One truly evaluated design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSample {
    pub x: DecisionVector,
    pub f: ObjectiveVector,
    /// 1-based ordinal of the expensive evaluation that produced this sample.
    pub eval_index: usize,
}

/// The archive of expensive evaluations. Append-only.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    d: usize,
    m: usize,
    samples: Vec<EvaluatedSample>,
    ideal: Vec<f64>,
    nadir: Vec<f64>,
}

impl Database {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            m,
            samples: Vec::new(),
            ideal: vec![f64::INFINITY; m],
            nadir: vec![f64::NEG_INFINITY; m],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[EvaluatedSample] {
        &self.samples
    }

    /// Appends a sample; its `eval_index` is assigned as `len() + 1`.
    pub fn push(&mut self, x: DecisionVector, f: ObjectiveVector) -> Result<&EvaluatedSample> {
        check_len(self.d, x.len())?;
        check_len(self.m, f.len())?;
        if let Some((i, v)) = f.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "objective {i} is not finite ({v})"
            )));
        }
        for (i, &v) in f.iter().enumerate() {
            self.ideal[i] = self.ideal[i].min(v);
            self.nadir[i] = self.nadir[i].max(v);
        }
        let eval_index = self.samples.len() + 1;
        self.samples.push(EvaluatedSample { x, f, eval_index });
        Ok(self.samples.last().expect("just pushed"))
    }

    /// Per-objective minimum over all samples.
    pub fn ideal_point(&self) -> Result<ObjectiveVector> {
        if self.is_empty() {
            return Err(Error::EmptyInput("database"));
        }
        Ok(self.ideal.clone())
    }

    /// Per-objective maximum over all samples.
    pub fn nadir_point(&self) -> Result<ObjectiveVector> {
        if self.is_empty() {
            return Err(Error::EmptyInput("database"));
        }
        Ok(self.nadir.clone())
    }

    pub fn objectives(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.f.as_slice()).collect()
    }

    /// Indices of the non-dominated samples.
    pub fn nondominated_indices(&self) -> Vec<usize> {
        if self.is_empty() {
            return Vec::new();
        }
        nondominated_unchecked(&self.objectives())
    }

    pub fn nondominated_objectives(&self) -> Vec<ObjectiveVector> {
        self.nondominated_indices()
            .into_iter()
            .map(|i| self.samples[i].f.clone())
            .collect()
    }
}

/// Componentwise minimum over the samples of `db`.
pub fn ideal_point(db: &Database) -> Result<ObjectiveVector> {
    db.ideal_point()
}
