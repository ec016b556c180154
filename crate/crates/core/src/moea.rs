//! NSGA-III machinery and the surrogate-driven search that produces the
//! candidate population for infill selection.
//!
//! The search never calls the true objective: offspring are scored by a
//! [`Surrogate`], and the ideal point used by environmental selection is
//! fixed to the archive ideal for the whole search.

use rand::Rng;

use crate::database::Database;
use crate::error::{Error, Result};
use crate::pareto::{sort_unchecked, DecisionVector, ObjectiveVector};
use crate::sampling::RngStream;
use crate::surrogate::GpModel;

/// Uniform simplex lattice `{k/H : Σ k = H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceVectorSet {
    pub vectors: Vec<Vec<f64>>,
    pub h: usize,
}

impl ReferenceVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn m(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// Das–Dennis lattice with `C(H + m - 1, m - 1)` points.
pub fn das_dennis(m: usize, h: usize) -> ReferenceVectorSet {
    assert!(m >= 2 && h >= 1, "das_dennis needs m >= 2 and H >= 1");
    let mut vectors = Vec::with_capacity(lattice_count(m, h));
    let mut current = Vec::with_capacity(m);
    fill_lattice(m, h, h, &mut current, &mut vectors);
    ReferenceVectorSet { vectors, h }
}

fn fill_lattice(m: usize, h: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
    if cur.len() == m - 1 {
        cur.push(left);
        out.push(cur.iter().map(|&k| k as f64 / h as f64).collect());
        cur.pop();
        return;
    }
    for k in 0..=left {
        cur.push(k);
        fill_lattice(m, h, left - k, cur, out);
        cur.pop();
    }
}

/// `C(H + m - 1, m - 1)`.
pub fn lattice_count(m: usize, h: usize) -> usize {
    let (n, k) = (h + m - 1, m - 1);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as usize
}

/// Smallest `H` whose lattice has at least `count` points.
pub fn lattice_density_for(m: usize, count: usize) -> usize {
    let mut h = 1;
    while lattice_count(m, h) < count {
        h += 1;
    }
    h
}

/// NSGA-III population size for `n0` initial samples: the lattice size of
/// the smallest `H` reaching `n0`.
pub fn population_size(m: usize, n0: usize) -> usize {
    lattice_count(m, lattice_density_for(m, n0))
}

/// A decision vector with surrogate-predicted objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: DecisionVector,
    pub f: ObjectiveVector,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurrogatePopulation {
    pub members: Vec<Candidate>,
}

impl SurrogatePopulation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<&[f64]> {
        self.members.iter().map(|c| c.f.as_slice()).collect()
    }
}

/// Anything that can stand in for the expensive objectives.
pub trait Surrogate {
    fn n_objectives(&self) -> usize;

    /// Predicted objective means.
    fn predict_means(&self, x: &[f64]) -> Result<ObjectiveVector>;

    /// Predicted means and variances.
    fn predict_full(&self, x: &[f64]) -> Result<(ObjectiveVector, Vec<f64>)>;
}

impl Surrogate for [GpModel] {
    fn n_objectives(&self) -> usize {
        self.len()
    }

    fn predict_means(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.iter().map(|g| g.predict_mean(x)).collect()
    }

    fn predict_full(&self, x: &[f64]) -> Result<(ObjectiveVector, Vec<f64>)> {
        let mut mean = Vec::with_capacity(self.len());
        let mut var = Vec::with_capacity(self.len());
        for g in self {
            let p = g.predict(x)?;
            mean.push(p.mean);
            var.push(p.variance);
        }
        Ok((mean, var))
    }
}

impl Surrogate for Vec<GpModel> {
    fn n_objectives(&self) -> usize {
        self.as_slice().n_objectives()
    }

    fn predict_means(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.as_slice().predict_means(x)
    }

    fn predict_full(&self, x: &[f64]) -> Result<(ObjectiveVector, Vec<f64>)> {
        self.as_slice().predict_full(x)
    }
}

/// SBX and polynomial-mutation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationParams {
    pub eta_c: f64,
    /// Probability that a parent pair undergoes crossover.
    pub p_c: f64,
    /// Per-variable probability of exchanging values inside a crossing pair.
    pub p_var: f64,
    pub eta_m: f64,
    /// Per-gene mutation probability; `None` means `1/d`.
    pub p_m: Option<f64>,
}

impl Default for VariationParams {
    fn default() -> Self {
        Self {
            eta_c: 20.0,
            p_c: 1.0,
            p_var: 0.5,
            eta_m: 20.0,
            p_m: None,
        }
    }
}

/// Simulated binary crossover followed by clamping to the box.
pub fn sbx_crossover(
    p1: &[f64],
    p2: &[f64],
    lower: &[f64],
    upper: &[f64],
    params: &VariationParams,
    rng: &mut RngStream,
) -> (DecisionVector, DecisionVector) {
    let crossing = rng.random::<f64>() < params.p_c;
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for j in 0..p1.len() {
        let u: f64 = rng.random();
        let flip = rng.random::<bool>();
        let exchange = rng.random::<f64>() < params.p_var;
        let mut beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (params.eta_c + 1.0))
        } else {
            (2.0 - 2.0 * u).powf(-1.0 / (params.eta_c + 1.0))
        };
        if flip {
            beta = -beta;
        }
        if !crossing || !exchange {
            c1.push(p1[j].clamp(lower[j], upper[j]));
            c2.push(p2[j].clamp(lower[j], upper[j]));
            continue;
        }
        let mid = 0.5 * (p1[j] + p2[j]);
        let half = 0.5 * (p1[j] - p2[j]);
        c1.push((mid + beta * half).clamp(lower[j], upper[j]));
        c2.push((mid - beta * half).clamp(lower[j], upper[j]));
    }
    (c1, c2)
}

/// Deb's bounded polynomial mutation.
pub fn polynomial_mutation(
    x: &[f64],
    lower: &[f64],
    upper: &[f64],
    eta_m: f64,
    p_m: f64,
    rng: &mut RngStream,
) -> DecisionVector {
    let mut out = x.to_vec();
    let power = 1.0 / (eta_m + 1.0);
    for j in 0..out.len() {
        let site = rng.random::<f64>() < p_m;
        let u: f64 = rng.random();
        if !site {
            continue;
        }
        let (lo, hi) = (lower[j], upper[j]);
        let width = hi - lo;
        let v = out[j];
        let delta = if u <= 0.5 {
            let t = 1.0 - (v - lo) / width;
            (2.0 * u + (1.0 - 2.0 * u) * t.powf(eta_m + 1.0)).powf(power) - 1.0
        } else {
            let t = 1.0 - (hi - v) / width;
            1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * t.powf(eta_m + 1.0)).powf(power)
        };
        out[j] = (v + delta * width).clamp(lo, hi);
    }
    out
}

/// Nearest reference line (index, perpendicular distance) for each point.
pub fn associate<P: AsRef<[f64]>>(points: &[P], refs: &ReferenceVectorSet) -> Vec<(usize, f64)> {
    let dirs: Vec<(Vec<f64>, f64)> = refs
        .vectors
        .iter()
        .map(|w| {
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            (w.iter().map(|v| v / norm).collect(), norm)
        })
        .collect();
    points
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let mut best = (0, f64::INFINITY);
            for (j, (dir, _)) in dirs.iter().enumerate() {
                let proj: f64 = p.iter().zip(dir).map(|(a, b)| a * b).sum();
                let dist = p
                    .iter()
                    .zip(dir)
                    .map(|(a, b)| (a - proj * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            best
        })
        .collect()
}

/// Normalizes translated objectives by hyperplane intercepts of the
/// extreme points, falling back to the per-objective maximum.
fn normalize_for_niching(translated: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = translated[0].len();
    let mut extremes = Vec::with_capacity(m);
    for axis in 0..m {
        let asf = |p: &[f64]| {
            p.iter()
                .enumerate()
                .map(|(i, v)| if i == axis { *v } else { v / 1e-6 })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let best = translated
            .iter()
            .min_by(|a, b| asf(a).total_cmp(&asf(b)))
            .expect("non-empty");
        extremes.push(best.clone());
    }
    let fallback = || -> Vec<f64> {
        (0..m)
            .map(|i| {
                let hi = translated.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
                if hi > 1e-12 {
                    hi
                } else {
                    1.0
                }
            })
            .collect()
    };
    let intercepts = match solve_linear(extremes, vec![1.0; m]) {
        Some(a) => {
            let b: Vec<f64> = a.iter().map(|v| 1.0 / v).collect();
            if b.iter().all(|v| v.is_finite() && *v > 1e-6) {
                b
            } else {
                fallback()
            }
        }
        None => fallback(),
    };
    translated
        .iter()
        .map(|p| p.iter().zip(&intercepts).map(|(v, a)| v / a).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// NSGA-III environmental selection. Returns the indices of the `n`
/// survivors (complete fronts first, then niche-preserving picks from the
/// splitting front), sorted ascending.
pub fn environmental_selection<P: AsRef<[f64]>>(
    objectives: &[P],
    ideal: &[f64],
    refs: &ReferenceVectorSet,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if objectives.len() < n {
        return Err(Error::PopulationSize {
            got: objectives.len(),
            wanted: n,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fronts = sort_unchecked(objectives, n).fronts;
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let (last, complete) = fronts.split_last().expect("at least one front");
    for f in complete {
        chosen.extend_from_slice(f);
    }
    if chosen.len() + last.len() == n {
        chosen.extend_from_slice(last);
        chosen.sort_unstable();
        return Ok(chosen);
    }

    let members: Vec<usize> = chosen.iter().chain(last).copied().collect();
    let translated: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| {
            objectives[i]
                .as_ref()
                .iter()
                .zip(ideal)
                .map(|(v, z)| v - z)
                .collect()
        })
        .collect();
    let normalized = normalize_for_niching(&translated);
    let assoc = associate(&normalized, refs);

    let mut niche = vec![0usize; refs.len()];
    for a in &assoc[..chosen.len()] {
        niche[a.0] += 1;
    }
    // Pending members of the splitting front, as positions into `members`.
    let mut pending: Vec<usize> = (chosen.len()..members.len()).collect();
    let mut open = vec![true; refs.len()];
    while chosen.len() < n {
        let min_count = (0..refs.len())
            .filter(|&j| open[j])
            .map(|j| niche[j])
            .min()
            .expect("a reference line stays open while members are pending");
        let ties: Vec<usize> = (0..refs.len())
            .filter(|&j| open[j] && niche[j] == min_count)
            .collect();
        let j = ties[rng.random_range(0..ties.len())];
        let in_niche: Vec<usize> = (0..pending.len())
            .filter(|&k| assoc[pending[k]].0 == j)
            .collect();
        if in_niche.is_empty() {
            open[j] = false;
            continue;
        }
        let pick = if niche[j] == 0 {
            *in_niche
                .iter()
                .min_by(|&&a, &&b| assoc[pending[a]].1.total_cmp(&assoc[pending[b]].1))
                .expect("non-empty")
        } else {
            in_niche[rng.random_range(0..in_niche.len())]
        };
        chosen.push(members[pending.swap_remove(pick)]);
        niche[j] += 1;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Settings for the surrogate-assisted NSGA-III search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Generation budget; the loop runs while `t < t_max` starting at `t = 1`.
    pub t_max: usize,
    pub variation: VariationParams,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            t_max: 20,
            variation: VariationParams::default(),
        }
    }
}

fn binary_tournament(rank: &[usize], rng: &mut RngStream) -> usize {
    let a = rng.random_range(0..rank.len());
    let b = rng.random_range(0..rank.len());
    if rank[b] < rank[a] {
        b
    } else {
        a
    }
}

/// Surrogate-assisted NSGA-III search over the landscape defined by
/// `surrogate`. Performs no true evaluations.
pub fn sa_nsga3<S: Surrogate + ?Sized>(
    db: &Database,
    surrogate: &S,
    refs: &ReferenceVectorSet,
    lower: &[f64],
    upper: &[f64],
    params: &SearchParams,
    rng: &mut RngStream,
) -> Result<SurrogatePopulation> {
    // Starts at the archive minimum, then tracks the running minimum of the predictions.
    let mut ideal = db.ideal_point()?;
    crate::error::check_len(db.m(), surrogate.n_objectives())?;
    let n = refs.len();
    let objs = db.objectives();

    let initial: Vec<usize> = if db.len() >= n {
        environmental_selection(&objs, &ideal, refs, n, rng)?
    } else {
        let rank = sort_unchecked(&objs, objs.len()).ranks();
        let mut idx: Vec<usize> = (0..db.len()).collect();
        while idx.len() < n {
            idx.push(binary_tournament(&rank, rng));
        }
        idx
    };
    let mut pop: Vec<(DecisionVector, ObjectiveVector)> = initial
        .into_iter()
        .map(|i| {
            let x = db.samples()[i].x.clone();
            surrogate.predict_means(&x).map(|f| (x, f))
        })
        .collect::<Result<_>>()?;

    let d = lower.len();
    let p_m = params.variation.p_m.unwrap_or(1.0 / d as f64);
    let mut t = 1;
    while t < params.t_max {
        let mut offspring: Vec<(DecisionVector, ObjectiveVector)> = Vec::with_capacity(n + 1);
        while offspring.len() < n {
            let a = rng.random_range(0..pop.len());
            let b = rng.random_range(0..pop.len());
            let (c1, c2) =
                sbx_crossover(&pop[a].0, &pop[b].0, lower, upper, &params.variation, rng);
            for c in [c1, c2] {
                if offspring.len() < n {
                    let c = polynomial_mutation(&c, lower, upper, params.variation.eta_m, p_m, rng);
                    let f = surrogate.predict_means(&c)?;
                    offspring.push((c, f));
                }
            }
        }
        for (_, f) in pop.iter().chain(&offspring) {
            for (z, v) in ideal.iter_mut().zip(f) {
                *z = z.min(*v);
            }
        }
        pop.extend(offspring);
        let keep = {
            let merged: Vec<&[f64]> = pop.iter().map(|(_, f)| f.as_slice()).collect();
            environmental_selection(&merged, &ideal, refs, n, rng)?
        };
        let mut slots: Vec<Option<(DecisionVector, ObjectiveVector)>> =
            pop.into_iter().map(Some).collect();
        pop = keep
            .into_iter()
            .map(|i| slots[i].take().expect("unique survivor"))
            .collect();
        t += 1;
    }

    let members = pop
        .into_iter()
        .map(|(x, _)| {
            let (f, variance) = surrogate.predict_full(&x)?;
            Ok(Candidate { x, f, variance })
        })
        .collect::<Result<_>>()?;
    Ok(SurrogatePopulation { members })
}
