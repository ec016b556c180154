//! Composite-indicator selection of query points from the candidate
//! population.
//!
//! Three per-candidate scores are combined with random weights:
//! a distribution score from the smallest angle to the archive's
//! non-dominated set (raw objectives), a diversity score from the distance
//! to the nearest archive member, and a convergence score from the distance
//! to the archive ideal point (both in archive-normalized objectives).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::database::Database;
use crate::error::{Error, Result};
use crate::moea::SurrogatePopulation;
use crate::pareto::DecisionVector;
use crate::sampling::RngStream;

/// Which indicators enter the composite sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndicatorMask {
    pub distribution: bool,
    pub diversity: bool,
    pub convergence: bool,
}

impl IndicatorMask {
    pub const ALL: IndicatorMask = IndicatorMask {
        distribution: true,
        diversity: true,
        convergence: true,
    };

    fn flags(self) -> [bool; 3] {
        [self.distribution, self.diversity, self.convergence]
    }

    pub fn is_all(self) -> bool {
        self == Self::ALL
    }
}

impl Default for IndicatorMask {
    fn default() -> Self {
        Self::ALL
    }
}

impl fmt::Display for IndicatorMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (flag, c) in self.flags().into_iter().zip(['1', '2', '3']) {
            if flag {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for IndicatorMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut mask = IndicatorMask {
            distribution: false,
            diversity: false,
            convergence: false,
        };
        for c in s.trim().chars() {
            let slot = match c {
                '1' => &mut mask.distribution,
                '2' => &mut mask.diversity,
                '3' => &mut mask.convergence,
                _ => return Err(Error::Config(format!("bad indicator set `{s}`"))),
            };
            if *slot {
                return Err(Error::Config(format!("indicator repeated in `{s}`")));
            }
            *slot = true;
        }
        if mask.flags().iter().all(|f| !f) {
            return Err(Error::Config("indicator set is empty".into()));
        }
        Ok(mask)
    }
}

impl Serialize for IndicatorMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IndicatorMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Fresh `U(0, 1)` weights for every selection.
    #[default]
    Random,
    /// All weights equal to 1.
    One,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(WeightMode::Random),
            "one" | "fixed" => Ok(WeightMode::One),
            _ => Err(Error::Config(format!("bad weight mode `{s}`"))),
        }
    }
}

/// Selection strategy, covering the full method and its ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InfillVariant {
    pub indicators: IndicatorMask,
    pub weights: WeightMode,
    pub normalize: bool,
    pub q: usize,
    /// Pick uniformly from the candidates; overrides every other setting.
    pub random_pick: bool,
}

impl Default for InfillVariant {
    fn default() -> Self {
        Self {
            indicators: IndicatorMask::ALL,
            weights: WeightMode::Random,
            normalize: true,
            q: 1,
            random_pick: false,
        }
    }
}

impl InfillVariant {
    pub fn random() -> Self {
        Self {
            random_pick: true,
            ..Self::default()
        }
    }

    pub fn only(mask: &str) -> Result<Self> {
        Ok(Self {
            indicators: mask.parse()?,
            ..Self::default()
        })
    }

    /// Short name in the style `CI-EMO`, `rand-EMO`, `I3-EMO`, `CI-EMO-no-I1`,
    /// `CI-EMO-no-Norm`, `CI-EMO-SW`, `CI-EMO-q10`.
    pub fn label(&self) -> String {
        if self.random_pick {
            return if self.q > 1 {
                format!("rand-EMO-q{}", self.q)
            } else {
                "rand-EMO".into()
            };
        }
        let flags = self.indicators.flags();
        let on = flags.iter().filter(|f| **f).count();
        let mut name = match on {
            3 => "CI-EMO".to_string(),
            1 => format!("{}-EMO", ["I1", "I2", "I3"][flags.iter().position(|f| *f).unwrap()]),
            _ => format!(
                "CI-EMO-no-{}",
                ["I1", "I2", "I3"][flags.iter().position(|f| !*f).unwrap()]
            ),
        };
        if !self.normalize {
            name.push_str("-no-Norm");
        }
        if self.weights == WeightMode::One {
            name.push_str("-SW");
        }
        if self.q > 1 {
            name.push_str(&format!("-q{}", self.q));
        }
        name
    }

    /// Parses a variant shorthand: `ci`, `rand`, `i1`/`i2`/`i3`,
    /// `no-i1`/`no-i2`/`no-i3`, `no-norm`, `sw`, `qN`, or `+`-joined
    /// combinations such as `no-norm+q5`.
    pub fn from_shorthand(s: &str) -> Result<Self> {
        let mut v = InfillVariant::default();
        for part in s.split('+') {
            let p = part.trim().to_ascii_lowercase();
            match p.as_str() {
                "ci" | "ci-emo" => {}
                "rand" | "rand-emo" | "random" => v.random_pick = true,
                "i1" | "i2" | "i3" => v.indicators = p[1..].parse()?,
                "no-i1" => v.indicators = "23".parse()?,
                "no-i2" => v.indicators = "13".parse()?,
                "no-i3" => v.indicators = "12".parse()?,
                "no-norm" => v.normalize = false,
                "sw" => v.weights = WeightMode::One,
                _ if p.starts_with('q') => {
                    v.q = p[1..]
                        .parse()
                        .map_err(|_| Error::Config(format!("bad batch size in `{part}`")))?;
                    if v.q == 0 {
                        return Err(Error::Config("q must be at least 1".into()));
                    }
                }
                _ => return Err(Error::Config(format!("unknown variant `{part}`"))),
            }
        }
        Ok(v)
    }
}

/// Min-max scaling to `[0, 1]`; a constant vector maps to all zeros.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / range).collect()
}

/// Scales candidate and archive objectives by the archive's per-objective
/// range. Objectives that are constant over the archive map to 0.
pub fn normalize_objectives<P: AsRef<[f64]>>(
    candidates: &[P],
    db: &Database,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let lo = db.ideal_point()?;
    let hi = db.nadir_point()?;
    let scale = |f: &[f64]| -> Vec<f64> {
        f.iter()
            .zip(lo.iter().zip(&hi))
            .map(|(v, (l, h))| if h > l { (v - l) / (h - l) } else { 0.0 })
            .collect()
    };
    let cands = candidates.iter().map(|c| scale(c.as_ref())).collect();
    let archive = db.samples().iter().map(|s| scale(&s.f)).collect();
    Ok((cands, archive))
}

/// Angle between two vectors; cosine clamped to `[-1, 1]`, norms floored at 1e-12.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest angle from each candidate to any member of `front`.
pub fn min_angles<P: AsRef<[f64]>, Q: AsRef<[f64]>>(candidates: &[P], front: &[Q]) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| {
            front
                .iter()
                .map(|y| angle(c.as_ref(), y.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Distance from each normalized candidate to its nearest normalized archive member.
pub fn nearest_distances<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    candidates: &[P],
    archive: &[Q],
) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| {
            archive
                .iter()
                .map(|y| euclid(c.as_ref(), y.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Distance from each normalized candidate to the normalized ideal point (the origin).
pub fn ideal_distances<P: AsRef<[f64]>>(candidates: &[P]) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| c.as_ref().iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// I1 over raw objectives.
pub fn distribution_indicator<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    candidates: &[P],
    db_nd: &[Q],
) -> Vec<f64> {
    minmax_normalize(&min_angles(candidates, db_nd))
}

/// I2 over normalized objectives.
pub fn diversity_indicator<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    candidates_norm: &[P],
    db_norm: &[Q],
) -> Vec<f64> {
    minmax_normalize(&nearest_distances(candidates_norm, db_norm))
}

/// I3 over normalized objectives; values in `[-1, 0]`.
pub fn convergence_indicator<P: AsRef<[f64]>>(candidates_norm: &[P]) -> Vec<f64> {
    minmax_normalize(&ideal_distances(candidates_norm))
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// Indicator values for one selection slot.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorScores {
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i3: Vec<f64>,
    pub weights: [f64; 3],
    pub ci: Vec<f64>,
    /// Argmax of `ci`, lowest index on ties.
    pub chosen: usize,
}

/// Computes I1/I2/I3 and their weighted sum for a pool of predicted
/// objective vectors. Only objective-space data is consulted.
pub fn score_candidates<P: AsRef<[f64]>>(
    predicted: &[P],
    db: &Database,
    mask: IndicatorMask,
    normalize: bool,
    weights: [f64; 3],
) -> Result<IndicatorScores> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput("candidate pool"));
    }
    let front = db.nondominated_objectives();
    if front.is_empty() {
        return Err(Error::EmptyInput("database"));
    }
    let (cand_norm, db_norm) = normalize_objectives(predicted, db)?;
    let theta = min_angles(predicted, &front);
    let d_c = nearest_distances(&cand_norm, &db_norm);
    let d_z = ideal_distances(&cand_norm);
    let (i1, i2, i3) = if normalize {
        (
            minmax_normalize(&theta),
            minmax_normalize(&d_c),
            minmax_normalize(&d_z).into_iter().map(|v| -v).collect::<Vec<_>>(),
        )
    } else {
        (theta, d_c, d_z.into_iter().map(|v| -v).collect())
    };
    let [w1, w2, w3] = weights;
    let [m1, m2, m3] = mask.flags();
    let ci: Vec<f64> = (0..predicted.len())
        .map(|j| {
            let mut s = 0.0;
            if m1 {
                s += w1 * i1[j];
            }
            if m2 {
                s += w2 * i2[j];
            }
            if m3 {
                s += w3 * i3[j];
            }
            s
        })
        .collect();
    let chosen = argmax_first(&ci);
    Ok(IndicatorScores {
        i1,
        i2,
        i3,
        weights,
        ci,
        chosen,
    })
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = j;
        }
    }
    best
}

/// How one batch slot was filled.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    /// Index into the original candidate population, `None` for the
    /// random-point fallback.
    pub candidate: Option<usize>,
    /// Weights drawn for this slot (absent for random picks).
    pub weights: Option<[f64; 3]>,
    /// I1/I2/I3 of the chosen candidate (absent for random picks).
    pub indicators: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub points: Vec<DecisionVector>,
    pub slots: Vec<SlotRecord>,
}

/// Tolerance of the duplicate-query guard, infinity norm in unit-box coordinates.
pub const DUPLICATE_TOL: f64 = 1e-8;

fn is_duplicate(x: &[f64], taken: &[Vec<f64>], lower: &[f64], upper: &[f64]) -> bool {
    taken.iter().any(|y| {
        x.iter()
            .zip(y)
            .zip(lower.iter().zip(upper))
            .all(|((a, b), (l, u))| ((a - b) / (u - l)).abs() <= DUPLICATE_TOL)
    })
}

/// Chooses `variant.q` query points from `pstar`.
///
/// Each slot draws its own weights, scores the remaining pool, and takes
/// the best candidate that is not a duplicate of an archive point or an
/// earlier pick. If every remaining candidate is a duplicate, a uniform
/// random point in the box is returned instead.
pub fn select(
    pstar: &SurrogatePopulation,
    db: &Database,
    variant: &InfillVariant,
    lower: &[f64],
    upper: &[f64],
    rng: &mut RngStream,
) -> Result<Selection> {
    if pstar.is_empty() {
        return Err(Error::EmptyInput("candidate population"));
    }
    if variant.q == 0 || variant.q > pstar.len() {
        return Err(Error::Parameter(format!(
            "batch size {} must be in 1..={}",
            variant.q,
            pstar.len()
        )));
    }
    let mut taken: Vec<Vec<f64>> = db.samples().iter().map(|s| s.x.clone()).collect();
    let mut pool: Vec<usize> = (0..pstar.len()).collect();
    let mut selection = Selection {
        points: Vec::with_capacity(variant.q),
        slots: Vec::with_capacity(variant.q),
    };

    for _ in 0..variant.q {
        let (pick, slot) = if variant.random_pick {
            let mut order = pool.clone();
            let mut pick = None;
            while !order.is_empty() {
                let k = order.remove(rng.random_range(0..order.len()));
                if !is_duplicate(&pstar.members[k].x, &taken, lower, upper) {
                    pick = Some(k);
                    break;
                }
            }
            (
                pick,
                SlotRecord {
                    candidate: pick,
                    weights: None,
                    indicators: None,
                },
            )
        } else {
            let weights = match variant.weights {
                WeightMode::Random => [rng.random(), rng.random(), rng.random()],
                WeightMode::One => [1.0; 3],
            };
            let predicted: Vec<&[f64]> = pool.iter().map(|&k| pstar.members[k].f.as_slice()).collect();
            let scores = score_candidates(&predicted, db, variant.indicators, variant.normalize, weights)?;
            let mut ranked: Vec<usize> = (0..pool.len()).collect();
            ranked.sort_by(|&a, &b| scores.ci[b].total_cmp(&scores.ci[a]).then(a.cmp(&b)));
            let best = ranked
                .into_iter()
                .find(|&p| !is_duplicate(&pstar.members[pool[p]].x, &taken, lower, upper));
            (
                best.map(|p| pool[p]),
                SlotRecord {
                    candidate: best.map(|p| pool[p]),
                    weights: Some(weights),
                    indicators: best.map(|p| [scores.i1[p], scores.i2[p], scores.i3[p]]),
                },
            )
        };
        let x = match pick {
            Some(k) => {
                pool.retain(|&j| j != k);
                pstar.members[k].x.clone()
            }
            None => {
                log::warn!("every candidate duplicates an evaluated point; sampling a random point");
                lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| l + rng.random::<f64>() * (u - l))
                    .collect()
            }
        };
        taken.push(x.clone());
        selection.points.push(x);
        selection.slots.push(slot);
    }
    Ok(selection)
}
