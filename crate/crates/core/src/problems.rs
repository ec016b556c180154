//! ZDT and DTLZ benchmark problems, their analytical Pareto fronts, and the
//! expensive-evaluation budget.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::moea::das_dennis;
use crate::pareto::{nondominated_unchecked, ObjectiveVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ProblemKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
    Dtlz7,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 12] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt2,
        ProblemKind::Zdt3,
        ProblemKind::Zdt4,
        ProblemKind::Zdt6,
        ProblemKind::Dtlz1,
        ProblemKind::Dtlz2,
        ProblemKind::Dtlz3,
        ProblemKind::Dtlz4,
        ProblemKind::Dtlz5,
        ProblemKind::Dtlz6,
        ProblemKind::Dtlz7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Zdt1 => "ZDT1",
            ProblemKind::Zdt2 => "ZDT2",
            ProblemKind::Zdt3 => "ZDT3",
            ProblemKind::Zdt4 => "ZDT4",
            ProblemKind::Zdt6 => "ZDT6",
            ProblemKind::Dtlz1 => "DTLZ1",
            ProblemKind::Dtlz2 => "DTLZ2",
            ProblemKind::Dtlz3 => "DTLZ3",
            ProblemKind::Dtlz4 => "DTLZ4",
            ProblemKind::Dtlz5 => "DTLZ5",
            ProblemKind::Dtlz6 => "DTLZ6",
            ProblemKind::Dtlz7 => "DTLZ7",
        }
    }

    pub fn is_zdt(self) -> bool {
        matches!(
            self,
            ProblemKind::Zdt1
                | ProblemKind::Zdt2
                | ProblemKind::Zdt3
                | ProblemKind::Zdt4
                | ProblemKind::Zdt6
        )
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

impl From<ProblemKind> for String {
    fn from(k: ProblemKind) -> String {
        k.name().to_string()
    }
}

impl TryFrom<String> for ProblemKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A box-bounded benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    kind: ProblemKind,
    d: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Decision dimension used when none is given: 8 for two objectives, 6 for three.
pub fn default_dimension(kind: ProblemKind, m: usize) -> usize {
    if kind.is_zdt() {
        return 8;
    }
    match m {
        2 => 8,
        3 => 6,
        _ => m + 4,
    }
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, d: Option<usize>, m: Option<usize>) -> Result<Self> {
        let m = m.unwrap_or(2);
        let d = d.unwrap_or_else(|| default_dimension(kind, m));
        if m < 2 {
            return Err(Error::Parameter(format!("m = {m}, need at least 2")));
        }
        if kind.is_zdt() {
            if m != 2 {
                return Err(Error::Parameter(format!("{kind} has 2 objectives, got m = {m}")));
            }
            if d < 2 {
                return Err(Error::Parameter(format!("{kind} needs d >= 2, got {d}")));
            }
        } else if d < m {
            return Err(Error::Parameter(format!(
                "{kind} needs d >= m ({m}), got {d}"
            )));
        }
        let mut lower = vec![0.0; d];
        let mut upper = vec![1.0; d];
        if kind == ProblemKind::Zdt4 {
            lower[1..].fill(-5.0);
            upper[1..].fill(5.0);
        }
        // Bounds must stay non-degenerate for input scaling.
        debug_assert!(lower.iter().zip(&upper).all(|(l, u)| l < u));
        Ok(Self {
            kind,
            d,
            m,
            lower,
            upper,
        })
    }

    pub fn by_name(name: &str, d: Option<usize>, m: Option<usize>) -> Result<Self> {
        Self::new(name.parse()?, d, m)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn check_bounds(&self, x: &[f64]) -> Result<()> {
        check_len(self.d, x.len())?;
        for (i, &v) in x.iter().enumerate() {
            if !(v >= self.lower[i] && v <= self.upper[i]) {
                return Err(Error::Domain {
                    index: i,
                    value: v,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }

    /// Objective values without budget accounting. Only test doubles and
    /// reference computations should call this directly.
    pub fn objectives(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.check_bounds(x)?;
        Ok(match self.kind {
            ProblemKind::Zdt1 => zdt(x, zdt_linear_g(x), |r| 1.0 - r.sqrt()),
            ProblemKind::Zdt2 => zdt(x, zdt_linear_g(x), |r| 1.0 - r * r),
            ProblemKind::Zdt3 => zdt(x, zdt_linear_g(x), |r| {
                1.0 - r.sqrt() - r * (10.0 * PI * x[0]).sin()
            }),
            ProblemKind::Zdt4 => {
                let g = 1.0
                    + 10.0 * (x.len() - 1) as f64
                    + x[1..]
                        .iter()
                        .map(|v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>();
                zdt(x, g, |r| 1.0 - r.sqrt())
            }
            ProblemKind::Zdt6 => {
                let f1 = 1.0 - (-4.0 * x[0]).exp() * (6.0 * PI * x[0]).sin().powi(6);
                let mean = x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
                let g = 1.0 + 9.0 * mean.powf(0.25);
                let r = f1 / g;
                vec![f1, g * (1.0 - r * r)]
            }
            ProblemKind::Dtlz1 => {
                let (pos, dist) = x.split_at(self.m - 1);
                let g = dtlz_rastrigin_g(dist);
                let mut f = vec![0.5 * (1.0 + g); self.m];
                for (i, fi) in f.iter_mut().enumerate() {
                    let keep = self.m - 1 - i;
                    *fi *= pos[..keep].iter().product::<f64>();
                    if i > 0 {
                        *fi *= 1.0 - pos[keep];
                    }
                }
                f
            }
            ProblemKind::Dtlz2 | ProblemKind::Dtlz3 | ProblemKind::Dtlz4 => {
                let (pos, dist) = x.split_at(self.m - 1);
                let g = if self.kind == ProblemKind::Dtlz3 {
                    dtlz_rastrigin_g(dist)
                } else {
                    dist.iter().map(|v| (v - 0.5).powi(2)).sum()
                };
                let alpha = if self.kind == ProblemKind::Dtlz4 { 100.0 } else { 1.0 };
                let angles: Vec<f64> = pos.iter().map(|v| v.powf(alpha) * PI / 2.0).collect();
                sphere(&angles, 1.0 + g)
            }
            ProblemKind::Dtlz5 | ProblemKind::Dtlz6 => {
                let (pos, dist) = x.split_at(self.m - 1);
                let g: f64 = if self.kind == ProblemKind::Dtlz5 {
                    dist.iter().map(|v| (v - 0.5).powi(2)).sum()
                } else {
                    dist.iter().map(|v| v.powf(0.1)).sum()
                };
                let mut angles = Vec::with_capacity(pos.len());
                angles.push(pos[0] * PI / 2.0);
                for &v in &pos[1..] {
                    angles.push(PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * v));
                }
                sphere(&angles, 1.0 + g)
            }
            ProblemKind::Dtlz7 => {
                let (pos, dist) = x.split_at(self.m - 1);
                let g = 1.0 + 9.0 * dist.iter().sum::<f64>() / dist.len() as f64;
                let h = self.m as f64
                    - pos
                        .iter()
                        .map(|&f| f / (1.0 + g) * (1.0 + (3.0 * PI * f).sin()))
                        .sum::<f64>();
                let mut f = pos.to_vec();
                f.push((1.0 + g) * h);
                f
            }
        })
    }
}

fn zdt_linear_g(x: &[f64]) -> f64 {
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64
}

fn zdt(x: &[f64], g: f64, shape: impl Fn(f64) -> f64) -> Vec<f64> {
    let f1 = x[0];
    vec![f1, g * shape(f1 / g)]
}

fn dtlz_rastrigin_g(dist: &[f64]) -> f64 {
    100.0
        * (dist.len() as f64
            + dist
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>())
}

/// Spherical coordinates scaled by `radius`, DTLZ ordering.
fn sphere(angles: &[f64], radius: f64) -> Vec<f64> {
    let m = angles.len() + 1;
    (0..m)
        .map(|i| {
            let keep = m - 1 - i;
            let mut v = radius * angles[..keep].iter().map(|a| a.cos()).product::<f64>();
            if i > 0 {
                v *= angles[keep].sin();
            }
            v
        })
        .collect()
}

/// Counts expensive evaluations against the run's total budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationBudget {
    used: usize,
    limit: usize,
}

impl EvaluationBudget {
    pub fn new(limit: usize) -> Self {
        Self { used: 0, limit }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.limit
    }
}

/// One expensive evaluation: checks bounds and budget, then spends one unit.
pub fn evaluate(
    spec: &ProblemSpec,
    x: &[f64],
    budget: &mut EvaluationBudget,
) -> Result<ObjectiveVector> {
    if budget.is_exhausted() {
        return Err(Error::BudgetExhausted {
            limit: budget.limit,
        });
    }
    let f = spec.objectives(x)?;
    budget.used += 1;
    Ok(f)
}

/// Reference-set size used for quality metrics: 1000 points for two
/// objectives, at least 990 otherwise.
pub fn default_reference_size(m: usize) -> usize {
    if m == 2 {
        1000
    } else {
        990
    }
}

/// Deterministic sample of the analytical Pareto front.
///
/// Two-objective fronts use a uniform sweep of the front parameter and
/// return exactly `n` points. Three-objective fronts use the smallest
/// simplex lattice with at least `n` points mapped through the front. The
/// disconnected fronts (ZDT3, DTLZ7) locate their segments numerically and
/// drop any point that ends up dominated.
pub fn true_front_reference(spec: &ProblemSpec, n: usize) -> Result<Vec<ObjectiveVector>> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "reference set needs at least 2 points, got {n}"
        )));
    }
    let m = spec.m;
    let front = match spec.kind {
        ProblemKind::Zdt1 | ProblemKind::Zdt4 => linspace(0.0, 1.0, n)
            .map(|f1| vec![f1, 1.0 - f1.sqrt()])
            .collect(),
        ProblemKind::Zdt2 => linspace(0.0, 1.0, n)
            .map(|f1| vec![f1, 1.0 - f1 * f1])
            .collect(),
        ProblemKind::Zdt6 => linspace(ZDT6_MIN_F1, 1.0, n)
            .map(|f1| vec![f1, 1.0 - f1 * f1])
            .collect(),
        ProblemKind::Zdt3 => {
            let f2 = |f1: f64| 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin();
            let segments = nondominated_segments(&f2, 0.0, 1.0);
            spread_over(&segments, n)
                .into_iter()
                .map(|f1| vec![f1, f2(f1)])
                .collect()
        }
        ProblemKind::Dtlz1 => {
            if m == 2 {
                linspace(0.0, 1.0, n)
                    .map(|t| vec![0.5 * t, 0.5 * (1.0 - t)])
                    .collect()
            } else {
                simplex(m, n)
                    .into_iter()
                    .map(|w| w.into_iter().map(|v| 0.5 * v).collect())
                    .collect()
            }
        }
        ProblemKind::Dtlz2 | ProblemKind::Dtlz3 | ProblemKind::Dtlz4 => {
            if m == 2 {
                linspace(0.0, 1.0, n)
                    .map(|t| vec![(t * PI / 2.0).cos(), (t * PI / 2.0).sin()])
                    .collect()
            } else {
                simplex(m, n)
                    .into_iter()
                    .map(|w| {
                        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                        w.into_iter().map(|v| v / norm).collect()
                    })
                    .collect()
            }
        }
        ProblemKind::Dtlz5 | ProblemKind::Dtlz6 => {
            // Degenerate front: a quarter circle through the first angle.
            let mut angles = vec![PI / 4.0; m - 1];
            linspace(0.0, 1.0, n)
                .map(|t| {
                    angles[0] = t * PI / 2.0;
                    sphere(&angles, 1.0)
                })
                .collect()
        }
        ProblemKind::Dtlz7 => {
            let last = |pos: &[f64]| {
                2.0 * (m as f64
                    - pos
                        .iter()
                        .map(|&f| f / 2.0 * (1.0 + (3.0 * PI * f).sin()))
                        .sum::<f64>())
            };
            let segments = nondominated_segments(&|f1| last(&[f1]), 0.0, 1.0);
            let per_axis = if m == 2 {
                n
            } else {
                (n as f64).powf(1.0 / (m - 1) as f64).ceil() as usize
            };
            let axis = spread_over(&segments, per_axis);
            grid(&axis, m - 1)
                .into_iter()
                .map(|mut pos| {
                    let fm = last(&pos);
                    pos.push(fm);
                    pos
                })
                .collect()
        }
    };
    Ok(keep_nondominated(front))
}

/// Lower end of the ZDT6 front: the minimum of 1 - exp(-4x) sin^6(6 pi x) on [0, 1].
const ZDT6_MIN_F1: f64 = 0.280_775_319_1;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

fn simplex(m: usize, n: usize) -> Vec<Vec<f64>> {
    let h = crate::moea::lattice_density_for(m, n);
    das_dennis(m, h).vectors
}

fn grid(axis: &[f64], dims: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

const SEGMENT_SCAN: usize = 200_001;

/// Maximal f1-intervals on which the curve `(f1, f2(f1))` is non-dominated.
fn nondominated_segments(f2: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let ts: Vec<f64> = linspace(lo, hi, SEGMENT_SCAN).collect();
    let mut segments = Vec::new();
    let mut best = f64::INFINITY;
    let mut open: Option<(f64, f64)> = None;
    for &t in &ts {
        let v = f2(t);
        if v < best {
            best = v;
            open = Some(match open {
                Some((start, _)) => (start, t),
                None => (t, t),
            });
        } else if let Some(seg) = open.take() {
            segments.push(seg);
        }
    }
    segments.extend(open);
    segments
}

/// `n` parameter values spread across the segments proportionally to their
/// length, at least one per segment.
fn spread_over(segments: &[(f64, f64)], n: usize) -> Vec<f64> {
    let n = n.max(segments.len());
    let total: f64 = segments.iter().map(|(a, b)| b - a).sum();
    let mut counts: Vec<usize> = vec![1; segments.len()];
    let spare = n - segments.len();
    let shares: Vec<f64> = segments
        .iter()
        .map(|(a, b)| (b - a) / total * spare as f64)
        .collect();
    for (c, s) in counts.iter_mut().zip(&shares) {
        *c += s.floor() as usize;
    }
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| (shares[b] - shares[b].floor()).total_cmp(&(shares[a] - shares[a].floor())));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    segments
        .iter()
        .zip(counts)
        .flat_map(|(&(a, b), c)| {
            let pts: Vec<f64> = if c == 1 {
                vec![a]
            } else {
                linspace(a, b, c).collect()
            };
            pts
        })
        .collect()
}

fn keep_nondominated(points: Vec<ObjectiveVector>) -> Vec<ObjectiveVector> {
    let keep = nondominated_unchecked(&points);
    if keep.len() == points.len() {
        return points;
    }
    keep.into_iter().map(|i| points[i].clone()).collect()
}
