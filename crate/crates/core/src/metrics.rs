//! Solution-set quality metrics and the rank-sum comparison used to
//! compare repeated runs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_len, Error, Result};
use crate::pareto::nondominated_unchecked;

fn check_set<P: AsRef<[f64]>>(set: &[P], what: &'static str) -> Result<usize> {
    let m = set.first().ok_or(Error::EmptyInput(what))?.as_ref().len();
    for p in set {
        check_len(m, p.as_ref().len())?;
    }
    Ok(m)
}

/// IGD+: mean over the reference set of the smallest dominance-aware
/// distance `‖max(a - r, 0)‖` to any approximation point.
pub fn igd_plus<P: AsRef<[f64]>, Q: AsRef<[f64]>>(approx: &[P], reference: &[Q]) -> Result<f64> {
    let m = check_set(approx, "approximation set")?;
    check_len(m, check_set(reference, "reference set")?)?;
    let total: f64 = reference
        .iter()
        .map(|r| {
            let r = r.as_ref();
            approx
                .iter()
                .map(|a| {
                    a.as_ref()
                        .iter()
                        .zip(r)
                        .map(|(ai, ri)| (ai - ri).max(0.0).powi(2))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Exact hypervolume dominated by `approx` and bounded by `ref_point`, for two
/// or three objectives. Points not strictly better than the reference point
/// in every objective contribute nothing.
pub fn hypervolume<P: AsRef<[f64]>>(approx: &[P], ref_point: &[f64]) -> Result<f64> {
    let m = ref_point.len();
    if !(2..=3).contains(&m) {
        return Err(Error::Parameter(format!(
            "exact hypervolume supports 2 or 3 objectives, got {m}"
        )));
    }
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(approx.len());
    for p in approx {
        let p = p.as_ref();
        check_len(m, p.len())?;
        if p.iter().zip(ref_point).all(|(a, r)| a < r) {
            pts.push(p.to_vec());
        }
    }
    if pts.is_empty() {
        return Ok(0.0);
    }
    let keep = nondominated_unchecked(&pts);
    let pts: Vec<Vec<f64>> = keep.into_iter().map(|i| pts[i].clone()).collect();
    Ok(if m == 2 {
        let mut xy: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
        area_2d(&mut xy, ref_point[0], ref_point[1])
    } else {
        volume_3d(pts, ref_point)
    })
}

/// Area dominated by mutually arbitrary points, sweep over the first axis.
fn area_2d(pts: &mut [(f64, f64)], r0: f64, r1: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut floor = r1;
    for &(x, y) in pts.iter() {
        if y < floor {
            area += (r0 - x) * (floor - y);
            floor = y;
        }
    }
    area
}

/// Slices along the third axis; each slab is a 2-D problem.
fn volume_3d(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut active: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (k, p) in pts.iter().enumerate() {
        active.push((p[0], p[1]));
        let top = pts.get(k + 1).map_or(r[2], |q| q[2]);
        let depth = top - p[2];
        if depth > 0.0 {
            volume += area_2d(&mut active, r[0], r[1]) * depth;
        }
    }
    volume
}

/// Affine map `(f - ideal) / (nadir - ideal)` per objective.
pub fn normalize_by(points: &[Vec<f64>], ideal: &[f64], nadir: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(ideal.iter().zip(nadir))
                .map(|(v, (lo, hi))| {
                    let range = hi - lo;
                    if range > 0.0 {
                        (v - lo) / range
                    } else {
                        v - lo
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub igd_plus: f64,
    pub hv: f64,
    pub n_solutions: usize,
    pub reference_meta: String,
}

/// Outcome of comparing sample `a` against sample `b` for a metric where
/// smaller is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Better,
    Worse,
    Similar,
}

impl Verdict {
    /// `+`, `-` or `~`, read as "a is significantly better / worse / similar".
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Better => "+",
            Verdict::Worse => "-",
            Verdict::Similar => "~",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Verdict> {
        match s.trim() {
            "+" => Some(Verdict::Better),
            "-" => Some(Verdict::Worse),
            "~" => Some(Verdict::Similar),
            _ => None,
        }
    }
}

/// Result of the two-sided rank-sum test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumTest {
    /// Mann–Whitney U of sample `a`.
    pub u: f64,
    pub z: f64,
    pub p_value: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Rank-sum statistic with tie-corrected normal approximation and
/// continuity correction.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSumTest> {
    if a.len() < 5 || b.len() < 5 {
        return Err(Error::Parameter(format!(
            "rank-sum test needs at least 5 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += avg_rank * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let total = n1 + n2;
    let var = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if !(var > 0.0) {
        return Ok(RankSumTest {
            u,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let dev = (u - mean).abs() - 0.5;
    let z = dev.max(0.0) / var.sqrt() * (u - mean).signum();
    let p_value = erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    Ok(RankSumTest { u, z, p_value })
}

/// Three-way verdict for `a` versus `b` at significance `alpha`, smaller
/// values being better.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<Verdict> {
    let test = rank_sum_test(a, b)?;
    if test.p_value >= alpha {
        return Ok(Verdict::Similar);
    }
    let (ma, mb) = (median(a), median(b));
    let a_smaller = match ma.partial_cmp(&mb) {
        Some(Ordering::Less) => true,
        Some(Ordering::Greater) => false,
        _ => test.z < 0.0,
    };
    Ok(if a_smaller {
        Verdict::Better
    } else {
        Verdict::Worse
    })
}
