//! Pareto dominance and non-dominated sorting.
//!
//! All objectives are minimized. Comparisons are exact: two vectors that
//! differ only by rounding noise are still ordered by that noise.

use crate::error::{check_len, Error, Result};

/// A point in decision space.
pub type DecisionVector = Vec<f64>;
/// A point in objective space (minimization).
pub type ObjectiveVector = Vec<f64>;

/// Returns `true` iff `a` Pareto-dominates `b`.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > bi {
            return false;
        }
        if ai < bi {
            strictly_better = true;
        }
    }
    strictly_better
}

fn check_points<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let first = points
        .first()
        .ok_or(Error::EmptyInput("objective vectors"))?;
    let m = first.as_ref().len();
    for p in points {
        check_len(m, p.as_ref().len())?;
    }
    Ok(m)
}

/// Indices of the points not dominated by any other point, in input order.
///
/// Duplicated non-dominated values are all kept.
pub fn nondominated_subset<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<usize>> {
    check_points(points)?;
    Ok(nondominated_unchecked(points))
}

pub(crate) fn nondominated_unchecked<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let pi = points[i].as_ref();
            !points
                .iter()
                .enumerate()
                .any(|(j, pj)| j != i && dominates_unchecked(pj.as_ref(), pi))
        })
        .collect()
}

/// Ordered partition of a population into non-domination levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    /// `fronts[0]` is the non-dominated set; indices inside a front are ascending.
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    pub fn len(&self) -> usize {
        self.fronts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fronts.is_empty()
    }

    /// Front rank (0-based) of every member.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.fronts.iter().map(Vec::len).sum();
        let mut rank = vec![0; n];
        for (r, front) in self.fronts.iter().enumerate() {
            for &i in front {
                rank[i] = r;
            }
        }
        rank
    }
}

/// Deb's fast non-dominated sort.
pub fn fast_nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Result<FrontPartition> {
    check_points(points)?;
    Ok(sort_unchecked(points, points.len()))
}

/// Sorts until at least `min_count` members have been assigned to fronts.
/// Remaining members are left out of the partition.
pub(crate) fn sort_unchecked<P: AsRef<[f64]>>(points: &[P], min_count: usize) -> FrontPartition {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let pi = points[i].as_ref();
        for j in (i + 1)..n {
            let pj = points[j].as_ref();
            if dominates_unchecked(pi, pj) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(pj, pi) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut assigned = 0;
    while !current.is_empty() {
        assigned += current.len();
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        if assigned >= min_count {
            break;
        }
        current = next;
    }
    FrontPartition { fronts }
}
