//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ciemo::moea::Surrogate;
use ciemo::{ObjectiveVector, ProblemSpec, Result, RngStream};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Fronts by repeated peeling: each round removes every point that no
/// remaining point dominates. Quadratic per round, no shared code with the
/// library sort.
pub fn peel_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Plain Kriging computed with explicit dense inverses.
pub struct DenseGp {
    pub x: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub rinv: DMatrix<f64>,
    pub y: DVector<f64>,
    pub mu: f64,
    pub sigma2: f64,
}

impl DenseGp {
    pub fn new(x: &[Vec<f64>], y: &[f64], theta: &[f64], nugget: f64) -> Self {
        let n = x.len();
        let r = DMatrix::from_fn(n, n, |i, j| {
            let s: f64 = (0..theta.len())
                .map(|k| theta[k] * (x[i][k] - x[j][k]).powi(2))
                .sum();
            (-s).exp() + if i == j { nugget } else { 0.0 }
        });
        let rinv = r.try_inverse().expect("invertible");
        let ones = DVector::from_element(n, 1.0);
        let y = DVector::from_column_slice(y);
        let mu = (ones.transpose() * &rinv * &y)[0] / (ones.transpose() * &rinv * &ones)[0];
        let resid = &y - &ones * mu;
        let sigma2 = (resid.transpose() * &rinv * &resid)[0] / n as f64;
        Self {
            x: x.to_vec(),
            theta: theta.to_vec(),
            rinv,
            y,
            mu,
            sigma2,
        }
    }

    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let r = DVector::from_fn(n, |i, _| {
            let s: f64 = (0..self.theta.len())
                .map(|k| self.theta[k] * (q[k] - self.x[i][k]).powi(2))
                .sum();
            (-s).exp()
        });
        let ones = DVector::from_element(n, 1.0);
        let resid = &self.y - &ones * self.mu;
        let mean = self.mu + (r.transpose() * &self.rinv * resid)[0];
        let one_r = 1.0 - (ones.transpose() * &self.rinv * &r)[0];
        let denom = (ones.transpose() * &self.rinv * &ones)[0];
        let var = self.sigma2 * (1.0 - (r.transpose() * &self.rinv * &r)[0] + one_r * one_r / denom);
        (mean, var)
    }
}

/// Monte Carlo hypervolume inside `[lo, reference]`; returns the estimate
/// and its standard error.
pub fn mc_hypervolume(points: &[Vec<f64>], lo: &[f64], reference: &[f64], samples: usize, rng: &mut RngStream) -> (f64, f64) {
    let volume: f64 = lo.iter().zip(reference).map(|(a, b)| b - a).product();
    let mut hits = 0usize;
    let mut z = vec![0.0; lo.len()];
    for _ in 0..samples {
        for k in 0..lo.len() {
            z[k] = rng.random_range(lo[k]..reference[k]);
        }
        if points.iter().any(|p| p.iter().zip(&z).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p * volume, (p * (1.0 - p) / samples as f64).sqrt() * volume)
}

/// The true objectives posing as a surrogate.
pub struct Exact(pub ProblemSpec);

impl Surrogate for Exact {
    fn n_objectives(&self) -> usize {
        self.0.m()
    }

    fn predict_means(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.0.objectives(x)
    }

    fn predict_full(&self, x: &[f64]) -> Result<(ObjectiveVector, Vec<f64>)> {
        Ok((self.0.objectives(x)?, vec![0.0; self.0.m()]))
    }
}

pub fn random_points(n: usize, m: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect()
}

pub mod suites;
