//! Ordinary Kriging with a squared-exponential (Gaussian) correlation.
//!
//! Each objective gets an independent model. Inputs are scaled to the unit
//! box using the problem bounds and outputs to zero mean and unit variance;
//! predictions are returned in the original units. Hyperparameters are fitted
//! by minimizing the concentrated likelihood criterion
//! `ln σ̂² + ln|R| / n` with a coordinate pattern search in log10 space.

use std::time::{Duration, Instant};

use crate::error::{check_len, Error, Result};
use crate::linalg::{backward_solve, cholesky_in_place, cholesky_solve, dot, forward_solve};

/// Kernel value `exp(-Σ θ_k (a_k - b_k)²)`.
pub fn correlation(a: &[f64], b: &[f64], theta: &[f64]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), theta.len())?;
    if let Some(t) = theta.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Parameter(format!("theta must be positive, got {t}")));
    }
    Ok(kernel(a, b, theta))
}

#[inline]
fn kernel(a: &[f64], b: &[f64], theta: &[f64]) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .zip(theta)
        .map(|((x, y), t)| t * (x - y) * (x - y))
        .sum();
    (-s).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOptions {
    /// Search box for every θ_k.
    pub theta_lower: f64,
    pub theta_upper: f64,
    /// Cap on likelihood evaluations during the pattern search.
    pub max_evals: usize,
    /// Skip the search and use these hyperparameters.
    pub fixed_theta: Option<Vec<f64>>,
    pub nugget_start: f64,
    pub nugget_max: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            theta_lower: 1e-5,
            theta_upper: 1e2,
            max_evals: 200,
            fixed_theta: None,
            nugget_start: 1e-10,
            nugget_max: 1e-4,
        }
    }
}

/// Predictive mean and variance at one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// A fitted Kriging model for one objective.
#[derive(Debug, Clone)]
pub struct GpModel {
    theta: Vec<f64>,
    mu_hat: f64,
    sigma2_hat: f64,
    nugget: f64,
    n: usize,
    /// Lower Cholesky factor of `R + nugget·I`, row-major.
    chol: Vec<f64>,
    x_train: Vec<Vec<f64>>,
    y_train: Vec<f64>,
    y_shift: f64,
    y_scale: f64,
    lower: Vec<f64>,
    width: Vec<f64>,
    /// `R⁻¹ (y - 1 μ̂)`.
    alpha: Vec<f64>,
    /// `R⁻¹ 1`.
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
    likelihood_evals: usize,
    fit_time: Duration,
}

impl GpModel {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Process mean in standardized output units.
    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    /// Process variance in standardized output units.
    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2_hat
    }

    /// Process mean in original output units.
    pub fn process_mean(&self) -> f64 {
        self.mu_hat * self.y_scale + self.y_shift
    }

    /// Process variance in original output units.
    pub fn process_variance(&self) -> f64 {
        self.sigma2_hat * self.y_scale * self.y_scale
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn n_train(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// `1ᵀ R⁻¹ 1`.
    pub fn one_rinv_one(&self) -> f64 {
        self.one_rinv_one
    }

    pub fn likelihood_evals(&self) -> usize {
        self.likelihood_evals
    }

    pub fn fit_time(&self) -> Duration {
        self.fit_time
    }

    /// Training inputs in unit-box coordinates, in the model's canonical order.
    pub fn x_train(&self) -> &[Vec<f64>] {
        &self.x_train
    }

    /// Standardized training outputs, aligned with [`GpModel::x_train`].
    pub fn y_train(&self) -> &[f64] {
        &self.y_train
    }

    /// Reconstructs `R + nugget·I` from the stored factor.
    pub fn correlation_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (0..=j)
                    .map(|k| self.chol[i * n + k] * self.chol[j * n + k])
                    .sum();
                r[i * n + j] = v;
                r[j * n + i] = v;
            }
        }
        r
    }

    fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lower)
            .zip(&self.width)
            .map(|((v, lo), w)| (v - lo) / w)
            .collect()
    }

    // The nugget belongs to the kernel at zero distance, so a query that
    // coincides with a training input sees the same row of R + δI as the fit.
    fn correlation_to(&self, u: &[f64], xi: &[f64]) -> f64 {
        if u == xi {
            1.0 + self.nugget
        } else {
            kernel(u, xi, &self.theta)
        }
    }

    fn cross_correlation(&self, u: &[f64]) -> Vec<f64> {
        self.x_train.iter().map(|xi| self.correlation_to(u, xi)).collect()
    }

    /// Predictive mean only; skips the O(n²) variance solve.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        let u = self.scale_input(x);
        let s: f64 = self
            .x_train
            .iter()
            .zip(&self.alpha)
            .map(|(xi, a)| self.correlation_to(&u, xi) * a)
            .sum();
        Ok((self.mu_hat + s) * self.y_scale + self.y_shift)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        check_len(self.dim(), x.len())?;
        let u = self.scale_input(x);
        let mut r = self.cross_correlation(&u);
        let mean_std = self.mu_hat + dot(&r, &self.alpha);
        let one_term = 1.0 - dot(&r, &self.rinv_one);
        forward_solve(&self.chol, self.n, &mut r);
        let quad = dot(&r, &r);
        let var_std =
            self.sigma2_hat * (1.0 - quad + one_term * one_term / self.one_rinv_one);
        Ok(Prediction {
            mean: mean_std * self.y_scale + self.y_shift,
            variance: var_std.max(0.0) * self.y_scale * self.y_scale,
        })
    }
}

/// Pairwise squared coordinate differences, packed lower triangle by pair,
/// `d` values per pair.
struct PairDistances {
    n: usize,
    d: usize,
    sq: Vec<f64>,
}

impl PairDistances {
    fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let mut sq = Vec::with_capacity(n * (n.saturating_sub(1)) / 2 * d);
        for i in 0..n {
            for j in 0..i {
                sq.extend(x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)));
            }
        }
        Self { n, d, sq }
    }

    fn fill_correlation(&self, theta: &[f64], nugget: f64, out: &mut [f64]) {
        let n = self.n;
        let mut pair = self.sq.chunks_exact(self.d.max(1));
        for i in 0..n {
            for j in 0..i {
                let s: f64 = if self.d == 0 {
                    0.0
                } else {
                    pair.next()
                        .expect("pair count")
                        .iter()
                        .zip(theta)
                        .map(|(a, t)| a * t)
                        .sum()
                };
                out[i * n + j] = (-s).exp();
            }
            out[i * n + i] = 1.0 + nugget;
        }
    }
}

struct Factorization {
    chol: Vec<f64>,
    nugget: f64,
    mu_hat: f64,
    sigma2_hat: f64,
    log_det: f64,
}

struct LikelihoodWorkspace<'a> {
    dist: PairDistances,
    y: &'a [f64],
    nugget_start: f64,
    nugget_max: f64,
    evals: usize,
}

impl LikelihoodWorkspace<'_> {
    /// Factorizes `R(θ) + δI`, escalating δ by 10× on failure.
    fn factor(&self, theta: &[f64]) -> Option<Factorization> {
        let n = self.dist.n;
        let mut nugget = self.nugget_start;
        let mut chol = vec![0.0; n * n];
        loop {
            self.dist.fill_correlation(theta, nugget, &mut chol);
            if cholesky_in_place(&mut chol, n) {
                break;
            }
            if nugget >= self.nugget_max {
                return None;
            }
            nugget = (nugget * 10.0).min(self.nugget_max);
        }
        let mut ones = vec![1.0; n];
        let mut ys = self.y.to_vec();
        forward_solve(&chol, n, &mut ones);
        forward_solve(&chol, n, &mut ys);
        let mu_hat = dot(&ones, &ys) / dot(&ones, &ones);
        let sigma2_hat = ones
            .iter()
            .zip(&ys)
            .map(|(o, y)| (y - mu_hat * o).powi(2))
            .sum::<f64>()
            / n as f64;
        let log_det = 2.0 * (0..n).map(|i| chol[i * n + i].ln()).sum::<f64>();
        Some(Factorization {
            chol,
            nugget,
            mu_hat,
            sigma2_hat,
            log_det,
        })
    }

    fn criterion(&mut self, theta: &[f64]) -> f64 {
        self.evals += 1;
        match self.factor(theta) {
            Some(f) if f.sigma2_hat > 0.0 => f.sigma2_hat.ln() + f.log_det / self.dist.n as f64,
            _ => f64::INFINITY,
        }
    }
}

/// Coordinate pattern search over `log10 θ`, starting from θ = 1.
fn pattern_search(ws: &mut LikelihoodWorkspace<'_>, d: usize, opts: &GpOptions) -> Vec<f64> {
    let lo = opts.theta_lower.log10();
    let hi = opts.theta_upper.log10();
    let mut point = vec![0.0f64.clamp(lo, hi); d];
    let theta_of = |p: &[f64]| p.iter().map(|v| 10f64.powf(*v)).collect::<Vec<_>>();
    let mut best = ws.criterion(&theta_of(&point));
    let mut step = 1.0;
    while step >= 1.0 / 32.0 {
        let mut improved = false;
        for k in 0..d {
            for dir in [1.0, -1.0] {
                if ws.evals >= opts.max_evals {
                    return theta_of(&point);
                }
                let mut trial = point.clone();
                trial[k] = (trial[k] + dir * step).clamp(lo, hi);
                if trial[k] == point[k] {
                    continue;
                }
                let value = ws.criterion(&theta_of(&trial));
                if value < best {
                    best = value;
                    point = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    theta_of(&point)
}

/// Fits a Kriging model to `(x, y)`.
///
/// `lower`/`upper` are the input bounds used to map inputs onto the unit box.
/// Training rows are put into a canonical order first, so the fitted model
/// does not depend on the order of the data.
pub fn fit_gp(
    x: &[Vec<f64>],
    y: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &GpOptions,
) -> Result<GpModel> {
    let started = Instant::now();
    let n = x.len();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "at least 2 training points required, got {n}"
        )));
    }
    check_len(n, y.len())?;
    let d = lower.len();
    check_len(d, upper.len())?;
    let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    if width.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Parameter("input bounds must satisfy lower < upper".into()));
    }
    if let Some(t) = &opts.fixed_theta {
        check_len(d, t.len())?;
        if t.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Parameter("theta must be positive".into()));
        }
    }

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    for (xi, &yi) in x.iter().zip(y) {
        check_len(d, xi.len())?;
        let u: Vec<f64> = xi
            .iter()
            .zip(lower)
            .zip(&width)
            .map(|((v, lo), w)| (v - lo) / w)
            .collect();
        rows.push((u, yi));
    }
    rows.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.1.total_cmp(&b.1))
    });
    let (x_train, y_raw): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();

    let y_shift = y_raw.iter().sum::<f64>() / n as f64;
    let var = y_raw.iter().map(|v| (v - y_shift).powi(2)).sum::<f64>() / n as f64;
    let constant = var < 1e-24;
    let y_scale = if constant { 1.0 } else { var.sqrt() };
    let y_train: Vec<f64> = y_raw.iter().map(|v| (v - y_shift) / y_scale).collect();

    let mut ws = LikelihoodWorkspace {
        dist: PairDistances::new(&x_train),
        y: &y_train,
        nugget_start: opts.nugget_start,
        nugget_max: opts.nugget_max,
        evals: 0,
    };
    let theta = match (&opts.fixed_theta, constant) {
        (Some(t), _) => t.clone(),
        // A constant response carries no information about length scales.
        (None, true) => vec![1.0f64.clamp(opts.theta_lower, opts.theta_upper); d],
        (None, false) => pattern_search(&mut ws, d, opts),
    };
    let fact = ws.factor(&theta).ok_or(Error::IllConditioned {
        nugget: opts.nugget_max,
    })?;

    let mut rinv_one = vec![1.0; n];
    cholesky_solve(&fact.chol, n, &mut rinv_one);
    let one_rinv_one = rinv_one.iter().sum::<f64>();
    let mut alpha: Vec<f64> = y_train.iter().map(|v| v - fact.mu_hat).collect();
    forward_solve(&fact.chol, n, &mut alpha);
    backward_solve(&fact.chol, n, &mut alpha);

    let likelihood_evals = ws.evals;
    drop(ws);
    Ok(GpModel {
        theta,
        mu_hat: fact.mu_hat,
        sigma2_hat: fact.sigma2_hat.max(0.0),
        nugget: fact.nugget,
        n,
        chol: fact.chol,
        x_train,
        y_train,
        y_shift,
        y_scale,
        lower: lower.to_vec(),
        width,
        alpha,
        rinv_one,
        one_rinv_one,
        likelihood_evals,
        fit_time: started.elapsed(),
    })
}
