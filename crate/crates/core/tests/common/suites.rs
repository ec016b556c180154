//! Oracle suites, each returning the list of failed checks.

use ciemo::infill::{score_candidates, IndicatorMask};
use ciemo::pareto::fast_nondominated_sort;
use ciemo::problems::ProblemKind;
use ciemo::{fit_gp, hypervolume, igd_plus, latin_hypercube, Database, GpOptions, ProblemSpec, RngStream};
use rand::Rng;

use super::{mc_hypervolume, peel_fronts, random_points, DenseGp};

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

/// Fixed three-point fixture against the dense oracle.
pub fn gp_fixture() -> Vec<String> {
    let mut f = Vec::new();
    let x = vec![vec![0.0], vec![0.5], vec![1.0]];
    let y = [0.0, 1.0, 0.0];
    let opts = GpOptions {
        fixed_theta: Some(vec![1.0]),
        ..GpOptions::default()
    };
    let model = fit_gp(&x, &y, &[0.0], &[1.0], &opts).expect("fit");
    let oracle = DenseGp::new(&x, &y, &[1.0], model.nugget());
    check(&mut f, (model.process_mean() - oracle.mu).abs() <= 1e-8, || {
        format!("mu_hat {} vs oracle {}", model.process_mean(), oracle.mu)
    });
    check(&mut f, (model.process_variance() - oracle.sigma2).abs() <= 1e-8, || {
        format!("sigma2_hat {} vs oracle {}", model.process_variance(), oracle.sigma2)
    });
    let p = model.predict(&[0.25]).expect("predict");
    let (mean, var) = oracle.predict(&[0.25]);
    check(&mut f, (p.mean - mean).abs() <= 1e-8, || format!("mean(0.25) {} vs oracle {mean}", p.mean));
    check(&mut f, (p.variance - var).abs() <= 1e-8, || {
        format!("variance(0.25) {} vs oracle {var}", p.variance)
    });
    f
}

/// Interpolation on fitted benchmark models and variance sign on random queries.
pub fn gp_interpolation_and_variance(queries: usize) -> Vec<String> {
    let mut f = Vec::new();
    let mut rng = RngStream::new(11, "gp-suite");
    let cases = [(ProblemKind::Zdt1, 2, 40), (ProblemKind::Dtlz2, 3, 60), (ProblemKind::Zdt3, 2, 90)];
    let mut models = Vec::new();
    for (kind, m, n) in cases {
        let spec = ProblemSpec::new(kind, None, Some(m)).expect("spec");
        let x = latin_hypercube(n, &spec, &mut rng).expect("lhs");
        let ys: Vec<Vec<f64>> = x.iter().map(|v| spec.objectives(v).expect("eval")).collect();
        for j in 0..m {
            let y: Vec<f64> = ys.iter().map(|v| v[j]).collect();
            let model = fit_gp(&x, &y, spec.lower(), spec.upper(), &GpOptions::default()).expect("fit");
            for (xi, yi) in x.iter().zip(&y) {
                let p = model.predict(xi).expect("predict");
                check(&mut f, (p.mean - yi).abs() <= 1e-6, || {
                    format!("{kind} f{}: |mean - y| = {:e}", j + 1, (p.mean - yi).abs())
                });
                check(&mut f, p.variance <= 1e-8 * model.process_variance().max(f64::MIN_POSITIVE), || {
                    format!("{kind} f{}: variance {:e} at a training input", j + 1, p.variance)
                });
            }
            models.push((spec.clone(), model));
        }
    }
    let per_model = queries.div_ceil(models.len());
    let mut negative = 0;
    for (spec, model) in &models {
        for _ in 0..per_model {
            let q: Vec<f64> = spec
                .lower()
                .iter()
                .zip(spec.upper())
                .map(|(l, u)| rng.random_range(*l..=*u))
                .collect();
            let p = model.predict(&q).expect("predict");
            if !(p.variance >= 0.0 && p.variance.is_finite() && p.mean.is_finite()) {
                negative += 1;
            }
        }
    }
    check(&mut f, negative == 0, || format!("{negative} queries with negative or non-finite variance"));
    f
}

/// HV against Monte Carlo: `sets` random sets alternating m = 2 and m = 3.
pub fn hv_monte_carlo(sets: usize, samples: usize) -> Vec<String> {
    let mut f = Vec::new();
    let mut rng = RngStream::new(5, "hv-mc");
    for s in 0..sets {
        let m = 2 + s % 2;
        let n = rng.random_range(1..=8);
        let pts = random_points(n, m, &mut rng);
        let reference = vec![1.0; m];
        let exact = hypervolume(&pts, &reference).expect("hv");
        let (est, se) = mc_hypervolume(&pts, &vec![0.0; m], &reference, samples, &mut rng);
        check(&mut f, (exact - est).abs() <= 3.0 * se.max(1e-12), || {
            format!("set {s} (m={m}, n={n}): exact {exact} vs MC {est} ± {se}")
        });
    }
    f
}

pub fn igd_plus_fixtures() -> Vec<String> {
    let mut f = Vec::new();
    let r = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let v = igd_plus(&r, &r).expect("igd+");
    check(&mut f, v == 0.0, || format!("approx = reference gave {v}"));
    let v = igd_plus(&[vec![1.0, 1.0]], &r).expect("igd+");
    check(&mut f, v == 1.0, || format!("(1,1) against {{(0,1),(1,0)}} gave {v}"));
    // (0.5, 2) against (1, 1): only the second component counts.
    let v = igd_plus(&[vec![0.5, 2.0]], &[vec![1.0, 1.0]]).expect("igd+");
    check(&mut f, v == 1.0, || format!("clamped fixture gave {v}"));
    // d+ = (0.3, 0.4) → 0.5, and the reference point itself → 0.
    let v = igd_plus(&[vec![0.3, 0.4], vec![0.0, 0.0]], &[vec![0.0, 0.0], vec![0.0, 0.0]]).expect("igd+");
    check(&mut f, v == 0.0, || format!("exact hit fixture gave {v}"));
    let v = igd_plus(&[vec![0.3, 0.4]], &[vec![0.0, 0.0]]).expect("igd+");
    check(&mut f, (v - 0.5).abs() < 1e-15, || format!("3-4-5 fixture gave {v}"));
    f
}

/// Library sort versus brute-force peeling on random populations.
pub fn sort_vs_peeling(populations: usize) -> Vec<String> {
    let mut f = Vec::new();
    let mut rng = RngStream::new(3, "peel");
    for p in 0..populations {
        let m = 2 + p % 3;
        let n = rng.random_range(1..=60);
        // A coarse grid forces ties and duplicates.
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0..6) as f64).collect())
            .collect();
        let mut ours: Vec<Vec<usize>> = fast_nondominated_sort(&pts).expect("sort").fronts;
        let mut oracle = peel_fronts(&pts);
        for fr in ours.iter_mut().chain(oracle.iter_mut()) {
            fr.sort_unstable();
        }
        check(&mut f, ours == oracle, || format!("population {p}: fronts differ"));
    }
    f
}

/// Indicator bounds, recombination identity and tie-breaking on random fixtures.
pub fn indicator_bounds(fixtures: usize) -> Vec<String> {
    let mut f = Vec::new();
    let mut rng = RngStream::new(17, "indicators");
    for t in 0..fixtures {
        let m = 2 + t % 2;
        let mut db = Database::new(1, m);
        for i in 0..rng.random_range(2..30) {
            let obj: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..2.0)).collect();
            db.push(vec![i as f64], obj).expect("push");
        }
        let mut pool: Vec<Vec<f64>> = (0..rng.random_range(2..40))
            .map(|_| (0..m).map(|_| rng.random_range(0.0..2.5)).collect())
            .collect();
        let weights = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let s = score_candidates(&pool, &db, IndicatorMask::ALL, true, weights).expect("score");
        let in_range = |v: &[f64], lo: f64, hi: f64| v.iter().all(|x| (lo..=hi).contains(x));
        check(&mut f, in_range(&s.i1, 0.0, 1.0), || format!("fixture {t}: I1 outside [0,1]"));
        check(&mut f, in_range(&s.i2, 0.0, 1.0), || format!("fixture {t}: I2 outside [0,1]"));
        check(&mut f, in_range(&s.i3, -1.0, 0.0), || format!("fixture {t}: I3 outside [-1,0]"));
        let identity = (0..pool.len())
            .all(|j| s.ci[j] == weights[0] * s.i1[j] + weights[1] * s.i2[j] + weights[2] * s.i3[j]);
        check(&mut f, identity, || format!("fixture {t}: CI != r·I"));
        let best = s.ci.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = s.ci.iter().position(|&v| v == best).expect("max");
        check(&mut f, s.chosen == first, || format!("fixture {t}: argmax not the lowest index"));

        // Clone the winner to the end of the pool: the original index must still win.
        let winner = pool[s.chosen].clone();
        pool.push(winner);
        let again = score_candidates(&pool, &db, IndicatorMask::ALL, true, weights).expect("score");
        check(&mut f, again.chosen == s.chosen, || format!("fixture {t}: duplicated winner changed the pick"));
        let twice = score_candidates(&pool, &db, IndicatorMask::ALL, true, weights).expect("score");
        check(&mut f, twice == again, || format!("fixture {t}: scoring not deterministic"));
    }
    f
}
