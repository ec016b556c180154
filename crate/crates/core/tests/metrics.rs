mod common;

use ciemo::metrics::{rank_sum_test, wilcoxon_rank_sum, Verdict};
use ciemo::{hypervolume, igd_plus, RngStream};
use rand::Rng;

#[test]
fn oracle_suites_pass() {
    for failures in [
        common::suites::hv_monte_carlo(50, 1_000_000),
        common::suites::igd_plus_fixtures(),
        common::suites::sort_vs_peeling(200),
    ] {
        assert!(failures.is_empty(), "{failures:#?}");
    }
}

#[test]
fn planar_sweep_matches_degenerate_slicing() {
    let mut rng = RngStream::new(21, "hv2d3d");
    for _ in 0..100 {
        let n = rng.random_range(1..12);
        let pts = common::random_points(n, 2, &mut rng);
        let flat: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1], 0.0]).collect();
        let a = hypervolume(&pts, &[1.1, 1.1]).unwrap();
        let b = hypervolume(&flat, &[1.1, 1.1, 1.0]).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn metrics_are_monotone_in_the_approximation() {
    let mut rng = RngStream::new(22, "mono");
    for m in [2usize, 3] {
        let reference = common::random_points(30, m, &mut rng);
        let r = vec![1.1; m];
        let mut approx = common::random_points(1, m, &mut rng);
        for _ in 0..30 {
            let before_igd = igd_plus(&approx, &reference).unwrap();
            let before_hv = hypervolume(&approx, &r).unwrap();
            let p: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            approx.push(p);
            assert!(igd_plus(&approx, &reference).unwrap() <= before_igd);
            assert!(hypervolume(&approx, &r).unwrap() >= before_hv - 1e-15);
        }
        // A dominated point changes HV by exactly zero.
        let mut worse = approx[0].clone();
        for v in &mut worse {
            *v += 0.01;
        }
        let hv = hypervolume(&approx, &r).unwrap();
        approx.push(worse);
        assert_eq!(hypervolume(&approx, &r).unwrap(), hv);
    }
}

#[test]
fn igd_plus_zero_iff_reference_weakly_dominated() {
    let mut rng = RngStream::new(23, "igd0");
    for _ in 0..200 {
        let reference = common::random_points(5, 2, &mut rng);
        let mut approx: Vec<Vec<f64>> = reference
            .iter()
            .map(|r| r.iter().map(|v| v - rng.random::<f64>() * 0.1).collect())
            .collect();
        assert_eq!(igd_plus(&approx, &reference).unwrap(), 0.0);
        let k = rng.random_range(0..5);
        approx[k][0] = reference[k][0] + 0.5;
        approx[k][1] = reference[k][1] + 0.5;
        let covered = approx
            .iter()
            .any(|a| a.iter().zip(&reference[k]).all(|(x, y)| x <= y));
        assert_eq!(igd_plus(&approx, &reference).unwrap() == 0.0, covered);
    }
}

/// Ranks 1..=20 split into two groups of ten; `a` takes the listed ranks.
fn split(a_ranks: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let a: Vec<f64> = a_ranks.iter().map(|&r| r as f64).collect();
    let b: Vec<f64> = (1..=20).filter(|r| !a_ranks.contains(r)).map(|r| r as f64).collect();
    (a, b)
}

#[test]
fn rank_sum_textbook_critical_value() {
    // Two-sided α = 0.05, n1 = n2 = 10: reject iff U ≤ 23.
    let (a, b) = split(&[1, 2, 3, 4, 5, 6, 7, 15, 17, 18]);
    let t = rank_sum_test(&a, &b).unwrap();
    assert_eq!(t.u, 23.0);
    assert!(t.p_value < 0.05, "p = {}", t.p_value);
    assert_eq!(wilcoxon_rank_sum(&a, &b, 0.05).unwrap(), Verdict::Better);
    assert_eq!(wilcoxon_rank_sum(&b, &a, 0.05).unwrap(), Verdict::Worse);

    let (a, b) = split(&[1, 2, 3, 4, 5, 6, 7, 15, 17, 19]);
    let t = rank_sum_test(&a, &b).unwrap();
    assert_eq!(t.u, 24.0);
    assert!(t.p_value >= 0.05, "p = {}", t.p_value);
    assert_eq!(wilcoxon_rank_sum(&a, &b, 0.05).unwrap(), Verdict::Similar);
}

#[test]
fn rank_sum_null_rarely_rejects() {
    // Twenty meta-trials of two identically distributed 21-run samples.
    let mut rng = RngStream::new(24, "null");
    let mut similar = 0;
    for _ in 0..20 {
        let a: Vec<f64> = (0..21).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..21).map(|_| rng.random::<f64>()).collect();
        if wilcoxon_rank_sum(&a, &b, 0.05).unwrap() == Verdict::Similar {
            similar += 1;
        }
    }
    assert!(similar >= 18, "{similar}/20 similar");
}
