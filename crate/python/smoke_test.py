"""Smoke test for the ciemo_py extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/ciemo-*.whl
"""

import math

import ciemo_py as c


def main():
    p = c.Problem("ZDT1")
    assert (p.d, p.m) == (8, 2)
    f = p.evaluate([0.0] * p.d)
    assert f == [0.0, 1.0], f

    assert c.dominates([0.0, 0.0], [1.0, 1.0])
    assert not c.dominates([0.0, 1.0], [1.0, 0.0])
    pts = [[0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [2.0, 2.0]]
    assert c.nondominated_sort(pts) == [[0, 1], [2], [3]]
    assert c.nondominated_subset(pts) == [0, 1]

    x = p.latin_hypercube(30, seed=3)
    assert len(x) == 30 and all(0.0 <= v <= 1.0 for row in x for v in row)
    y = [p.evaluate(row)[0] for row in x]
    gp = c.GpModel.fit(x, y, p.lower, p.upper)
    mean, var = gp.predict(x[0])
    assert abs(mean - y[0]) <= 1e-6 * (1 + abs(y[0])), (mean, y[0])
    assert 0.0 <= var <= 1e-8 * max(gp.process_variance, 1e-300) + 1e-300
    models = c.fit_objective_models(p, x, [p.evaluate(row) for row in x])
    assert len(models) == 2

    assert len(c.das_dennis(2, 86)) == 87
    front = p.true_front(100)
    assert c.igd_plus(front, front) == 0.0
    assert math.isclose(c.hypervolume([[0.5, 0.5]], [1.0, 1.0]), 0.25)

    _, _, pval, verdict = c.wilcoxon([1.0] * 10, [2.0] * 10)
    assert verdict == "+" and pval < 0.05

    fx = [p.evaluate(row) for row in x]
    s = c.score_indicators([[0.2, 0.5], [0.6, 0.1]], x, fx, [0.3, 0.3, 0.4])
    assert s["chosen"] in (0, 1) and len(s["ci"]) == 2

    cfg = c.RunConfig("ZDT1", seed=2, n0=20, n_total=24, t_max=3)
    rec = c.run_ci_emo(cfg)
    assert rec.completed and len(rec.f) == 24 and rec.iterations == 4
    again = c.run_ci_emo(c.RunConfig.from_toml(cfg.to_toml()))
    assert again.f == rec.f
    print(f"ok: {rec.run_id} IGD+ {rec.igd_plus:.4e} HV {rec.hv:.4f}")


if __name__ == "__main__":
    main()
