use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ciemo::infill::{score_candidates, IndicatorMask, WeightMode};
use ciemo::metrics::rank_sum_test;
use ciemo::problems::true_front_reference;
use ciemo::runner::run::fit_models;
use ciemo::{Database, GpOptions, RngStream};

fn err(e: ciemo::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A benchmark problem instance.
#[pyclass(name = "Problem", module = "ciemo_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: ciemo::ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (name, d=None, m=None))]
    fn new(name: &str, d: Option<usize>, m: Option<usize>) -> PyResult<Self> {
        let inner = ciemo::ProblemSpec::by_name(name, d, m).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.upper().to_vec()
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.objectives(&x).map_err(err)
    }

    /// `n` points sampled on the true Pareto front.
    fn true_front(&self, n: usize) -> PyResult<Vec<Vec<f64>>> {
        true_front_reference(&self.inner, n).map_err(err)
    }

    /// Latin hypercube design of `n` points inside the box.
    #[pyo3(signature = (n, seed=1))]
    fn latin_hypercube(&self, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let mut rng = RngStream::new(seed, "init");
        ciemo::latin_hypercube(n, &self.inner, &mut rng).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', d={}, m={})", self.inner.name(), self.inner.d(), self.inner.m())
    }
}

/// Kriging model of one objective.
#[pyclass(name = "GpModel", module = "ciemo_py", frozen)]
struct PyGpModel {
    inner: ciemo::GpModel,
}

#[pymethods]
impl PyGpModel {
    /// Fits by concentrated likelihood; `theta` fixes the kernel widths instead.
    #[staticmethod]
    #[pyo3(signature = (x, y, lower, upper, theta=None))]
    fn fit(
        py: Python<'_>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        theta: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let opts = GpOptions {
            fixed_theta: theta,
            ..GpOptions::default()
        };
        let inner = py
            .detach(|| ciemo::fit_gp(&x, &y, &lower, &upper, &opts))
            .map_err(err)?;
        Ok(Self { inner })
    }

    /// `(mean, variance)` at `x`.
    fn predict(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        let p = self.inner.predict(&x).map_err(err)?;
        Ok((p.mean, p.variance))
    }

    fn predict_mean(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict_mean(&x).map_err(err)
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.theta().to_vec()
    }

    #[getter]
    fn nugget(&self) -> f64 {
        self.inner.nugget()
    }

    #[getter]
    fn process_mean(&self) -> f64 {
        self.inner.process_mean()
    }

    #[getter]
    fn process_variance(&self) -> f64 {
        self.inner.process_variance()
    }

    #[getter]
    fn likelihood_evals(&self) -> usize {
        self.inner.likelihood_evals()
    }
}

/// Settings of one optimization run.
#[pyclass(name = "RunConfig", module = "ciemo_py", skip_from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: ciemo::RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (
        problem="ZDT1", *, seed=1, d=None, m=None, n0=None, n_total=None, t_max=20,
        indicators="123", weights="random", normalize=true, q=1, random_pick=false,
        metric_cadence=1
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        problem: &str,
        seed: u64,
        d: Option<usize>,
        m: Option<usize>,
        n0: Option<usize>,
        n_total: Option<usize>,
        t_max: usize,
        indicators: &str,
        weights: &str,
        normalize: bool,
        q: usize,
        random_pick: bool,
        metric_cadence: usize,
    ) -> PyResult<Self> {
        let inner = ciemo::RunConfig {
            problem: problem.parse().map_err(err)?,
            seed,
            d,
            m,
            n0,
            n_total,
            t_max,
            indicators: indicators.parse::<IndicatorMask>().map_err(err)?,
            weights: weights.parse::<WeightMode>().map_err(err)?,
            normalize,
            q,
            random_pick,
            metric_cadence,
            ..ciemo::RunConfig::default()
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = ciemo::RunConfig::from_toml_str(text).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn run_id(&self) -> String {
        self.inner.run_id()
    }

    fn __repr__(&self) -> String {
        format!("RunConfig('{}')", self.inner.run_id())
    }
}

/// Outcome of a finished run.
#[pyclass(name = "RunRecord", module = "ciemo_py", frozen)]
struct PyRunRecord {
    inner: ciemo::RunRecord,
}

#[pymethods]
impl PyRunRecord {
    #[getter]
    fn run_id(&self) -> &str {
        &self.inner.run_id
    }

    #[getter]
    fn completed(&self) -> bool {
        self.inner.is_complete()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn igd_plus(&self) -> f64 {
        self.inner.final_igd_plus()
    }

    #[getter]
    fn hv(&self) -> f64 {
        self.inner.final_hv()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.inner.evaluations.iter().map(|e| e.x.clone()).collect()
    }

    #[getter]
    fn f(&self) -> Vec<Vec<f64>> {
        self.inner.evaluations.iter().map(|e| e.f.clone()).collect()
    }

    #[getter]
    fn final_front(&self) -> Vec<Vec<f64>> {
        self.inner.final_front.clone()
    }

    /// `(eval_index, igd_plus, hv)` rows.
    #[getter]
    fn trajectory(&self) -> Vec<(usize, f64, f64)> {
        self.inner
            .trajectory
            .iter()
            .map(|p| (p.eval_index, p.igd_plus, p.hv))
            .collect()
    }

    #[getter]
    fn config(&self) -> PyRunConfig {
        PyRunConfig {
            inner: self.inner.config.clone(),
        }
    }
}

#[pyfunction]
fn run_ci_emo(py: Python<'_>, config: &PyRunConfig) -> PyResult<PyRunRecord> {
    let c = config.inner.clone();
    let inner = py.detach(|| ciemo::run_ci_emo(&c)).map_err(err)?;
    Ok(PyRunRecord { inner })
}

#[pyfunction]
fn dominates(a: Vec<f64>, b: Vec<f64>) -> PyResult<bool> {
    ciemo::dominates(&a, &b).map_err(err)
}

/// Fronts as lists of indices, best first.
#[pyfunction]
fn nondominated_sort(points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<usize>>> {
    Ok(ciemo::fast_nondominated_sort(&points).map_err(err)?.fronts)
}

#[pyfunction]
fn nondominated_subset(points: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    ciemo::nondominated_subset(&points).map_err(err)
}

#[pyfunction]
fn das_dennis(m: usize, h: usize) -> Vec<Vec<f64>> {
    ciemo::das_dennis(m, h).vectors
}

#[pyfunction]
fn igd_plus(approx: Vec<Vec<f64>>, reference: Vec<Vec<f64>>) -> PyResult<f64> {
    ciemo::igd_plus(&approx, &reference).map_err(err)
}

#[pyfunction]
fn hypervolume(points: Vec<Vec<f64>>, reference: Vec<f64>) -> PyResult<f64> {
    ciemo::hypervolume(&points, &reference).map_err(err)
}

/// `(u, z, p_value, verdict)` where the verdict symbol reads "a vs b" for a
/// smaller-is-better metric.
#[pyfunction]
#[pyo3(signature = (a, b, alpha=0.05))]
fn wilcoxon(a: Vec<f64>, b: Vec<f64>, alpha: f64) -> PyResult<(f64, f64, f64, &'static str)> {
    let t = rank_sum_test(&a, &b).map_err(err)?;
    let v = ciemo::wilcoxon_rank_sum(&a, &b, alpha).map_err(err)?;
    Ok((t.u, t.z, t.p_value, v.symbol()))
}

/// I1, I2, I3 and the weighted composite for predicted objective vectors
/// against an archive. Returns a dict with the chosen index.
#[pyfunction]
#[pyo3(signature = (predicted, archive_x, archive_f, weights, indicators="123", normalize=true))]
fn score_indicators<'py>(
    py: Python<'py>,
    predicted: Vec<Vec<f64>>,
    archive_x: Vec<Vec<f64>>,
    archive_f: Vec<Vec<f64>>,
    weights: [f64; 3],
    indicators: &str,
    normalize: bool,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let d = archive_x.first().map_or(0, Vec::len);
    let m = archive_f.first().map_or(0, Vec::len);
    let mut db = Database::new(d, m);
    for (x, f) in archive_x.into_iter().zip(archive_f) {
        db.push(x, f).map_err(err)?;
    }
    let mask: IndicatorMask = indicators.parse().map_err(err)?;
    let s = score_candidates(&predicted, &db, mask, normalize, weights).map_err(err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("i1", s.i1)?;
    out.set_item("i2", s.i2)?;
    out.set_item("i3", s.i3)?;
    out.set_item("ci", s.ci)?;
    out.set_item("chosen", s.chosen)?;
    Ok(out)
}

/// One Kriging model per objective fitted on `(x, f)`.
#[pyfunction]
fn fit_objective_models(problem: &PyProblem, x: Vec<Vec<f64>>, f: Vec<Vec<f64>>) -> PyResult<Vec<PyGpModel>> {
    let spec = &problem.inner;
    let mut db = Database::new(spec.d(), spec.m());
    for (x, f) in x.into_iter().zip(f) {
        db.push(x, f).map_err(err)?;
    }
    let models = fit_models(&db, spec, &GpOptions::default()).map_err(err)?;
    Ok(models.into_iter().map(|inner| PyGpModel { inner }).collect())
}

#[pymodule]
fn ciemo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyGpModel>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_function(wrap_pyfunction!(run_ci_emo, m)?)?;
    m.add_function(wrap_pyfunction!(dominates, m)?)?;
    m.add_function(wrap_pyfunction!(nondominated_sort, m)?)?;
    m.add_function(wrap_pyfunction!(nondominated_subset, m)?)?;
    m.add_function(wrap_pyfunction!(das_dennis, m)?)?;
    m.add_function(wrap_pyfunction!(igd_plus, m)?)?;
    m.add_function(wrap_pyfunction!(hypervolume, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(score_indicators, m)?)?;
    m.add_function(wrap_pyfunction!(fit_objective_models, m)?)?;
    Ok(())
}
