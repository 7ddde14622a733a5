//! Python bindings: `import lpstat`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lpstat_core::twosample::{self, GroupSummary};
use lpstat_core::{
    CompDensityModel, CopulaModel, DensityFlavor, LpError, ReferenceDistribution, SelectionRule,
};

fn err(e: LpError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rule(name: &str) -> PyResult<SelectionRule> {
    match name {
        "aic" => Ok(SelectionRule::Aic),
        "bic" => Ok(SelectionRule::Bic),
        "none" => Ok(SelectionRule::None),
        other => Err(PyValueError::new_err(format!(
            "unknown selection rule {other:?}; expected aic, bic or none"
        ))),
    }
}

fn flavor(name: &str) -> PyResult<DensityFlavor> {
    match name {
        "l2" => Ok(DensityFlavor::L2),
        "l2_clipped" => Ok(DensityFlavor::L2Clipped),
        "maxent" => Ok(DensityFlavor::MaxEnt),
        other => Err(PyValueError::new_err(format!(
            "unknown density flavor {other:?}; expected l2, l2_clipped or maxent"
        ))),
    }
}

/// Empirical distribution with mid-distribution and mid-quantile.
#[pyclass(name = "Sample", module = "lpstat", frozen)]
struct PySample {
    inner: lpstat_core::Sample,
}

#[pymethods]
impl PySample {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: lpstat_core::Sample::new(&values).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of distinct values.
    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn sd(&self) -> f64 {
        self.inner.sd()
    }

    /// Sorted distinct values.
    #[getter]
    fn atoms(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.inner.masses().to_vec()
    }

    /// `Fmid` at each atom.
    #[getter]
    fn fmid(&self) -> Vec<f64> {
        self.inner.fmid_at_atoms().to_vec()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn mid_distribution(&self, x: f64) -> f64 {
        self.inner.mid_distribution(x)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(err)
    }

    fn mid_quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.mid_quantile(u).map_err(err)
    }

    fn informative_quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.informative_quantile(u).map_err(err)
    }

    fn mid_ranks(&self) -> Vec<f64> {
        self.inner.mid_ranks()
    }

    fn quartiles<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let q = self.inner.quartile_summary();
        let d = PyDict::new(py);
        d.set_item("q1", q.q1)?;
        d.set_item("q2", q.q2)?;
        d.set_item("q3", q.q3)?;
        d.set_item("mq", q.mq)?;
        d.set_item("dq", q.dq)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Sample(n={}, r={})", self.inner.n(), self.inner.r())
    }
}

/// Orthonormal score functions `T_1..T_m` of a sample.
#[pyclass(name = "ScoreBasis", module = "lpstat", frozen)]
struct PyScoreBasis {
    inner: lpstat_core::ScoreBasis,
}

#[pymethods]
impl PyScoreBasis {
    #[new]
    #[pyo3(signature = (values, m = 4))]
    fn new(values: Vec<f64>, m: usize) -> PyResult<Self> {
        let s = lpstat_core::Sample::new(&values).map_err(err)?;
        Ok(Self {
            inner: lpstat_core::ScoreBasis::new(&s, m).map_err(err)?,
        })
    }

    /// Order actually built (at most r - 1).
    #[getter]
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }

    /// `T_j` at each atom.
    fn scores(&self, j: usize) -> PyResult<Vec<f64>> {
        self.inner.scores(j).map(<[f64]>::to_vec).map_err(err)
    }

    /// `T_j` at each observation, in input order.
    fn obs_scores(&self, j: usize) -> PyResult<Vec<f64>> {
        self.inner.obs_scores(j).map_err(err)
    }

    fn eval(&self, j: usize, x: f64) -> PyResult<f64> {
        self.inner.eval_score(j, x).map_err(err)
    }

    fn gram(&self) -> Vec<Vec<f64>> {
        self.inner.gram()
    }
}

/// LP moments `LP(1..m; X)` and the tail index.
#[pyfunction]
#[pyo3(signature = (values, m = 5))]
fn lp_moments<'py>(py: Python<'py>, values: Vec<f64>, m: usize) -> PyResult<Bound<'py, PyDict>> {
    let s = lpstat_core::Sample::new(&values).map_err(err)?;
    let b = lpstat_core::ScoreBasis::new(&s, m).map_err(err)?;
    let v = lpstat_core::lp_moments(&b, b.max_order()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("moments", v.moments.clone())?;
    d.set_item("cumulative_squares", v.cumulative_squares())?;
    d.set_item("tail_index", v.tail_index)?;
    Ok(d)
}

/// Comoment matrix `LP(j, k; X, Y)` with its selection mask and LPINFOR.
#[pyfunction]
#[pyo3(signature = (x, y, m = 4, select = "bic"))]
fn lp_comoments<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    m: usize,
    select: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let model = lpstat_core::fit_copula(&x, &y, m, rule(select)?).map_err(err)?;
    let c = model.comoments();
    let d = PyDict::new(py);
    d.set_item("entries", c.entries().to_vec())?;
    d.set_item("selected", c.selected().to_vec())?;
    d.set_item("lpinfor", c.lpinfor())?;
    Ok(d)
}

#[pyfunction]
fn correlations<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = lpstat_core::correlations(&x, &y).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("pearson", c.pearson)?;
    d.set_item("spearman_mid", c.spearman_mid)?;
    d.set_item("gini_xy", c.gini_xy)?;
    d.set_item("gini_yx", c.gini_yx)?;
    Ok(d)
}

/// Copula density series of `(X, Y)` with conditional curves.
#[pyclass(name = "Copula", module = "lpstat", frozen)]
struct PyCopula {
    inner: CopulaModel,
}

#[pymethods]
impl PyCopula {
    #[new]
    #[pyo3(signature = (x, y, m = 4, select = "bic"))]
    fn new(x: Vec<f64>, y: Vec<f64>, m: usize, select: &str) -> PyResult<Self> {
        Ok(Self {
            inner: lpstat_core::fit_copula(&x, &y, m, rule(select)?).map_err(err)?,
        })
    }

    /// Selected cells as `(j, k, LP(j, k))`.
    fn selected_cells(&self) -> Vec<(usize, usize, f64)> {
        self.inner.comoments().selected_cells()
    }

    #[getter]
    fn lpinfor(&self) -> f64 {
        self.inner.comoments().lpinfor()
    }

    fn eval(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.eval_copula(u, v).map_err(err)
    }

    fn integrate(&self) -> f64 {
        self.inner.integrate_copula()
    }

    fn conditional_density(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.conditional_density(u, v).map_err(err)
    }

    fn conditional_mean(&self, u: f64) -> PyResult<f64> {
        self.inner.conditional_mean(u).map_err(err)
    }

    fn conditional_quantile(&self, u: f64, p: f64) -> PyResult<f64> {
        self.inner.conditional_quantile(u, p).map_err(err)
    }

    /// Number of local maxima of the slice at `u`.
    fn local_maxima(&self, u: f64) -> PyResult<usize> {
        Ok(self.inner.slice(u).map_err(err)?.local_maxima())
    }

    #[pyo3(signature = (u, count, seed = 42))]
    fn simulate(&self, u: f64, count: usize, seed: u64) -> PyResult<Vec<f64>> {
        self.inner.simulate_conditional(u, count, seed).map_err(err)
    }
}

/// Series regression fit `E[Y | X = x_i]` at every observation.
#[pyfunction]
#[pyo3(signature = (x, y, m = 4, select = "bic"))]
fn regress(x: Vec<f64>, y: Vec<f64>, m: usize, select: &str) -> PyResult<Vec<f64>> {
    let sx = lpstat_core::Sample::new(&x).map_err(err)?;
    let bx = lpstat_core::ScoreBasis::new(&sx, m).map_err(err)?;
    let fit =
        lpstat_core::series_regression(&bx, &y, bx.max_order(), rule(select)?).map_err(err)?;
    Ok(fit.fitted())
}

/// Comparison density of a sample against a reference distribution.
#[pyclass(name = "CompDensity", module = "lpstat", frozen)]
struct PyCompDensity {
    inner: CompDensityModel,
}

#[pymethods]
impl PyCompDensity {
    #[new]
    #[pyo3(signature = (values, reference = "normal", m = 4, select = "bic"))]
    fn new(values: Vec<f64>, reference: &str, m: usize, select: &str) -> PyResult<Self> {
        let s = lpstat_core::Sample::new(&values).map_err(err)?;
        let g = match reference {
            "normal" => ReferenceDistribution::fit_normal(&s),
            "exponential" => ReferenceDistribution::fit_exponential(&s),
            "uniform" => ReferenceDistribution::fit_uniform(&s),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown reference {other:?}; expected normal, exponential or uniform"
                )))
            }
        }
        .map_err(err)?;
        Ok(Self {
            inner: lpstat_core::maxent_fit(&s, &g, m, rule(select)?).map_err(err)?,
        })
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients().to_vec()
    }

    #[getter]
    fn selected(&self) -> Vec<bool> {
        self.inner.selected().to_vec()
    }

    #[getter]
    fn gof(&self) -> f64 {
        self.inner.gof_distance()
    }

    #[pyo3(signature = (u, flavor = "maxent"))]
    fn density(&self, u: f64, flavor: &str) -> PyResult<f64> {
        self.inner
            .eval_density(u, self::flavor(flavor)?)
            .map_err(err)
    }

    fn skew_g_density(&self, x: f64) -> PyResult<f64> {
        self.inner.skew_g_density(x).map_err(err)
    }

    #[pyo3(signature = (count, seed = 42))]
    fn simulate(&self, count: usize, seed: u64) -> PyResult<Vec<f64>> {
        Ok(self.inner.simulate_skew_g(count, seed).map_err(err)?.draws)
    }
}

/// Pooled mean and variance of two groups from their summaries.
#[pyfunction]
fn combine<'py>(
    py: Python<'py>,
    g1: (usize, f64, f64),
    g2: (usize, f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    let a = GroupSummary::new(g1.0, g1.1, g1.2).map_err(err)?;
    let b = GroupSummary::new(g2.0, g2.1, g2.2).map_err(err)?;
    let c = twosample::combine(&a, &b);
    let d = PyDict::new(py);
    d.set_item("n", c.n)?;
    d.set_item("tau1", c.tau1)?;
    d.set_item("tau2", c.tau2)?;
    d.set_item("mean", c.mean)?;
    d.set_item("var", c.var)?;
    d.set_item("vpool", c.vpool)?;
    Ok(d)
}

/// Wilcoxon statistic `w = LP(1, 1)` for a binary `x` and response `y`.
#[pyfunction]
fn wilcoxon<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let w = twosample::wilcoxon(&x, &y, twosample::ZScaling::SqrtN).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("w", w.w)?;
    d.set_item("w_rank", w.w_rank)?;
    d.set_item("z_stat", w.z_stat)?;
    d.set_item("m1", w.m1)?;
    d.set_item("v", w.v)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (x, y, m = 4, select = "bic"))]
fn two_sample_report<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    m: usize,
    select: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = twosample::two_sample_report(&x, &y, m, rule(select)?, twosample::ZScaling::SqrtN)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("labels", r.labels.to_vec())?;
    d.set_item(
        "groups",
        r.groups
            .iter()
            .map(|g| (g.n, g.mean, g.var))
            .collect::<Vec<_>>(),
    )?;
    d.set_item("r", r.r)?;
    d.set_item("r2", r.r2)?;
    d.set_item("t", r.t)?;
    d.set_item("t_scaled", r.t_scaled)?;
    d.set_item("df", r.df)?;
    d.set_item("w", r.w)?;
    d.set_item("z_stat", r.z_stat)?;
    d.set_item("high_order_w", r.high_order_w)?;
    Ok(d)
}

/// Posterior `(p1, p0)` at each value of `at`.
#[pyfunction]
#[pyo3(signature = (x, y, at, prior = None, m = 4, select = "bic"))]
fn classify(
    x: Vec<f64>,
    y: Vec<f64>,
    at: Vec<f64>,
    prior: Option<f64>,
    m: usize,
    select: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let model = twosample::two_sample_comp_density(&x, &y, m, rule(select)?).map_err(err)?;
    let prior = prior.unwrap_or(model.tau());
    at.iter()
        .map(|&v| {
            twosample::classify(&model, v, prior)
                .map(|p| (p.p1, p.p0))
                .map_err(err)
        })
        .collect()
}

/// Normal prior held as a pseudo-sample, updated by a data summary.
#[pyfunction]
fn bayes_update<'py>(
    py: Python<'py>,
    prior: (f64, f64, f64),
    data: (usize, f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    let p = twosample::BayesNormalState::new(prior.0, prior.1, prior.2).map_err(err)?;
    let g = GroupSummary::new(data.0, data.1, data.2).map_err(err)?;
    let post = twosample::bayes_normal_update(&p, &g);
    let d = PyDict::new(py);
    d.set_item("n_eff", post.n_eff)?;
    d.set_item("mean", post.mean)?;
    d.set_item("var", post.var)?;
    Ok(d)
}

#[pymodule]
fn lpstat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySample>()?;
    m.add_class::<PyScoreBasis>()?;
    m.add_class::<PyCopula>()?;
    m.add_class::<PyCompDensity>()?;
    m.add_function(wrap_pyfunction!(lp_moments, m)?)?;
    m.add_function(wrap_pyfunction!(lp_comoments, m)?)?;
    m.add_function(wrap_pyfunction!(correlations, m)?)?;
    m.add_function(wrap_pyfunction!(regress, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(two_sample_report, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_update, m)?)?;
    Ok(())
}
