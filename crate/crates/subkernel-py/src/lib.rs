//! Python bindings: subordinators, envelopes and the numerical oracles.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use subkernel::envelopes::{EnvelopeValue, HkForm, MinArrangement, Setting as CoreSetting, TheoremId, GAUSS_C_LOWER};
use subkernel::geometry::{BoundaryFnSpec, Domain, GeometrySpec};
use subkernel::harness::{run_report as core_run_report, RunConfig};
use subkernel::kernels::HeatKernelModel;
use subkernel::numeric;
use subkernel::quad::QuadratureConfig;
use subkernel::subordinator::SubordinatorSpec;
use subkernel::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Range(_) | Error::Config(_) | Error::Dispatch(_) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Singular(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for subkernel::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn domain(name: &str, length: Option<f64>) -> PyResult<Domain> {
    match name {
        "full" => Ok(Domain::FullLine),
        "halfline" => Ok(Domain::HalfLine),
        "interval" => Ok(Domain::Interval {
            length: length.ok_or_else(|| PyValueError::new_err("interval domain needs length"))?,
        }),
        other => Err(PyValueError::new_err(format!(
            "unknown domain {other:?}; expected full, halfline or interval"
        ))),
    }
}

fn kernel(name: &str, length: Option<f64>) -> PyResult<HeatKernelModel> {
    match name {
        "free" => Ok(HeatKernelModel::FreeBm),
        "halfline" => Ok(HeatKernelModel::HalflineBm),
        "interval" => HeatKernelModel::interval_bm(length.unwrap_or(1.0)).py(),
        other => Err(PyValueError::new_err(format!(
            "unknown kernel {other:?}; expected free, halfline or interval"
        ))),
    }
}

fn pair(v: EnvelopeValue) -> (f64, String) {
    (v.value, v.regime.label())
}

/// A stable or truncated-stable subordinator.
#[pyclass(frozen)]
struct Subordinator {
    inner: SubordinatorSpec,
}

#[pymethods]
impl Subordinator {
    #[new]
    #[pyo3(signature = (beta, ell=None, crossover=1.0))]
    fn new(beta: f64, ell: Option<f64>, crossover: f64) -> PyResult<Self> {
        let inner = match ell {
            None => SubordinatorSpec::stable(beta),
            Some(l) => SubordinatorSpec::truncated_stable(beta, l, crossover).and_then(|s| s.with_phi_cache()),
        }
        .py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn phi(&self, lam: f64) -> PyResult<f64> {
        self.inner.phi(lam).py()
    }

    fn phi_inverse(&self, u: f64) -> PyResult<f64> {
        self.inner.phi_inverse(u).py()
    }

    fn time_scale(&self, t: f64) -> PyResult<f64> {
        self.inner.time_scale(t).py()
    }

    fn levy_tail(&self, s: f64) -> PyResult<f64> {
        self.inner.levy_tail(s).py()
    }

    fn cdf(&self, t: f64, s: f64) -> PyResult<f64> {
        self.inner.cdf(t, s).py()
    }

    fn survival(&self, t: f64, s: f64) -> PyResult<f64> {
        self.inner.survival(t, s).py()
    }

    fn density(&self, t: f64, s: f64) -> PyResult<f64> {
        self.inner.density(t, s).py()
    }

    fn right_tail_estimate(&self, t: f64, s: f64) -> PyResult<f64> {
        self.inner.right_tail_estimate(t, s).py()
    }

    fn sample(&self, t: f64, seed: u64) -> PyResult<f64> {
        self.inner.sample_seeded(t, seed).py()
    }

    fn __repr__(&self) -> String {
        format!("Subordinator({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

/// Domain, boundary function and subordinator. Envelope methods return
/// `(value, regime)`.
#[pyclass(frozen)]
struct Setting {
    inner: CoreSetting,
}

#[pymethods]
impl Setting {
    #[new]
    #[pyo3(signature = (domain_name, sub, p=0.5, q=0.5, c0=0, alpha=2.0, length=None))]
    fn new(
        domain_name: &str,
        sub: &Subordinator,
        p: f64,
        q: f64,
        c0: u8,
        alpha: f64,
        length: Option<f64>,
    ) -> PyResult<Self> {
        let geom = GeometrySpec::line(domain(domain_name, length)?, alpha, c0).py()?;
        let bfn = BoundaryFnSpec::new(p, q).py()?;
        Ok(Self {
            inner: CoreSetting::new(geom, bfn, sub.inner.clone()).py()?,
        })
    }

    fn psi(&self, r: f64) -> PyResult<f64> {
        self.inner.geom.psi(&self.inner.sub, r).py()
    }

    /// Heat kernel envelope; `form` is one of `small_time`, `on_diag`,
    /// `off_general`, `off_simple`, `rough_upper`, `large_time`,
    /// `explicit_stable`, `mixed_regime`.
    #[pyo3(signature = (t, x, y, form="small_time", gauss_c=GAUSS_C_LOWER))]
    fn heat(&self, t: f64, x: f64, y: f64, form: &str, gauss_c: f64) -> PyResult<(f64, String)> {
        let form: HkForm = serde_json::from_value(serde_json::Value::String(form.into()))
            .map_err(|_| PyValueError::new_err(format!("unknown heat kernel form {form:?}")))?;
        let pd = self.inner.geom.pair(x, y).py()?;
        self.inner.sub_hk_envelope(t, &pd, form, gauss_c).py().map(pair)
    }

    fn power_form(&self, t: f64, x: f64, y: f64) -> PyResult<(f64, String)> {
        let pd = self.inner.geom.pair(x, y).py()?;
        self.inner.hk_symmetric_power(t, &pd, MinArrangement::Outside).py().map(pair)
    }

    fn factorization(&self, t: f64, x: f64, y: f64) -> PyResult<(f64, String)> {
        let pd = self.inner.geom.pair(x, y).py()?;
        self.inner.a_pq_closed(t, &pd).py().map(pair)
    }

    fn jump(&self, x: f64, y: f64) -> PyResult<(f64, String)> {
        let pd = self.inner.geom.pair(x, y).py()?;
        self.inner.jump_envelope(&pd).py().map(pair)
    }

    fn tail_mass(&self, x: f64, r: f64) -> PyResult<f64> {
        self.inner.tail_mass(x, r).py()
    }

    /// Green function envelope: `closed` or `integral`.
    #[pyo3(signature = (x, y, form="closed"))]
    fn green(&self, x: f64, y: f64, form: &str) -> PyResult<(f64, String)> {
        let pd = self.inner.geom.pair(x, y).py()?;
        match form {
            "closed" => self.inner.green_closed(&pd),
            "integral" => self.inner.green_integral_envelope(&pd),
            "explicit" => self.inner.green_explicit(&pd),
            other => return Err(PyValueError::new_err(format!("unknown Green form {other:?}"))),
        }
        .py()
        .map(pair)
    }
}

/// Subordinate heat kernel by quadrature over the law of `S_t`.
#[pyfunction]
#[pyo3(signature = (kernel_name, sub, t, x, y, length=None, rel_tol=1e-9))]
fn heat_kernel(
    kernel_name: &str,
    sub: &Subordinator,
    t: f64,
    x: f64,
    y: f64,
    length: Option<f64>,
    rel_tol: f64,
) -> PyResult<f64> {
    let cfg = QuadratureConfig::default().with_rel_tol(rel_tol);
    let k = kernel(kernel_name, length)?;
    numeric::q_quadrature(&k, &sub.inner, t, x, y, &cfg).py().map(|e| e.value)
}

/// Monte Carlo estimate and standard error of the subordinate heat kernel.
#[pyfunction]
#[pyo3(signature = (kernel_name, sub, t, x, y, n_samples=100_000, seed=0, length=None))]
#[allow(clippy::too_many_arguments)]
fn heat_kernel_mc(
    kernel_name: &str,
    sub: &Subordinator,
    t: f64,
    x: f64,
    y: f64,
    n_samples: usize,
    seed: u64,
    length: Option<f64>,
) -> PyResult<(f64, f64)> {
    let cfg = numeric::McConfig {
        n_samples,
        seed,
        ..Default::default()
    };
    let k = kernel(kernel_name, length)?;
    numeric::q_monte_carlo(&k, &sub.inner, t, x, y, &cfg).py().map(|e| (e.estimate, e.stderr))
}

#[pyfunction]
#[pyo3(signature = (kernel_name, sub, x, y, length=None))]
fn jump_kernel(kernel_name: &str, sub: &Subordinator, x: f64, y: f64, length: Option<f64>) -> PyResult<f64> {
    let k = kernel(kernel_name, length)?;
    numeric::jump_quadrature(&k, &sub.inner, x, y, &QuadratureConfig::default()).py().map(|e| e.value)
}

/// Green function by integrating the heat kernel in time; `inf` when it
/// diverges.
#[pyfunction]
#[pyo3(signature = (kernel_name, sub, x, y, length=None, rel_tol=1e-7))]
fn green_function(
    kernel_name: &str,
    sub: &Subordinator,
    x: f64,
    y: f64,
    length: Option<f64>,
    rel_tol: f64,
) -> PyResult<f64> {
    let cfg = QuadratureConfig::default().with_rel_tol(rel_tol);
    let k = kernel(kernel_name, length)?;
    numeric::green_quadrature(&k, &sub.inner, x, y, &cfg).py().map(|e| e.value)
}

#[pyfunction]
fn theorem_ids() -> Vec<&'static str> {
    TheoremId::ALL.iter().map(|id| id.as_str()).collect()
}

/// Run a JSON run config against the fixtures in `fixtures_dir`; returns
/// the report as JSON.
#[pyfunction]
fn run_report(py: Python<'_>, config_json: &str, fixtures_dir: &str) -> PyResult<String> {
    let cfg = RunConfig::from_json(config_json).py()?;
    let dir = std::path::PathBuf::from(fixtures_dir);
    let rep = py.detach(|| core_run_report(&cfg, &dir, false)).py()?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
pub fn pysubkernel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Subordinator>()?;
    m.add_class::<Setting>()?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel_mc, m)?)?;
    m.add_function(wrap_pyfunction!(jump_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(green_function, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_ids, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    Ok(())
}
