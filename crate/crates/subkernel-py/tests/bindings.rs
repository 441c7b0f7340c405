use std::f64::consts::PI;

use pyo3::prelude::*;
use pyo3::types::PyModule;

fn with_module<F: FnOnce(&Bound<'_, PyModule>) -> PyResult<()>>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "pysubkernel").unwrap();
        pysubkernel::pysubkernel(&m).unwrap();
        f(&m).unwrap();
    });
}

#[test]
fn cauchy_heat_kernel() {
    with_module(|m| {
        let sub = m.getattr("Subordinator")?.call1((0.5,))?;
        let (t, r) = (0.7, 1.3);
        let q: f64 = m.getattr("heat_kernel")?.call1(("free", &sub, t, 0.0, r))?.extract()?;
        assert!((q / (t / (PI * (t * t + r * r))) - 1.0).abs() < 1e-8);
        Ok(())
    });
}

#[test]
fn envelopes_return_value_and_regime() {
    with_module(|m| {
        let sub = m.getattr("Subordinator")?.call1((0.5,))?;
        let s = m.getattr("Setting")?.call1(("halfline", &sub))?;
        let (v, regime): (f64, String) = s.call_method1("heat", (0.01, 1.0, 1.005))?.extract()?;
        assert!(v > 0.0 && v.is_finite());
        assert_eq!(regime, "on-diagonal");
        let (g, _): (f64, String) = s.call_method1("green", (0.1, 0.3, "integral"))?.extract()?;
        assert!(g > 0.0);
        Ok(())
    });
}

#[test]
fn errors_become_value_errors() {
    Python::attach(|py| {
        let m = PyModule::new(py, "pysubkernel").unwrap();
        pysubkernel::pysubkernel(&m).unwrap();
        let err = m.getattr("Subordinator").unwrap().call1((1.5,)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let sub = m.getattr("Subordinator").unwrap().call1((0.5,)).unwrap();
        let err = m.getattr("heat_kernel").unwrap().call1(("moon", &sub, 1.0, 0.0, 1.0)).unwrap_err();
        assert!(err.to_string().contains("moon"));
    });
}

#[test]
fn theorem_ids_are_listed() {
    with_module(|m| {
        let ids: Vec<String> = m.getattr("theorem_ids")?.call0()?.extract()?;
        assert_eq!(ids.len(), 10);
        assert!(ids.iter().any(|i| i == "lemma7.1"));
        Ok(())
    });
}
