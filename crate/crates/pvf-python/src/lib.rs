//! Python bindings: freeze-matrix generation, the freeze/thaw pipeline, and
//! the round simulator, exposed as the `pvf_py` extension module.

use pvf_core::orchestrator::{BackendKind, Extension, RoundConfig, ThawSide};
use pvf_core::{
    compression_ratio, freeze, generate_freeze_matrices, generate_inputs, pad_and_group,
    privacy_check, run_round, thaw, FieldConfig, FieldMatrix, FreezeMatrixSet, PadPolicy,
    SecurityProfile, ThawInput,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::collections::BTreeMap;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Public field parameters: prime modulus, entry bound, and user ceiling.
#[pyclass(name = "FieldConfig", frozen, from_py_object)]
#[derive(Clone)]
struct PyFieldConfig {
    inner: FieldConfig,
}

#[pymethods]
impl PyFieldConfig {
    #[new]
    #[pyo3(signature = (p=None, max_entry=None, n_max=None))]
    fn new(p: Option<u64>, max_entry: Option<u64>, n_max: Option<u64>) -> PyResult<Self> {
        let default = FieldConfig::default();
        let inner = FieldConfig::new(
            p.unwrap_or(default.prime()),
            max_entry.unwrap_or(default.max_entry()),
            n_max.unwrap_or(default.max_users()),
        )
        .map_err(value_err)?;
        Ok(PyFieldConfig { inner })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.prime()
    }

    #[getter]
    fn max_entry(&self) -> u64 {
        self.inner.max_entry()
    }

    #[getter]
    fn n_max(&self) -> u64 {
        self.inner.max_users()
    }

    fn __repr__(&self) -> String {
        format!(
            "FieldConfig(p={}, max_entry={}, n_max={})",
            self.inner.prime(),
            self.inner.max_entry(),
            self.inner.max_users()
        )
    }
}

/// The public matrices of one freeze configuration.
#[pyclass(name = "FreezeMatrixSet", frozen)]
struct PyFreezeMatrixSet {
    inner: FreezeMatrixSet,
}

#[pymethods]
impl PyFreezeMatrixSet {
    /// Rejection-samples an invertible matrix passing the element-privacy
    /// check. Deterministic per seed.
    #[staticmethod]
    #[pyo3(signature = (lam, delta=0, seed=1, field=None))]
    fn generate(
        lam: usize,
        delta: usize,
        seed: u64,
        field: Option<PyFieldConfig>,
    ) -> PyResult<Self> {
        let cfg = field.map(|f| f.inner).unwrap_or_default();
        let inner = generate_freeze_matrices(&cfg, lam, delta, seed).map_err(value_err)?;
        Ok(PyFreezeMatrixSet { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let inner = FreezeMatrixSet::from_bytes(&bytes).map_err(value_err)?;
        Ok(PyFreezeMatrixSet { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.inner.to_bytes())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn lam(&self) -> usize {
        self.inner.lambda()
    }

    #[getter]
    fn delta(&self) -> usize {
        self.inner.delta()
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.field().modulus()
    }

    /// Fraction of entries entering the aggregation backend, as a
    /// (numerator, denominator) pair.
    fn compression_ratio(&self) -> (u64, u64) {
        let r = compression_ratio(&self.inner);
        (*r.numer(), *r.denom())
    }

    /// Re-runs the element-privacy check on the incomplete matrix.
    fn privacy_check(&self) -> bool {
        privacy_check(self.inner.a_check(), &self.inner.field())
    }

    /// Pads and freezes one vector; returns `(y, k)`.
    #[pyo3(signature = (x, pad_seed=0))]
    fn freeze(&self, x: Vec<u64>, pad_seed: u64) -> PyResult<(Vec<u64>, Vec<u64>)> {
        let padded = pad_and_group(&x, &self.inner, pad_seed).map_err(value_err)?;
        let pair = freeze(&padded, &self.inner).map_err(value_err)?;
        Ok((pair.y, pair.k))
    }

    /// Recovers the aggregated vector of length `m` from aggregated frozen
    /// and key sums.
    fn thaw(&self, sum_y: Vec<u64>, sum_k: Vec<u64>, m: usize) -> PyResult<Vec<u64>> {
        thaw(&ThawInput {
            sum_y: &sum_y,
            sum_k: &sum_k,
            matrices: &self.inner,
            original_len: m,
        })
        .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "FreezeMatrixSet(lam={}, delta={}, seed={})",
            self.inner.lambda(),
            self.inner.delta(),
            self.inner.seed()
        )
    }
}

/// Row-echelon element-privacy check on an explicit matrix (list of rows).
#[pyfunction]
#[pyo3(signature = (rows, field=None))]
fn matrix_privacy_check(rows: Vec<Vec<u64>>, field: Option<PyFieldConfig>) -> PyResult<bool> {
    let cfg = field.map(|f| f.inner).unwrap_or_default();
    let zp = cfg.field();
    let borrowed: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
    let matrix = FieldMatrix::from_rows(&borrowed, &zp);
    Ok(privacy_check(&matrix, &zp))
}

/// Runs one simulated aggregation round and returns a metrics dict.
#[pyfunction]
#[pyo3(signature = (n, m, lam, delta=0, eta=0.0, backend="mask", extension="none",
                    thaw_side=None, seed=1, profile="test", inputs=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_round(
    py: Python<'_>,
    n: usize,
    m: usize,
    lam: usize,
    delta: usize,
    eta: f64,
    backend: &str,
    extension: &str,
    thaw_side: Option<&str>,
    seed: u64,
    profile: &str,
    inputs: Option<Vec<Vec<u64>>>,
) -> PyResult<Py<PyDict>> {
    let backend: BackendKind = backend.parse().map_err(value_err)?;
    let extension: Extension = extension.parse().map_err(value_err)?;
    let profile: SecurityProfile = profile.parse().map_err(value_err)?;
    let thaw_side = match thaw_side {
        Some(s) => s.parse().map_err(value_err)?,
        None => match (backend, extension) {
            (BackendKind::He, _) | (_, Extension::Rve) => ThawSide::User,
            _ => ThawSide::Server,
        },
    };
    let cfg = RoundConfig {
        n,
        m,
        lambda: lam,
        delta,
        eta,
        backend,
        extension,
        thaw_side,
        master_seed: seed,
        profile,
        pad_policy: PadPolicy::Minimal,
        field: FieldConfig::default(),
    };
    let input_map: BTreeMap<usize, Vec<u64>> = match inputs {
        Some(vectors) => vectors.into_iter().enumerate().collect(),
        None => generate_inputs(&cfg.field, n, m, seed),
    };
    let report = run_round(&cfg, &input_map).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    out.set_item("aggregate", &report.aggregate)?;
    out.set_item("survivors", report.survivors.iter().copied().collect::<Vec<_>>())?;
    out.set_item("correctness", report.correctness)?;
    out.set_item("user_bytes", report.user_bytes)?;
    out.set_item("backend_entries_per_user", report.backend_entries_per_user)?;
    out.set_item("freeze_ms", report.phases.freeze.as_secs_f64() * 1e3)?;
    out.set_item("secagg_user_ms", report.phases.secagg_user.as_secs_f64() * 1e3)?;
    out.set_item("secagg_server_ms", report.phases.secagg_server.as_secs_f64() * 1e3)?;
    out.set_item("verify_ms", report.phases.verify.as_secs_f64() * 1e3)?;
    out.set_item("thaw_ms", report.phases.thaw.as_secs_f64() * 1e3)?;
    out.set_item("warnings", report.warnings)?;
    Ok(out.into())
}

#[pymodule]
fn pvf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFieldConfig>()?;
    m.add_class::<PyFreezeMatrixSet>()?;
    m.add_function(wrap_pyfunction!(matrix_privacy_check, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_round, m)?)?;
    m.add("DEFAULT_PRIME", pvf_core::DEFAULT_PRIME)?;
    Ok(())
}
