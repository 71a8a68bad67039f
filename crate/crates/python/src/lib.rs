//! Python module `lrchain`: chain specifications, exact spectra, semiclassical
//! levels, spin-wave dispersions and the special functions behind them.
//!
//! Library errors map onto `ValueError` (bad input), `ArithmeticError`
//! (numerical failure) and `MemoryError` (size budget).

use pyo3::exceptions::{PyArithmeticError, PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

use ::lrchain as core;
use core::meanfield::{self, ConfigMode};
use core::model::{self, DEFAULT_TOL};
use core::spinwaves::{self, StationaryKind};
use core::{exact, sublattice, Alpha, Boundary, ErrorClass, Sites};

fn err(e: core::Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::Input => PyValueError::new_err(msg),
        ErrorClass::Numerical => PyArithmeticError::new_err(msg),
        ErrorClass::Resource => PyMemoryError::new_err(msg),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text = if let Ok(s) = obj.cast::<PyString>() {
        s.to_string()
    } else {
        obj.str()?.to_string()
    };
    text.parse().map_err(PyValueError::new_err)
}

fn kind(name: &str) -> PyResult<StationaryKind> {
    name.parse().map_err(PyValueError::new_err)
}

/// Chain of spins `S = spin2 / 2` with couplings `j0 / |i-j|^alpha` and field `b`.
///
/// `n` and `alpha` accept numbers or the string `"inf"`.
#[pyclass(name = "ChainSpec", module = "lrchain", frozen)]
struct PyChainSpec {
    inner: core::ChainSpec,
}

#[pymethods]
impl PyChainSpec {
    #[new]
    #[pyo3(signature = (n, spin2=1, alpha=None, j0=1.0, b=0.0, boundary="open", kac=false))]
    fn new(
        n: &Bound<'_, PyAny>,
        spin2: u32,
        alpha: Option<&Bound<'_, PyAny>>,
        j0: f64,
        b: f64,
        boundary: &str,
        kac: bool,
    ) -> PyResult<Self> {
        let n: Sites = parse(n)?;
        let alpha: Alpha = match alpha {
            Some(a) => parse(a)?,
            None => Alpha::Finite(1.0),
        };
        let boundary: Boundary = boundary.parse().map_err(PyValueError::new_err)?;
        let spec = match n {
            Sites::Finite(n) => core::ChainSpec::new(n, spin2, alpha, j0, b),
            Sites::Infinite => core::ChainSpec::infinite_ring(spin2, alpha, j0, b),
        }
        .with_boundary(boundary)
        .with_kac(kac);
        spec.validate().map_err(err)?;
        Ok(PyChainSpec { inner: spec })
    }

    #[getter]
    fn n(&self) -> String {
        self.inner.n_sites.to_string()
    }

    #[getter]
    fn spin2(&self) -> u32 {
        self.inner.spin2
    }

    #[getter]
    fn alpha(&self) -> String {
        self.inner.alpha.to_string()
    }

    #[getter]
    fn j0(&self) -> f64 {
        self.inner.j0
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn boundary(&self) -> String {
        format!("{:?}", self.inner.boundary).to_lowercase()
    }

    /// Copy with a different field.
    fn with_field(&self, b: f64) -> Self {
        PyChainSpec {
            inner: self.inner.with_field(b),
        }
    }

    /// Product-basis dimension, or None when it overflows.
    fn hilbert_dim(&self) -> Option<usize> {
        self.inner.hilbert_dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainSpec(n={}, spin2={}, alpha={}, j0={}, b={}, boundary='{}', kac={})",
            self.inner.n_sites,
            self.inner.spin2,
            self.inner.alpha,
            self.inner.j0,
            self.inner.b,
            self.boundary(),
            if self.inner.kac_rescale { "True" } else { "False" }
        )
    }
}

/// All eigenvalues of the chain Hamiltonian, ascending.
#[pyfunction]
fn spectrum(spec: &PyChainSpec) -> PyResult<Vec<f64>> {
    exact::spectrum(&spec.inner).map_err(err)
}

/// Lowest eigenvalue.
#[pyfunction]
fn ground_state_energy(spec: &PyChainSpec) -> PyResult<f64> {
    exact::ground_state_energy(&spec.inner).map_err(err)
}

/// Spectra along an ascending field grid, one list per field.
#[pyfunction]
fn spectrum_sweep(spec: &PyChainSpec, b_grid: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(exact::spectrum_sweep(&spec.inner, &b_grid).map_err(err)?.levels)
}

#[pyfunction]
#[pyo3(signature = (alpha, tol=DEFAULT_TOL))]
fn zeta(alpha: f64, tol: f64) -> PyResult<f64> {
    model::zeta(alpha, tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, tol=DEFAULT_TOL))]
fn eta(alpha: f64, tol: f64) -> PyResult<f64> {
    model::eta(alpha, tol).map_err(err)
}

/// `(1/2) sum_{r in I_N^0} cos(k r) / |r|^alpha`; `n="inf"` gives the limit.
#[pyfunction]
#[pyo3(signature = (alpha, k, n="inf"))]
fn clausen(alpha: &Bound<'_, PyAny>, k: f64, n: &str) -> PyResult<f64> {
    model::clausen_truncated(parse(alpha)?, k, n.parse().map_err(PyValueError::new_err)?)
        .map_err(err)
}

/// `(J_e, J_a)`: uniform and alternating couplings (open chain or ring).
#[pyfunction]
fn effective_couplings(spec: &PyChainSpec) -> PyResult<(f64, f64)> {
    match spec.inner.boundary {
        Boundary::Open => meanfield::effective_boundary_couplings(&spec.inner),
        Boundary::Periodic => spinwaves::effective_couplings_periodic(&spec.inner),
    }
    .map_err(err)
}

/// Exact and semiclassical ground energies and their relative deviation.
#[pyfunction]
#[pyo3(signature = (spec, b_grid, mode="eps"))]
fn deviation<'py>(py: Python<'py>, spec: &PyChainSpec, b_grid: Vec<f64>, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let mode: ConfigMode = mode.parse().map_err(PyValueError::new_err)?;
    let pts = meanfield::deviation_with_mode(&spec.inner, &b_grid, mode).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("b", pts.iter().map(|p| p.b).collect::<Vec<_>>())?;
    d.set_item("exact", pts.iter().map(|p| p.exact).collect::<Vec<_>>())?;
    d.set_item("semiclassical", pts.iter().map(|p| p.semiclassical).collect::<Vec<_>>())?;
    d.set_item("d", pts.iter().map(|p| p.d).collect::<Vec<_>>())?;
    Ok(d)
}

/// Log-binned histogram of bifurcation fields.
#[pyfunction]
#[pyo3(signature = (spec, bins_per_decade=10, stable_only=true))]
fn bifurcation_histogram<'py>(
    py: Python<'py>,
    spec: &PyChainSpec,
    bins_per_decade: u32,
    stable_only: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let h = meanfield::bifurcation_histogram(&spec.inner, bins_per_decade, stable_only).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("edges", &h.edges)?;
    d.set_item("configurations", &h.counts)?;
    d.set_item("levels", &h.level_counts)?;
    d.set_item("peak", h.peak(true))?;
    d.set_item("analytic", h.source == meanfield::HistogramSource::Analytic)?;
    Ok(d)
}

/// Spin-wave dispersion of the `"uniform"` or `"alternating"` pattern on a ring.
#[pyfunction]
#[pyo3(signature = (spec, kind="uniform", b=None))]
fn dispersion<'py>(py: Python<'py>, spec: &PyChainSpec, kind: &str, b: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = spinwaves::dispersion(&spec.inner, self::kind(kind)?, b.unwrap_or(spec.inner.b)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("k", &c.k_grid)?;
    d.set_item("energy", &c.energy)?;
    d.set_item("imaginary", &c.imaginary)?;
    d.set_item("g", &c.g)?;
    d.set_item("f", &c.f)?;
    d.set_item("stable", &c.stable)?;
    d.set_item("phi_c", c.angle.phi_c)?;
    d.set_item("gap", c.gap)?;
    d.set_item("gap_k", c.k_grid[c.gap_mode])?;
    d.set_item("corr_length", c.corr_length)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (spec, kind="uniform"))]
fn critical_field(spec: &PyChainSpec, kind: &str) -> PyResult<f64> {
    spinwaves::critical_field(&spec.inner, self::kind(kind)?).map_err(err)
}

/// `(M_B, M_C)` sums over odd and even distances.
#[pyfunction]
fn sublattice_sums(n: &Bound<'_, PyAny>, alpha: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
    sublattice::sublattice_sums(parse(n)?, parse(alpha)?).map_err(err)
}

/// Solves for `(phi_B, phi_C)` from a starting guess and returns both
/// Bogoliubov-de Gennes bands over the reduced zone.
#[pyfunction]
#[pyo3(signature = (spec, phi_b=1.0, phi_c=1.0))]
fn sublattice_bands<'py>(py: Python<'py>, spec: &PyChainSpec, phi_b: f64, phi_c: f64) -> PyResult<Bound<'py, PyDict>> {
    let c = sublattice::stationary_angles(&spec.inner, (phi_b, phi_c)).map_err(err)?;
    let blocks = sublattice::bdg_bands(&spec.inner, &c).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("phi_b", c.phi_b)?;
    d.set_item("phi_c", c.phi_c)?;
    d.set_item("residual", c.residual)?;
    d.set_item("k", blocks.iter().map(|b| b.k).collect::<Vec<_>>())?;
    d.set_item("band1", blocks.iter().map(|b| b.bands[0]).collect::<Vec<_>>())?;
    d.set_item("band2", blocks.iter().map(|b| b.bands[1]).collect::<Vec<_>>())?;
    d.set_item("stable", blocks.iter().map(|b| b.stable).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "lrchain")]
fn lrchain_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyChainSpec>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_energy, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(clausen, m)?)?;
    m.add_function(wrap_pyfunction!(effective_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(deviation, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcation_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(critical_field, m)?)?;
    m.add_function(wrap_pyfunction!(sublattice_sums, m)?)?;
    m.add_function(wrap_pyfunction!(sublattice_bands, m)?)?;
    Ok(())
}
