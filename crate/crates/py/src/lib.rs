//! Python bindings: chain and drive descriptions, generator assembly, steady
//! and transient solves, transport observables and single-photon scattering.

use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qle_core::dynamics;
use qle_core::generator::{self, AssembleOptions, CouplingRange};
use qle_core::{longrange_fit, observables, scattering, QleError};

create_exception!(qle, SolverError, PyException);

fn to_py(e: QleError) -> PyErr {
    match e {
        QleError::SingularGenerator
        | QleError::SolverDivergence { .. }
        | QleError::StepSizeUnderflow { .. }
        | QleError::SingularScattering { .. }
        | QleError::Numerical(_) => SolverError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Atomic chain: per-site frequencies, couplings and bath rates.
#[pyclass(name = "MediumSpec", module = "qle", frozen)]
struct PyMediumSpec {
    inner: generator::MediumSpec,
}

#[pymethods]
impl PyMediumSpec {
    #[new]
    #[pyo3(signature = (n, omega=None, jx=0.05, jz=0.05, gamma_l=0.1, gamma_r=0.1, gamma_lambda=0.0, gamma_gamma=0.0, long_range=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        omega: Option<Vec<f64>>,
        jx: f64,
        jz: f64,
        gamma_l: f64,
        gamma_r: f64,
        gamma_lambda: f64,
        gamma_gamma: f64,
        long_range: Option<(f64, f64, usize)>,
    ) -> PyResult<Self> {
        let mut spec = generator::MediumSpec::uniform(n, 1.0)
            .with_couplings(jx, jz)
            .with_baths(gamma_l, gamma_r)
            .with_losses(gamma_lambda, gamma_gamma);
        if let Some(w) = omega {
            if w.len() != n {
                return Err(PyValueError::new_err(format!("{} frequencies for {n} sites", w.len())));
            }
            spec.omega = w;
        }
        if let Some((alpha, beta, terms)) = long_range {
            spec = spec.with_range(CouplingRange::LongRange { alpha, beta, terms });
        }
        spec.validate().map_err(to_py)?;
        Ok(Self { inner: spec })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn omega(&self) -> Vec<f64> {
        self.inner.omega.clone()
    }

    #[getter]
    fn jx(&self) -> f64 {
        self.inner.jx
    }

    #[getter]
    fn jz(&self) -> f64 {
        self.inner.jz
    }

    #[getter]
    fn gamma_l(&self) -> f64 {
        self.inner.gamma_l
    }

    #[getter]
    fn gamma_r(&self) -> f64 {
        self.inner.gamma_r
    }

    fn __repr__(&self) -> String {
        format!(
            "MediumSpec(n={}, jx={}, jz={}, gamma_l={}, gamma_r={})",
            self.inner.n(),
            self.inner.jx,
            self.inner.jz,
            self.inner.gamma_l,
            self.inner.gamma_r
        )
    }
}

/// Coherent drive from the left; give exactly one of `intensity` and `amplitude`.
#[pyclass(name = "DriveSpec", module = "qle", frozen)]
struct PyDriveSpec {
    inner: generator::DriveSpec,
}

#[pymethods]
impl PyDriveSpec {
    #[new]
    #[pyo3(signature = (omega_p=1.0, intensity=None, amplitude=None))]
    fn new(omega_p: f64, intensity: Option<f64>, amplitude: Option<f64>) -> PyResult<Self> {
        let inner = match (intensity, amplitude) {
            (Some(i), None) => generator::DriveSpec::from_intensity(omega_p, i),
            (None, Some(e)) => generator::DriveSpec::from_amplitude(omega_p, e),
            _ => return Err(PyValueError::new_err("give exactly one of intensity and amplitude")),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn omega_p(&self) -> f64 {
        self.inner.omega_p
    }

    #[getter]
    fn intensity(&self) -> f64 {
        self.inner.intensity
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude()
    }

    fn rabi(&self, gamma_l: f64) -> PyResult<f64> {
        self.inner.rabi(gamma_l).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("DriveSpec(omega_p={}, intensity={})", self.inner.omega_p, self.inner.intensity)
    }
}

/// Linear equation of motion `dS/dt = Z S + Ω`.
#[pyclass(name = "Generator", module = "qle", frozen)]
struct PyGenerator {
    inner: generator::Generator,
}

#[pymethods]
impl PyGenerator {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn rabi(&self) -> f64 {
        self.inner.rabi()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.z().nnz()
    }

    /// `(rows, cols, values)` of the nonzeros of `Z`.
    fn z_triplets(&self) -> (Vec<usize>, Vec<usize>, Vec<C64>) {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (r, c, v) in self.inner.z().iter() {
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        (rows, cols, vals)
    }

    fn omega(&self) -> Vec<C64> {
        self.inner.omega().to_vec()
    }

    /// Base-4 label digits (`0=I, 1=σ†, 2=σ, 3=n`, site 1 first) of each index.
    fn labels(&self) -> Vec<Vec<u32>> {
        let map = self.inner.map();
        (0..map.dim()).map(|i| map.label(i).digits().into_iter().map(u32::from).collect()).collect()
    }
}

/// Expectation values of all non-identity operator products.
#[pyclass(name = "StateVector", module = "qle", frozen)]
struct PyStateVector {
    inner: dynamics::StateVector,
}

#[pymethods]
impl PyStateVector {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn values(&self) -> Vec<C64> {
        self.inner.values().to_vec()
    }

    /// `<Π_{i∈sites} n_i>` for 1-based site indices.
    fn population(&self, sites: Vec<usize>) -> PyResult<f64> {
        self.inner.population(&sites).ok_or_else(|| PyValueError::new_err("site index outside the chain"))
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

#[pyfunction]
#[pyo3(signature = (medium, drive, n_cap=generator::DEFAULT_N_CAP))]
fn assemble(medium: &PyMediumSpec, drive: &PyDriveSpec, n_cap: usize) -> PyResult<PyGenerator> {
    let opts = AssembleOptions { n_cap, ..Default::default() };
    let inner = generator::assemble_with(&medium.inner, &drive.inner, &opts).map_err(to_py)?;
    Ok(PyGenerator { inner })
}

#[pyfunction]
fn rabi_from_intensity(intensity: f64, gamma_l: f64) -> PyResult<f64> {
    generator::rabi_from_intensity(intensity, gamma_l).map_err(to_py)
}

#[pyfunction]
fn steady_state(py: Python<'_>, gen: &PyGenerator) -> PyResult<PyStateVector> {
    let inner = py.detach(|| dynamics::steady_state(&gen.inner)).map_err(to_py)?;
    Ok(PyStateVector { inner })
}

/// States on the grid `0, dt_out, ..., t_end` starting from `"ground"` or `"excited"`.
#[pyfunction]
#[pyo3(signature = (gen, t_end, dt_out, initial="ground"))]
fn evolve(
    py: Python<'_>,
    gen: &PyGenerator,
    t_end: f64,
    dt_out: f64,
    initial: &str,
) -> PyResult<(Vec<f64>, Vec<PyStateVector>)> {
    let s0 = match initial {
        "ground" => dynamics::StateVector::ground(&gen.inner),
        "excited" => dynamics::StateVector::excited(&gen.inner),
        other => return Err(PyValueError::new_err(format!("unknown initial state `{other}`"))),
    };
    let traj = py.detach(|| dynamics::evolve(&gen.inner, &s0, t_end, dt_out)).map_err(to_py)?;
    Ok((traj.times, traj.states.into_iter().map(|inner| PyStateVector { inner }).collect()))
}

#[pyfunction]
fn transmission(s: &PyStateVector, medium: &PyMediumSpec, drive: &PyDriveSpec) -> PyResult<f64> {
    observables::transmission(&s.inner, &medium.inner, &drive.inner).map_err(to_py)
}

#[pyfunction]
fn reflection(s: &PyStateVector, medium: &PyMediumSpec, drive: &PyDriveSpec) -> PyResult<f64> {
    observables::reflection(&s.inner, &medium.inner, &drive.inner).map_err(to_py)
}

#[pyfunction]
fn excitation_profile(s: &PyStateVector) -> Vec<f64> {
    observables::excitation_profile(&s.inner)
}

#[pyfunction]
fn equal_time_correlation(s: &PyStateVector, sites: Vec<usize>) -> PyResult<f64> {
    observables::equal_time_correlation(&s.inner, &sites).map_err(to_py)
}

/// `{"kappa", "ns", "ts", "rms"}` for `T ∝ N^-κ`.
#[pyfunction]
fn scaling_exponent<'py>(py: Python<'py>, points: Vec<(usize, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let fit = observables::scaling_exponent(&points).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("kappa", fit.kappa)?;
    d.set_item("ns", fit.ns)?;
    d.set_item("ts", fit.ts)?;
    d.set_item("rms", fit.rms)?;
    Ok(d)
}

/// Exact single-photon amplitudes `(t, r)`.
#[pyfunction]
fn single_photon(medium: &PyMediumSpec, omega_p: f64) -> PyResult<(C64, C64)> {
    let res = scattering::single_photon(&medium.inner, omega_p).map_err(to_py)?;
    Ok((res.t, res.r))
}

#[pyfunction]
fn t2_analytic(omega_p: f64, omega1: f64, omega2: f64, jx: f64, gamma_l: f64, gamma_r: f64) -> C64 {
    scattering::t2_analytic(omega_p, omega1, omega2, jx, gamma_l, gamma_r)
}

/// `{"gamma", "delta", "residual", "converged"}` of the fit of `1/r^u`.
#[pyfunction]
fn fit_powerlaw<'py>(py: Python<'py>, u: f64, terms: usize, rmax: usize) -> PyResult<Bound<'py, PyDict>> {
    let fit = longrange_fit::fit_powerlaw(u, terms, rmax).map_err(to_py)?.canonical();
    let d = PyDict::new(py);
    d.set_item("gamma", fit.gamma().to_vec())?;
    d.set_item("delta", fit.delta().to_vec())?;
    d.set_item("residual", fit.residual())?;
    d.set_item("converged", fit.converged())?;
    Ok(d)
}

#[pymodule]
fn qle(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<PyMediumSpec>()?;
    m.add_class::<PyDriveSpec>()?;
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyStateVector>()?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_from_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(transmission, m)?)?;
    m.add_function(wrap_pyfunction!(reflection, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_profile, m)?)?;
    m.add_function(wrap_pyfunction!(equal_time_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(single_photon, m)?)?;
    m.add_function(wrap_pyfunction!(t2_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_powerlaw, m)?)?;
    Ok(())
}
