//! Python bindings: the channel model, modulation presets, the SC link
//! analysis, and raw (bivariate) Meijer-G evaluation.
//!
//! Build with `cargo build -p gkfade-py --release`, then rename/copy
//! `libgkfade_py.so` to `gkfade_py.so` somewhere on `sys.path` (see
//! `python/smoke_test.py`, which does this automatically).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gkfade_core::ber as core_ber;
use gkfade_core::egbmgf as core_egbmgf;
use gkfade_core::gk_channel as core_gk;
use gkfade_core::montecarlo as core_mc;
use gkfade_core::mellin_barnes as core_mb;
use gkfade_core::Error as CoreError;

fn to_py(e: CoreError) -> PyErr {
    match &e {
        CoreError::Convergence(_) | CoreError::ResidualImag { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// One generalized-K fading branch.
#[pyclass(frozen)]
#[derive(Clone)]
struct GkParams {
    inner: core_gk::GkParams,
}

#[pymethods]
impl GkParams {
    #[new]
    fn new(m_m: f64, m_s: f64, omega0: f64) -> PyResult<Self> {
        Ok(Self { inner: core_gk::GkParams::new(m_m, m_s, omega0).map_err(to_py)? })
    }

    #[staticmethod]
    fn with_snr_db(m_m: f64, m_s: f64, snr_db: f64) -> PyResult<Self> {
        Ok(Self { inner: core_gk::GkParams::with_snr_db(m_m, m_s, snr_db).map_err(to_py)? })
    }

    #[getter]
    fn m_m(&self) -> f64 {
        self.inner.m_m()
    }

    #[getter]
    fn m_s(&self) -> f64 {
        self.inner.m_s()
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.omega0()
    }

    fn pdf(&self, g: f64) -> PyResult<f64> {
        self.inner.pdf_bessel(g).map_err(to_py)
    }

    fn pdf_meijer(&self, g: f64) -> PyResult<f64> {
        self.inner.pdf_meijer(g).map_err(to_py)
    }

    fn cdf(&self, g: f64) -> PyResult<f64> {
        self.inner.cdf(g).map_err(to_py)
    }

    /// Seeded draws of the branch SNR.
    fn sample(&self, seed: u64, n: usize) -> PyResult<Vec<f64>> {
        let sampler = self.inner.sampler().map_err(to_py)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "GkParams(m_m={}, m_s={}, omega0={})",
            self.inner.m_m(),
            self.inner.m_s(),
            self.inner.omega0()
        )
    }
}

/// Binary modulation as its CEP parameter pair (p, q).
#[pyclass(frozen)]
#[derive(Clone)]
struct Modulation {
    inner: core_ber::Modulation,
}

#[pymethods]
impl Modulation {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self { inner: core_ber::Modulation::from_name(name).map_err(to_py)? })
    }

    #[staticmethod]
    fn custom(p: f64, q: f64) -> PyResult<Self> {
        Ok(Self { inner: core_ber::Modulation::custom(p, q).map_err(to_py)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    /// Conditional error probability at instantaneous SNR `g`.
    fn cep(&self, g: f64) -> PyResult<f64> {
        core_ber::cep(&self.inner, g).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Modulation({:?})", self.inner.name())
    }
}

/// Dual-branch selection-combining link.
#[pyclass(frozen)]
#[derive(Clone)]
struct ScLink {
    inner: core_ber::ScLink,
}

#[pymethods]
impl ScLink {
    #[new]
    fn new(branch1: GkParams, branch2: GkParams) -> Self {
        Self { inner: core_ber::ScLink::new(branch1.inner, branch2.inner) }
    }

    #[staticmethod]
    fn iid(params: GkParams) -> Self {
        Self { inner: core_ber::ScLink::iid(params.inner) }
    }

    #[getter]
    fn branch1(&self) -> GkParams {
        GkParams { inner: *self.inner.branch1() }
    }

    #[getter]
    fn branch2(&self) -> GkParams {
        GkParams { inner: *self.inner.branch2() }
    }

    /// CDF of the combiner output SNR.
    fn sc_cdf(&self, g: f64) -> PyResult<f64> {
        self.inner.sc_cdf(g).map_err(to_py)
    }

    /// Closed-form average BER (bivariate Meijer-G route).
    fn ber_closed_form(&self, modulation: &Modulation) -> PyResult<f64> {
        core_ber::ber_closed_form(&self.inner, &modulation.inner).map_err(to_py)
    }

    /// Independent CEP-weighted quadrature of the SC CDF.
    fn ber_numeric(&self, modulation: &Modulation) -> PyResult<f64> {
        core_ber::ber_numeric(&self.inner, &modulation.inner).map_err(to_py)
    }

    /// Seeded Monte Carlo estimate; returns (ber, stderr, effective_samples).
    #[pyo3(signature = (modulation, samples, seed, streams = 4, mode = "semi-analytic"))]
    fn estimate_ber(
        &self,
        modulation: &Modulation,
        samples: u64,
        seed: u64,
        streams: u32,
        mode: &str,
    ) -> PyResult<(f64, f64, f64)> {
        let mode = match mode {
            "semi-analytic" => core_mc::McMode::SemiAnalytic,
            "bit-level" => core_mc::McMode::BitLevel,
            other => {
                return Err(PyValueError::new_err(format!(
                    "mode must be 'semi-analytic' or 'bit-level', got {other:?}"
                )))
            }
        };
        let cfg = core_mc::McConfig::new(samples, seed, streams, mode).map_err(to_py)?;
        let est = core_mc::estimate_ber(&self.inner, &modulation.inner, &cfg).map_err(to_py)?;
        Ok((est.ber, est.stderr, est.effective_samples))
    }

    fn __repr__(&self) -> String {
        format!(
            "ScLink(branch1=GkParams(m_m={}, m_s={}, omega0={}), branch2=GkParams(m_m={}, m_s={}, omega0={}))",
            self.inner.branch1().m_m(),
            self.inner.branch1().m_s(),
            self.inner.branch1().omega0(),
            self.inner.branch2().m_m(),
            self.inner.branch2().m_s(),
            self.inner.branch2().omega0(),
        )
    }
}

/// Evaluate a single-variable Meijer G-function by Mellin-Barnes quadrature.
#[pyfunction]
fn meijer_g(a_num: Vec<f64>, a_den: Vec<f64>, b_num: Vec<f64>, b_den: Vec<f64>, z: f64) -> PyResult<f64> {
    let spec = core_mb::MeijerGSpec::new(a_num, a_den, b_num, b_den, z).map_err(to_py)?;
    core_mb::eval_meijer_g_auto(&spec).map_err(to_py)
}

/// Evaluate a bivariate Meijer-G JSON spec; returns (value, imag_residual).
#[pyfunction]
fn egbmgf(spec_json: &str) -> PyResult<(f64, f64)> {
    let spec: core_egbmgf::EgbmgfSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let pair = core_egbmgf::contours_for(&spec).map_err(to_py)?;
    let report = core_egbmgf::eval_egbmgf_report(&spec, &pair.s, &pair.t).map_err(to_py)?;
    Ok((report.value, report.imag_residual))
}

/// Laplace-type transform of a bivariate Meijer-G JSON spec.
#[pyfunction]
fn laplace_egbmgf(spec_json: &str, lambda: f64, mu: f64) -> PyResult<f64> {
    let spec: core_egbmgf::EgbmgfSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    core_egbmgf::laplace_of_egbmgf(&spec, lambda, mu).map_err(to_py)
}

#[pymodule]
fn gkfade_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GkParams>()?;
    m.add_class::<Modulation>()?;
    m.add_class::<ScLink>()?;
    m.add_function(wrap_pyfunction!(meijer_g, m)?)?;
    m.add_function(wrap_pyfunction!(egbmgf, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_egbmgf, m)?)?;
    Ok(())
}
