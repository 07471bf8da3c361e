//! Generalized-K (Gamma-Gamma) composite fading for one diversity branch.
//!
//! The instantaneous SNR is the product of a unit-mean multipath gamma factor
//! (shape `m_m`) and a shadowing gamma factor (shape `m_s`, mean `omega0`),
//! giving the two-parameter GK density with b = sqrt(m_m m_s / omega0). Both
//! closed forms of the density (Bessel-K and Meijer-G) are exposed; they must
//! agree, and the Meijer-G CDF is the building block of the diversity
//! analysis.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mellin_barnes::{contour_for, eval_meijer_g, MeijerGSpec};
use crate::special_fn::{bessel_k, gamma};

/// Tolerance band around [0, 1] inside which CDF values are clamped; values
/// further out indicate a broken evaluation and raise an error.
const CDF_NOISE_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkParams {
    m_m: f64,
    m_s: f64,
    omega0: f64,
}

impl GkParams {
    pub fn new(m_m: f64, m_s: f64, omega0: f64) -> Result<Self> {
        for (name, v) in [("m_m", m_m), ("m_s", m_s), ("omega0", omega0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let b = (m_m * m_s / omega0).sqrt();
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "derived b = sqrt(m_m m_s / omega0) is not positive-finite ({b})"
            )));
        }
        Ok(Self { m_m, m_s, omega0 })
    }

    /// Same shape parameters with the mean power set from an SNR in dB.
    pub fn with_snr_db(m_m: f64, m_s: f64, snr_db: f64) -> Result<Self> {
        Self::new(m_m, m_s, 10f64.powf(snr_db / 10.0))
    }

    pub fn m_m(&self) -> f64 {
        self.m_m
    }

    pub fn m_s(&self) -> f64 {
        self.m_s
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// b = sqrt(m_m m_s / omega0).
    pub fn b(&self) -> f64 {
        (self.m_m * self.m_s / self.omega0).sqrt()
    }

    /// Density through the Bessel-K form.
    pub fn pdf_bessel(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("pdf requires gamma > 0, got {g}")));
        }
        let b = self.b();
        let order = self.m_s - self.m_m;
        let norm = 2.0 * b.powf(self.m_m + self.m_s)
            / (gamma(self.m_m)? * gamma(self.m_s)?);
        Ok(norm * g.powf(0.5 * (self.m_m + self.m_s) - 1.0) * bessel_k(order, 2.0 * b * g.sqrt())?)
    }

    /// The Meijer-G spec whose evaluation gives the density (up to the
    /// parameter-dependent prefactor applied in [`Self::pdf_meijer`]).
    fn pdf_spec(&self, g: f64) -> Result<MeijerGSpec> {
        MeijerGSpec::new(
            vec![],
            vec![],
            vec![self.m_m - 1.0, self.m_s - 1.0],
            vec![],
            self.m_m * self.m_s / self.omega0 * g,
        )
    }

    /// Density through the Meijer-G form; agrees with [`Self::pdf_bessel`].
    pub fn pdf_meijer(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("pdf requires gamma > 0, got {g}")));
        }
        let spec = self.pdf_spec(g)?;
        let value = eval_meijer_g(&spec, &contour_for(&spec)?)?;
        Ok(self.m_m * self.m_s / (gamma(self.m_m)? * gamma(self.m_s)? * self.omega0) * value)
    }

    /// The Meijer-G spec of the distribution function (sans the
    /// 1/(Gamma(m_m) Gamma(m_s)) prefactor).
    pub fn cdf_spec(&self, g: f64) -> Result<MeijerGSpec> {
        MeijerGSpec::new(
            vec![1.0],
            vec![],
            vec![self.m_m, self.m_s],
            vec![0.0],
            self.m_m * self.m_s / self.omega0 * g,
        )
    }

    /// Distribution function of the branch SNR.
    pub fn cdf(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("cdf requires gamma > 0, got {g}")));
        }
        let spec = self.cdf_spec(g)?;
        // The default mid-strip contour loses the value to cancellation for
        // tiny arguments (result ~ z^r from an integrand ~ z^c, c < r). Hug
        // the right strip edge instead when z is small; the integral itself
        // does not depend on the abscissa.
        let r = self.m_m.min(self.m_s);
        let mut cfg = if spec.z < 0.5 {
            contour_for(&spec)?.with_abscissa(r - 0.25 * r.min(1.0))
        } else {
            contour_for(&spec)?
        };
        // This spec's integrand decays like e^{-pi |tau|}; a short line keeps
        // panel counts down and the tail check still extends it if needed.
        cfg.half_width = 16.0;
        let raw = eval_meijer_g(&spec, &cfg)? / (gamma(self.m_m)? * gamma(self.m_s)?);
        if raw < -CDF_NOISE_BAND || raw > 1.0 + CDF_NOISE_BAND {
            return Err(Error::Convergence(format!(
                "cdf evaluation {raw} outside [0,1] beyond the noise band"
            )));
        }
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Reusable two-factor gamma sampler for this branch.
    pub fn sampler(&self) -> Result<GkSampler> {
        let g1 = Gamma::new(self.m_m, 1.0 / self.m_m).map_err(|e| {
            Error::InvalidParameter(format!("multipath gamma factor: {e}"))
        })?;
        let g2 = Gamma::new(self.m_s, self.omega0 / self.m_s).map_err(|e| {
            Error::InvalidParameter(format!("shadowing gamma factor: {e}"))
        })?;
        Ok(GkSampler { g1, g2 })
    }

    /// One draw of the branch SNR.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.sampler()?.sample(rng))
    }
}

/// Product-of-gammas sampler: gamma = g1 * g2 with g1 ~ Gamma(m_m, 1/m_m)
/// and g2 ~ Gamma(m_s, omega0/m_s), so E[gamma] = omega0.
#[derive(Debug, Clone, Copy)]
pub struct GkSampler {
    g1: Gamma<f64>,
    g2: Gamma<f64>,
}

impl GkSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.g1.sample(rng) * self.g2.sample(rng)
    }
}
