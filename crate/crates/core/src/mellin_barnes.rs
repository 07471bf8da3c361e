//! Single-variable Meijer G-function by contour integration.
//!
//! The object evaluated is
//!
//! ```text
//!                    1    /   prod Gamma(b_j - s) prod Gamma(1 - a_j + s)
//! G^{m,n}_{p,q}[z] = ---- |   ------------------------------------------- z^s ds
//!                    2pii /C  prod Gamma(1 - b_j + s) prod Gamma(a_j - s)
//! ```
//!
//! with the numerator families `b_num` (right poles at s = b_j + k) and
//! `a_num` (left poles at s = a_j - 1 - k), along a vertical line inside the
//! pole-free strip. The integrand is accumulated in log space and
//! exponentiated once per node so that W = 50 contours don't overflow.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special_fn::log_gamma_unchecked;

/// Relative bound on the imaginary residue of a nominally real contour value.
pub(crate) const IMAG_RESIDUAL_REL: f64 = 1e-8;
/// Absolute floor used in the residue bound for near-zero values.
pub(crate) const IMAG_RESIDUAL_FLOOR: f64 = 1e-12;

pub const DEFAULT_HALF_WIDTH: f64 = 50.0;
pub const DEFAULT_REL_TOL_1D: f64 = 1e-10;
pub const DEFAULT_MAX_PANELS_1D: usize = 2048;

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Parameter blocks and argument of a single-variable Meijer G-function.
///
/// `a_num`/`b_num` are the n upper and m lower parameters that appear in the
/// numerator of the integrand; `a_den`/`b_den` are the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub a_num: Vec<f64>,
    pub a_den: Vec<f64>,
    pub b_num: Vec<f64>,
    pub b_den: Vec<f64>,
    pub z: f64,
}

impl MeijerGSpec {
    pub fn new(
        a_num: Vec<f64>,
        a_den: Vec<f64>,
        b_num: Vec<f64>,
        b_den: Vec<f64>,
        z: f64,
    ) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("argument must be positive and finite, got {z}")));
        }
        for block in [&a_num, &a_den, &b_num, &b_den] {
            if !all_finite(block) {
                return Err(Error::Domain("non-finite G-function parameter".into()));
            }
        }
        Ok(Self { a_num, a_den, b_num, b_den, z })
    }

    /// Log of the Gamma-ratio part of the integrand at contour point `s`.
    pub(crate) fn log_gamma_ratio(&self, s: Complex64) -> Complex64 {
        log_gamma_block(&self.b_num, &self.a_num, &self.b_den, &self.a_den, s)
    }

    /// (left, right) open bounds of the pole-free strip, when present.
    pub(crate) fn strip(&self) -> (Option<f64>, Option<f64>) {
        let right = self.b_num.iter().cloned().fold(None, |m: Option<f64>, b| {
            Some(m.map_or(b, |m| m.min(b)))
        });
        let left = self.a_num.iter().cloned().fold(None, |m: Option<f64>, a| {
            Some(m.map_or(a - 1.0, |m| m.max(a - 1.0)))
        });
        (left, right)
    }
}

/// Shared by the bivariate evaluator: log of
/// prod Gamma(bn - s) prod Gamma(1 - an + s) / [prod Gamma(1 - bd + s) prod Gamma(ad - s)].
pub(crate) fn log_gamma_block(
    b_num: &[f64],
    a_num: &[f64],
    b_den: &[f64],
    a_den: &[f64],
    s: Complex64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &b in b_num {
        acc += log_gamma_unchecked(Complex64::new(b, 0.0) - s);
    }
    for &a in a_num {
        acc += log_gamma_unchecked(Complex64::new(1.0 - a, 0.0) + s);
    }
    for &b in b_den {
        acc -= log_gamma_unchecked(Complex64::new(1.0 - b, 0.0) + s);
    }
    for &a in a_den {
        acc -= log_gamma_unchecked(Complex64::new(a, 0.0) - s);
    }
    acc
}

/// Vertical-contour placement and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Re(s) of the integration line.
    pub abscissa: f64,
    /// Truncation half-width W: the line is integrated over Im(s) in [-W, W].
    pub half_width: f64,
    /// Relative tolerance for panel refinement.
    pub rel_tol: f64,
    /// Refinement budget (composite panels along the full line).
    pub max_panels: usize,
}

impl ContourConfig {
    pub fn new(abscissa: f64, half_width: f64, rel_tol: f64, max_panels: usize) -> Result<Self> {
        if !abscissa.is_finite() {
            return Err(Error::InvalidParameter("abscissa must be finite".into()));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("half_width must be > 0, got {half_width}")));
        }
        if !(rel_tol > 0.0 && rel_tol <= 1e-4) {
            return Err(Error::InvalidParameter(format!("rel_tol must be in (0, 1e-4], got {rel_tol}")));
        }
        if max_panels < 2 {
            return Err(Error::InvalidParameter("max_panels must be at least 2".into()));
        }
        Ok(Self { abscissa, half_width, rel_tol, max_panels })
    }

    pub fn with_abscissa(mut self, abscissa: f64) -> Self {
        self.abscissa = abscissa;
        self
    }
}

/// Default contour for `spec`: the vertical line halfway between the
/// innermost right pole (min over `b_num`) and the innermost left pole
/// (max over `a_num` minus one). With only one pole family present the line
/// sits half a unit inside it.
pub fn contour_for(spec: &MeijerGSpec) -> Result<ContourConfig> {
    let (left, right) = spec.strip();
    let abscissa = match (left, right) {
        (Some(l), Some(r)) => {
            if l >= r {
                return Err(Error::NoStrip(format!(
                    "left poles end at {l}, right poles start at {r}"
                )));
            }
            0.5 * (l + r)
        }
        (None, Some(r)) => r - 0.5,
        (Some(l), None) => l + 0.5,
        (None, None) => {
            return Err(Error::NoStrip("no poles on either side; contour is unconstrained".into()))
        }
    };
    ContourConfig::new(abscissa, DEFAULT_HALF_WIDTH, DEFAULT_REL_TOL_1D, DEFAULT_MAX_PANELS_1D)
}

/// Check the residue bound and return the real part.
pub(crate) fn take_real(v: Complex64) -> Result<f64> {
    let bound = IMAG_RESIDUAL_REL * v.re.abs().max(IMAG_RESIDUAL_FLOOR);
    if v.im.abs() > bound {
        return Err(Error::ResidualImag { imag: v.im.abs(), bound });
    }
    Ok(v.re)
}

/// Relative mass of the integrand's outer decade, used to decide whether the
/// truncation half-width W is sufficient.
fn tail_mass(f: &mut impl FnMut(f64) -> Complex64, w: f64) -> f64 {
    let (nodes, weights) = quadrature::composite_grid(0.8 * w, w, 2);
    let mut m = 0.0;
    for (t, wt) in nodes.iter().zip(&weights) {
        m += wt * (f(*t).norm() + f(-*t).norm());
    }
    m
}

/// Evaluate the Meijer G-function along the configured contour.
pub fn eval_meijer_g(spec: &MeijerGSpec, cfg: &ContourConfig) -> Result<f64> {
    let _ = ContourConfig::new(cfg.abscissa, cfg.half_width, cfg.rel_tol, cfg.max_panels)?;
    let (left, right) = spec.strip();
    if let Some(l) = left {
        if cfg.abscissa <= l {
            return Err(Error::NoStrip(format!(
                "abscissa {} is not right of the left pole family (ends {l})",
                cfg.abscissa
            )));
        }
    }
    if let Some(r) = right {
        if cfg.abscissa >= r {
            return Err(Error::NoStrip(format!(
                "abscissa {} is not left of the right pole family (starts {r})",
                cfg.abscissa
            )));
        }
    }
    let ln_z = spec.z.ln();
    let c = cfg.abscissa;
    let mut f = |tau: f64| {
        let s = Complex64::new(c, tau);
        (spec.log_gamma_ratio(s) + s * ln_z).exp()
    };

    let mut w = cfg.half_width;
    for _ in 0..8 {
        let (integral, _panels) = quadrature::integrate_complex(
            &mut f,
            -w,
            w,
            cfg.rel_tol,
            8,
            cfg.max_panels,
            "meijer-g contour",
        )?;
        let tail = tail_mass(&mut f, w);
        if tail <= 0.5 * cfg.rel_tol * integral.norm() {
            // ds = i d(tau) cancels the i in 1/(2 pi i)
            return take_real(integral / (2.0 * PI));
        }
        w *= 1.5;
    }
    Err(Error::Convergence(
        "tail mass still significant after repeated half-width extension".into(),
    ))
}

/// Evaluate with the default contour from [`contour_for`].
pub fn eval_meijer_g_auto(spec: &MeijerGSpec) -> Result<f64> {
    eval_meijer_g(spec, &contour_for(spec)?)
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::special_fn::bessel_k;

    fn gk_cdf_spec(m_m: f64, m_s: f64, z: f64) -> MeijerGSpec {
        MeijerGSpec::new(vec![1.0], vec![], vec![m_m, m_s], vec![0.0], z).unwrap()
    }

    #[test]
    fn contour_rule_matches_strip_midpoints() {
        let cfg = contour_for(&gk_cdf_spec(1.0, 2.0, 1.0)).unwrap();
        assert_eq!(cfg.abscissa, 0.5);
        assert_eq!(cfg.half_width, DEFAULT_HALF_WIDTH);

        let cfg = contour_for(&gk_cdf_spec(1.0, 0.5, 1.0)).unwrap();
        assert_eq!(cfg.abscissa, 0.25);

        // only right poles: b_num = {0} -> line at -0.5
        let spec = MeijerGSpec::new(vec![], vec![], vec![0.0], vec![], 1.0).unwrap();
        assert_eq!(contour_for(&spec).unwrap().abscissa, -0.5);

        // only left poles: a_num = {2} -> poles end at 1, line at 1.5
        let spec = MeijerGSpec::new(vec![2.0], vec![], vec![], vec![], 1.0).unwrap();
        assert_eq!(contour_for(&spec).unwrap().abscissa, 1.5);
    }

    #[test]
    fn contour_rule_rejects_degenerate_specs() {
        // overlapping families: right poles start at 0, left poles end at 1
        let spec = MeijerGSpec::new(vec![2.0], vec![], vec![0.0], vec![], 1.0).unwrap();
        assert!(matches!(contour_for(&spec), Err(Error::NoStrip(_))));
        // nothing separating poles at all
        let spec = MeijerGSpec::new(vec![], vec![0.3], vec![], vec![0.7], 1.0).unwrap();
        assert!(matches!(contour_for(&spec), Err(Error::NoStrip(_))));
    }

    #[test]
    fn exp_reduction() {
        // G^{1,0}_{0,1}[x | -; 0] = e^{-x}
        for i in 0..20 {
            let x = 10f64.powf(-3.0 + 4.0 * i as f64 / 19.0);
            let spec = MeijerGSpec::new(vec![], vec![], vec![0.0], vec![], x).unwrap();
            let got = eval_meijer_g_auto(&spec).unwrap();
            let want = (-x).exp();
            // cancellation grows with x (value e^{-x} from an O(1) integrand)
            assert!((got - want).abs() <= 1e-10 * want, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn bessel_reduction() {
        // G^{2,0}_{0,2}[x | -; 0, 0] = 2 K_0(2 sqrt x)
        for i in 0..20 {
            let x = 10f64.powf(-3.0 + 4.0 * i as f64 / 19.0);
            let spec = MeijerGSpec::new(vec![], vec![], vec![0.0, 0.0], vec![], x).unwrap();
            let got = eval_meijer_g_auto(&spec).unwrap();
            let want = 2.0 * bessel_k(0.0, 2.0 * x.sqrt()).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "x={x}: {got} vs {want}");
        }
        // general order: G^{2,0}_{0,2}[x | -; nu/2, -nu/2] = 2 K_nu(2 sqrt x)
        let nu = 1.3;
        for x in [0.04, 0.9, 6.0] {
            let spec =
                MeijerGSpec::new(vec![], vec![], vec![nu / 2.0, -nu / 2.0], vec![], x).unwrap();
            let got = eval_meijer_g_auto(&spec).unwrap();
            let want = 2.0 * bessel_k(nu, 2.0 * x.sqrt()).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "nu={nu} x={x}");
        }
    }

    #[test]
    fn gk_cdf_value_and_limit() {
        // frozen 25-digit reference for (1 / (Gamma(1) Gamma(2))) G^{2,1}_{1,3}[2 | 1; 1, 2, 0]
        let spec = gk_cdf_spec(1.0, 2.0, 2.0);
        let got = eval_meijer_g_auto(&spec).unwrap();
        let want = 0.6907654299911009;
        assert!((got - want).abs() <= 1e-10 * want, "{got}");

        // CDF -> 1 as the argument grows
        let spec = gk_cdf_spec(1.0, 2.0, 5e3);
        assert!((eval_meijer_g_auto(&spec).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn contour_independence() {
        let spec = gk_cdf_spec(1.0, 2.0, 2.0);
        let base = contour_for(&spec).unwrap();
        let v0 = eval_meijer_g(&spec, &base).unwrap();
        for factor in [0.75, 1.25] {
            let cfg = base.with_abscissa(base.abscissa * factor);
            let v = eval_meijer_g(&spec, &cfg).unwrap();
            assert!((v - v0).abs() <= 1e-8 * v0.abs(), "abscissa x{factor}: {v} vs {v0}");
        }
    }

    #[test]
    fn half_width_doubling_is_stable() {
        let spec = gk_cdf_spec(1.0, 0.5, 0.3);
        let base = contour_for(&spec).unwrap();
        let v0 = eval_meijer_g(&spec, &base).unwrap();
        let mut wide = base;
        wide.half_width *= 2.0;
        let v1 = eval_meijer_g(&spec, &wide).unwrap();
        assert!((v1 - v0).abs() <= base.rel_tol * v0.abs());
    }

    #[test]
    fn config_and_domain_validation() {
        assert!(MeijerGSpec::new(vec![], vec![], vec![0.0], vec![], 0.0).is_err());
        assert!(MeijerGSpec::new(vec![], vec![], vec![0.0], vec![], -1.0).is_err());
        assert!(ContourConfig::new(0.5, 0.0, 1e-10, 64).is_err());
        assert!(ContourConfig::new(0.5, 50.0, 1e-3, 64).is_err());
        assert!(ContourConfig::new(f64::NAN, 50.0, 1e-10, 64).is_err());

        // abscissa outside the strip is rejected up front
        let spec = gk_cdf_spec(1.0, 2.0, 1.0);
        let cfg = contour_for(&spec).unwrap().with_abscissa(1.5);
        assert!(matches!(eval_meijer_g(&spec, &cfg), Err(Error::NoStrip(_))));
        let cfg = contour_for(&spec).unwrap().with_abscissa(-0.2);
        assert!(matches!(eval_meijer_g(&spec, &cfg), Err(Error::NoStrip(_))));
    }

    #[test]
    fn refinement_budget_is_enforced() {
        let spec = gk_cdf_spec(1.0, 2.0, 2.0);
        let mut cfg = contour_for(&spec).unwrap();
        cfg.max_panels = 4;
        assert!(matches!(eval_meijer_g(&spec, &cfg), Err(Error::Convergence(_))));
    }
}
