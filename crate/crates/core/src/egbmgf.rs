//! The extended generalized bivariate Meijer G-function (two variables,
//! double Mellin-Barnes integral):
//!
//! ```text
//!            1     / /  J(s+t) X(s) Y(t) x^s y^t ds dt
//! S(x, y) = ------ | |
//!           (2pii)^2C1 C2
//! ```
//!
//! where `J` carries the joint factors Gamma(a_j + s + t) (numerator),
//! Gamma(1 - a_j - s - t) and Gamma(b_j + s + t) (denominator), and `X`/`Y`
//! are ordinary single-variable Gamma ratios described by [`VariableBlock`].
//!
//! Evaluation is a tensor product of two truncated vertical-line quadratures:
//! for every node of the outer (s) line the inner (t) line is refined until
//! it converges, then the outer line itself is refined the same way. All
//! Gamma terms are summed in log space with a single exponentiation per
//! (s, t) pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mellin_barnes::{
    log_gamma_block, take_real, ContourConfig, DEFAULT_HALF_WIDTH,
};
use crate::quadrature::composite_grid;

pub const DEFAULT_REL_TOL_2D: f64 = 1e-8;
pub const DEFAULT_MAX_PANELS_2D: usize = 128;
const START_PANELS_2D: usize = 8;
/// Minimum accepted Re-distance between the contour plane and the nearest
/// joint-numerator pole sheet.
const JOINT_GAP_MIN: f64 = 1e-3;
/// Gap the automatic contour placement aims for when it has room.
const JOINT_GAP_TARGET: f64 = 0.25;

/// One variable's parameter lists: `c_*` are upper (Gamma(1 - c + s) when in
/// the numerator), `d_*` are lower (Gamma(d - s) when in the numerator).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableBlock {
    #[serde(default)]
    pub c_num: Vec<f64>,
    #[serde(default)]
    pub c_den: Vec<f64>,
    #[serde(default)]
    pub d_num: Vec<f64>,
    #[serde(default)]
    pub d_den: Vec<f64>,
}

impl VariableBlock {
    /// (p, q) orders of this block.
    pub fn orders(&self) -> (usize, usize) {
        (self.c_num.len() + self.c_den.len(), self.d_num.len() + self.d_den.len())
    }

    fn all_finite(&self) -> bool {
        [&self.c_num, &self.c_den, &self.d_num, &self.d_den]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// (left, right) bounds of the pole-free strip for this block alone.
    fn strip(&self) -> (Option<f64>, Option<f64>) {
        let right = self.d_num.iter().cloned().fold(None, |m: Option<f64>, d| {
            Some(m.map_or(d, |m| m.min(d)))
        });
        let left = self.c_num.iter().cloned().fold(None, |m: Option<f64>, c| {
            Some(m.map_or(c - 1.0, |m| m.max(c - 1.0)))
        });
        (left, right)
    }

    /// Default abscissa by the same rule as the single-variable module.
    fn default_abscissa(&self) -> Result<f64> {
        match self.strip() {
            (Some(l), Some(r)) => {
                if l >= r {
                    Err(Error::NoStrip(format!(
                        "block strip empty: left poles end at {l}, right start at {r}"
                    )))
                } else {
                    Ok(0.5 * (l + r))
                }
            }
            (None, Some(r)) => Ok(r - 0.5),
            (Some(l), None) => Ok(l + 0.5),
            (None, None) => Err(Error::NoStrip("block has no pole families".into())),
        }
    }

    fn check_abscissa(&self, c: f64, which: &str) -> Result<()> {
        let (l, r) = self.strip();
        if let Some(l) = l {
            if c <= l {
                return Err(Error::NoStrip(format!(
                    "{which} abscissa {c} not right of left poles (end {l})"
                )));
            }
        }
        if let Some(r) = r {
            if c >= r {
                return Err(Error::NoStrip(format!(
                    "{which} abscissa {c} not left of right poles (start {r})"
                )));
            }
        }
        Ok(())
    }

    fn log_factor(&self, s: Complex64) -> Complex64 {
        log_gamma_block(&self.d_num, &self.c_num, &self.d_den, &self.c_den, s)
    }
}

/// Whether the Table-I convergence conditions hold strictly or with equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceClass {
    Strict,
    /// An order condition holds with equality: convergence is conditional and
    /// the quadrature may need wider truncation. Reported, not rejected.
    Marginal,
}

/// Full parameter set of the bivariate function. Serialization uses exactly
/// these field names; this is the JSON dialect the CLI consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgbmgfSpec {
    #[serde(default)]
    pub joint_num: Vec<f64>,
    #[serde(default)]
    pub joint_den_upper: Vec<f64>,
    #[serde(default)]
    pub joint_den_lower: Vec<f64>,
    pub x_block: VariableBlock,
    pub y_block: VariableBlock,
    pub x: f64,
    pub y: f64,
}

impl EgbmgfSpec {
    /// Check argument positivity and the order conditions
    /// p1 + p2 <= q1 + q2, p1 + p3 <= q1 + q3, q2 >= 1, q3 >= 1.
    pub fn validate(&self) -> Result<ConvergenceClass> {
        if !(self.x > 0.0) || !self.x.is_finite() || !(self.y > 0.0) || !self.y.is_finite() {
            return Err(Error::Domain(format!(
                "arguments must be positive and finite, got x={}, y={}",
                self.x, self.y
            )));
        }
        let finite = self.joint_num.iter().all(|v| v.is_finite())
            && self.joint_den_upper.iter().all(|v| v.is_finite())
            && self.joint_den_lower.iter().all(|v| v.is_finite())
            && self.x_block.all_finite()
            && self.y_block.all_finite();
        if !finite {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        let p1 = self.joint_num.len() + self.joint_den_upper.len();
        let q1 = self.joint_den_lower.len();
        let (p2, q2) = self.x_block.orders();
        let (p3, q3) = self.y_block.orders();
        if q2 < 1 || q3 < 1 {
            return Err(Error::Domain(format!(
                "each variable block needs at least one lower parameter (q2={q2}, q3={q3})"
            )));
        }
        if p1 + p2 > q1 + q2 || p1 + p3 > q1 + q3 {
            return Err(Error::Domain(format!(
                "order conditions violated: p1+p2={} vs q1+q2={}, p1+p3={} vs q1+q3={}",
                p1 + p2,
                q1 + q2,
                p1 + p3,
                q1 + q3
            )));
        }
        if p1 + p2 == q1 + q2 || p1 + p3 == q1 + q3 {
            Ok(ConvergenceClass::Marginal)
        } else {
            Ok(ConvergenceClass::Strict)
        }
    }

    fn min_joint_num(&self) -> Option<f64> {
        self.joint_num.iter().cloned().fold(None, |m: Option<f64>, a| {
            Some(m.map_or(a, |m| m.min(a)))
        })
    }

    fn log_joint(&self, u: Complex64) -> Complex64 {
        use crate::special_fn::log_gamma_unchecked as lg;
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in &self.joint_num {
            acc += lg(Complex64::new(a, 0.0) + u);
        }
        for &a in &self.joint_den_upper {
            acc -= lg(Complex64::new(1.0 - a, 0.0) - u);
        }
        for &b in &self.joint_den_lower {
            acc -= lg(Complex64::new(b, 0.0) + u);
        }
        acc
    }
}

/// Contour pair produced by [`contours_for`], with a note on whether the
/// per-variable abscissae had to move to clear the joint pole sheets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPair {
    pub s: ContourConfig,
    pub t: ContourConfig,
    /// True when the default per-block abscissae violated
    /// Re(a_j + s + t) > 0 and were shifted inward.
    pub adjusted: bool,
}

/// Place both contours: per-block strip midpoints, then shift right as needed
/// (proportionally to each block's remaining headroom) so the plane
/// Re(s + t) clears every joint numerator pole sheet.
pub fn contours_for(spec: &EgbmgfSpec) -> Result<ContourPair> {
    spec.validate()?;
    let mut cs = spec.x_block.default_abscissa()?;
    let mut ct = spec.y_block.default_abscissa()?;
    let mut adjusted = false;
    if let Some(a_min) = spec.min_joint_num() {
        let floor = -a_min; // require cs + ct > floor
        let gap = cs + ct - floor;
        if gap < JOINT_GAP_TARGET {
            let headroom = |block: &VariableBlock, c: f64| -> f64 {
                match block.strip().1 {
                    Some(r) => 0.9 * (r - c),
                    None => f64::INFINITY,
                }
            };
            let hs = headroom(&spec.x_block, cs);
            let ht = headroom(&spec.y_block, ct);
            let reachable = gap + hs + ht; // best achievable gap
            let target = JOINT_GAP_TARGET.min(0.5 * reachable);
            if target <= JOINT_GAP_MIN {
                return Err(Error::NoStrip(format!(
                    "cannot separate contour plane from joint pole sheet at Re(s+t) = {floor}"
                )));
            }
            if target > gap {
                let delta = target - gap;
                let (ds, dt) = if hs.is_infinite() && ht.is_infinite() {
                    (0.5 * delta, 0.5 * delta)
                } else if hs.is_infinite() {
                    let dt = (0.5 * delta).min(ht);
                    (delta - dt, dt)
                } else if ht.is_infinite() {
                    let ds = (0.5 * delta).min(hs);
                    (ds, delta - ds)
                } else {
                    (delta * hs / (hs + ht), delta * ht / (hs + ht))
                };
                cs += ds;
                ct += dt;
                adjusted = true;
            }
        }
    }
    let mk = |c: f64| {
        ContourConfig::new(c, DEFAULT_HALF_WIDTH, DEFAULT_REL_TOL_2D, DEFAULT_MAX_PANELS_2D)
    };
    Ok(ContourPair { s: mk(cs)?, t: mk(ct)?, adjusted })
}

/// Evaluation result with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgbmgfReport {
    pub value: f64,
    /// |Im| of the raw double integral relative to the final value's scale.
    pub imag_residual: f64,
    pub convergence: ConvergenceClass,
    /// Panels per line at convergence (s, t at the last refined node).
    pub panels: (usize, usize),
}

struct TGrid {
    taus: Vec<f64>,
    weights: Vec<f64>,
    /// y-block log-factor plus t log(y), per node.
    log_factor: Vec<Complex64>,
}

struct TensorEval<'a> {
    spec: &'a EgbmgfSpec,
    cs: f64,
    ct: f64,
    ln_x: f64,
    ln_y: f64,
    rel_tol: f64,
    w_s: f64,
    w_t: f64,
    max_level_s: usize,
    max_level_t: usize,
    t_grids: Vec<Option<TGrid>>,
}

impl<'a> TensorEval<'a> {
    fn t_grid(&mut self, level: usize) -> &TGrid {
        if self.t_grids.len() <= level {
            self.t_grids.resize_with(level + 1, || None);
        }
        if self.t_grids[level].is_none() {
            let panels = START_PANELS_2D << level;
            let (taus, weights) = composite_grid(-self.w_t, self.w_t, panels);
            let log_factor = taus
                .iter()
                .map(|&tau| {
                    let t = Complex64::new(self.ct, tau);
                    self.spec.y_block.log_factor(t) + t * self.ln_y
                })
                .collect();
            self.t_grids[level] = Some(TGrid { taus, weights, log_factor });
        }
        self.t_grids[level].as_ref().unwrap()
    }

    /// Inner line integral (over t) for a fixed outer point s, at one level.
    fn inner_at(&mut self, s: Complex64, level: usize) -> Complex64 {
        let ct = self.ct;
        let spec = self.spec;
        let grid = self.t_grid(level);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&tau, &w), &lf) in grid.taus.iter().zip(&grid.weights).zip(&grid.log_factor) {
            let u = s + Complex64::new(ct, tau);
            acc += w * (lf + spec.log_joint(u)).exp();
        }
        acc
    }

    /// Refine the inner line from `hint` until two levels agree.
    fn inner_converged(&mut self, s: Complex64, hint: usize) -> Result<(Complex64, usize)> {
        let mut level = hint;
        let mut v = self.inner_at(s, level);
        loop {
            if level + 1 > self.max_level_t {
                return Err(Error::Convergence(format!(
                    "inner contour: no agreement to {:e} within {} panels",
                    self.rel_tol,
                    START_PANELS_2D << self.max_level_t
                )));
            }
            let v2 = self.inner_at(s, level + 1);
            if !v2.re.is_finite() || !v2.im.is_finite() {
                return Err(Error::Convergence("inner contour: non-finite sum".into()));
            }
            if (v2 - v).norm() <= self.rel_tol * v2.norm().max(f64::MIN_POSITIVE) {
                return Ok((v2, level));
            }
            level += 1;
            v = v2;
        }
    }

    /// One full outer pass. Returns (sum, per-node |contribution| paired with
    /// |tau|, deepest inner level used).
    fn outer_at(&mut self, level: usize) -> Result<(Complex64, Vec<(f64, f64)>, usize)> {
        let panels = START_PANELS_2D << level;
        let (taus, weights) = composite_grid(-self.w_s, self.w_s, panels);
        let mut total = Complex64::new(0.0, 0.0);
        let mut contribs = Vec::with_capacity(taus.len());
        let mut hint = 0usize;
        let mut deepest = 0usize;
        for (&tau, &w) in taus.iter().zip(&weights) {
            let s = Complex64::new(self.cs, tau);
            let lms = self.spec.x_block.log_factor(s) + s * self.ln_x;
            let (inner, lv) = self.inner_converged(s, hint)?;
            hint = lv;
            deepest = deepest.max(lv);
            let term = w * lms.exp() * inner;
            total += term;
            contribs.push((tau, term.norm()));
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Convergence("outer contour: non-finite sum".into()));
        }
        Ok((total, contribs, deepest))
    }

    /// Tail mass of the inner integrand at the central outer point, relative
    /// to the full inner sum there.
    fn inner_tail_ratio(&mut self, level: usize) -> f64 {
        let s = Complex64::new(self.cs, 0.0);
        let ct = self.ct;
        let spec = self.spec;
        let cutoff = 0.8 * self.w_t;
        let grid = self.t_grid(level);
        let mut tail = 0.0;
        let mut full = 0.0;
        for ((&tau, &w), &lf) in grid.taus.iter().zip(&grid.weights).zip(&grid.log_factor) {
            let u = s + Complex64::new(ct, tau);
            let m = w * (lf + spec.log_joint(u)).exp().norm();
            full += m;
            if tau.abs() >= cutoff {
                tail += m;
            }
        }
        if full > 0.0 {
            tail / full
        } else {
            0.0
        }
    }

    fn run(&mut self) -> Result<(Complex64, (usize, usize))> {
        for _extension in 0..6 {
            let mut level = 0usize;
            let (mut prev, _, _) = self.outer_at(level)?;
            let converged = loop {
                if level + 1 > self.max_level_s {
                    return Err(Error::Convergence(format!(
                        "outer contour: no agreement to {:e} within {} panels",
                        self.rel_tol,
                        START_PANELS_2D << self.max_level_s
                    )));
                }
                level += 1;
                let (cur, contribs, deepest) = self.outer_at(level)?;
                if (cur - prev).norm() <= self.rel_tol * cur.norm().max(f64::MIN_POSITIVE) {
                    break (cur, contribs, deepest, level);
                }
                prev = cur;
            };
            let (value, contribs, deepest_t, level_s) = converged;

            // truncation checks: outer line from the stored contributions,
            // inner line at the central outer node
            let total_mass: f64 = contribs.iter().map(|(_, m)| m).sum();
            let outer_tail: f64 = contribs
                .iter()
                .filter(|(tau, _)| tau.abs() >= 0.8 * self.w_s)
                .map(|(_, m)| m)
                .sum();
            let outer_ok = outer_tail <= 0.5 * self.rel_tol * total_mass.max(f64::MIN_POSITIVE);
            let inner_ok = self.inner_tail_ratio(deepest_t) <= 0.5 * self.rel_tol;
            if outer_ok && inner_ok {
                return Ok((value, (START_PANELS_2D << level_s, START_PANELS_2D << deepest_t)));
            }
            if !outer_ok {
                self.w_s *= 1.5;
            }
            if !inner_ok {
                self.w_t *= 1.5;
                self.t_grids.clear();
            }
        }
        Err(Error::Convergence(
            "tail mass still significant after repeated half-width extension".into(),
        ))
    }
}

fn max_level_for(max_panels: usize) -> usize {
    let mut level = 0;
    while (START_PANELS_2D << (level + 1)) <= max_panels {
        level += 1;
    }
    level
}

/// Evaluate with explicit contours. `cfg_s.rel_tol` drives both refinement
/// loops; the tighter of the two tolerances wins.
pub fn eval_egbmgf_report(
    spec: &EgbmgfSpec,
    cfg_s: &ContourConfig,
    cfg_t: &ContourConfig,
) -> Result<EgbmgfReport> {
    let convergence = spec.validate()?;
    spec.x_block.check_abscissa(cfg_s.abscissa, "s")?;
    spec.y_block.check_abscissa(cfg_t.abscissa, "t")?;
    if let Some(a_min) = spec.min_joint_num() {
        let gap = cfg_s.abscissa + cfg_t.abscissa + a_min;
        if gap < JOINT_GAP_MIN {
            return Err(Error::NoStrip(format!(
                "contour plane too close to joint pole sheet: Re(a+s+t) = {gap:e}"
            )));
        }
    }
    let mut eval = TensorEval {
        spec,
        cs: cfg_s.abscissa,
        ct: cfg_t.abscissa,
        ln_x: spec.x.ln(),
        ln_y: spec.y.ln(),
        rel_tol: cfg_s.rel_tol.min(cfg_t.rel_tol),
        w_s: cfg_s.half_width,
        w_t: cfg_t.half_width,
        max_level_s: max_level_for(cfg_s.max_panels),
        max_level_t: max_level_for(cfg_t.max_panels),
        t_grids: Vec::new(),
    };
    let (raw, panels) = eval.run()?;
    // two factors of (i d tau) / (2 pi i) leave 1 / (4 pi^2)
    let scaled = raw / (4.0 * PI * PI);
    let value = take_real(scaled)?;
    Ok(EgbmgfReport {
        value,
        imag_residual: scaled.im.abs(),
        convergence,
        panels,
    })
}

/// Evaluate with explicit contours, returning just the value.
pub fn eval_egbmgf(spec: &EgbmgfSpec, cfg_s: &ContourConfig, cfg_t: &ContourConfig) -> Result<f64> {
    Ok(eval_egbmgf_report(spec, cfg_s, cfg_t)?.value)
}

/// Evaluate with automatic contour placement.
pub fn eval_egbmgf_auto(spec: &EgbmgfSpec) -> Result<f64> {
    let pair = contours_for(spec)?;
    eval_egbmgf(spec, &pair.s, &pair.t)
}

/// Laplace-type transform of the bivariate function:
///
/// ```text
/// int_0^inf u^{lambda-1} e^{-mu u} S[alpha u^rho, beta u^rho] du
///   = (2 pi)^{(1-rho)/2} rho^{lambda-1/2} mu^{-lambda}
///     S'[alpha rho^rho / mu^rho, beta rho^rho / mu^rho]
/// ```
///
/// where `S'` has Delta(rho, lambda) = {lambda/rho, ..., (lambda+rho-1)/rho}
/// prepended to its joint numerator parameters. `spec.x`/`spec.y` supply
/// alpha and beta.
pub fn laplace_of_egbmgf_rho(spec: &EgbmgfSpec, lambda: f64, mu: f64, rho: u32) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() || !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!(
            "transform requires lambda > 0 and mu > 0, got lambda={lambda}, mu={mu}"
        )));
    }
    if rho < 1 {
        return Err(Error::Domain("transform requires rho >= 1".into()));
    }
    let rf = rho as f64;
    let scale = rf.powi(rho as i32) / mu.powf(rf);
    let mut joint_num = Vec::with_capacity(rho as usize + spec.joint_num.len());
    for j in 0..rho {
        joint_num.push((lambda + j as f64) / rf);
    }
    joint_num.extend_from_slice(&spec.joint_num);
    let shifted = EgbmgfSpec {
        joint_num,
        x: spec.x * scale,
        y: spec.y * scale,
        ..spec.clone()
    };
    let prefactor = (2.0 * PI).powf(0.5 * (1.0 - rf)) * rf.powf(lambda - 0.5) / mu.powf(lambda);
    Ok(prefactor * eval_egbmgf_auto(&shifted)?)
}

/// The rho = 1 instance used by the BER closed form: prefactor mu^{-lambda},
/// lambda prepended to the joint numerator, arguments scaled by 1/mu.
pub fn laplace_of_egbmgf(spec: &EgbmgfSpec, lambda: f64, mu: f64) -> Result<f64> {
    laplace_of_egbmgf_rho(spec, lambda, mu, 1)
}
