//! Composite Gauss-Legendre panels with global refinement.
//!
//! Everything downstream (contour integrals, Bessel integrals, the outer BER
//! quadrature) funnels through the same driver: split `[a, b]` into uniform
//! panels carrying a 32-node rule each, then double the panel count until two
//! successive refinements agree to the requested relative tolerance.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const GL_NODES: usize = 32;

/// Nodes and weights of the 32-point Gauss-Legendre rule on [-1, 1].
pub(crate) fn gl32() -> &'static ([f64; GL_NODES], [f64; GL_NODES]) {
    static RULE: OnceLock<([f64; GL_NODES], [f64; GL_NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut x = [0.0; GL_NODES];
        let mut w = [0.0; GL_NODES];
        let n = GL_NODES;
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-15 {
                    break;
                }
            }
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (x, w)
    })
}

/// Fill `nodes`/`weights` with the composite rule for `panels` uniform panels
/// on `[a, b]`. Output length is `panels * GL_NODES`.
pub(crate) fn composite_grid(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gl32();
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut nodes = Vec::with_capacity(panels * GL_NODES);
    let mut weights = Vec::with_capacity(panels * GL_NODES);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for i in 0..GL_NODES {
            nodes.push(mid + half * x[i]);
            weights.push(half * w[i]);
        }
    }
    (nodes, weights)
}

fn sum_complex(f: &mut impl FnMut(f64) -> Complex64, nodes: &[f64], weights: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, w) in nodes.iter().zip(weights) {
        acc += *w * f(*t);
    }
    acc
}

/// Integrate a complex-valued function over `[a, b]`, doubling the panel count
/// from `start_panels` until successive values agree to `rel_tol`. Returns the
/// converged value and the panel count that achieved it.
pub(crate) fn integrate_complex(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    rel_tol: f64,
    start_panels: usize,
    max_panels: usize,
    what: &str,
) -> Result<(Complex64, usize)> {
    let mut panels = start_panels.max(1);
    let (nodes, weights) = composite_grid(a, b, panels);
    let mut prev = sum_complex(&mut f, &nodes, &weights);
    loop {
        panels *= 2;
        if panels > max_panels {
            return Err(Error::Convergence(format!(
                "{what}: no agreement to {rel_tol:e} within {max_panels} panels"
            )));
        }
        let (nodes, weights) = composite_grid(a, b, panels);
        let cur = sum_complex(&mut f, &nodes, &weights);
        if !cur.re.is_finite() || !cur.im.is_finite() {
            return Err(Error::Convergence(format!(
                "{what}: non-finite integrand sum at {panels} panels"
            )));
        }
        let scale = cur.norm().max(f64::MIN_POSITIVE);
        if (cur - prev).norm() <= rel_tol * scale {
            return Ok((cur, panels));
        }
        prev = cur;
    }
}

/// Real-valued counterpart of [`integrate_complex`].
pub(crate) fn integrate_real(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    start_panels: usize,
    max_panels: usize,
    what: &str,
) -> Result<(f64, usize)> {
    let (v, n) = integrate_complex(
        |t| Complex64::new(f(t), 0.0),
        a,
        b,
        rel_tol,
        start_panels,
        max_panels,
        what,
    )?;
    Ok((v.re, n))
}
