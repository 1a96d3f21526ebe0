//! Latitude expectations by Gauss-Legendre quadrature.
//!
//! For x uniform on S^{n-1} and a unit axis v, the latitude t = x·v has
//! density proportional to (1-t^2)^{(n-3)/2} on [-1, 1]. Substituting
//! t = sin(theta) folds the weight into cos^{n-2}(theta) on (-pi/2, pi/2),
//! which is analytic for every n >= 3, so Gauss-Legendre in theta converges
//! spectrally. The order is doubled until two successive estimates agree
//! within tolerance.

use crate::error::{Error, Result};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub start_order: usize,
    pub max_order: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            start_order: 64,
            max_order: 8192,
            abs_tol: 1e-14,
            rel_tol: 1e-12,
        }
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomial P_m and its derivative at x.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let dp = m as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

fn compute_rule(m: usize) -> Rule {
    assert!(m >= 2);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root from the top.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[m - 1 - i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    Rule { nodes, weights }
}

// Orders used by the adaptive loop: 64 << i.
const CACHED_ORDERS: usize = 8;
static RULES: [OnceLock<Rule>; CACHED_ORDERS] =
    [const { OnceLock::new() }; CACHED_ORDERS];

/// Cached Gauss-Legendre rule; `order` must be 64 * 2^i with i < 8.
pub fn gauss_legendre(order: usize) -> &'static Rule {
    let i = (order / 64).trailing_zeros() as usize;
    assert!(order == 64 << i && i < CACHED_ORDERS, "unsupported order {order}");
    RULES[i].get_or_init(|| compute_rule(order))
}

/// E[g(x·v)] for x uniform on S^{n-1}, computed in the angle variable.
pub fn latitude_expectation<G: Fn(f64) -> f64>(
    g: G,
    n: usize,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let weight_pow = (n - 2) as i32;
    let mut prev: Option<f64> = None;
    let mut order = opts.start_order;
    while order <= opts.max_order {
        let rule = gauss_legendre(order);
        let mut num = 0.0;
        let mut den = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = half_pi * x;
            let jac = theta.cos().powi(weight_pow);
            let t = theta.sin();
            num += w * jac * g(t);
            den += w * jac;
        }
        let val = num / den;
        if let Some(p) = prev {
            if (val - p).abs() <= opts.abs_tol + opts.rel_tol * val.abs() {
                return Ok(val);
            }
        }
        prev = Some(val);
        order *= 2;
    }
    Err(Error::QuadratureNotConverged {
        order: opts.max_order,
    })
}
