//! Calculus on zonal functions: semigroup, averaging operator, entropy,
//! Dirichlet form and p-quasi-norms.
//!
//! Everything here works in the zonal normalization G_k(1) = 1. Quantities
//! whose textbook form assumes an L2-orthonormal basis pick up the factor
//! <G_k, G_k> = 1/c_{k,n}, always obtained from [`zonal_norm_sq`] rather
//! than from a hand-copied formula.

use crate::error::{Error, Result};
use crate::geometry::{sample_subsphere, UnitVector};
use crate::mc::{fold_chunks, MeanVar, DEFAULT_CHUNK};
use crate::spectral::quadrature::{latitude_expectation, QuadratureOptions};
use crate::spectral::EigenTable;
use crate::stream::RandomStream;
use std::cell::Cell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// f(x) = sum_k a_k G_k(x . v), stored by axis and coefficient list.
#[derive(Clone, Debug, PartialEq)]
pub struct ZonalFunction {
    axis: UnitVector,
    coeffs: Vec<f64>,
}

impl ZonalFunction {
    pub fn new(axis: UnitVector, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidConfiguration(
                "zonal function needs at least the degree-0 coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfiguration(
                "zonal coefficients must be finite".into(),
            ));
        }
        Ok(Self { axis, coeffs })
    }

    pub fn axis(&self) -> &UnitVector {
        &self.axis
    }

    pub fn dim(&self) -> usize {
        self.axis.dim()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mean over the sphere. G_k has zero mean for k >= 1, so this is a_0.
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// f as a function of the latitude t = x . v alone.
    pub fn latitude_profile(&self, t: f64) -> f64 {
        let nf = self.dim() as f64;
        let mut acc = self.coeffs[0];
        if self.coeffs.len() == 1 {
            return acc;
        }
        let mut prev = 1.0;
        let mut cur = t;
        acc += self.coeffs[1] * t;
        for k in 2..self.coeffs.len() {
            let kf = k as f64;
            let next = ((2.0 * kf + nf - 4.0) * t * cur - (kf - 1.0) * prev) / (nf + kf - 3.0);
            prev = cur;
            cur = next;
            acc += self.coeffs[k] * cur;
        }
        acc
    }

    pub fn eval(&self, x: &UnitVector) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        // Rounding can push a dot product of unit vectors just past 1.
        let t = self.axis.dot(x).clamp(-1.0, 1.0);
        Ok(self.latitude_profile(t))
    }
}

/// Nonnegative semigroup time, t = -log r for a radius r in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupTime(f64);

impl SemigroupTime {
    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfRange {
                name: "t",
                value: t,
                range: "[0, inf)",
            });
        }
        Ok(Self(t))
    }

    pub fn from_radius(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 || r > 1.0 {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                range: "(0, 1]",
            });
        }
        Ok(Self(-r.ln()))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Poisson semigroup on coefficients: a_k -> e^{-kt} a_k.
pub fn apply_poisson(f: &ZonalFunction, t: SemigroupTime) -> ZonalFunction {
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| (-(k as f64) * t.value()).exp() * a)
        .collect();
    ZonalFunction {
        axis: f.axis.clone(),
        coeffs,
    }
}

/// Averaging operator on coefficients: a_k -> G_k(r) a_k.
pub fn apply_ar_zonal(f: &ZonalFunction, r: f64) -> Result<ZonalFunction> {
    let table = EigenTable::compute(f.dim(), r, f.degree())?;
    let coeffs = f
        .coeffs
        .iter()
        .zip(table.values())
        .map(|(a, mu)| a * mu)
        .collect();
    Ok(ZonalFunction {
        axis: f.axis.clone(),
        coeffs,
    })
}

/// Kernel of the subordinated semigroup, (1 - r^2) / |x - ry|^n.
pub fn poisson_kernel(x: &UnitVector, y: &UnitVector, r: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    if !r.is_finite() || r.abs() >= 1.0 {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "(-1, 1)",
        });
    }
    let d2 = 1.0 - 2.0 * r * x.dot(y) + r * r;
    Ok((1.0 - r * r) / d2.powf(x.dim() as f64 / 2.0))
}

/// Monte Carlo application of the averaging operator at a point:
/// mean and standard error of f over the slice {y : x . y = r}.
pub fn apply_ar_mc<F>(
    f: F,
    x: &UnitVector,
    r: f64,
    samples: u64,
    stream: &RandomStream,
) -> Result<(f64, f64)>
where
    F: Fn(&UnitVector) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::SampleBudget { got: 0, min: 1 });
    }
    if !r.is_finite() || r.abs() >= 1.0 {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "(-1, 1)",
        });
    }
    let stats = fold_chunks(
        stream,
        samples,
        DEFAULT_CHUNK,
        |count, rng| {
            let mut mv = MeanVar::default();
            for _ in 0..count {
                let y = sample_subsphere(x, r, rng).expect("radius and axis already validated");
                mv.push(f(&y));
            }
            mv
        },
        MeanVar::merge,
        MeanVar::default(),
    );
    Ok((stats.mean(), stats.std_error()))
}

static NORM_CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();

/// <G_k, G_k> over the sphere, i.e. E[G_k(t)^2] = 1/c_{k,n}. Computed by
/// latitude quadrature with a pure relative convergence test (the value
/// decays fast in k, so an absolute floor would accept junk), then cached.
pub fn zonal_norm_sq(k: usize, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let cache = NORM_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&(k, n)) {
        return Ok(v);
    }
    let opts = QuadratureOptions {
        abs_tol: f64::MIN_POSITIVE,
        ..QuadratureOptions::default()
    };
    let v = latitude_expectation(
        |t| {
            let g = crate::spectral::gegenbauer_eval(k, n, t).expect("t in [-1,1] by construction");
            g * g
        },
        n,
        &opts,
    )?;
    cache.lock().unwrap().insert((k, n), v);
    Ok(v)
}

/// Dirichlet form E(f, g) = sum_k k a_k b_k <G_k, G_k>. The norm factor
/// translates zonal coefficients to the orthonormal-basis form sum_k k f_k g_k.
pub fn dirichlet_form(f: &ZonalFunction, g: &ZonalFunction) -> Result<f64> {
    if f.axis.coords() != g.axis.coords() {
        return Err(Error::AxisMismatch);
    }
    let n = f.dim();
    let common = f.coeffs.len().min(g.coeffs.len());
    let mut sum = 0.0;
    for k in 1..common {
        let term = f.coeffs[k] * g.coeffs[k];
        if term != 0.0 {
            sum += k as f64 * term * zonal_norm_sq(k, n)?;
        }
    }
    Ok(sum)
}

fn xlnx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// Negative values below this magnitude at a quadrature node are treated as
/// rounding noise and clamped to 0; anything worse is a hard error.
const NEGATIVITY_TOL: f64 = 1e-12;

/// Ent(g) = E[g log g] - E[g] log E[g] for a nonnegative latitude profile.
/// The integrand x log x is extended by 0 at x = 0.
pub fn entropy_profile<G: Fn(f64) -> f64>(g: G, n: usize) -> Result<f64> {
    let worst = Cell::new(0.0_f64);
    let clamped = |t: f64| {
        let v = g(t);
        if v < worst.get() {
            worst.set(v);
        }
        v.max(0.0)
    };
    let opts = QuadratureOptions::default();
    // A genuinely negative profile gets clamped to a kinked integrand that
    // may defeat the quadrature; the sign diagnosis must win over the
    // convergence error, so check it on both exits.
    let negativity = |worst: f64| -> Result<()> {
        if worst < -NEGATIVITY_TOL {
            return Err(Error::NegativeValue {
                context: "entropy integrand",
                value: worst,
            });
        }
        Ok(())
    };
    let e_glng = match latitude_expectation(|t| xlnx(clamped(t)), n, &opts) {
        Ok(v) => v,
        Err(e) => {
            negativity(worst.get())?;
            return Err(e);
        }
    };
    negativity(worst.get())?;
    let e_g = latitude_expectation(&clamped, n, &opts)?;
    Ok(e_glng - xlnx(e_g))
}

/// Entropy of a zonal function (which must be nonnegative as a profile).
pub fn entropy(f: &ZonalFunction) -> Result<f64> {
    entropy_profile(|t| f.latitude_profile(t), f.dim())
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p == 0.0 {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "finite, nonzero",
        });
    }
    Ok(())
}

fn power_mean_from(e_fp: f64, p: f64) -> f64 {
    e_fp.powf(1.0 / p)
}

/// f^p with the conventions of the quasi-norm: |f|^p for p >= 1, and 0 at
/// nonpositive points otherwise. Keeps the integration pass finite even when
/// a p < 0 input is about to be rejected for touching zero.
fn powered(v: f64, p: f64) -> f64 {
    if p >= 1.0 {
        v.abs().powf(p)
    } else if v <= 0.0 {
        0.0
    } else {
        v.powf(p)
    }
}

/// ||f||_p = (E[f^p])^{1/p} for a zonal profile, p != 0. For p >= 1 the
/// absolute value is taken; for 0 < p < 1 the profile must be nonnegative;
/// for p < 0 it must be strictly positive at every quadrature node.
pub fn quasi_norm_zonal(f: &ZonalFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let n = f.dim();
    let worst = Cell::new(f64::INFINITY);
    let opts = QuadratureOptions::default();
    let e_fp = latitude_expectation(
        |t| {
            let v = f.latitude_profile(t);
            if v < worst.get() {
                worst.set(v);
            }
            powered(v, p)
        },
        n,
        &opts,
    );
    // A sign violation explains a convergence failure; report the cause.
    enforce_positivity(worst.get(), p)?;
    Ok(power_mean_from(e_fp?, p))
}

fn enforce_positivity(min_seen: f64, p: f64) -> Result<()> {
    if p < 0.0 && min_seen <= 0.0 {
        return Err(Error::NegativeValue {
            context: "quasi-norm with negative exponent needs a strictly positive function",
            value: min_seen,
        });
    }
    if p < 1.0 && min_seen < -NEGATIVITY_TOL {
        return Err(Error::NegativeValue {
            context: "quasi-norm integrand",
            value: min_seen,
        });
    }
    Ok(())
}

/// Monte Carlo ||f||_p over the uniform measure for a point-evaluable f.
pub fn quasi_norm_mc<F>(
    f: F,
    n: usize,
    p: f64,
    samples: u64,
    stream: &RandomStream,
) -> Result<f64>
where
    F: Fn(&UnitVector) -> f64 + Sync,
{
    check_exponent(p)?;
    if samples == 0 {
        return Err(Error::SampleBudget { got: 0, min: 1 });
    }
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    let (stats, worst) = fold_chunks(
        stream,
        samples,
        DEFAULT_CHUNK,
        |count, rng| {
            let mut mv = MeanVar::default();
            let mut min_seen = f64::INFINITY;
            for _ in 0..count {
                let x = crate::geometry::sample_uniform(n, rng).expect("dimension validated");
                let v = f(&x);
                min_seen = min_seen.min(v);
                mv.push(powered(v, p));
            }
            (mv, min_seen)
        },
        |(a, ma), (b, mb)| (MeanVar::merge(a, b), ma.min(mb)),
        (MeanVar::default(), f64::INFINITY),
    );
    enforce_positivity(worst, p)?;
    Ok(power_mean_from(stats.mean(), p))
}
