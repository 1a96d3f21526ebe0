//! Spectrum of the spherical averaging operator.
//!
//! A_r averages a function over the submanifold {y : x·y = r}. Its
//! eigenfunctions are the spherical harmonics, with the eigenvalue on degree
//! k given by the normalized Gegenbauer polynomial G_k evaluated at r. Two
//! independent evaluation routes are kept side by side: the three-term
//! recurrence (fast, any degree) and a binomial sum over even sphere moments
//! (slow, degree-limited) used as an oracle against the recurrence.

pub mod quadrature;
mod zonal;

pub use zonal::{
    apply_ar_mc, apply_ar_zonal, apply_poisson, dirichlet_form, entropy, entropy_profile,
    poisson_kernel, quasi_norm_mc, quasi_norm_zonal, zonal_norm_sq, SemigroupTime, ZonalFunction,
};

use crate::error::{Error, Result};
use serde::Serialize;

/// Largest degree accepted by the moment oracle. The binomial sum loses
/// roughly one bit per degree to cancellation, so past this point it can no
/// longer certify the recurrence to oracle tolerance.
pub const MOMENT_ORACLE_MAX_DEGREE: usize = 60;

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(())
}

fn check_latitude(t: f64) -> Result<()> {
    if !t.is_finite() || t.abs() > 1.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "[-1, 1]",
        });
    }
    Ok(())
}

/// G_0..G_{k_max} at t in one recurrence pass.
pub(crate) fn gegenbauer_sequence(n: usize, t: f64, k_max: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    if k_max == 0 {
        return out;
    }
    out.push(t);
    for k in 2..=k_max {
        let kf = k as f64;
        let next = ((2.0 * kf + nf - 4.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2])
            / (nf + kf - 3.0);
        out.push(next);
    }
    out
}

/// Normalized Gegenbauer polynomial G_k(t) on S^{n-1} via the three-term
/// recurrence. Normalized so that G_k(1) = 1; G_0 = 1, G_1 = t.
pub fn gegenbauer_eval(k: usize, n: usize, t: f64) -> Result<f64> {
    check_dim(n)?;
    check_latitude(t)?;
    if k == 0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mut prev = 1.0;
    let mut cur = t;
    for kk in 2..=k {
        let kf = kk as f64;
        let next = ((2.0 * kf + nf - 4.0) * t * cur - (kf - 1.0) * prev) / (nf + kf - 3.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Even moment E[X_1^{2a}] of one coordinate of a uniform point on the unit
/// sphere in R^{n-1}, i.e. the sphere orthogonal to an axis of S^{n-1}.
/// Equals (2a-1)!! / ((n-1)(n+1)...(n+2a-3)).
pub fn sphere_even_moment(a: usize, n: usize) -> Result<f64> {
    check_dim(n)?;
    let mut m = 1.0;
    for j in 0..a {
        m *= (2.0 * j as f64 + 1.0) / (n as f64 - 1.0 + 2.0 * j as f64);
    }
    Ok(m)
}

/// G_k(t) summed directly from its expansion over even sphere moments:
/// G_k(t) = E[(t + sqrt(1-t^2) X_1)^k] for X uniform on the link sphere.
/// Independent of the recurrence; degree-limited by cancellation.
pub fn gegenbauer_moment_oracle(k: usize, n: usize, t: f64) -> Result<f64> {
    check_dim(n)?;
    check_latitude(t)?;
    if k > MOMENT_ORACLE_MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            k,
            max: MOMENT_ORACLE_MAX_DEGREE,
        });
    }
    let s2 = (1.0 - t * t).max(0.0);
    let kf = k as f64;
    let mut sum = 0.0;
    let mut binom = 1.0; // C(k, 2a)
    let mut moment = 1.0; // E[X_1^{2a}]
    let mut s2a = 1.0; // s2^a
    let mut sign = 1.0;
    for a in 0..=(k / 2) {
        if a > 0 {
            let i = (2 * a - 2) as f64;
            binom *= (kf - i) * (kf - i - 1.0) / ((i + 1.0) * (i + 2.0));
            moment *= (2.0 * (a as f64) - 1.0) / (n as f64 - 1.0 + 2.0 * (a as f64 - 1.0));
            s2a *= s2;
            sign = -sign;
        }
        sum += sign * binom * s2a * t.powi((k - 2 * a) as i32) * moment;
    }
    Ok(sum)
}

/// Whether E[X_1^{2a}] <= (2a/(n-4))^a, the moment estimate used in the
/// hypercontractive step. Needs n >= 5.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentBound {
    pub a: usize,
    pub n: usize,
    pub exact: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn moment_bound_check(a: usize, n: usize) -> Result<MomentBound> {
    if n < 5 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: "[5, inf)",
        });
    }
    if a == 0 {
        return Err(Error::OutOfRange {
            name: "a",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let exact = sphere_even_moment(a, n)?;
    let bound = (2.0 * a as f64 / (n as f64 - 4.0)).powi(a as i32);
    Ok(MomentBound {
        a,
        n,
        exact,
        bound,
        holds: exact <= bound,
    })
}

/// Eigenvalues mu_k = G_k(r) of A_r for k = 0..=k_max.
#[derive(Clone, Debug, Serialize)]
pub struct EigenTable {
    pub n: usize,
    pub r: f64,
    mu: Vec<f64>,
}

impl EigenTable {
    pub fn compute(n: usize, r: f64, k_max: usize) -> Result<Self> {
        check_dim(n)?;
        if !r.is_finite() || r.abs() >= 1.0 {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                range: "(-1, 1)",
            });
        }
        Ok(Self {
            n,
            r,
            mu: gegenbauer_sequence(n, r, k_max),
        })
    }

    pub fn k_max(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }
}

/// max_k |G_k(r) - r^k| for one dimension. The gap closes like 1/n, which is
/// what lets the finite-n correlation bound approach the r^k idealization.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationRow {
    pub n: usize,
    pub max_abs_deviation: f64,
}

pub fn eigenvalue_deviation_table(
    ns: &[usize],
    r: f64,
    k_max: usize,
) -> Result<Vec<DeviationRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidConfiguration(
            "deviation table needs at least one dimension".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let table = EigenTable::compute(n, r, k_max)?;
        let mut dev: f64 = 0.0;
        let mut rk = 1.0;
        for k in 0..=k_max {
            dev = dev.max((table.mu(k) - rk).abs());
            rk *= r;
        }
        rows.push(DeviationRow {
            n,
            max_abs_deviation: dev,
        });
    }
    Ok(rows)
}
