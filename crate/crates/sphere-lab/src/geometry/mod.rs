//! Exact geometry on the unit sphere S^{n-1} in R^n: validated unit vectors,
//! the uniform sampler, the constrained sampler on the slice
//! S_{x,r} = { y : x·y = r }, and the link projection that maps a tuple with
//! prescribed inner products down to the orthogonal complement of its first
//! point.
//!
//! All samplers draw from caller-provided generators (see
//! [`crate::stream::RandomStream`]) and are safe to run concurrently as long
//! as each worker holds its own stream.

mod gram;

pub use gram::{sample_configuration, GramSpec, InductiveConfiguration};

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Smallest ambient dimension the sphere operations accept.
pub const MIN_DIMENSION: usize = 3;
/// Norm slack tolerated by [`UnitVector::new`].
pub const NORM_TOL: f64 = 1e-12;

/// A point on S^{n-1}: a vector of length n >= 3 with unit Euclidean norm
/// (within [`NORM_TOL`]). Serializes as a bare coordinate array; parsing
/// re-validates the norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.coords
    }
}

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < MIN_DIMENSION {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let norm = norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(Self { coords })
    }

    /// Standard basis vector e_i embedded in S^{n-1}.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if n < MIN_DIMENSION {
            return Err(Error::DimensionTooSmall(n));
        }
        if i >= n {
            return Err(Error::DimensionMismatch { expected: n, got: i });
        }
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        Ok(Self { coords })
    }

    /// Internal constructor for vectors that are normalized by construction.
    fn from_normalized(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= MIN_DIMENSION);
        debug_assert!((norm(&coords) - 1.0).abs() <= 1e-9);
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        dot(&self.coords, other.coords())
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Draw a uniform point on S^{n-1} by normalizing an isotropic Gaussian.
/// A zero draw (probability zero, but handled) is redrawn.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitVector> {
    if n < MIN_DIMENSION {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut v = vec![0.0; n];
    loop {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let len = norm(&v);
        if len > 1e-150 {
            for c in v.iter_mut() {
                *c /= len;
            }
            return Ok(UnitVector::from_normalized(v));
        }
    }
}

/// Draw y uniformly on the slice S_{x,r} = { y : x·y = r }: a Gaussian is
/// projected onto the orthogonal complement of `x`, normalized to a direction
/// z, and the result is y = r·x + sqrt(1-r^2)·z.
///
/// Requires r in (-1, 1). The output satisfies x·y = r and |y| = 1 to within
/// 1e-12.
pub fn sample_subsphere<R: Rng + ?Sized>(
    x: &UnitVector,
    r: f64,
    rng: &mut R,
) -> Result<UnitVector> {
    if !(r > -1.0 && r < 1.0) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "(-1, 1)",
        });
    }
    let n = x.dim();
    let s = (1.0 - r * r).sqrt();
    let mut g = vec![0.0; n];
    loop {
        for c in g.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let along = dot(&g, x.coords());
        for (c, xc) in g.iter_mut().zip(x.coords()) {
            *c -= along * xc;
        }
        let len = norm(&g);
        if len <= 1e-150 {
            continue;
        }
        let mut y: Vec<f64> = g
            .iter()
            .zip(x.coords())
            .map(|(zc, xc)| r * xc + s * (zc / len))
            .collect();
        let ylen = norm(&y);
        for c in y.iter_mut() {
            *c /= ylen;
        }
        return Ok(UnitVector::from_normalized(y));
    }
}

/// Project `xi` into the link of `x1`: y = (xi - c·x1)/|xi - c·x1| where c is
/// the declared inner product x1·xi. The output is a unit vector orthogonal
/// to `x1`.
///
/// Errors: |c| >= 1 (degenerate link), mismatch between c and the actual
/// inner product beyond 1e-8, or a residual shorter than 1e-14.
pub fn project_to_link(x1: &UnitVector, xi: &UnitVector, c: f64) -> Result<UnitVector> {
    if x1.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: x1.dim(),
            got: xi.dim(),
        });
    }
    if !(c > -1.0 && c < 1.0) {
        return Err(Error::DegenerateLink(c.abs()));
    }
    let actual = x1.dot(xi);
    if (actual - c).abs() > 1e-8 {
        return Err(Error::LinkMismatch {
            expected: c,
            got: actual,
        });
    }
    let w: Vec<f64> = xi
        .coords()
        .iter()
        .zip(x1.coords())
        .map(|(a, b)| a - c * b)
        .collect();
    let len = norm(&w);
    if len < 1e-14 {
        return Err(Error::LinkResidualVanishes(len));
    }
    Ok(UnitVector::from_normalized(
        w.into_iter().map(|v| v / len).collect(),
    ))
}


#[cfg(test)]
mod tests {
    use super::testkit::{ks_critical, ks_statistic};
    use super::*;
    use crate::stream::RandomStream;

    #[test]
    fn unit_vector_rejects_bad_inputs() {
        assert!(matches!(
            UnitVector::new(vec![1.0, 0.0]),
            Err(Error::DimensionTooSmall(2))
        ));
        assert!(matches!(
            UnitVector::new(vec![1.0, 1.0, 0.0]),
            Err(Error::NotUnitNorm(_))
        ));
        assert!(UnitVector::new(vec![0.6, 0.8, 0.0]).is_ok());
    }

    #[test]
    fn sampler_is_deterministic_per_stream() {
        let mut r1 = RandomStream::with_index(5, 11).rng();
        let mut r2 = RandomStream::with_index(5, 11).rng();
        let a = sample_uniform(16, &mut r1).unwrap();
        let b = sample_uniform(16, &mut r2).unwrap();
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn uniform_first_coordinate_moments() {
        // E[x_1] = 0 and E[x_1^2] = 1/n, each within 4 standard errors.
        let n = 10;
        let draws = 1_000_000u64;
        let mut rng = RandomStream::new(2024).rng();
        let mut mean = crate::mc::MeanVar::default();
        let mut meansq = crate::mc::MeanVar::default();
        for _ in 0..draws {
            let x = sample_uniform(n, &mut rng).unwrap();
            mean.push(x.coords()[0]);
            meansq.push(x.coords()[0] * x.coords()[0]);
        }
        assert!(mean.mean().abs() <= 4.0 * mean.std_error());
        assert!((meansq.mean() - 1.0 / n as f64).abs() <= 4.0 * meansq.std_error());
    }

    #[test]
    fn subsphere_satisfies_constraints() {
        let mut rng = RandomStream::new(7).rng();
        for &r in &[0.0, 0.5, -0.73] {
            let x = sample_uniform(40, &mut rng).unwrap();
            for _ in 0..200 {
                let y = sample_subsphere(&x, r, &mut rng).unwrap();
                assert!((x.dot(&y) - r).abs() <= 1e-12);
                assert!((norm(y.coords()) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn subsphere_rejects_degenerate_r() {
        let mut rng = RandomStream::new(7).rng();
        let x = sample_uniform(5, &mut rng).unwrap();
        assert!(sample_subsphere(&x, 1.0, &mut rng).is_err());
        assert!(sample_subsphere(&x, -1.0, &mut rng).is_err());
    }

    #[test]
    fn subsphere_marginal_matches_link_sphere_law() {
        // For w orthogonal to x, the law of y·w under y ~ S_{x,r} equals
        // sqrt(1-r^2) times the first coordinate of a uniform point on
        // S^{n-2}. Two-sample KS test at significance 0.01.
        let n = 8;
        let r = 0.3;
        let m = 4000;
        let mut rng = RandomStream::new(31).rng();
        let x = sample_uniform(n, &mut rng).unwrap();
        // fixed direction orthogonal to x
        let g = sample_uniform(n, &mut rng).unwrap();
        let w = project_to_link(&x, &g, x.dot(&g)).unwrap();

        let sample_a: Vec<f64> = (0..m)
            .map(|_| sample_subsphere(&x, r, &mut rng).unwrap().dot(&w))
            .collect();
        let s = (1.0 - r * r).sqrt();
        let sample_b: Vec<f64> = (0..m)
            .map(|_| s * sample_uniform(n - 1, &mut rng).unwrap().coords()[0])
            .collect();
        let d = ks_statistic(sample_a, sample_b);
        assert!(
            d < ks_critical(m, m, 0.01),
            "KS statistic {d} exceeds critical value"
        );
    }

    #[test]
    fn projection_is_orthonormal_to_base_point() {
        let mut rng = RandomStream::new(12).rng();
        let x1 = sample_uniform(25, &mut rng).unwrap();
        for _ in 0..50 {
            let xi = sample_subsphere(&x1, 0.42, &mut rng).unwrap();
            let y = project_to_link(&x1, &xi, 0.42).unwrap();
            assert!((norm(y.coords()) - 1.0).abs() <= 1e-12);
            assert!(y.dot(&x1).abs() <= 1e-10);
        }
    }

    #[test]
    fn projection_rejects_bad_links() {
        let mut rng = RandomStream::new(13).rng();
        let x1 = sample_uniform(12, &mut rng).unwrap();
        let xi = sample_subsphere(&x1, 0.4, &mut rng).unwrap();
        assert!(matches!(
            project_to_link(&x1, &xi, 1.0),
            Err(Error::DegenerateLink(_))
        ));
        assert!(matches!(
            project_to_link(&x1, &xi, 0.1),
            Err(Error::LinkMismatch { .. })
        ));
        // xi == x1 with c < 1 has a residual but mismatched inner product;
        // an exact antipode at declared c just below 1 shrinks the residual.
        let same = x1.clone();
        assert!(project_to_link(&x1, &same, 0.4).is_err());
    }
}
