//! Prescribed-inner-product configurations.
//!
//! A [`GramSpec`] fixes the pairwise inner products of a k-tuple of unit
//! vectors. Sampling draws from the rotation-invariant measure on the tuple
//! set: factor R = Bᵀ B by a symmetrically pivoted Cholesky (rank-revealing,
//! so semidefinite specs work), draw a Haar-distributed orthonormal frame
//! F = (f_1 … f_m), and set x_i = F b_i. Haar frames come from the QR
//! factorization of a Gaussian matrix with the R-diagonal sign correction;
//! without the correction the Householder sign convention biases the frame.

use super::{norm, UnitVector, MIN_DIMENSION};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Eigenvalue floor below which a Gram candidate counts as indefinite.
pub const PSD_EIGEN_FLOOR: f64 = -1e-10;
/// Pivot threshold for rank detection in the semidefinite Cholesky.
const CHOLESKY_RANK_TOL: f64 = 1e-10;

/// Symmetric unit-diagonal matrix of prescribed inner products, validated to
/// be positive semidefinite (eigenvalue floor -1e-10) with off-diagonal
/// entries strictly inside (-1, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct GramSpec {
    entries: DMatrix<f64>,
}

impl GramSpec {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::MalformedGram("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::MalformedGram("matrix is not square".into()));
        }
        let entries = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
        Self::from_matrix(entries)
    }

    pub fn identity(k: usize) -> Self {
        Self {
            entries: DMatrix::identity(k, k),
        }
    }

    fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let k = entries.nrows();
        for i in 0..k {
            if (entries[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::MalformedGram(format!(
                    "diagonal entry ({i},{i}) = {} is not 1",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                let v = entries[(i, j)];
                if !v.is_finite() || (v - entries[(j, i)]).abs() > 1e-12 {
                    return Err(Error::MalformedGram(format!(
                        "entries ({i},{j}) and ({j},{i}) are not symmetric"
                    )));
                }
                if v.abs() >= 1.0 {
                    return Err(Error::MalformedGram(format!(
                        "off-diagonal entry ({i},{j}) = {v} is not inside (-1, 1)"
                    )));
                }
            }
        }
        let min_eig = entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_EIGEN_FLOOR {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { entries })
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Inductive configuration (r_1, …, r_{k-1}): the k-point spec whose Gram
/// matrix has entry (i, j) = r_{min(i,j)} off the diagonal (1-indexed). Every
/// r_i must lie in (-1, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InductiveConfigurationRaw")]
pub struct InductiveConfiguration {
    r_values: Vec<f64>,
}

#[derive(Deserialize)]
struct InductiveConfigurationRaw {
    r_values: Vec<f64>,
}

impl TryFrom<InductiveConfigurationRaw> for InductiveConfiguration {
    type Error = Error;

    fn try_from(raw: InductiveConfigurationRaw) -> Result<Self> {
        Self::new(raw.r_values)
    }
}

impl InductiveConfiguration {
    pub fn new(r_values: Vec<f64>) -> Result<Self> {
        if r_values.is_empty() {
            return Err(Error::InvalidConfiguration(
                "at least one r value is required (k >= 2)".into(),
            ));
        }
        for (i, &r) in r_values.iter().enumerate() {
            if !(r > -1.0 && r < 1.0) {
                return Err(Error::InvalidConfiguration(format!(
                    "r_{} = {r} is outside (-1, 1)",
                    i + 1
                )));
            }
        }
        Ok(Self { r_values })
    }

    /// k-point simplex configuration: every r_i equal to `r`.
    pub fn simplex(k: usize, r: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfiguration(format!(
                "a configuration needs k >= 2 points, got {k}"
            )));
        }
        Self::new(vec![r; k - 1])
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    /// Number of points k.
    pub fn k(&self) -> usize {
        self.r_values.len() + 1
    }

    /// Expand to the banded Gram matrix and validate it (signals inconsistent
    /// r values through the positive-semidefinite check).
    pub fn gram(&self) -> Result<GramSpec> {
        let k = self.k();
        let entries = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                1.0
            } else {
                self.r_values[i.min(j)]
            }
        });
        GramSpec::from_matrix(entries)
    }
}

/// Symmetrically pivoted Cholesky for positive semidefinite matrices.
/// Returns (perm, L, rank) with A[perm[i]][perm[j]] = Σ_m L[i][m]·L[j][m];
/// only the first `rank` columns of L are populated.
fn pivoted_cholesky(a: &DMatrix<f64>) -> Result<(Vec<usize>, DMatrix<f64>, usize)> {
    let k = a.nrows();
    let mut a = a.clone();
    let mut l = DMatrix::<f64>::zeros(k, k);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rank = k;
    for j in 0..k {
        let (mut pivot, mut dmax) = (j, a[(j, j)]);
        for i in (j + 1)..k {
            if a[(i, i)] > dmax {
                pivot = i;
                dmax = a[(i, i)];
            }
        }
        if dmax <= CHOLESKY_RANK_TOL {
            if dmax < -1e-8 {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: dmax,
                });
            }
            rank = j;
            break;
        }
        if pivot != j {
            a.swap_rows(j, pivot);
            a.swap_columns(j, pivot);
            l.swap_rows(j, pivot);
            perm.swap(j, pivot);
        }
        let d = dmax.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..k {
            l[(i, j)] = a[(i, j)] / d;
        }
        for i in (j + 1)..k {
            for m in (j + 1)..=i {
                let update = l[(i, j)] * l[(m, j)];
                a[(i, m)] -= update;
                a[(m, i)] = a[(i, m)];
            }
        }
    }
    Ok((perm, l, rank))
}

/// Haar-distributed orthonormal m-frame in R^n, as column vectors: QR of an
/// n x m Gaussian matrix with each column of Q rescaled by the sign of the
/// matching R diagonal entry (the unique positive-diagonal QR factor).
pub(crate) fn haar_columns<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(m <= n && m > 0);
    loop {
        let g = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        let mut degenerate = false;
        for j in 0..m {
            let d = r[(j, j)];
            if d == 0.0 {
                degenerate = true;
                break;
            }
            if d < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if !degenerate {
            return q;
        }
    }
}

/// Draw a k-tuple (x_1, …, x_k) on S^{n-1} with pairwise inner products given
/// by `gram`, distributed according to the rotation-invariant measure on the
/// tuple set.
pub fn sample_configuration<R: Rng + ?Sized>(
    n: usize,
    gram: &GramSpec,
    rng: &mut R,
) -> Result<Vec<UnitVector>> {
    if n < MIN_DIMENSION {
        return Err(Error::DimensionTooSmall(n));
    }
    let k = gram.k();
    if k > n {
        return Err(Error::TooManyPoints { points: k, dim: n });
    }
    let (perm, l, rank) = pivoted_cholesky(gram.matrix())?;
    let rank = rank.max(1); // unit diagonal guarantees rank >= 1
    let frame = haar_columns(n, rank, rng);
    let mut points = vec![Vec::new(); k];
    for (pos, &original) in perm.iter().enumerate() {
        // b for the point at permuted position `pos` is row `pos` of L.
        let mut x = vec![0.0; n];
        for m in 0..rank {
            let b = l[(pos, m)];
            if b != 0.0 {
                for i in 0..n {
                    x[i] += b * frame[(i, m)];
                }
            }
        }
        let len = norm(&x);
        for c in x.iter_mut() {
            *c /= len;
        }
        points[original] = x;
    }
    Ok(points
        .into_iter()
        .map(UnitVector::from_normalized)
        .collect())
}
