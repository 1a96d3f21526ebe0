//! Numerical laboratory for correlation and containment experiments on the
//! unit sphere S^{n-1} in R^n.
//!
//! Layers, bottom up:
//!
//! * [`stream`] / [`mc`]: reproducible ChaCha streams and a chunked Monte
//!   Carlo driver whose results are bit-identical at any worker count;
//! * [`geometry`]: validated unit vectors, the uniform sampler, the
//!   fixed-inner-product slice sampler, Gram-prescribed tuple sampling, and
//!   link projection;
//! * [`spectral`]: the averaging operator A_r that conditions on x·y = r, its
//!   normalized Gegenbauer eigenvalues, the Poisson semigroup, entropy,
//!   Dirichlet forms, and quasi-norms;
//! * [`regions`]: cap/band region trees with exact single-axis measures and
//!   Monte Carlo fallback;
//! * [`constants`]: the recursive link constants attached to an inductive
//!   configuration;
//! * [`harness`]: end-to-end Monte Carlo experiments with bound-annotated
//!   reports;
//! * [`acceptance`]: the pinned-seed verification suite used by tests and by
//!   the CLI `verify` subcommand.

mod error;

pub mod acceptance;
pub mod constants;
pub mod geometry;
pub mod harness;
pub mod mc;
pub mod regions;
pub mod spectral;
pub mod stream;

pub use error::{Error, Result};
