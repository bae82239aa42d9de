//! Spherical harmonics on the hyperboloid `S^{1,q}` and Legendre functions
//! of arbitrary complex degree.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: the indefinite product of signature `(p,q)`, the positive
//!   cone, the hyperboloid, isotropic vectors and the compact stabilizer `K`.
//! * [`harmonics`]: plane-wave harmonics `(c·x)^ρ`, homogeneous extensions and
//!   finite-difference gradient, Laplacian and Laplace-Beltrami operators.
//! * [`spherical`]: the K-average `P_ρ(x₁)` by quadrature, the Laplace
//!   integral for `P_ρ(x)`, and a Monte-Carlo sphere-average oracle.
//! * [`ode_oracle`]: the radial ODE residual, indicial roots at `x₁ = 1`, and a
//!   Frobenius series solution that needs no quadrature.
//! * [`verify`]: seeded verification suites producing auditable reports.

// `!(a <= b)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degree;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod ode_oracle;
pub mod quadrature;
pub mod spherical;
pub mod verify;

pub use degree::Degree;
pub use error::{Error, Result};
pub use geometry::{PseudoVector, Signature};
pub use harmonics::{FdConfig, PlaneWave};
pub use ode_oracle::{OdeParams, SeriesSolution};
pub use spherical::{Evaluation, McEvaluation, QuadratureConfig};

pub use num_complex::Complex64;
