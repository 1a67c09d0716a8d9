//! Positive definiteness of zonal kernels on compact two-point homogeneous
//! spaces: Jacobi expansions, certified coefficient transforms, Riesz
//! transition scans and kernel energies.

// Parameter checks are written as `!(x > bound)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod jacobi;
pub mod kernels;
pub mod posdef;
pub mod scalar;
pub mod spaces;
pub mod transform;

pub use error::{Error, Result};
pub use kernels::Kernel;
pub use scalar::{Qd, Real};
pub use spaces::Space;

/// Point-model zonal argument in double precision.
pub type ZonalArgF64 = kernels::ZonalArg<f64>;
/// Point-model zonal argument in double-double precision.
pub type ZonalArgQd = kernels::ZonalArg<Qd>;
/// Gauss–Jacobi rule in double precision.
pub type QuadratureRuleF64 = jacobi::QuadratureRule<f64>;
/// Gauss–Jacobi rule in double-double precision.
pub type QuadratureRuleQd = jacobi::QuadratureRule<Qd>;
