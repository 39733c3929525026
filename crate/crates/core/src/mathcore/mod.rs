//! Numeric primitives: quaternion algebra, special functions, quadrature.

pub mod quad;
pub mod quaternion;
pub mod special;

pub use quaternion::{quat_exp_polar, quat_mul, quat_polar, Quaternion, QuaternionPolar};
pub use special::{bessel_j0, bessel_j1, laguerre, ln_gamma, reg_inc_beta};
