// Negated float comparisons are used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mathcore;

pub use error::{Error, Result};
pub mod cli;
pub mod estimators;
pub mod io;
pub mod synth;
pub mod transform;
pub mod validator;
pub mod wavelets;
