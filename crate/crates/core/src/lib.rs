#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod numeric;
pub mod weights;
pub mod par;
pub mod scan;
pub mod classify;
pub mod kernel;
pub mod criteria;
pub mod expweights;
pub mod projection;

pub use error::{Error, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
