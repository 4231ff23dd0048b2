// Quadrature nodes are kept at their published precision, and `!(x > 0.0)`
// is the idiom that also rejects NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fit;
pub mod lut;
pub mod model;
pub mod quad;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use model::{GgmParams, MismatchCell, QuantizedPmf, RateGradient};
pub use bounds::{BoundTable, BoundedParams};
