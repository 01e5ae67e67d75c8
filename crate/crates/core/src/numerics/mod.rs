//! Minimal numerical substrate: dense matrices, CSR sparse matrices, the
//! elementwise ops and masked loss used by the regressor, and Adam.
//!
//! Everything is 64-bit; any op that produces NaN/Inf reports an error
//! instead of letting contamination spread.

mod adam;
mod dense;
mod ops;
mod sparse;

pub use adam::{adam_step, AdamParams, AdamState};
pub use dense::DenseMatrix;
pub use ops::{dropout, dropout_backward, masked_mse, relu, relu_backward};
pub use sparse::CsrMatrix;
