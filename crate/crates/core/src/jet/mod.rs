//! Exact truncated power series ("jets") over the Gaussian rationals.
//!
//! Every jet carries a work order `K` (no stored term has degree above it)
//! and a [`Validity`]: either exact, or correct up to some degree `v`. The
//! calculus is conservative: sums and products take the minimum validity,
//! each derivative costs one order, inversion and substitution cap at `K`.

mod gauss;
mod index;
mod linalg;
mod matrix;
mod series;

pub use gauss::GaussianRational;
pub use index::{MultiIndex, Validity, Var, VarSig};
pub use linalg::{rank_at_zero, SpanTracker};
pub use matrix::{JetMatrix, MAX_DET_SIZE};
pub use series::Jet;
