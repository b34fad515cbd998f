//! Spectral toolkit for vectorial Sturm-Liouville problems
//! `-phi'' + P(x) phi = lambda phi` on `[0, pi]` with Robin boundary matrices.
//!
//! Eigenvalues are located by counting zeros of the characteristic determinant
//! `det W(mu^2)` with the argument principle and refining them on the real axis;
//! the asymptotic law `sqrt(lambda) = n + a_k / n + o(1/n^2)` is modelled
//! separately and the two are cross-checked in [`verification`].

// NaN-rejecting comparisons are written as `!(x > y)` on purpose; index loops
// mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod error;
pub mod expr;
pub mod ivp;
pub mod linalg;
pub mod locator;
pub mod problem;
pub mod verification;
pub mod winding;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix, SymMatrix};
pub use problem::{PotentialKind, PotentialSpec, Problem};
