//! Asymptotic analysis of generalized eigenvectors of unbounded Jacobi matrices.
//!
//! A Jacobi matrix is fixed by an off-diagonal sequence `a_n > 0` and a diagonal
//! sequence `b_n`. This crate evaluates the three-term recurrence with overflow-safe
//! rescaling, classifies the coefficient sequence into the regular or the critical
//! regime, tests non-degeneracy of the associated quadratic forms, computes the
//! endpoints of the potential spectral gap in the critical regime, and tracks the
//! Turán-type trace `S_n` whose convergence drives the `1/a_n` sandwich bounds.
//!
//! Module map:
//!
//! * [`linalg`]: 2×2 matrices, symmetrization, discriminant, descending products.
//! * [`chebyshev`]: Chebyshev polynomials of the second kind and their identities.
//! * [`sequences`]: coefficient families and the self-adjointness (Carleman) test.
//! * [`variation`]: truncated total `N`-variation diagnostics.
//! * [`eigensolve`]: transfer matrices, eigenvector and polynomial recurrences.
//! * [`regular`]: limits `q_j`, `r_j`, the product `F` and its non-degeneracy.
//! * [`critical`]: the matrices `C_j`, the gap quadratic and sandwich checks.
//! * [`regime`]: regular / degenerate / critical classification.
//! * [`turan`]: the trace `S_n`, limit profiles and the non-subordinacy ratio.

pub mod chebyshev;
pub mod critical;
pub mod eigensolve;
mod error;
pub mod linalg;
pub mod regime;
pub mod regular;
pub mod sequences;
pub mod sum;
pub mod tolerance;
pub mod turan;
pub mod variation;

pub use error::{Error, Result};
pub use linalg::{Mat2, QuadForm};
pub use sequences::{FamilySpec, JacobiCoefficients};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
