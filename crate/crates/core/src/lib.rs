//! Evaluation and verification engine for harmonic-number summation
//! identities.
//!
//! The crate works with infinite series of the shape
//!
//! ```text
//! sum_{n} u(1, 1/2, ..., 1/n) / ( n^{s1} (n+1)^{s2} ... (n+k-1)^{sk} )
//! ```
//!
//! where `u` is a quasi-symmetric function.  Such series evaluate to
//! polynomials in multiple zeta values, and a large catalog of closed
//! forms from the Euler-sum literature can be checked against direct
//! numerical summation.  The main pieces:
//!
//! - [`composition`]: compositions, partitions, the duality involution
//!   on admissible compositions.
//! - [`qsym`]: the quasi-symmetric function algebra in the monomial
//!   basis, with exact rational coefficients, and the specialization
//!   `x_i -> 1/i`.
//! - [`powersum`]: polynomials expressing symmetric functions in the
//!   power sums (the numerators of the summation identities).
//! - [`mzv`]: formal polynomial expressions in zeta symbols and the
//!   standard rewrite rules (duality, sum/derivation aggregates,
//!   Euler's double-zeta reduction, height-one reduction, stuffle
//!   products).
//! - [`zeta_num`]: floating-point evaluation of multiple zeta values
//!   with a persistent cache.
//! - [`eta`]: symbolic evaluation of the series functionals
//!   `eta_{s1,...,sk}` on quasi-symmetric functions, partial-fraction
//!   reduction, and registered closed forms.
//! - [`series`]: direct numerical summation with log-power Richardson
//!   extrapolation.
//! - [`catalog`]: the identity registry and verification runner.
//! - [`audit`]: the boundary and sign audit with its evidence report.
//! - [`parse`]: text forms for compositions, eta exponent vectors,
//!   quasi-symmetric expressions and zeta expressions.

pub mod audit;
pub mod catalog;
pub mod composition;
pub mod error;
pub mod eta;
pub mod mzv;
pub mod parse;
pub mod powersum;
pub mod qsym;
pub mod rat;
pub mod series;
pub mod zeta_num;

pub use composition::{Composition, Partition};
pub use error::Error;
pub use eta::{EtaCombo, EtaResult, EtaSpec};
pub use mzv::{AggregateFlavor, AggregateSpec, MzvExpr};
pub use qsym::QSymElem;
pub use rat::Rat;
pub use series::{LhsDescriptor, NumericValue};
pub use zeta_num::MzvCache;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
