//! Exact symbolic verification of generalized contact structures on line
//! bundles over rational-function charts.

pub mod atiyah;
pub mod error;
pub mod gcs;
pub mod hitchin;
pub mod homog;
pub mod imgroupoid;
pub mod report;
pub mod sample;
pub mod symkernel;

pub use error::{Error, Result};
pub use symkernel::chart::{Chart, ChartMap};
pub use symkernel::expr::{parse_expr, parse_expr_in};
pub use symkernel::field::Field;
pub use symkernel::matrix::Matrix;
pub use symkernel::poly::{Monomial, Poly, Var};
pub use symkernel::ratfunc::RatFunc;
pub use symkernel::tensor::{KForm, Polyvector, TangentEndo, VectorField};

/// Exact rational scalars.
pub type Q = num_rational::BigRational;
/// Polynomials with rational coefficients.
pub type Polynomial = Poly<Q>;
/// Rational functions with rational coefficients.
pub type RationalExpr = RatFunc<Q>;
