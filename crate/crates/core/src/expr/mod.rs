//! Exact expression kernel: coordinates, canonical rational expressions over
//! ℚ, parsing and printing.

mod coord;
mod jet_expr;
mod multi_index;
mod parse;
mod poly;
mod print;

pub use coord::Coordinate;
pub use jet_expr::JetExpr;
pub use multi_index::MultiIndex;
pub use parse::parse;
pub use poly::{Monomial, Poly};
pub use print::Display;

/// Exact scalar field.
pub type Rational = num_rational::BigRational;

/// `p/q` as a [`Rational`].
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}
