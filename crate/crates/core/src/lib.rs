//! Exact jet-space calculus for PDE systems.
//!
//! The crate works over ℚ with canonical rational expressions in jet
//! coordinates ([`expr`]). On top of that it provides total derivatives and
//! evolutionary derivations ([`jet`]), solved-form systems with reduction to
//! the infinite prolongation ([`system`]), C-differential operators
//! ([`linear`]), higher symmetries and recursion operators ([`symmetry`]),
//! conservation-law generating functions ([`conservation`]) and coverings
//! ([`covering`]).

pub mod conservation;
pub mod context;
pub mod covering;
pub mod error;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod linear;
pub mod parallel;
pub mod symmetry;
pub mod system;
pub mod textfile;

pub use context::JetContext;
pub use error::{Error, Result};
pub use expr::{parse, Coordinate, JetExpr, MultiIndex, Rational};
pub use jet::{evolutionary_derivation, total_derivative, total_derivative_multi, GeneratingFunction};
pub use linear::{CDiffOp, Domain, OpEntry};
pub use parallel::Parallelism;
pub use system::PdeSystem;
