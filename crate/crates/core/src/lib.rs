//! Sequence spaces over geometric (multiplicative) reals.
//!
//! Terms live in R(G), the positive reals with multiplicative arithmetic,
//! and are stored by their natural logarithm. On top of that sit the
//! geometric difference operator, Cesàro and de la Vallée-Poussin means,
//! statistical convergence, Orlicz-modular spaces and α-dual checks.

pub mod cli;
pub mod convergence;
pub mod diffops;
pub mod duals;
pub mod error;
pub mod geocore;
pub mod orlicz;
pub mod report;
pub mod selftest;
pub mod seqmodel;
pub mod verdict;

pub use error::{Error, Result};
pub use geocore::GeoNum;
pub use verdict::Verdict;
