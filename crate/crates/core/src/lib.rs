//! Finite sections of operators between `ℓp` spaces.
//!
//! The crate builds the concrete operators (Hadamard blocks, Rademacher
//! systems, block-diagonal sums), brackets their `p → q` norms, and checks the
//! quantitative inequalities that separate the ideals they generate.

pub mod bounds;
pub mod constructions;
pub mod error;
pub mod functionals;
pub mod json;
pub mod khintchine;
pub mod lp;
pub mod matrix;
pub mod operator;
pub mod opnorm;
pub mod report;
pub mod rng;
pub mod space;

pub use error::{Error, ErrorClass, Result};
pub use lp::Exponent;
pub use matrix::Matrix;
pub use operator::BlockOperator;

pub use report::BoundReport;
pub use space::{Block, BlockSpace};
