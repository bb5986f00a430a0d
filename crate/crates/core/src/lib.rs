//! Symbolic and numerical machinery for approximate Lie symmetries of
//! ordinary differential equations with a small parameter.

pub mod detsolve;
pub mod error;
pub mod jet;
pub mod numverify;
pub mod parser;
pub mod symexpr;

pub use error::{Error, Result};
