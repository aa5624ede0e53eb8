//! Classification of exact elliptic generators of quantum Markov semigroups
//! on full matrix algebras.

pub mod algebra;
pub mod cli;
pub mod cohomology;
pub mod error;
pub mod fixtures;
pub mod forms;
pub mod generators;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod semigroup;

pub use algebra::{StateAlgebra, Superoperator, Tolerances};
pub use error::{Error, Result};
