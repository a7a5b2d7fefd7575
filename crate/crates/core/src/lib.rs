//! Natural deduction for purely implicational minimal logic: tree-like and
//! dag-like proofs, horizontal compression with certification, a cutfree
//! sequent prover, and a Hamiltonian-path encoding pipeline.

pub mod bench;
pub mod compress;
pub mod dag;
pub mod dot;
pub mod encode;
pub mod error;
pub mod formula;
pub mod full;
pub mod gen;
pub mod lm;
pub mod parse;
pub mod tree;

pub use error::{Error, Result};
pub use formula::{Formula, Sequent, Shape, Var};
pub use full::FullFormula;
