//! CL12: proof objects, rule checking, the Stability oracle and bounded search.

pub mod check;
pub mod models;
pub mod proof;
pub mod prover;
pub mod search;

pub use check::{check_proof, CheckOptions, Checker, Report};
pub use proof::{parse_proof, Evidence, Line, Proof, Rule};
pub use prover::{Certificate, Validity};
pub use search::{search, Budget};
