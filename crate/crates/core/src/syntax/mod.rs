//! Abstract syntax for CL12/CLA4 formulas and sequents, with parsing, printing,
//! variable hygiene, elementarization and the sizebound side conditions.

pub mod ast;
pub mod bounds;
pub mod numeral;
pub mod occ;
pub mod parse;
pub mod print;

pub use ast::{fresh_var, Atom, BinOp, Formula, QuantOp, Sequent, Term};
pub use numeral::Numeral;
pub use occ::{get_at, replace_at, seq_get, seq_replace, seq_surface, surface_occurrences, Loc, OccPath, Side};
pub use parse::{parse_formula, parse_sequent, parse_term, ParseError};
pub use print::{formula_to_string, sequent_to_string, term_to_string};
