//! Classification, exact counting and verified gadget reductions for
//! complex-weighted Boolean #CSP with free unary constraints.

pub mod approx;
pub mod classify;
pub mod complex;
pub mod constraint;
pub mod construct;
pub mod ed_solver;
pub mod error;
pub mod frame;
pub mod io;
pub mod reductions;
mod par;
pub mod structure;

pub use complex::ComplexRat;
pub use constraint::{Constraint, Relation, SymmetricSpec};
pub use error::{Error, Result};
