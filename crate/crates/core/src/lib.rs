//! A symbolic kernel for many-to-one computads.
//!
//! Cells are canonical normal-form terms ([`cell::Cell`]); equality of cells
//! is structural equality. On top of the cell engine sit two term languages
//! ([`term`]), a proof checker and a bounded provability oracle
//! ([`deduction`]), and the multitopic-set view of a presentation
//! ([`multitopic`]).

pub mod cell;
pub mod deduction;
pub mod enumerate;
pub mod laws;
pub mod multitopic;
pub mod presentation;
pub mod term;

pub use cell::{Cell, CellError, Kind, ProvenancePair, Side};
pub use presentation::{parse_presentation, Presentation};
