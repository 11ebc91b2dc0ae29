//! First-order primal infon logic.
//!
//! * [`syntax`]: formulas, sequents, parsing and printing.
//! * [`calculus`]: derivations, rule checking for the ten calculi, cut elimination.
//! * [`prover`]: cut-free proof search and countermodel extraction.
//! * [`semantics`]: quasi-boolean and Kripke models.
//! * [`transform`]: translations between the calculi.
//! * [`harness`]: disjunction-property checks, model generators, corpus runner.

pub mod calculus;
pub mod harness;
pub mod prover;
pub mod semantics;
pub mod syntax;
pub mod transform;
