//! Learning definite logic programs with lazily bound constants.

pub mod bench;
pub mod constraints;
pub mod engine;
pub mod generate;
pub mod interp;
pub mod logic;
pub mod magic;
pub mod taskio;
