//! Script front end for the workbench: a small declarative language for
//! algebras, morphisms, and attachment stages, an interpreter that turns
//! commands into check reports, and JSON/DOT emitters.

pub mod dsl;
pub mod emit;
pub mod runner;
