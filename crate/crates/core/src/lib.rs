//! Symbolic and finite-dimensional workbench for noncommutative CW
//! complexes: build algebra and morphism expressions, discretize them to
//! block algebras over grids, and machine-check the structural identities
//! (pullback universality, exact rows, homotopies, cofiber sequences).

pub mod approx;
pub mod check;
pub mod complex;
pub mod corpus;
pub mod discretize;
pub mod expr;
pub mod fdalg;
pub mod linalg;
pub mod puppe;
pub mod seeds;
