//! Script language: lexer, syntax tree, parser, and canonical printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::Script;
pub use parser::parse;
pub use printer::print_script;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, col {col}: unexpected character `{ch}`")]
    BadChar { line: usize, col: usize, ch: char },
    #[error("line {line}, col {col}: number `{text}` is out of range")]
    BadNumber { line: usize, col: usize, text: String },
    #[error("line {line}, col {col}: expected {}; found {found}", expected.join(" or "))]
    Expected { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("line {line}, col {col}: name `{name}` has not been declared")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("line {line}, col {col}: name `{name}` is already declared")]
    Redeclared { line: usize, col: usize, name: String },
    #[error("line {line}, col {col}: `{name}` is reserved and cannot be declared")]
    Reserved { line: usize, col: usize, name: String },
    #[error("line {line}, col {col}: expression nested too deeply")]
    TooDeep { line: usize, col: usize },
}
