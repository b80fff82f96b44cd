//! Source language: lexer, parser, labeled AST and static queries.

pub mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::{BinOp, Label, Node, Program, StaticQueryError, Sym};
pub use parser::parse_program;
pub use pretty::pretty_print;

/// Errors raised while turning source text into a validated `Program`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Validation(String),
}

impl SyntaxError {
    pub(crate) fn at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        SyntaxError::Parse { line, col, msg: msg.into() }
    }
}
