//! Lexer, parser and validity check for the supported Solidity subset.

pub mod ast;
pub mod dump;
pub mod lexer;
pub mod parser;
pub mod span;
pub mod validate;

pub use ast::*;
pub use lexer::{reassemble, tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_members, parse_statements, ParseError, SyntaxError};
pub use span::{LineMap, OutOfRange, Span};
pub use validate::{validate, validate_bytes, Diagnostic};

/// 1-based line containing `offset` in `unit`.
pub fn line_of(unit: &SourceUnit, offset: usize) -> Result<usize, OutOfRange> {
    unit.line_of(offset)
}
