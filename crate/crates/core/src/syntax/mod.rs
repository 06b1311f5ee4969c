//! Tokens, syntax tree and canonical printing.

pub mod ast;
pub mod print;
pub mod token;

pub use ast::*;
pub use print::{pretty_print, symbol_text};
pub use token::{tokenize, tokenize_lossy, LexError, Token, TokenKind};
