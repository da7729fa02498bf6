//! C subset front end: lexer, parser, printer, interpreter and diff.

pub mod ast;
pub mod diff;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod visit;

pub use ast::{AnnotatedAst, NodeId};
pub use error::ParseError;
pub use parser::parse_c;
pub use printer::print_c;
