use thiserror::Error;

use super::sexpr::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported feature `{construct}` at {line}:{col}")]
    Unsupported { construct: String, line: usize, col: usize },
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("type mismatch in `{context}`: `{arg}` is not of type `{expected}`")]
    TypeMismatch { context: String, arg: String, expected: String },
    #[error("problem targets domain `{found}`, but domain `{expected}` was supplied")]
    DomainMismatch { expected: String, found: String },
    #[error("variable `?{name}` is not a parameter of `{context}`")]
    UnboundVariable { name: String, context: String },
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
    }

    pub(crate) fn unsupported(pos: Pos, construct: impl Into<String>) -> Self {
        PddlError::Unsupported { construct: construct.into(), line: pos.line, col: pos.col }
    }
}
