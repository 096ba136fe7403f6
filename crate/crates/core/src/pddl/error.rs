use thiserror::Error;

use super::sexpr::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("undeclared {what} `{name}`")]
    Undeclared { what: &'static str, name: String },
    #[error("predicate `{name}` expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown constraint kind `{0}`")]
    UnknownConstraintKind(String),
    #[error("unbound variable `?{0}`")]
    UnboundVariable(String),
}

/// A parse diagnostic with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }

    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::new(pos, ParseErrorKind::Syntax(msg.into()))
    }

    pub(crate) fn unsupported(pos: Pos, what: impl Into<String>) -> Self {
        ParseError::new(pos, ParseErrorKind::Unsupported(what.into()))
    }
}
