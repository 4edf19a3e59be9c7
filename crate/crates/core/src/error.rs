use thiserror::Error;

use crate::frontend::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {message}")]
    Parse {
        line: u32,
        col: u32,
        message: String,
    },

    #[error("unbound variable `{0}`")]
    Unbound(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("exponent atoms differ between power values")]
    AtomMismatch,

    #[error("invalid universe [{lo}..{hi}]")]
    Universe { lo: i64, hi: i64 },

    #[error("analysis did not converge within {0} node visits")]
    VisitCap(usize),
}

impl Error {
    pub fn parse(pos: Pos, message: impl Into<String>) -> Self {
        Error::Parse {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
