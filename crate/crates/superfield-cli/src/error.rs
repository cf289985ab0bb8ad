use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("parity error: {0}")]
    Parity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Math(superfield::Error),
}

impl From<superfield::Error> for CliError {
    fn from(e: superfield::Error) -> CliError {
        match e {
            superfield::Error::Parity(m) => CliError::Parity(m),
            other => CliError::Math(other),
        }
    }
}

impl CliError {
    pub fn parse(pos: Pos, msg: impl Into<String>) -> CliError {
        CliError::Parse { line: pos.line, col: pos.col, msg: msg.into() }
    }

    /// 1 when the input was well formed but a mathematical precondition
    /// failed, 2 for parse and configuration problems.
    pub fn exit_code(&self) -> i32 {
        use superfield::Error as E;
        match self {
            CliError::Math(
                E::NotInvertible(_)
                | E::NotSuperconformal(_)
                | E::SingularJet
                | E::SingularOddBlock
                | E::NonNilpotentAtOrder
                | E::MissingStructureConstant(..),
            ) => 1,
            _ => 2,
        }
    }
}

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

pub type Result<T> = std::result::Result<T, CliError>;
