use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid position {position} in term {term}")]
    InvalidPosition { position: String, term: String },

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol `{symbol}` has arity {expected}, found {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate symbol `{0}` in signature")]
    DuplicateSymbol(String),

    #[error("signature has no constant symbol, so no ground term exists")]
    NoConstant,

    #[error("symbol `{symbol}` has arity {arity}; automata require arity at most 2")]
    ArityTooLarge { symbol: String, arity: usize },

    #[error("nondeterministic transitions: {0}")]
    Nondeterministic(String),

    #[error("automata are over incompatible signatures")]
    SignatureMismatch,

    #[error("unknown state {0}")]
    UnknownState(String),

    #[error("automaton has no accepting set")]
    MissingAccepting,

    #[error("variable `{0}` has no constraint")]
    UnconstrainedVariable(String),

    #[error("undefined state while annotating {0}")]
    UndefinedState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceLimit { what: String, limit: usize },

    #[error("line {line}: {source}")]
    At { line: usize, source: Box<Error> },

    #[error("internal invariant broken: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn limit(what: impl Into<String>, limit: usize) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            limit,
        }
    }

    pub(crate) fn at(self, line: usize) -> Self {
        match self {
            Error::Syntax { .. } | Error::At { .. } => self,
            e => Error::At {
                line,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
