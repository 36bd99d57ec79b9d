pub mod constraints;
pub mod decider;
pub mod determine;
pub mod dta;
pub mod encoding;
pub mod error;
pub mod formula;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod subsume;
pub mod term;

pub use dta::{Dta, LanguageSampler, StateId, StateLabel};
pub use encoding::{BinaryEncoding, RawDta};
pub use error::{Error, Result};
pub use term::{Position, Signature, Substitution, SymbolId, Term, Var, VarTable};
