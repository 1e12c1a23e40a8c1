//! Markov-algorithm interpreter: ordered, leftmost-first string rewriting
//! with stop rules.

mod alphabet;
mod engine;
mod parse;
mod rule;

use thiserror::Error;

pub use alphabet::{Alphabet, DEFAULT_STOP_MARKER};
pub use engine::{MarkovProgram, RunOutcome, RunStatus, TraceStep, DEFAULT_STEP_LIMIT};
pub use parse::{parse_program, ParseError};
pub use rule::{apply_rule_once, expand_schema, Rule, RuleSchema};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkovError {
    #[error("base alphabet must not be empty")]
    EmptyAlphabet,
    #[error("symbol `{0}` is declared more than once across base, aux and stop marker")]
    OverlappingAlphabet(char),
    #[error("symbol names must not be empty")]
    EmptySymbol,
    #[error("too many auxiliary symbols")]
    TooManySymbols,
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(char),
    #[error("the stop marker may not appear inside a rule")]
    StopMarkerInRule,
    #[error("variable `{0}` appears in the replacement but not in the pattern")]
    FreeOutputVariable(char),
    #[error("variable `{0}` has no domain")]
    UnboundVariable(char),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(char),
    #[error("variable domain symbol `{0}` is not in the base alphabet")]
    DomainOutsideBase(char),
    #[error("program must contain at least one rule")]
    EmptyProgram,
}

/// Appends the reverse of any string over `{a, b}` to itself.
pub const REVERSAL_PROGRAM: &str = "\
# w -> w reverse(w) over {a, b}
alphabet: ab
aux: αβ
vars: xy in ab
αx -> xαβx
βxy -> yβx
αβx -> xα
α -> .
-> α
";
