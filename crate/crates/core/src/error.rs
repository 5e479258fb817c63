use alloc::string::String;
use core::fmt;

use crate::model::{DialogType, QuestionId};

/// Violations of the expression invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("{0} has no terms")]
    EmptyTerms(DialogType),
    #[error("question `{0}` appears more than once")]
    DuplicateQuestion(QuestionId),
    #[error("nesting violation: {numerator} {reason}")]
    Nesting {
        numerator: DialogType,
        reason: &'static str,
    },
    #[error("a specification needs at least one expression")]
    EmptyUnion,
    #[error("union members range over different question sets")]
    MixedQuestionSets,
}

/// Violations of the enumerated-specification invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("question listed twice in the question order")]
    DuplicateQuestion,
    #[error("a specification needs at least one episode")]
    NoEpisodes,
    #[error("question `{0}` answered twice within one episode")]
    OverlappingUtterances(QuestionId),
    #[error("episodes do not all cover the same question set")]
    InconsistentCoverage,
}

/// Byte offset plus 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown type tag `{0}`")]
    UnknownTag(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("duplicate domain for `{0}`")]
    DuplicateDomain(QuestionId),
    #[error("domain for `{0}` is empty")]
    EmptyDomain(QuestionId),
}

/// A parse failure with the position it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Position,
}

/// Failures of the enumeration semantics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerateError {
    /// A term that must be answered in one utterance admits no such episode.
    #[error("term {0} cannot be answered in a single utterance")]
    CollapseUndefined(String),
    #[error("{what} exceeds the size guard of {limit}")]
    TooLarge { what: &'static str, limit: usize },
}
