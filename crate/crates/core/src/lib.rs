//! Specification, enumeration, rewriting, mining and staging of
//! mixed-initiative dialogs in which a user may answer forthcoming questions
//! early (unsolicited reporting).
//!
//! A dialog is written as a numerator (a dialog type such as `C` or `PE*`)
//! over an ordered list of questions or nested sub-dialogs. The crate expands
//! such expressions into the explicit set of permitted episodes, compresses
//! episode sets back into expressions, and drives live sessions that accept
//! exactly the episodes a specification permits by partially evaluating a
//! script one utterance at a time.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counting;
pub mod enumerate;
pub mod error;
pub mod mine;
pub mod model;
pub mod peval;
pub mod rewrite;
pub mod stager;
pub mod text;

pub use enumerate::{enumerate, enumerate_union};
pub use error::{EnumerateError, ExprError, ParseError, ParseErrorKind, Position, SpecError};
pub use model::{
    AbstractUtterance, DialogExpr, DialogType, Domains, EnumeratedSpec, Episode, QuestionId,
    Response, ResponseDomain, SpecUnion, Term,
};
pub use text::{parse_domains, parse_episodes, parse_spec, render_spec};
