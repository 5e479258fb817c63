//! Scripts as data and their partial evaluation (`mix`).
//!
//! A [`Script`] stands for a function of its open slots. Mixing in a static
//! assignment fixes some of them and yields the residual script over the
//! rest, or a [`Completion`] once nothing is left open. Scripts are
//! immutable, so every stage stays available for undo.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Domains, QuestionId, Response, ResponseDomain};

/// A map of question to response, as supplied by one utterance.
pub type Bindings = BTreeMap<QuestionId, Response>;

/// Opaque completion token such as `retrieve-item`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(s: &str) -> Self {
        Action(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Action({})", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Script {
    slots: Vec<ResponseDomain>,
    action: Action,
    bound: Bindings,
}

/// Non-empty bindings applied in one `mix`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StaticAssignment(Bindings);

impl StaticAssignment {
    pub fn new(bindings: Bindings) -> Option<Self> {
        (!bindings.is_empty()).then_some(StaticAssignment(bindings))
    }

    pub fn bindings(&self) -> &Bindings {
        &self.0
    }

    pub fn keys(&self) -> BTreeSet<QuestionId> {
        self.0.keys().cloned().collect()
    }
}

impl FromIterator<(QuestionId, Response)> for StaticAssignment {
    /// Panics if the iterator is empty.
    fn from_iter<I: IntoIterator<Item = (QuestionId, Response)>>(iter: I) -> Self {
        StaticAssignment::new(iter.into_iter().collect()).expect("non-empty assignment")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Completion {
    pub action: Action,
    pub bindings: Bindings,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MixOutcome {
    Residual(Script),
    Complete(Completion),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("no domain for question {0}")]
    MissingDomain(QuestionId),
    #[error("duplicate slot {0}")]
    DuplicateSlot(QuestionId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MixError {
    #[error("{0} is not an open slot")]
    UnknownSlot(QuestionId),
    #[error("{response} is not a valid response to {question}")]
    DomainViolation {
        question: QuestionId,
        response: Response,
    },
    #[error("the script has no open slots")]
    NothingToApply,
    #[error("assignment leaves {0} open")]
    Incomplete(QuestionId),
}

pub fn make_script(
    questions: &[QuestionId],
    domains: &Domains,
    action: Action,
) -> Result<Script, ScriptError> {
    let mut seen = BTreeSet::new();
    let mut slots = Vec::with_capacity(questions.len());
    for x in questions {
        if !seen.insert(x) {
            return Err(ScriptError::DuplicateSlot(x.clone()));
        }
        let d = domains
            .get(x)
            .ok_or_else(|| ScriptError::MissingDomain(x.clone()))?;
        slots.push(d.clone());
    }
    Ok(Script {
        slots,
        action,
        bound: Bindings::new(),
    })
}

impl Script {
    pub fn slots(&self) -> &[ResponseDomain] {
        &self.slots
    }

    pub fn open(&self) -> impl Iterator<Item = &QuestionId> {
        self.slots.iter().map(|d| &d.question)
    }

    pub fn is_open(&self, x: &QuestionId) -> bool {
        self.slots.iter().any(|d| &d.question == x)
    }

    pub fn domain(&self, x: &QuestionId) -> Option<&ResponseDomain> {
        self.slots.iter().find(|d| &d.question == x)
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn bound(&self) -> &Bindings {
        &self.bound
    }

    /// Checks `bindings` against the open slots without mixing.
    pub fn check(&self, bindings: &Bindings) -> Result<(), MixError> {
        for (x, r) in bindings {
            let d = self
                .domain(x)
                .ok_or_else(|| MixError::UnknownSlot(x.clone()))?;
            if !d.contains(r) {
                return Err(MixError::DomainViolation {
                    question: x.clone(),
                    response: r.clone(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Script")
            .field("open", &self.open().collect::<Vec<_>>())
            .field("action", &self.action)
            .field("bound", &self.bound)
            .finish()
    }
}

/// Fixes the slots named in `s`. The result is a residual over the remaining
/// slots in their original order, or a completion when none remain.
pub fn mix(script: &Script, s: &StaticAssignment) -> Result<MixOutcome, MixError> {
    script.check(s.bindings())?;
    let slots: Vec<ResponseDomain> = script
        .slots
        .iter()
        .filter(|d| !s.0.contains_key(&d.question))
        .cloned()
        .collect();
    let mut bound = script.bound.clone();
    bound.extend(s.0.iter().map(|(k, v)| (k.clone(), v.clone())));
    Ok(if slots.is_empty() {
        MixOutcome::Complete(Completion {
            action: script.action.clone(),
            bindings: bound,
        })
    } else {
        MixOutcome::Residual(Script {
            slots,
            action: script.action.clone(),
            bound,
        })
    })
}

/// Applies a script to values for all of its open slots.
pub fn apply_script(script: &Script, full: &StaticAssignment) -> Result<Completion, MixError> {
    if script.slots.is_empty() {
        return Err(MixError::NothingToApply);
    }
    script.check(full.bindings())?;
    if let Some(x) = script.open().find(|x| !full.0.contains_key(*x)) {
        return Err(MixError::Incomplete(x.clone()));
    }
    match mix(script, full)? {
        MixOutcome::Complete(c) => Ok(c),
        MixOutcome::Residual(_) => unreachable!("all slots were bound"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::q;
    use alloc::vec;

    fn r(s: &str) -> Response {
        Response::new(s).unwrap()
    }

    fn coffee() -> Domains {
        let mut d = Domains::new();
        for (name, vals) in [
            ("size", &["small", "medium", "large"][..]),
            ("blend", &["mild", "dark"][..]),
            ("cream", &["yes", "no"][..]),
        ] {
            d.insert(
                q(name),
                ResponseDomain::new(q(name), vals.iter().map(|v| r(v))).unwrap(),
            );
        }
        d
    }

    fn f() -> Script {
        make_script(
            &[q("size"), q("blend"), q("cream")],
            &coffee(),
            Action::new("retrieve-item"),
        )
        .unwrap()
    }

    fn a(pairs: &[(&str, &str)]) -> StaticAssignment {
        pairs.iter().map(|(k, v)| (q(k), r(v))).collect()
    }

    fn residual(o: MixOutcome) -> Script {
        match o {
            MixOutcome::Residual(s) => s,
            MixOutcome::Complete(c) => panic!("unexpected completion {c:?}"),
        }
    }

    #[test]
    fn make() {
        assert_eq!(f().slots().len(), 3);
        assert_eq!(
            make_script(&[q("size"), q("size")], &coffee(), Action::new("x")),
            Err(ScriptError::DuplicateSlot(q("size")))
        );
        assert_eq!(
            make_script(&[q("PIN")], &coffee(), Action::new("x")),
            Err(ScriptError::MissingDomain(q("PIN")))
        );
    }

    #[test]
    fn staged_mixing() {
        let s1 = residual(mix(&f(), &a(&[("size", "small")])).unwrap());
        assert_eq!(
            s1.open().cloned().collect::<Vec<_>>(),
            vec![q("blend"), q("cream")]
        );

        let s = residual(mix(&f(), &a(&[("blend", "dark")])).unwrap());
        let s = residual(mix(&s, &a(&[("size", "large")])).unwrap());
        let MixOutcome::Complete(c) = mix(&s, &a(&[("cream", "yes")])).unwrap() else {
            panic!()
        };
        assert_eq!(c.action.as_str(), "retrieve-item");
        assert_eq!(c.bindings.len(), 3);

        let all = a(&[("size", "small"), ("blend", "mild"), ("cream", "no")]);
        assert!(matches!(mix(&f(), &all).unwrap(), MixOutcome::Complete(_)));
        assert_eq!(
            apply_script(&f(), &all).unwrap().bindings,
            all.bindings().clone()
        );
    }

    #[test]
    fn errors() {
        let script = f();
        let before = script.clone();
        assert_eq!(
            mix(&script, &a(&[("size", "venti")])),
            Err(MixError::DomainViolation {
                question: q("size"),
                response: r("venti")
            })
        );
        assert_eq!(script, before);
        let s1 = residual(mix(&script, &a(&[("size", "small")])).unwrap());
        assert_eq!(
            mix(&s1, &a(&[("size", "large")])),
            Err(MixError::UnknownSlot(q("size")))
        );
        assert_eq!(
            apply_script(&s1, &a(&[("blend", "mild")])),
            Err(MixError::Incomplete(q("cream")))
        );
        let empty = make_script(&[], &coffee(), Action::new("x")).unwrap();
        assert_eq!(
            apply_script(&empty, &a(&[("size", "small")])),
            Err(MixError::NothingToApply)
        );
    }
}
