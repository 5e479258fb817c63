//! Semantics-preserving rewrites over expressions, reduction to the
//! primitive `I`/`C` types, equivalence checking, and the residual
//! specification left after a history of utterances (re-layering).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::counting::{factorial, ordered_bell};
use crate::enumerate::{count_episodes, enumerate, enumerate_union, episodes_of};
use crate::error::EnumerateError;
use crate::model::{
    AbstractUtterance, DialogExpr, DialogType, EnumeratedSpec, Episode, QuestionId, SpecUnion, Term,
};

/// Equivalence and residual computation enumerate in full; they refuse
/// inputs with more questions than this.
pub const MAX_QUESTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("specifications range over different question sets")]
    QuestionMismatch,
    #[error("{0} questions exceed the limit of {MAX_QUESTIONS}")]
    TooLarge(usize),
    #[error("history is not a prefix of any episode")]
    NotAPrefix,
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
}

/// One applied rewrite, for traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: &'static str,
    pub before: DialogExpr,
    pub after: DialogExpr,
}

/// Rewrites to a fixpoint. See [`normalize_traced`] for the rules.
pub fn normalize(expr: &DialogExpr) -> DialogExpr {
    normalize_traced(expr).0
}

/// Rewrites to a fixpoint, recording each rule application:
///
/// - `unwrap`: a numerator over a single term is that term;
/// - `flatten-c`: a `C` term inside `C` splices its terms into the parent;
/// - `inline-sequence`: a sub-dialog with exactly one episode, one question
///   per utterance, becomes `C` over that sequence;
/// - `inline-utterance`: a sub-dialog whose only episode is one utterance
///   becomes `I` over its questions.
///
/// A top-level single question comes back as `C` over it.
pub fn normalize_traced(expr: &DialogExpr) -> (DialogExpr, Vec<RewriteStep>) {
    let mut trace = Vec::new();
    let mut cur = Term::Expr(expr.clone());
    loop {
        let next = rewrite_term(&cur, &mut trace);
        if next == cur {
            break;
        }
        cur = next;
    }
    (as_expr(cur), trace)
}

fn as_expr(t: Term) -> DialogExpr {
    match t {
        Term::Expr(e) => e,
        Term::Question(q) => DialogExpr::atomic(DialogType::C, [q]).expect("single question"),
    }
}

fn rewrite_term(t: &Term, trace: &mut Vec<RewriteStep>) -> Term {
    let Term::Expr(e) = t else { return t.clone() };
    let terms: Vec<Term> = e.terms().iter().map(|c| rewrite_term(c, trace)).collect();
    let mut terms_changed = terms.as_slice() != e.terms();

    if terms.len() == 1 {
        let inner = terms.into_iter().next().unwrap();
        trace.push(RewriteStep {
            rule: "unwrap",
            before: e.clone(),
            after: as_expr(inner.clone()),
        });
        return inner;
    }

    let mut terms = terms;
    if e.numerator() == DialogType::C && terms.iter().any(is_c) {
        terms = terms
            .into_iter()
            .flat_map(|c| match c {
                Term::Expr(sub) if sub.numerator() == DialogType::C => sub.into_terms(),
                other => vec![other],
            })
            .collect();
        terms_changed = true;
        let after =
            DialogExpr::new(DialogType::C, terms.clone()).expect("flattening keeps validity");
        trace.push(RewriteStep {
            rule: "flatten-c",
            before: e.clone(),
            after,
        });
    }
    let rebuilt = if terms_changed {
        DialogExpr::new(e.numerator(), terms).expect("rewrites keep validity")
    } else {
        e.clone()
    };

    if let Some((rule, simpler)) = single_episode_form(&rebuilt) {
        if simpler != rebuilt {
            trace.push(RewriteStep {
                rule,
                before: rebuilt,
                after: simpler.clone(),
            });
            return Term::Expr(simpler);
        }
    }
    Term::Expr(rebuilt)
}

fn is_c(t: &Term) -> bool {
    matches!(t, Term::Expr(e) if e.numerator() == DialogType::C)
}

/// `C`/`I` replacement for an expression denoting exactly one episode that is
/// either all singles or a single utterance.
fn single_episode_form(e: &DialogExpr) -> Option<(&'static str, DialogExpr)> {
    if count_episodes(e).ok()? != BigUint::one() {
        return None;
    }
    let ep = episodes_of(e).ok()?.into_iter().next()?;
    if ep.is_all_singles() {
        let seq = ep
            .utterances()
            .iter()
            .map(|u| u.questions().iter().next().unwrap().clone());
        return Some((
            "inline-sequence",
            DialogExpr::atomic(DialogType::C, seq).ok()?,
        ));
    }
    if ep.len() == 1 {
        return Some((
            "inline-utterance",
            DialogExpr::atomic(DialogType::I, e.leaves()).ok()?,
        ));
    }
    None
}

/// Rewrites into a union using only `I` and `C`: one `C` per episode, with
/// multi-question utterances as `I` sub-terms.
pub fn reduce_to_primitives(expr: &DialogExpr) -> Result<SpecUnion, EnumerateError> {
    let spec = enumerate(expr)?;
    Ok(union_of_primitives(&spec, &expr.leaves()))
}

/// Union-of-`C` form of an explicit episode set, members in rendered order.
/// `order` fixes the order of questions inside `I` terms.
pub fn union_of_primitives(spec: &EnumeratedSpec, order: &[QuestionId]) -> SpecUnion {
    let mut exprs: Vec<DialogExpr> = spec
        .episodes()
        .iter()
        .map(|ep| episode_as_c(ep, order))
        .collect();
    exprs.sort_by_cached_key(|e| alloc::format!("{e}"));
    SpecUnion::new(exprs).expect("episodes share one question set")
}

/// A single episode as a primitive expression.
pub fn episode_as_c(ep: &Episode, order: &[QuestionId]) -> DialogExpr {
    let ordered = |u: &AbstractUtterance| -> Vec<QuestionId> {
        let mut v: Vec<_> = order.iter().filter(|x| u.contains(x)).cloned().collect();
        v.extend(u.questions().iter().filter(|x| !order.contains(x)).cloned());
        v
    };
    if ep.len() == 1 {
        let u = &ep.utterances()[0];
        let t = if u.len() == 1 {
            DialogType::C
        } else {
            DialogType::I
        };
        return DialogExpr::atomic(t, ordered(u)).expect("distinct questions");
    }
    let terms = ep
        .utterances()
        .iter()
        .map(|u| {
            if u.len() == 1 {
                Term::Question(u.questions().iter().next().unwrap().clone())
            } else {
                Term::Expr(
                    DialogExpr::atomic(DialogType::I, ordered(u)).expect("distinct questions"),
                )
            }
        })
        .collect();
    DialogExpr::new(DialogType::C, terms).expect("C accepts any terms")
}

fn guard(u: &SpecUnion) -> Result<(), RewriteError> {
    let n = u.question_set().len();
    if n > MAX_QUESTIONS {
        return Err(RewriteError::TooLarge(n));
    }
    Ok(())
}

/// True iff both specifications denote the same episode set.
pub fn equivalent(a: &SpecUnion, b: &SpecUnion) -> Result<bool, RewriteError> {
    if a.question_set() != b.question_set() {
        return Err(RewriteError::QuestionMismatch);
    }
    guard(a)?;
    Ok(enumerate_union(a)?.episodes() == enumerate_union(b)?.episodes())
}

/// The valid continuations of `history` under `u`, with the history removed.
pub fn continuations(
    u: &SpecUnion,
    history: &[AbstractUtterance],
) -> Result<BTreeSet<Episode>, RewriteError> {
    guard(u)?;
    let all = enumerate_union(u)?;
    let out: BTreeSet<Episode> = all
        .episodes()
        .iter()
        .filter(|e| e.starts_with(history))
        .map(|e| Episode::new(e.utterances()[history.len()..].to_vec()))
        .collect();
    if out.is_empty() {
        return Err(RewriteError::NotAPrefix);
    }
    Ok(out)
}

/// The specification remaining after `history`, or `None` once every
/// question is answered.
///
/// The residual is derived symbolically from the expressions, normalized,
/// and then re-layered: when the continuations form a whole `PE*`, `SPE'` or
/// `PFA_n*` dialog over the unanswered questions, that single expression is
/// returned instead.
pub fn residual_union(
    u: &SpecUnion,
    history: &[AbstractUtterance],
) -> Result<Option<SpecUnion>, RewriteError> {
    let conts = continuations(u, history)?;
    if conts.iter().any(Episode::is_empty) {
        return Ok(None);
    }
    let answered: BTreeSet<QuestionId> = history
        .iter()
        .flat_map(|h| h.questions().iter().cloned())
        .collect();
    let remaining: Vec<QuestionId> = u
        .question_order()
        .into_iter()
        .filter(|x| !answered.contains(x))
        .collect();

    if let Some(e) = relayer(&conts, &remaining) {
        return Ok(Some(SpecUnion::single(e)));
    }

    let mut states: Vec<Option<Term>> = u
        .exprs()
        .iter()
        .map(|e| Some(Term::Expr(e.clone())))
        .collect();
    for h in history {
        states = states.iter().flatten().flat_map(|t| derive(t, h)).collect();
    }
    let mut exprs: Vec<DialogExpr> = Vec::new();
    for t in states.into_iter().flatten() {
        let e = normalize(&as_expr(t));
        if !exprs.contains(&e) {
            exprs.push(e);
        }
    }
    let exprs = drop_subsumed(exprs)?;
    let residual = SpecUnion::new(exprs).map_err(|_| RewriteError::NotAPrefix)?;
    if enumerate_union(&residual)?.episodes() == &conts {
        Ok(Some(residual))
    } else {
        // derivative rules are exact; this branch only guards against drift
        let spec = EnumeratedSpec::new_unchecked(remaining.clone(), conts);
        Ok(Some(union_of_primitives(&spec, &remaining)))
    }
}

/// Drops members whose episodes are already produced by another member.
fn drop_subsumed(exprs: Vec<DialogExpr>) -> Result<Vec<DialogExpr>, EnumerateError> {
    let sets = exprs
        .iter()
        .map(episodes_of)
        .collect::<Result<Vec<_>, _>>()?;
    let mut keep = Vec::new();
    for (i, e) in exprs.iter().enumerate() {
        let covered = sets
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && sets[i].is_subset(other) && (sets[i] != *other || j < i));
        if !covered {
            keep.push(e.clone());
        }
    }
    Ok(keep)
}

/// A single `PE*`, `SPE'` or `PFA_n*` expression equal to `conts`, tried in
/// that order.
fn relayer(conts: &BTreeSet<Episode>, remaining: &[QuestionId]) -> Option<DialogExpr> {
    let r = remaining.len();
    if r < 2 {
        return None;
    }
    let n = BigUint::from(conts.len());
    let same = |e: &DialogExpr| episodes_of(e).is_ok_and(|s| &s == conts);
    if n == ordered_bell(r) {
        let e = DialogExpr::atomic(DialogType::PeStar, remaining.iter().cloned()).ok()?;
        if same(&e) {
            return Some(e);
        }
    }
    if n == factorial(r) {
        let e = DialogExpr::atomic(DialogType::SpePrime, remaining.iter().cloned()).ok()?;
        if same(&e) {
            return Some(e);
        }
    }
    if n == BigUint::one() << (r - 1) {
        for ep in conts.iter().filter(|e| e.is_all_singles()) {
            let order = ep
                .utterances()
                .iter()
                .map(|u| u.questions().iter().next().unwrap().clone());
            let e = DialogExpr::atomic(DialogType::PfaNStar, order).ok()?;
            if same(&e) {
                return Some(e);
            }
        }
    }
    None
}

fn atomic_qs(e: &DialogExpr) -> Vec<QuestionId> {
    e.leaves()
}

fn atomic_term(t: DialogType, qs: Vec<QuestionId>) -> Term {
    Term::Expr(DialogExpr::atomic(t, qs).expect("distinct questions"))
}

fn mk(t: DialogType, terms: Vec<Term>) -> Term {
    Term::Expr(DialogExpr::new(t, terms).expect("derivative keeps validity"))
}

/// Residuals of `t` after answering exactly the questions in `u`; `None`
/// marks a completed term.
fn derive(t: &Term, u: &AbstractUtterance) -> Vec<Option<Term>> {
    let e = match t {
        Term::Question(x) => {
            return if u.len() == 1 && u.contains(x) {
                vec![None]
            } else {
                vec![]
            };
        }
        Term::Expr(e) => e,
    };
    let terms = e.terms();
    let qs = atomic_qs(e);
    let set_of = |s: &[QuestionId]| s.iter().cloned().collect::<BTreeSet<_>>();
    let all = set_of(&qs);
    let rest_after = |k: usize| -> Vec<QuestionId> { qs[k..].to_vec() };
    let without_u = || {
        qs.iter()
            .filter(|x| !u.contains(x))
            .cloned()
            .collect::<Vec<_>>()
    };
    match e.numerator() {
        DialogType::I if e.is_all_atomic() => {
            if u.questions() == &all {
                vec![None]
            } else {
                vec![]
            }
        }
        DialogType::PfaN | DialogType::PfaNStar if e.is_all_atomic() => {
            let k = u.len();
            if k > qs.len() || set_of(&qs[..k]) != *u.questions() {
                return vec![];
            }
            if k == qs.len() {
                vec![None]
            } else if e.numerator() == DialogType::PfaN {
                vec![Some(atomic_term(DialogType::I, rest_after(k)))]
            } else {
                vec![Some(atomic_term(DialogType::PfaNStar, rest_after(k)))]
            }
        }
        DialogType::Pe | DialogType::PeStar if e.is_all_atomic() => {
            if !u.questions().is_subset(&all) {
                return vec![];
            }
            if u.questions() == &all {
                return vec![None];
            }
            let t = if e.numerator() == DialogType::Pe {
                DialogType::I
            } else {
                DialogType::PeStar
            };
            vec![Some(atomic_term(t, without_u()))]
        }
        DialogType::C => {
            let tail = &terms[1..];
            derive(&terms[0], u)
                .into_iter()
                .map(|r| match (r, tail.is_empty()) {
                    (None, true) => None,
                    (None, false) => Some(mk(DialogType::C, tail.to_vec())),
                    (Some(r), true) => Some(r),
                    (Some(r), false) => {
                        let mut v = vec![r];
                        v.extend(tail.iter().cloned());
                        Some(mk(DialogType::C, v))
                    }
                })
                .collect()
        }
        DialogType::SpePrime => {
            let mut out = Vec::new();
            for i in 0..terms.len() {
                let others: Vec<Term> = terms
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, t)| t.clone())
                    .collect();
                for r in derive(&terms[i], u) {
                    out.push(match (r, others.is_empty()) {
                        (None, true) => None,
                        (None, false) => Some(mk(DialogType::SpePrime, others.clone())),
                        (Some(r), true) => Some(r),
                        (Some(r), false) => Some(mk(
                            DialogType::C,
                            vec![r, mk(DialogType::SpePrime, others.clone())],
                        )),
                    });
                }
            }
            out
        }
        DialogType::Pfa | DialogType::Spe => {
            let firsts: Vec<usize> = if e.numerator() == DialogType::Pfa {
                vec![0]
            } else {
                (0..terms.len()).collect()
            };
            let mut out = Vec::new();
            for i in firsts {
                let others: Vec<Term> = terms
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, t)| t.clone())
                    .collect();
                for r in derive(&terms[i], u) {
                    out.push(match (r, others.is_empty()) {
                        (None, true) => None,
                        (None, false) => {
                            let leaves = others.iter().flat_map(Term::leaves).collect();
                            Some(atomic_term(DialogType::I, leaves))
                        }
                        (Some(r), true) => Some(r),
                        (Some(r), false) => {
                            let mut v = vec![r];
                            v.extend(others.iter().cloned());
                            Some(mk(DialogType::Pfa, v))
                        }
                    });
                }
            }
            out
        }
        DialogType::I
        | DialogType::PfaN
        | DialogType::PfaNStar
        | DialogType::Pe
        | DialogType::PeStar => {
            unreachable!("validated expressions keep these numerators atomic")
        }
    }
}
