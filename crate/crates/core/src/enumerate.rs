//! Denotational semantics of the notation: expressions to episode sets.
//!
//! Over atomic terms `t1..tq`:
//!
//! | type     | episodes                                              |
//! |----------|-------------------------------------------------------|
//! | `I`      | everything in one utterance                           |
//! | `C`      | one question per utterance, in term order             |
//! | `PFA`    | `t1` alone, then the rest together                    |
//! | `PFA_n`  | a prefix block, then the rest together                |
//! | `PFA_n*` | every split into consecutive blocks                   |
//! | `SPE`    | any one question alone, then the rest together        |
//! | `SPE'`   | every permutation, one question per utterance         |
//! | `PE`     | any non-empty subset together, then the rest together |
//! | `PE*`    | every ordered set partition                           |
//!
//! `C`, `SPE'`, `PFA` and `SPE` also take sub-dialogs. `C` concatenates term
//! episodes in order, `SPE'` in every order, and `PFA`/`SPE` complete one term
//! and then answer the remaining terms in a single utterance, which requires
//! those terms to admit a one-utterance episode.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::counting::{episode_count, factorial};
use crate::error::EnumerateError;
use crate::model::{
    AbstractUtterance, DialogExpr, DialogType, EnumeratedSpec, Episode, QuestionId, SpecUnion, Term,
};

/// Refuse to materialize more episodes than this.
pub const MAX_EPISODES: usize = 1 << 20;

/// Enumerates one expression.
pub fn enumerate(expr: &DialogExpr) -> Result<EnumeratedSpec, EnumerateError> {
    let episodes = episodes_of(expr)?;
    Ok(EnumeratedSpec::new_unchecked(expr.leaves(), episodes))
}

/// Union of the members' episode sets.
pub fn enumerate_union(u: &SpecUnion) -> Result<EnumeratedSpec, EnumerateError> {
    let mut all = BTreeSet::new();
    for e in u.exprs() {
        all.extend(episodes_of(e)?);
    }
    Ok(EnumeratedSpec::new_unchecked(u.question_order(), all))
}

/// Raw episode set of an expression, guarded by [`MAX_EPISODES`].
pub fn episodes_of(expr: &DialogExpr) -> Result<BTreeSet<Episode>, EnumerateError> {
    let n = count_episodes(expr)?;
    if n.to_usize().is_none_or(|n| n > MAX_EPISODES) {
        return Err(EnumerateError::TooLarge {
            what: "episode count",
            limit: MAX_EPISODES,
        });
    }
    Ok(expand(expr)?.into_iter().collect())
}

/// Exact episode count, computed without enumeration.
pub fn count_episodes(expr: &DialogExpr) -> Result<BigUint, EnumerateError> {
    let terms = expr.terms();
    match expr.numerator() {
        t if expr.is_all_atomic() && !t.admits_subdialogs() => Ok(episode_count(t, terms.len())),
        DialogType::C => terms.iter().map(count_term).product(),
        DialogType::SpePrime => {
            let prod: BigUint = terms.iter().map(count_term).product::<Result<_, _>>()?;
            Ok(prod * factorial(terms.len()))
        }
        DialogType::Pfa => {
            check_collapsible(&terms[1..])?;
            count_term(&terms[0])
        }
        DialogType::Spe => {
            let mut total = BigUint::zero();
            for i in 0..terms.len() {
                check_collapsible(&others(terms, i))?;
                total += count_term(&terms[i])?;
            }
            Ok(total)
        }
        // validated expressions never carry sub-dialogs under other numerators
        t => Ok(episode_count(t, terms.len())),
    }
}

fn count_term(t: &Term) -> Result<BigUint, EnumerateError> {
    match t {
        Term::Question(_) => Ok(BigUint::one()),
        Term::Expr(e) => count_episodes(e),
    }
}

fn others(terms: &[Term], skip: usize) -> Vec<Term> {
    terms
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, t)| t.clone())
        .collect()
}

/// Whether a term has an episode answering all of it in one utterance.
pub fn is_collapsible(t: &Term) -> bool {
    match t {
        Term::Question(_) => true,
        Term::Expr(e) => match e.numerator() {
            DialogType::I
            | DialogType::PfaN
            | DialogType::PfaNStar
            | DialogType::Pe
            | DialogType::PeStar => true,
            DialogType::C | DialogType::SpePrime | DialogType::Pfa | DialogType::Spe => {
                e.terms().len() == 1 && is_collapsible(&e.terms()[0])
            }
        },
    }
}

fn check_collapsible(rest: &[Term]) -> Result<(), EnumerateError> {
    match rest.iter().find(|t| !is_collapsible(t)) {
        Some(t) => Err(EnumerateError::CollapseUndefined(format!("{t}"))),
        None => Ok(()),
    }
}

fn expand_term(t: &Term) -> Result<Vec<Episode>, EnumerateError> {
    match t {
        Term::Question(q) => Ok(vec![Episode::singles([q.clone()])]),
        Term::Expr(e) => expand(e),
    }
}

fn expand(expr: &DialogExpr) -> Result<Vec<Episode>, EnumerateError> {
    let terms = expr.terms();
    if expr.is_all_atomic() {
        let qs: Vec<QuestionId> = terms
            .iter()
            .map(|t| match t {
                Term::Question(q) => q.clone(),
                Term::Expr(_) => unreachable!(),
            })
            .collect();
        if let Some(eps) = expand_atomic(expr.numerator(), &qs) {
            return Ok(eps);
        }
    }
    match expr.numerator() {
        DialogType::C => {
            let parts = terms
                .iter()
                .map(expand_term)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(product(&parts))
        }
        DialogType::SpePrime => {
            let parts = terms
                .iter()
                .map(expand_term)
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = Vec::new();
            for perm in permutations(parts.len()) {
                let ordered: Vec<_> = perm.iter().map(|&i| parts[i].clone()).collect();
                out.extend(product(&ordered));
            }
            Ok(out)
        }
        DialogType::Pfa => first_then_rest(terms, 0),
        DialogType::Spe => {
            let mut out = Vec::new();
            for i in 0..terms.len() {
                out.extend(first_then_rest(terms, i)?);
            }
            Ok(out)
        }
        t => unreachable!("{t} with sub-dialogs rejected by validation"),
    }
}

/// Episodes of `terms[first]` followed by every other term in one utterance.
fn first_then_rest(terms: &[Term], first: usize) -> Result<Vec<Episode>, EnumerateError> {
    let rest = others(terms, first);
    check_collapsible(&rest)?;
    let head = expand_term(&terms[first])?;
    if rest.is_empty() {
        return Ok(head);
    }
    let tail = AbstractUtterance::new(rest.iter().flat_map(Term::leaves)).expect("non-empty rest");
    Ok(head
        .into_iter()
        .map(|e| {
            let mut us = e.into_utterances();
            us.push(tail.clone());
            Episode::new(us)
        })
        .collect())
}

fn product(parts: &[Vec<Episode>]) -> Vec<Episode> {
    let mut acc = vec![Episode::default()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for a in &acc {
            for b in part {
                next.push(a.concat(b));
            }
        }
        acc = next;
    }
    acc
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn utt(qs: impl IntoIterator<Item = QuestionId>) -> AbstractUtterance {
    AbstractUtterance::new(qs).expect("non-empty block")
}

fn subset(qs: &[QuestionId], mask: usize) -> Vec<QuestionId> {
    (0..qs.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| qs[i].clone())
        .collect()
}

/// Atomic-only semantics for the types that never carry sub-dialogs, plus the
/// degenerate one-term case. `None` defers to the general rules.
fn expand_atomic(t: DialogType, qs: &[QuestionId]) -> Option<Vec<Episode>> {
    let n = qs.len();
    let all = (1usize << n) - 1;
    let eps = match t {
        DialogType::I => vec![Episode::new(vec![utt(qs.iter().cloned())])],
        DialogType::PfaN => (1..=n)
            .map(|k| {
                if k == n {
                    Episode::new(vec![utt(qs.iter().cloned())])
                } else {
                    Episode::new(vec![
                        utt(qs[..k].iter().cloned()),
                        utt(qs[k..].iter().cloned()),
                    ])
                }
            })
            .collect(),
        DialogType::PfaNStar => (0..1usize << (n - 1))
            .map(|cuts| {
                // bit i set: cut between qs[i] and qs[i + 1]
                let mut blocks = Vec::new();
                let mut start = 0;
                for i in 0..n - 1 {
                    if cuts >> i & 1 == 1 {
                        blocks.push(utt(qs[start..=i].iter().cloned()));
                        start = i + 1;
                    }
                }
                blocks.push(utt(qs[start..].iter().cloned()));
                Episode::new(blocks)
            })
            .collect(),
        DialogType::Pe => (1..=all)
            .map(|s| {
                if s == all {
                    Episode::new(vec![utt(qs.iter().cloned())])
                } else {
                    Episode::new(vec![utt(subset(qs, s)), utt(subset(qs, all & !s))])
                }
            })
            .collect(),
        DialogType::PeStar => {
            let mut out = Vec::new();
            ordered_partitions(qs, all, &mut Vec::new(), &mut out);
            out
        }
        _ => return None,
    };
    Some(eps)
}

/// Ordered set partitions of the elements in `remaining`, by choosing the
/// first block and recursing.
fn ordered_partitions(
    qs: &[QuestionId],
    remaining: usize,
    prefix: &mut Vec<AbstractUtterance>,
    out: &mut Vec<Episode>,
) {
    if remaining == 0 {
        out.push(Episode::new(prefix.clone()));
        return;
    }
    // iterate non-empty submasks of `remaining`
    let mut s = remaining;
    while s > 0 {
        prefix.push(utt(subset(qs, s)));
        ordered_partitions(qs, remaining & !s, prefix, out);
        prefix.pop();
        s = (s - 1) & remaining;
    }
}

/// Largest set accepted by [`brute_force_ordered_partitions`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// All ordered set partitions of `questions`, generated independently of
/// [`enumerate`]: every weak ordering is visited as a rank assignment
/// `question -> 0..k` that is onto `0..k`.
pub fn brute_force_ordered_partitions(
    questions: &[QuestionId],
) -> Result<EnumeratedSpec, EnumerateError> {
    let n = questions.len();
    if n > BRUTE_FORCE_MAX {
        return Err(EnumerateError::TooLarge {
            what: "question set",
            limit: BRUTE_FORCE_MAX,
        });
    }
    let mut episodes = BTreeSet::new();
    let mut ranks = vec![0usize; n];
    loop {
        let k = ranks.iter().copied().max().map_or(0, |m| m + 1);
        let onto = (0..k).all(|r| ranks.contains(&r));
        if onto && n > 0 {
            let blocks = (0..k)
                .map(|r| {
                    utt((0..n)
                        .filter(|&i| ranks[i] == r)
                        .map(|i| questions[i].clone()))
                })
                .collect();
            episodes.insert(Episode::new(blocks));
        }
        // odometer over ranks in 0..n
        let mut i = 0;
        loop {
            if i == n {
                return Ok(EnumeratedSpec::new_unchecked(questions.to_vec(), episodes));
            }
            ranks[i] += 1;
            if ranks[i] < n {
                break;
            }
            ranks[i] = 0;
            i += 1;
        }
    }
}
