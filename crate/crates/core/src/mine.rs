//! Dialog mining: compressing an explicit episode set into expressions.
//!
//! The miner is a recursive heuristic. It first tries to recognize the whole
//! set as one dialog type, then tries to factor the questions into blocks
//! that every episode answers contiguously (recursing into each block), and
//! otherwise peels off the largest sub-dialogs it can recognize, ending with
//! one `C` expression per leftover episode. Every result is checked by
//! enumeration, so the output always denotes exactly the input.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::counting::{episode_count, factorial};
use crate::enumerate::{count_episodes, episodes_of, permutations};
use crate::model::{
    AbstractUtterance, DialogExpr, DialogType, EnumeratedSpec, Episode, QuestionId, SpecUnion, Term,
};
use crate::rewrite::{episode_as_c, normalize};

/// Default work budget, in candidate episodes enumerated.
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MineResult {
    pub union: SpecUnion,
    /// Set when the result is a single expression (no union operator), which
    /// is minimal by construction.
    pub minimal_claimed: bool,
    /// Set when the budget ran out and leftover episodes were emitted as
    /// plain `C` expressions.
    pub budget_exhausted: bool,
}

/// Mines with [`DEFAULT_BUDGET`].
pub fn mine(spec: &EnumeratedSpec) -> MineResult {
    mine_with_budget(spec, DEFAULT_BUDGET)
}

pub fn mine_with_budget(spec: &EnumeratedSpec, budget: usize) -> MineResult {
    let mut m = Miner { budget, spent: 0 };
    let order = spec.order().to_vec();
    let eps = spec.episodes();

    if let Some(t) = m.recognize(&order, eps) {
        let e = normalize(&term_expr(t));
        return MineResult {
            union: SpecUnion::single(e),
            minimal_claimed: true,
            budget_exhausted: false,
        };
    }

    let pool = m.candidate_pool(&order, eps);
    let mut uncovered: BTreeSet<&Episode> = eps.iter().collect();
    let mut chosen: Vec<(DialogExpr, BTreeSet<Episode>)> = Vec::new();
    while !uncovered.is_empty() {
        // largest gain, then smallest rendering
        let best = pool
            .iter()
            .map(|c| (c.set.iter().filter(|e| uncovered.contains(e)).count(), c))
            .filter(|(gain, _)| *gain > 0)
            .max_by(|(ga, a), (gb, b)| ga.cmp(gb).then_with(|| b.rendered.cmp(&a.rendered)));
        let Some((_, c)) = best else { break };
        for e in &c.set {
            uncovered.remove(e);
        }
        chosen.push((c.expr.clone(), c.set.clone()));
    }
    // whatever the budget left uncovered becomes one C per episode
    for e in uncovered {
        let mut set = BTreeSet::new();
        set.insert(e.clone());
        chosen.push((episode_as_c(e, &order), set));
    }
    let chosen = drop_redundant(chosen);
    let exprs: Vec<DialogExpr> = chosen.into_iter().map(|(e, _)| normalize(&e)).collect();
    let union = SpecUnion::new(exprs).expect("members share the question set");
    let minimal_claimed = union.len() == 1;
    MineResult {
        union,
        minimal_claimed,
        budget_exhausted: m.exhausted(),
    }
}

/// Removes members whose episodes the other members already cover.
fn drop_redundant(
    mut chosen: Vec<(DialogExpr, BTreeSet<Episode>)>,
) -> Vec<(DialogExpr, BTreeSet<Episode>)> {
    let mut i = 0;
    while i < chosen.len() {
        let others: BTreeSet<&Episode> = chosen
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, (_, s))| s.iter())
            .collect();
        if chosen[i].1.iter().all(|e| others.contains(e)) {
            chosen.remove(i);
        } else {
            i += 1;
        }
    }
    chosen
}

fn term_expr(t: Term) -> DialogExpr {
    match t {
        Term::Expr(e) => e,
        Term::Question(q) => DialogExpr::atomic(DialogType::C, [q]).expect("one question"),
    }
}

struct Candidate {
    expr: DialogExpr,
    rendered: String,
    set: BTreeSet<Episode>,
}

/// Types in recognition order. Where two types coincide (below three
/// questions) the earlier one wins, so `PE*` beats `PE` and `SPE'` beats
/// `SPE`.
const RECOGNITION_ORDER: [DialogType; 9] = [
    DialogType::I,
    DialogType::C,
    DialogType::SpePrime,
    DialogType::PeStar,
    DialogType::PfaNStar,
    DialogType::Pfa,
    DialogType::PfaN,
    DialogType::Spe,
    DialogType::Pe,
];

/// Cap on candidate term orders tried per order-sensitive type.
const MAX_ORDERS: usize = 64;

struct Miner {
    budget: usize,
    spent: usize,
}

impl Miner {
    fn exhausted(&self) -> bool {
        self.spent >= self.budget
    }

    /// Enumerates `e` if it could equal a set of `target` episodes and the
    /// budget allows.
    fn episodes_if_size(&mut self, e: &DialogExpr, max: usize) -> Option<BTreeSet<Episode>> {
        let n = count_episodes(e).ok()?.to_usize()?;
        if n > max || self.spent + n > self.budget {
            return None;
        }
        self.spent += n;
        episodes_of(e).ok()
    }

    fn matches(&mut self, e: &DialogExpr, eps: &BTreeSet<Episode>) -> bool {
        if count_episodes(e).ok() != Some(BigUint::from(eps.len())) {
            return false;
        }
        self.episodes_if_size(e, eps.len())
            .is_some_and(|s| &s == eps)
    }

    /// One term denoting exactly `eps`, if the heuristic finds one.
    fn recognize(&mut self, order: &[QuestionId], eps: &BTreeSet<Episode>) -> Option<Term> {
        if order.len() == 1 {
            return Some(Term::Question(order[0].clone()));
        }
        if let Some(e) = self.single_type(order, eps) {
            return Some(Term::Expr(e));
        }
        self.factor(order, eps).map(Term::Expr)
    }

    fn single_type(&mut self, order: &[QuestionId], eps: &BTreeSet<Episode>) -> Option<DialogExpr> {
        let q = order.len();
        let n = BigUint::from(eps.len());
        let orders = candidate_orders(order, eps);
        for t in RECOGNITION_ORDER {
            if episode_count(t, q) != n {
                continue;
            }
            let tries: &[Vec<QuestionId>] = if t.is_order_sensitive() {
                &orders
            } else {
                core::slice::from_ref(&orders[0])
            };
            for o in tries {
                let e = DialogExpr::atomic(t, o.iter().cloned()).ok()?;
                if self.matches(&e, eps) {
                    return Some(e);
                }
            }
        }
        None
    }

    /// Block factoring: split the questions into groups answered
    /// contiguously in every episode and combine the mined groups with `C`,
    /// `SPE'` or `SPE`.
    fn factor(&mut self, order: &[QuestionId], eps: &BTreeSet<Episode>) -> Option<DialogExpr> {
        let blocks = interval_blocks(order, eps);
        if blocks.len() < 2 {
            return None;
        }
        let k = blocks.len();
        let mut groupings = set_partitions(k);
        // finest first; ties keep generation order
        groupings.sort_by_key(|g| core::cmp::Reverse(g.len()));
        for grouping in groupings {
            if grouping.len() < 2 || self.exhausted() {
                continue;
            }
            let groups: Vec<Vec<QuestionId>> = grouping
                .iter()
                .map(|idxs| {
                    let members: BTreeSet<&QuestionId> =
                        idxs.iter().flat_map(|&b| blocks[b].iter()).collect();
                    order
                        .iter()
                        .filter(|x| members.contains(x))
                        .cloned()
                        .collect()
                })
                .collect();
            if let Some(e) = self.factor_with(order, eps, &groups) {
                return Some(e);
            }
        }
        None
    }

    fn factor_with(
        &mut self,
        order: &[QuestionId],
        eps: &BTreeSet<Episode>,
        groups: &[Vec<QuestionId>],
    ) -> Option<DialogExpr> {
        let g = groups.len();
        let group_of: BTreeMap<&QuestionId, usize> = groups
            .iter()
            .enumerate()
            .flat_map(|(i, qs)| qs.iter().map(move |x| (x, i)))
            .collect();
        // per episode: group order and per-group projection
        let mut orders: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut projections: Vec<BTreeSet<Episode>> = vec![BTreeSet::new(); g];
        let mut decomposed: Vec<(Vec<usize>, Vec<Episode>)> = Vec::new();
        for ep in eps {
            let seq = group_sequence(ep, &group_of)?;
            let mut parts = vec![Vec::new(); g];
            for u in ep.utterances() {
                let gi = group_of[u.questions().iter().next().unwrap()];
                parts[gi].push(u.clone());
            }
            let parts: Vec<Episode> = parts.into_iter().map(Episode::new).collect();
            for (i, p) in parts.iter().enumerate() {
                projections[i].insert(p.clone());
            }
            orders.insert(seq.clone());
            decomposed.push((seq, parts));
        }
        let product: usize =
            projections.iter().map(BTreeSet::len).product::<usize>() * orders.len();
        if product == eps.len() {
            let numerator = if orders.len() == 1 {
                DialogType::C
            } else if factorial(g) == BigUint::from(orders.len()) {
                DialogType::SpePrime
            } else {
                return None;
            };
            let seq: Vec<usize> = if numerator == DialogType::C {
                orders.iter().next().unwrap().clone()
            } else {
                (0..g).collect()
            };
            let mut terms = Vec::with_capacity(g);
            for &i in &seq {
                terms.push(self.recognize(&groups[i], &projections[i])?);
            }
            let e = DialogExpr::new(numerator, terms).ok()?;
            return self.matches(&e, eps).then_some(e);
        }
        if g == 2 && orders.len() == 2 {
            return self.factor_spe(order, eps, groups, &decomposed);
        }
        None
    }

    /// Two groups where whichever is answered first is completed in full and
    /// the other follows in one utterance.
    fn factor_spe(
        &mut self,
        _order: &[QuestionId],
        eps: &BTreeSet<Episode>,
        groups: &[Vec<QuestionId>],
        decomposed: &[(Vec<usize>, Vec<Episode>)],
    ) -> Option<DialogExpr> {
        let whole = |i: usize| {
            Episode::new(vec![
                AbstractUtterance::new(groups[i].iter().cloned()).unwrap()
            ])
        };
        let mut leads: [BTreeSet<Episode>; 2] = [BTreeSet::new(), BTreeSet::new()];
        for (seq, parts) in decomposed {
            let (first, second) = (seq[0], seq[1]);
            if parts[second] != whole(second) {
                return None;
            }
            leads[first].insert(parts[first].clone());
        }
        let a = self.recognize(&groups[0], &leads[0])?;
        let b = self.recognize(&groups[1], &leads[1])?;
        let e = DialogExpr::new(DialogType::Spe, vec![a, b]).ok()?;
        self.matches(&e, eps).then_some(e)
    }

    /// Sub-dialog candidates generalized from individual episodes, each
    /// checked to denote a subset of `eps`.
    fn candidate_pool(&mut self, order: &[QuestionId], eps: &BTreeSet<Episode>) -> Vec<Candidate> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut pool = Vec::new();
        let mut consider = |m: &mut Miner, e: DialogExpr| {
            let rendered = format!("{e}");
            if !seen.insert(rendered.clone()) {
                return;
            }
            if let Some(set) = m.episodes_if_size(&e, eps.len()) {
                if set.is_subset(eps) {
                    pool.push(Candidate {
                        expr: e,
                        rendered,
                        set,
                    });
                }
            }
        };
        for ep in eps {
            consider(self, episode_as_c(ep, order));
        }
        for ep in eps {
            let us = ep.utterances();
            if us.len() > 12 {
                continue;
            }
            for cuts in 0..1usize << (us.len() - 1) {
                if self.exhausted() {
                    return pool;
                }
                let mut groups: Vec<&[AbstractUtterance]> = Vec::new();
                let mut start = 0;
                for i in 0..us.len() - 1 {
                    if cuts >> i & 1 == 1 {
                        groups.push(&us[start..=i]);
                        start = i + 1;
                    }
                }
                groups.push(&us[start..]);
                let options: Vec<Vec<Term>> =
                    groups.iter().map(|g| generalizations(g, order)).collect();
                for choice in cartesian(&options) {
                    let e = if choice.len() == 1 {
                        term_expr(choice.into_iter().next().unwrap())
                    } else {
                        match DialogExpr::new(DialogType::C, choice) {
                            Ok(e) => e,
                            Err(_) => continue,
                        }
                    };
                    consider(self, e);
                }
            }
        }
        pool
    }
}

/// Ways to read a run of utterances as one sub-dialog.
fn generalizations(group: &[AbstractUtterance], order: &[QuestionId]) -> Vec<Term> {
    let flat: Vec<QuestionId> = group
        .iter()
        .flat_map(|u| {
            order
                .iter()
                .filter(|x| u.contains(x))
                .cloned()
                .collect::<Vec<_>>()
        })
        .collect();
    if flat.len() == 1 {
        return vec![Term::Question(flat[0].clone())];
    }
    let mut out = Vec::new();
    let exact = episode_as_c(&Episode::new(group.to_vec()), order);
    out.push(Term::Expr(exact));
    let singles = group.iter().all(|u| u.len() == 1);
    if singles {
        out.push(Term::Expr(
            DialogExpr::atomic(DialogType::SpePrime, flat.iter().cloned()).unwrap(),
        ));
    }
    out.push(Term::Expr(
        DialogExpr::atomic(DialogType::PeStar, flat.iter().cloned()).unwrap(),
    ));
    out.push(Term::Expr(
        DialogExpr::atomic(DialogType::PfaNStar, flat.iter().cloned()).unwrap(),
    ));
    if group.len() <= 2 {
        out.push(Term::Expr(
            DialogExpr::atomic(DialogType::Pe, flat.iter().cloned()).unwrap(),
        ));
        out.push(Term::Expr(
            DialogExpr::atomic(DialogType::Spe, flat.iter().cloned()).unwrap(),
        ));
        out.push(Term::Expr(
            DialogExpr::atomic(DialogType::PfaN, flat).unwrap(),
        ));
    }
    out
}

fn cartesian(options: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for a in &acc {
            for o in opts {
                let mut v = a.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Candidate term orders: each all-singles episode proposes its order; then
/// the precedence order read off multi-utterance episodes; then the input's
/// first-seen order.
fn candidate_orders(order: &[QuestionId], eps: &BTreeSet<Episode>) -> Vec<Vec<QuestionId>> {
    let mut out: Vec<Vec<QuestionId>> = Vec::new();
    let mut push = |o: Vec<QuestionId>| {
        if !out.contains(&o) && out.len() < MAX_ORDERS {
            out.push(o);
        }
    };
    for ep in eps.iter().filter(|e| e.is_all_singles()) {
        push(
            ep.utterances()
                .iter()
                .map(|u| u.questions().iter().next().unwrap().clone())
                .collect(),
        );
    }
    if let Some(o) = precedence_order(order, eps) {
        push(o);
    }
    // the first-seen order leads; order-insensitive types only use the first
    out.retain(|o| o.as_slice() != order);
    out.insert(0, order.to_vec());
    out.truncate(MAX_ORDERS);
    out
}

/// Topological order of "answered strictly earlier in some episode", ties
/// broken by `order`; `None` if that relation has a cycle.
fn precedence_order(order: &[QuestionId], eps: &BTreeSet<Episode>) -> Option<Vec<QuestionId>> {
    let idx: BTreeMap<&QuestionId, usize> = order.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let n = order.len();
    let mut before = vec![vec![false; n]; n];
    for ep in eps {
        let us = ep.utterances();
        for (i, a) in us.iter().enumerate() {
            for b in &us[i + 1..] {
                for x in a.questions() {
                    for y in b.questions() {
                        before[idx[x]][idx[y]] = true;
                    }
                }
            }
        }
    }
    let mut placed = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let next =
            (0..n).find(|&j| !placed[j] && (0..n).all(|i| placed[i] || i == j || !before[i][j]))?;
        placed[next] = true;
        out.push(order[next].clone());
    }
    Some(out)
}

/// Finest partition of the questions into blocks such that every episode
/// answers each block in one contiguous run of whole utterances.
fn interval_blocks(order: &[QuestionId], eps: &BTreeSet<Episode>) -> Vec<Vec<QuestionId>> {
    let idx: BTreeMap<&QuestionId, usize> = order.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let n = order.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    fn union(p: &mut [usize], a: usize, b: usize) -> bool {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra == rb {
            return false;
        }
        p[ra.max(rb)] = ra.min(rb);
        true
    }
    for ep in eps {
        for u in ep.utterances() {
            let mut it = u.questions().iter();
            let first = idx[it.next().unwrap()];
            for x in it {
                union(&mut parent, first, idx[x]);
            }
        }
    }
    loop {
        let mut changed = false;
        for ep in eps {
            let us = ep.utterances();
            let roots: Vec<usize> = us
                .iter()
                .map(|u| find(&mut parent, idx[u.questions().iter().next().unwrap()]))
                .collect();
            for i in 0..roots.len() {
                let last = roots.iter().rposition(|&r| r == roots[i]).unwrap();
                for j in i + 1..last {
                    if roots[j] != roots[i] {
                        changed |= union(&mut parent, roots[i], roots[j]);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut blocks: BTreeMap<usize, Vec<QuestionId>> = BTreeMap::new();
    for (i, x) in order.iter().enumerate() {
        let r = find(&mut parent, i);
        blocks.entry(r).or_default().push(x.clone());
    }
    blocks.into_values().collect()
}

/// The order in which `ep` visits groups, or `None` if some group is not a
/// contiguous run.
fn group_sequence(ep: &Episode, group_of: &BTreeMap<&QuestionId, usize>) -> Option<Vec<usize>> {
    let mut seq: Vec<usize> = Vec::new();
    for u in ep.utterances() {
        let mut gs = u.questions().iter().map(|x| group_of[x]);
        let g = gs.next().unwrap();
        if gs.any(|h| h != g) {
            return None;
        }
        match seq.last() {
            Some(&last) if last == g => {}
            _ if seq.contains(&g) => return None,
            _ => seq.push(g),
        }
    }
    Some(seq)
}

/// Set partitions of `0..k` (restricted growth strings).
fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(i: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            go(i + 1, k, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        go(i + 1, k, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    go(0, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MinimalityError {
    #[error("exhaustive search is limited to {MINIMALITY_MAX_QUESTIONS} questions and {MINIMALITY_MAX_EPISODES} episodes")]
    TooLarge,
    #[error("the result does not denote the specification")]
    Unsound,
}

pub const MINIMALITY_MAX_QUESTIONS: usize = 4;
pub const MINIMALITY_MAX_EPISODES: usize = 25;

/// Outcome of the bounded exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityReport {
    /// Members in the mined union.
    pub result_size: usize,
    /// Fewest members of any sound union over all valid expressions.
    pub minimum_size: usize,
    /// A union of `minimum_size` members.
    pub witness: SpecUnion,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.result_size == self.minimum_size
    }
}

/// Searches every valid expression over the question set (small inputs only)
/// for the smallest union denoting `spec`, and compares it with `result`.
pub fn minimality_report(
    spec: &EnumeratedSpec,
    result: &MineResult,
) -> Result<MinimalityReport, MinimalityError> {
    let order = spec.order();
    if order.len() > MINIMALITY_MAX_QUESTIONS || spec.len() > MINIMALITY_MAX_EPISODES {
        return Err(MinimalityError::TooLarge);
    }
    let mined =
        crate::enumerate::enumerate_union(&result.union).map_err(|_| MinimalityError::Unsound)?;
    if mined != *spec {
        return Err(MinimalityError::Unsound);
    }
    let index: BTreeMap<&Episode, u32> = spec
        .episodes()
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i as u32))
        .collect();
    let full: u32 = if spec.len() == 32 {
        u32::MAX
    } else {
        (1u32 << spec.len()) - 1
    };

    let mut memo = BTreeMap::new();
    let all = realizable(order, &mut memo);
    // masks of expressions denoting subsets of the spec, smallest rendering kept
    let mut by_mask: BTreeMap<u32, DialogExpr> = BTreeMap::new();
    for (set, term) in all {
        if !set.iter().all(|e| index.contains_key(e)) {
            continue;
        }
        let mask = set.iter().fold(0u32, |m, e| m | 1 << index[e]);
        let e = term_expr(term.clone());
        by_mask
            .entry(mask)
            .and_modify(|cur| {
                if format!("{e}") < format!("{cur}") {
                    *cur = e.clone();
                }
            })
            .or_insert(e);
    }
    let masks: Vec<u32> = by_mask
        .keys()
        .copied()
        .filter(|&m| !by_mask.keys().any(|&o| o != m && o & m == m))
        .collect();

    for k in 1..=result.union.len() {
        let mut pick = Vec::new();
        if cover(full, 0, k, &masks, &mut pick) {
            let witness =
                SpecUnion::new(pick.iter().map(|m| by_mask[m].clone())).expect("same questions");
            return Ok(MinimalityReport {
                result_size: result.union.len(),
                minimum_size: k,
                witness,
            });
        }
    }
    unreachable!("the mined result itself is a cover")
}

fn cover(full: u32, covered: u32, left: usize, masks: &[u32], pick: &mut Vec<u32>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    let bit = (!covered & full).trailing_zeros();
    for &m in masks.iter().filter(|&&m| m >> bit & 1 == 1) {
        pick.push(m);
        if cover(full, covered | m, left - 1, masks, pick) {
            return true;
        }
        pick.pop();
    }
    false
}

type Realized = Vec<(BTreeSet<Episode>, Term)>;

/// Every distinct episode set denotable by a valid term over exactly the
/// questions in `qs`, with one witness each.
fn realizable(qs: &[QuestionId], memo: &mut BTreeMap<Vec<QuestionId>, Realized>) -> Realized {
    let key: Vec<QuestionId> = {
        let mut k = qs.to_vec();
        k.sort();
        k
    };
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    let mut found: BTreeMap<BTreeSet<Episode>, Term> = BTreeMap::new();
    let add = |e: DialogExpr, found: &mut BTreeMap<BTreeSet<Episode>, Term>| {
        if let Ok(set) = episodes_of(&e) {
            if !set.is_empty() {
                found.entry(set).or_insert(Term::Expr(e));
            }
        }
    };
    if qs.len() == 1 {
        let r = vec![(
            core::iter::once(Episode::singles([qs[0].clone()])).collect(),
            Term::Question(qs[0].clone()),
        )];
        memo.insert(key, r.clone());
        return r;
    }
    for perm in permutations(qs.len()) {
        let o: Vec<QuestionId> = perm.iter().map(|&i| key[i].clone()).collect();
        for t in DialogType::ALL {
            add(
                DialogExpr::atomic(t, o.iter().cloned()).unwrap(),
                &mut found,
            );
        }
    }
    // sub-dialog forms: ordered splits into >= 2 blocks, some block >= 2
    for blocks in ordered_splits(&key) {
        if blocks.iter().all(|b| b.len() == 1) {
            continue;
        }
        let options: Vec<Vec<Term>> = blocks
            .iter()
            .map(|b| realizable(b, memo).into_iter().map(|(_, t)| t).collect())
            .collect();
        for terms in cartesian(&options) {
            for t in [
                DialogType::C,
                DialogType::SpePrime,
                DialogType::Pfa,
                DialogType::Spe,
            ] {
                if let Ok(e) = DialogExpr::new(t, terms.clone()) {
                    add(e, &mut found);
                }
            }
        }
    }
    let r: Realized = found.into_iter().collect();
    memo.insert(key, r.clone());
    r
}

/// Ordered set partitions of `qs` into at least two blocks.
fn ordered_splits(qs: &[QuestionId]) -> Vec<Vec<Vec<QuestionId>>> {
    fn go(
        rest: &[QuestionId],
        cur: &mut Vec<Vec<QuestionId>>,
        out: &mut Vec<Vec<Vec<QuestionId>>>,
    ) {
        if rest.is_empty() {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        let n = rest.len();
        for mask in 1..1usize << n {
            let block: Vec<_> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| rest[i].clone())
                .collect();
            let left: Vec<_> = (0..n)
                .filter(|i| mask >> i & 1 == 0)
                .map(|i| rest[i].clone())
                .collect();
            cur.push(block);
            go(&left, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(qs, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_union;
    use crate::rewrite::equivalent;
    use crate::text::{parse_episodes, parse_spec, render_spec};

    fn mined(src: &str) -> (EnumeratedSpec, MineResult) {
        let spec = parse_episodes(src).unwrap();
        let r = mine(&spec);
        assert_eq!(
            enumerate_union(&r.union).unwrap(),
            spec,
            "unsound for {src}"
        );
        (spec, r)
    }

    #[test]
    fn recognizes_interpretation_and_currying() {
        let (_, r) = mined("(((credit-card grade receipt)))");
        assert_eq!(render_spec(&r.union), "(\"I\" credit-card grade receipt)\n");
        assert!(r.minimal_claimed);
        let (_, r) = mined("((credit-card grade receipt))");
        assert_eq!(render_spec(&r.union), "(\"C\" credit-card grade receipt)\n");
    }

    #[test]
    fn recognizes_nested_atm() {
        let (_, r) = mined("((PIN account transaction amount) (PIN transaction account amount))");
        let want = parse_spec(r#"("C" PIN ("SPE'" account transaction) amount)"#).unwrap();
        assert!(equivalent(&r.union, &want).unwrap());
        assert_eq!(r.union.len(), 1);
    }

    #[test]
    fn finds_the_minimal_form_the_heuristic_missed() {
        let (_, r) = mined("((x y z) (y z x))");
        assert_eq!(r.union.len(), 1);
        assert_eq!(render_spec(&r.union), "(\"SPE'\" x (\"C\" y z))\n");
    }

    #[test]
    fn spe_over_two_sub_dialogs() {
        let spec = crate::enumerate::enumerate(
            &crate::text::parse_expr_str(r#"("SPE" ("PE*" a b) ("PE*" c d))"#).unwrap(),
        )
        .unwrap();
        let r = mine(&spec);
        assert_eq!(enumerate_union(&r.union).unwrap(), spec);
        assert_eq!(r.union.len(), 1, "{}", render_spec(&r.union));
    }

    #[test]
    fn falls_back_to_union() {
        let (_, r) = mined(
            "((receipt sandwich beverage dine-in/takeout) (dine-in/takeout sandwich beverage receipt))",
        );
        assert_eq!(r.union.len(), 2);
        assert!(!r.minimal_claimed);
    }

    #[test]
    fn zero_budget_still_sound() {
        let spec = parse_episodes("((a b c) (b a c) ((a b) c))").unwrap();
        let r = mine_with_budget(&spec, 0);
        assert_eq!(enumerate_union(&r.union).unwrap(), spec);
        assert!(r.budget_exhausted);
    }

    #[test]
    fn minimality_of_fallback() {
        let spec = parse_episodes("((x y z) (y z x))").unwrap();
        let fallback = MineResult {
            union: parse_spec(r#"("C" x y z) ("C" y z x)"#).unwrap(),
            minimal_claimed: false,
            budget_exhausted: false,
        };
        let rep = minimality_report(&spec, &fallback).unwrap();
        assert_eq!(rep.minimum_size, 1);
        assert!(!rep.is_minimal());
        assert_eq!(enumerate_union(&rep.witness).unwrap(), spec);

        let (spec, r) =
            mined("((PIN account transaction amount) (PIN transaction account amount))");
        let rep = minimality_report(&spec, &r).unwrap();
        assert!(rep.is_minimal());
        assert_eq!(rep.minimum_size, 1);

        let big = parse_episodes("((a b c d e))").unwrap();
        let r = mine(&big);
        assert_eq!(minimality_report(&big, &r), Err(MinimalityError::TooLarge));
    }

    #[test]
    fn helpers() {
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(4).len(), 15);
    }
}
