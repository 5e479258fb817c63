//! Staging: running a dialog specification as a live session.
//!
//! A [`StagerPlan`] pairs a normalized specification with the script it
//! partially evaluates. A session accepts an utterance only if the answered
//! key-sets so far, extended by it, begin some episode of a still-live member
//! of the union; the script is then mixed with the utterance's bindings.
//! Members of the form `PE*` over all questions are run unrestricted, as any
//! split of the unanswered questions is a valid next utterance there.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::enumerate::{enumerate_union, episodes_of};
use crate::error::EnumerateError;
use crate::model::{
    AbstractUtterance, DialogType, Domains, Episode, QuestionId, Response, SpecUnion,
};
use crate::peval::{
    make_script, mix, Action, Bindings, Completion, MixOutcome, Script, StaticAssignment,
};
use crate::rewrite::{normalize, residual_union, RewriteError};

/// One user turn: a non-empty set of question/response bindings.
pub type Utterance = StaticAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Any in-domain answer to unanswered questions is accepted.
    Unrestricted,
    /// Utterances are checked against the member's episodes.
    Guarded,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Unrestricted => "unrestricted",
            Mode::Guarded => "guarded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanMember {
    pub expr: crate::model::DialogExpr,
    pub mode: Mode,
    /// Episodes of a guarded member; empty for unrestricted ones.
    episodes: BTreeSet<Episode>,
}

impl PlanMember {
    fn admits_prefix(&self, prefix: &[AbstractUtterance]) -> bool {
        match self.mode {
            Mode::Unrestricted => true,
            Mode::Guarded => first_with_prefix(&self.episodes, prefix).is_some(),
        }
    }

    /// Questions that begin some continuation of `prefix`.
    fn next_questions(
        &self,
        prefix: &[AbstractUtterance],
        open: &BTreeSet<QuestionId>,
        out: &mut BTreeSet<QuestionId>,
    ) {
        match self.mode {
            Mode::Unrestricted => out.extend(open.iter().cloned()),
            Mode::Guarded => {
                let start = Episode::new(prefix.to_vec());
                for e in self
                    .episodes
                    .range(start..)
                    .take_while(|e| e.starts_with(prefix))
                {
                    if let Some(u) = e.utterances().get(prefix.len()) {
                        out.extend(u.questions().iter().cloned());
                    }
                }
            }
        }
    }
}

/// Episodes sort lexicographically, so all extensions of `prefix` follow it
/// contiguously.
fn first_with_prefix<'a>(
    set: &'a BTreeSet<Episode>,
    prefix: &[AbstractUtterance],
) -> Option<&'a Episode> {
    set.range(Episode::new(prefix.to_vec())..)
        .next()
        .filter(|e| e.starts_with(prefix))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagerPlan {
    spec: SpecUnion,
    template: Script,
    members: Vec<PlanMember>,
}

impl StagerPlan {
    pub fn spec(&self) -> &SpecUnion {
        &self.spec
    }

    pub fn template(&self) -> &Script {
        &self.template
    }

    pub fn members(&self) -> &[PlanMember] {
        &self.members
    }

    pub fn questions(&self) -> BTreeSet<QuestionId> {
        self.spec.question_set()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StagerError {
    #[error("no domain for question {0}")]
    MissingDomain(QuestionId),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
}

pub fn compile_stager(
    u: &SpecUnion,
    domains: &Domains,
    action: Action,
) -> Result<StagerPlan, StagerError> {
    let spec = SpecUnion::new(u.exprs().iter().map(normalize))
        .expect("normalizing keeps the question set");
    let order = spec.question_order();
    if let Some(x) = order.iter().find(|x| !domains.contains_key(*x)) {
        return Err(StagerError::MissingDomain(x.clone()));
    }
    let template =
        make_script(&order, domains, action).expect("leaves are distinct and have domains");
    let members = spec
        .exprs()
        .iter()
        .map(|e| {
            let unrestricted = e.numerator() == DialogType::PeStar && e.is_all_atomic();
            Ok(if unrestricted {
                PlanMember {
                    expr: e.clone(),
                    mode: Mode::Unrestricted,
                    episodes: BTreeSet::new(),
                }
            } else {
                PlanMember {
                    expr: e.clone(),
                    mode: Mode::Guarded,
                    episodes: episodes_of(e)?,
                }
            })
        })
        .collect::<Result<Vec<_>, EnumerateError>>()?;
    Ok(StagerPlan {
        spec,
        template,
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stage {
    Open(Script),
    Done(Completion),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Snapshot {
    stage: Stage,
    history: Vec<Bindings>,
    live: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RejectReason {
    AlreadyAnswered(QuestionId),
    /// The response is not in the question's domain, or the question is not
    /// part of the dialog at all (`response` is then `None`).
    OutOfDomain {
        question: QuestionId,
        response: Option<Response>,
    },
    /// Some question in the utterance cannot be answered yet.
    OrderViolation(QuestionId),
    /// Each question could come next, but not in this combination.
    CombinationViolation,
}

impl RejectReason {
    pub fn kind(&self) -> &'static str {
        match self {
            RejectReason::AlreadyAnswered(_) => "already-answered",
            RejectReason::OutOfDomain { .. } => "out-of-domain",
            RejectReason::OrderViolation(_) => "order-violation",
            RejectReason::CombinationViolation => "combination-violation",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::AlreadyAnswered(x) => write!(f, "{x} is already answered"),
            RejectReason::OutOfDomain {
                question,
                response: Some(r),
            } => {
                write!(f, "{r} is not a valid response to {question}")
            }
            RejectReason::OutOfDomain {
                question,
                response: None,
            } => write!(f, "unknown question {question}"),
            RejectReason::OrderViolation(x) => write!(f, "{x} cannot be answered yet"),
            RejectReason::CombinationViolation => {
                f.write_str("these questions cannot be answered together now")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accepted,
    Rejected(RejectReason),
    Completed(Completion),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub outcome: Outcome,
    pub prompt: BTreeSet<QuestionId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("nothing to {0}")]
pub struct EmptyStack(pub &'static str);

/// Two sessions of one plan with equal fingerprints accept the same futures.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint {
    pub history: Vec<AbstractUtterance>,
    pub open: BTreeSet<QuestionId>,
    pub live: Vec<usize>,
}

/// A running session. Cloning is cheap relative to the plan, which is shared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    plan: Arc<StagerPlan>,
    current: Snapshot,
    undo: Vec<Snapshot>,
    redo: Vec<Snapshot>,
}

pub fn start_session(plan: Arc<StagerPlan>) -> SessionState {
    let current = Snapshot {
        stage: Stage::Open(plan.template.clone()),
        history: Vec::new(),
        live: (0..plan.members.len()).collect(),
    };
    SessionState {
        plan,
        current,
        undo: Vec::new(),
        redo: Vec::new(),
    }
}

/// Functional form of [`SessionState::step`].
pub fn step(s: &SessionState, utt: &Utterance) -> (SessionState, StepResult) {
    let mut next = s.clone();
    let r = next.step(utt);
    (next, r)
}

impl SessionState {
    pub fn plan(&self) -> &Arc<StagerPlan> {
        &self.plan
    }

    pub fn stage(&self) -> &Stage {
        &self.current.stage
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.current.stage, Stage::Done(_))
    }

    pub fn completion(&self) -> Option<&Completion> {
        match &self.current.stage {
            Stage::Done(c) => Some(c),
            Stage::Open(_) => None,
        }
    }

    /// Accepted utterances, oldest first.
    pub fn history(&self) -> &[Bindings] {
        &self.current.history
    }

    pub fn abstract_history(&self) -> Vec<AbstractUtterance> {
        self.current.history.iter().map(key_set).collect()
    }

    /// Indices into the plan's members still consistent with the history.
    pub fn live(&self) -> &[usize] {
        &self.current.live
    }

    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.redo.is_empty()
    }

    fn answered(&self) -> BTreeSet<QuestionId> {
        self.current
            .history
            .iter()
            .flat_map(|b| b.keys().cloned())
            .collect()
    }

    fn open(&self) -> BTreeSet<QuestionId> {
        match &self.current.stage {
            Stage::Open(s) => s.open().cloned().collect(),
            Stage::Done(_) => BTreeSet::new(),
        }
    }

    /// Questions that begin at least one valid continuation.
    pub fn askable(&self) -> BTreeSet<QuestionId> {
        let open = self.open();
        if open.is_empty() {
            return open;
        }
        let prefix = self.abstract_history();
        let mut out = BTreeSet::new();
        for &i in &self.current.live {
            self.plan.members[i].next_questions(&prefix, &open, &mut out);
        }
        out
    }

    /// Offers an utterance. On rejection the state is left untouched.
    pub fn step(&mut self, utt: &Utterance) -> StepResult {
        match self.check(utt) {
            Err(reason) => StepResult {
                outcome: Outcome::Rejected(reason),
                prompt: self.askable(),
            },
            Ok(live) => {
                let Stage::Open(script) = &self.current.stage else {
                    unreachable!("checked open")
                };
                let stage = match mix(script, utt).expect("bindings were checked") {
                    MixOutcome::Residual(s) => Stage::Open(s),
                    MixOutcome::Complete(c) => Stage::Done(c),
                };
                let mut history = self.current.history.clone();
                history.push(utt.bindings().clone());
                let prev = core::mem::replace(
                    &mut self.current,
                    Snapshot {
                        stage,
                        history,
                        live,
                    },
                );
                self.undo.push(prev);
                self.redo.clear();
                let outcome = match &self.current.stage {
                    Stage::Done(c) => Outcome::Completed(c.clone()),
                    Stage::Open(_) => Outcome::Accepted,
                };
                StepResult {
                    outcome,
                    prompt: self.askable(),
                }
            }
        }
    }

    /// Decides acceptance; returns the members that stay live.
    fn check(&self, utt: &Utterance) -> Result<Vec<usize>, RejectReason> {
        let answered = self.answered();
        if let Some(x) = utt.bindings().keys().find(|x| answered.contains(*x)) {
            return Err(RejectReason::AlreadyAnswered(x.clone()));
        }
        let Stage::Open(script) = &self.current.stage else {
            // every question is answered, so any known key was caught above
            let x = utt.bindings().keys().next().unwrap().clone();
            return Err(RejectReason::OutOfDomain {
                question: x,
                response: None,
            });
        };
        for (x, r) in utt.bindings() {
            match script.domain(x) {
                None => {
                    return Err(RejectReason::OutOfDomain {
                        question: x.clone(),
                        response: None,
                    })
                }
                Some(d) if !d.contains(r) => {
                    return Err(RejectReason::OutOfDomain {
                        question: x.clone(),
                        response: Some(r.clone()),
                    })
                }
                Some(_) => {}
            }
        }
        let askable = self.askable();
        if let Some(x) = utt.bindings().keys().find(|x| !askable.contains(*x)) {
            return Err(RejectReason::OrderViolation(x.clone()));
        }
        let mut prefix = self.abstract_history();
        prefix.push(key_set(utt.bindings()));
        let live: Vec<usize> = self
            .current
            .live
            .iter()
            .copied()
            .filter(|&i| self.plan.members[i].admits_prefix(&prefix))
            .collect();
        if live.is_empty() {
            return Err(RejectReason::CombinationViolation);
        }
        Ok(live)
    }

    /// Everything the set of future accepted traces depends on.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            history: self.abstract_history(),
            open: self.open(),
            live: self.current.live.clone(),
        }
    }

    pub fn undo(&mut self) -> Result<(), EmptyStack> {
        let prev = self.undo.pop().ok_or(EmptyStack("undo"))?;
        self.redo.push(core::mem::replace(&mut self.current, prev));
        Ok(())
    }

    pub fn redo(&mut self) -> Result<(), EmptyStack> {
        let next = self.redo.pop().ok_or(EmptyStack("redo"))?;
        self.undo.push(core::mem::replace(&mut self.current, next));
        Ok(())
    }

    /// The specification of what remains, re-layered where possible; `None`
    /// once the dialog is complete.
    pub fn residual_spec(&self) -> Result<Option<SpecUnion>, RewriteError> {
        residual_union(&self.plan.spec, &self.abstract_history())
    }
}

fn key_set(b: &Bindings) -> AbstractUtterance {
    AbstractUtterance::new(b.keys().cloned()).expect("utterances are non-empty")
}

/// Episodes a candidate stages beyond a target (excess) and target episodes
/// it misses (deficit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcessDeficit {
    pub excess: BTreeSet<Episode>,
    pub deficit: BTreeSet<Episode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("candidate and target are over different questions")]
    QuestionMismatch,
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
}

pub fn analyze_excess_deficit(
    candidate: &SpecUnion,
    target: &crate::model::EnumeratedSpec,
) -> Result<ExcessDeficit, AnalysisError> {
    if candidate.question_set() != target.questions() {
        return Err(AnalysisError::QuestionMismatch);
    }
    let staged = enumerate_union(candidate)?;
    Ok(ExcessDeficit {
        excess: staged
            .episodes()
            .difference(target.episodes())
            .cloned()
            .collect(),
        deficit: target
            .episodes()
            .difference(staged.episodes())
            .cloned()
            .collect(),
    })
}

/// Drives a fresh session over every possible utterance sequence and returns
/// the key-set sequences that complete. Values are taken from each domain's
/// smallest response; acceptance never depends on which in-domain value is
/// used. Exponential in the number of questions.
pub fn accepted_traces(plan: &Arc<StagerPlan>) -> BTreeSet<Episode> {
    fn go(s: &SessionState, trace: &mut Vec<AbstractUtterance>, out: &mut BTreeSet<Episode>) {
        let open: Vec<QuestionId> = s.open().into_iter().collect();
        let Stage::Open(script) = s.stage() else {
            unreachable!()
        };
        for mask in 1u32..1 << open.len() {
            let bindings: Bindings = open
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, x)| {
                    (
                        x.clone(),
                        script
                            .domain(x)
                            .unwrap()
                            .allowed()
                            .iter()
                            .next()
                            .unwrap()
                            .clone(),
                    )
                })
                .collect();
            let utt = StaticAssignment::new(bindings).unwrap();
            let (next, r) = step(s, &utt);
            match r.outcome {
                Outcome::Rejected(_) => continue,
                Outcome::Accepted => {
                    trace.push(key_set(utt.bindings()));
                    go(&next, trace, out);
                    trace.pop();
                }
                Outcome::Completed(_) => {
                    trace.push(key_set(utt.bindings()));
                    out.insert(Episode::new(trace.clone()));
                    trace.pop();
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(&start_session(plan.clone()), &mut Vec::new(), &mut out);
    out
}
