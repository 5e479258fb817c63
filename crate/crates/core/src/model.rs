//! Questions, utterances, episodes and dialog-type expressions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::ExprError;

/// Returns true for characters allowed in question names and response tokens.
pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | '/')
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_ident_char)
}

macro_rules! token_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Builds the token, or `None` if `s` is not a valid identifier.
            pub fn new(s: &str) -> Option<Self> {
                is_ident(s).then(|| Self(Arc::from(s)))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                Self::new(s).ok_or(())
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

token_newtype!(
    /// Name of a question (a script parameter). Compared case-sensitively.
    QuestionId
);
token_newtype!(
    /// One response value, e.g. `small`.
    Response
);

/// Shorthand used heavily by tests: panics on an invalid name.
pub fn q(name: &str) -> QuestionId {
    QuestionId::new(name).unwrap_or_else(|| panic!("invalid question name {name:?}"))
}

/// The set of responses a question accepts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResponseDomain {
    pub question: QuestionId,
    allowed: BTreeSet<Response>,
}

impl ResponseDomain {
    /// `None` if `allowed` is empty.
    pub fn new(question: QuestionId, allowed: impl IntoIterator<Item = Response>) -> Option<Self> {
        let allowed: BTreeSet<_> = allowed.into_iter().collect();
        (!allowed.is_empty()).then_some(Self { question, allowed })
    }

    pub fn allowed(&self) -> &BTreeSet<Response> {
        &self.allowed
    }

    pub fn contains(&self, r: &Response) -> bool {
        self.allowed.contains(r)
    }
}

/// Domains keyed by question.
pub type Domains = BTreeMap<QuestionId, ResponseDomain>;

/// The question set answered by one user turn.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractUtterance(BTreeSet<QuestionId>);

impl AbstractUtterance {
    /// `None` if the set is empty.
    pub fn new(questions: impl IntoIterator<Item = QuestionId>) -> Option<Self> {
        let set: BTreeSet<_> = questions.into_iter().collect();
        (!set.is_empty()).then_some(Self(set))
    }

    pub fn single(question: QuestionId) -> Self {
        let mut set = BTreeSet::new();
        set.insert(question);
        Self(set)
    }

    pub fn questions(&self) -> &BTreeSet<QuestionId> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, q: &QuestionId) -> bool {
        self.0.contains(q)
    }

    pub fn is_disjoint(&self, other: &AbstractUtterance) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl fmt::Display for AbstractUtterance {
    /// A single question prints bare; several print parenthesized in
    /// alphabetical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0.iter().next().unwrap());
        }
        f.write_str("(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for AbstractUtterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One complete path through a dialog: an ordered sequence of utterances.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Episode(Vec<AbstractUtterance>);

impl Episode {
    pub fn new(utterances: Vec<AbstractUtterance>) -> Self {
        Self(utterances)
    }

    /// An episode answering `questions` one at a time, in order.
    pub fn singles(questions: impl IntoIterator<Item = QuestionId>) -> Self {
        Self(
            questions
                .into_iter()
                .map(AbstractUtterance::single)
                .collect(),
        )
    }

    pub fn utterances(&self) -> &[AbstractUtterance] {
        &self.0
    }

    pub fn into_utterances(self) -> Vec<AbstractUtterance> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Episode) -> Episode {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Episode(v)
    }

    pub fn starts_with(&self, prefix: &[AbstractUtterance]) -> bool {
        self.0.starts_with(prefix)
    }

    /// True if every utterance holds exactly one question.
    pub fn is_all_singles(&self) -> bool {
        self.0.iter().all(|u| u.len() == 1)
    }

    pub fn question_set(&self) -> BTreeSet<QuestionId> {
        self.0.iter().flat_map(|u| u.0.iter().cloned()).collect()
    }
}

impl fmt::Display for Episode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // a lone multi-question utterance still needs the episode's own parens
        f.write_str("(")?;
        for (i, u) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Episode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An explicit, finite set of episodes over a fixed question set.
///
/// `order` remembers the first-seen question order of the input; it is a
/// presentation hint only and does not take part in equality.
#[derive(Clone)]
pub struct EnumeratedSpec {
    order: Vec<QuestionId>,
    episodes: BTreeSet<Episode>,
}

impl EnumeratedSpec {
    /// Checks the coverage invariants. `order` must list every question once.
    pub fn new(
        order: Vec<QuestionId>,
        episodes: BTreeSet<Episode>,
    ) -> Result<Self, crate::error::SpecError> {
        use crate::error::SpecError;
        let questions: BTreeSet<_> = order.iter().cloned().collect();
        if questions.len() != order.len() {
            return Err(SpecError::DuplicateQuestion);
        }
        if episodes.is_empty() {
            return Err(SpecError::NoEpisodes);
        }
        for ep in &episodes {
            let mut seen = BTreeSet::new();
            for u in ep.utterances() {
                for x in u.questions() {
                    if !seen.insert(x.clone()) {
                        return Err(SpecError::OverlappingUtterances(x.clone()));
                    }
                }
            }
            if seen != questions {
                return Err(SpecError::InconsistentCoverage);
            }
        }
        Ok(Self { order, episodes })
    }

    /// Builds from a non-empty episode set, taking question order from the
    /// first episode in set order.
    pub fn from_episodes(episodes: BTreeSet<Episode>) -> Result<Self, crate::error::SpecError> {
        let order = episodes
            .iter()
            .next()
            .map(first_seen_order)
            .unwrap_or_default();
        Self::new(order, episodes)
    }

    pub(crate) fn new_unchecked(order: Vec<QuestionId>, episodes: BTreeSet<Episode>) -> Self {
        Self { order, episodes }
    }

    pub fn order(&self) -> &[QuestionId] {
        &self.order
    }

    pub fn questions(&self) -> BTreeSet<QuestionId> {
        self.order.iter().cloned().collect()
    }

    pub fn episodes(&self) -> &BTreeSet<Episode> {
        &self.episodes
    }

    pub fn into_episodes(self) -> BTreeSet<Episode> {
        self.episodes
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn contains(&self, e: &Episode) -> bool {
        self.episodes.contains(e)
    }
}

impl PartialEq for EnumeratedSpec {
    fn eq(&self, other: &Self) -> bool {
        self.episodes == other.episodes && self.questions() == other.questions()
    }
}

impl Eq for EnumeratedSpec {}

impl fmt::Debug for EnumeratedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.episodes.iter()).finish()
    }
}

/// Question order as first encountered in `ep`; members of a multi-question
/// utterance follow their alphabetical order.
pub fn first_seen_order(ep: &Episode) -> Vec<QuestionId> {
    ep.utterances()
        .iter()
        .flat_map(|u| u.questions().iter().cloned())
        .collect()
}

/// The nine numerator constructors of the notation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DialogType {
    /// Interpretation: everything in one utterance.
    I,
    /// Currying: one response per utterance, fixed order.
    C,
    /// Partial function application: first alone, rest together.
    Pfa,
    /// Partial function application n: a prefix block, then the rest.
    PfaN,
    /// Progressive `PfaN`: any composition of the ordered list.
    PfaNStar,
    /// Single-argument partial evaluation: any one first, rest together.
    Spe,
    /// Single-argument partial evaluation, progressive: every permutation.
    SpePrime,
    /// Partial evaluation: any subset first, rest together.
    Pe,
    /// Progressive partial evaluation: every ordered set partition.
    PeStar,
}

impl DialogType {
    pub const ALL: [DialogType; 9] = [
        DialogType::I,
        DialogType::C,
        DialogType::Pfa,
        DialogType::PfaN,
        DialogType::PfaNStar,
        DialogType::Spe,
        DialogType::SpePrime,
        DialogType::Pe,
        DialogType::PeStar,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DialogType::I => "I",
            DialogType::C => "C",
            DialogType::Pfa => "PFA",
            DialogType::PfaN => "PFA_n",
            DialogType::PfaNStar => "PFA_n*",
            DialogType::Spe => "SPE",
            DialogType::SpePrime => "SPE'",
            DialogType::Pe => "PE",
            DialogType::PeStar => "PE*",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.tag() == tag)
    }

    /// Whether the type's episodes depend on the order of its terms.
    pub fn is_order_sensitive(self) -> bool {
        matches!(
            self,
            DialogType::C | DialogType::Pfa | DialogType::PfaN | DialogType::PfaNStar
        )
    }

    /// Types that may carry sub-expression terms.
    pub fn admits_subdialogs(self) -> bool {
        matches!(
            self,
            DialogType::C | DialogType::SpePrime | DialogType::Pfa | DialogType::Spe
        )
    }
}

impl fmt::Display for DialogType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A term in an expression's denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Question(QuestionId),
    Expr(DialogExpr),
}

impl Term {
    pub fn is_atomic(&self) -> bool {
        matches!(self, Term::Question(_))
    }

    /// Leaf questions in left-to-right order.
    pub fn leaves(&self) -> Vec<QuestionId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<QuestionId>) {
        match self {
            Term::Question(q) => out.push(q.clone()),
            Term::Expr(e) => {
                for t in &e.terms {
                    t.collect_leaves(out);
                }
            }
        }
    }
}

impl From<QuestionId> for Term {
    fn from(q: QuestionId) -> Self {
        Term::Question(q)
    }
}

impl From<DialogExpr> for Term {
    fn from(e: DialogExpr) -> Self {
        Term::Expr(e)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Question(q) => write!(f, "{q}"),
            Term::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A numerator over an ordered, non-empty list of terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DialogExpr {
    numerator: DialogType,
    terms: Vec<Term>,
}

impl DialogExpr {
    /// Validates leaf distinctness and the nesting rules.
    pub fn new(numerator: DialogType, terms: Vec<Term>) -> Result<Self, ExprError> {
        let e = Self { numerator, terms };
        e.validate()?;
        Ok(e)
    }

    /// An expression over atomic terms only.
    pub fn atomic(
        numerator: DialogType,
        questions: impl IntoIterator<Item = QuestionId>,
    ) -> Result<Self, ExprError> {
        Self::new(
            numerator,
            questions.into_iter().map(Term::Question).collect(),
        )
    }

    pub fn numerator(&self) -> DialogType {
        self.numerator
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    /// Leaf questions in left-to-right order.
    pub fn leaves(&self) -> Vec<QuestionId> {
        let mut out = Vec::new();
        for t in &self.terms {
            t.collect_leaves(&mut out);
        }
        out
    }

    pub fn question_set(&self) -> BTreeSet<QuestionId> {
        self.leaves().into_iter().collect()
    }

    pub fn is_all_atomic(&self) -> bool {
        self.terms.iter().all(Term::is_atomic)
    }

    fn validate(&self) -> Result<(), ExprError> {
        let mut seen = BTreeSet::new();
        for leaf in self.leaves() {
            if !seen.insert(leaf.clone()) {
                return Err(ExprError::DuplicateQuestion(leaf));
            }
        }
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<(), ExprError> {
        if self.terms.is_empty() {
            return Err(ExprError::EmptyTerms(self.numerator));
        }
        let subs = self.terms.iter().filter(|t| !t.is_atomic()).count();
        if subs > 0 && !self.numerator.admits_subdialogs() {
            return Err(ExprError::Nesting {
                numerator: self.numerator,
                reason: "requires all terms to be questions",
            });
        }
        if subs >= 2
            && matches!(self.numerator, DialogType::Pfa | DialogType::Spe)
            && self.terms.len() != 2
        {
            return Err(ExprError::Nesting {
                numerator: self.numerator,
                reason: "takes exactly two terms when carrying two sub-dialogs",
            });
        }
        for t in &self.terms {
            if let Term::Expr(e) = t {
                e.validate_shape()?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for DialogExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(\"{}\"", self.numerator.tag())?;
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for DialogExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A union of expressions over one shared question set. Member order is kept
/// for printing; duplicates are dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SpecUnion {
    exprs: Vec<DialogExpr>,
}

impl SpecUnion {
    pub fn new(exprs: impl IntoIterator<Item = DialogExpr>) -> Result<Self, ExprError> {
        let mut out: Vec<DialogExpr> = Vec::new();
        for e in exprs {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        let first = out.first().ok_or(ExprError::EmptyUnion)?.question_set();
        if out.iter().any(|e| e.question_set() != first) {
            return Err(ExprError::MixedQuestionSets);
        }
        Ok(Self { exprs: out })
    }

    pub fn single(expr: DialogExpr) -> Self {
        Self {
            exprs: alloc::vec![expr],
        }
    }

    pub fn exprs(&self) -> &[DialogExpr] {
        &self.exprs
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn question_set(&self) -> BTreeSet<QuestionId> {
        self.exprs[0].question_set()
    }

    /// Leaf order of the first member.
    pub fn question_order(&self) -> Vec<QuestionId> {
        self.exprs[0].leaves()
    }
}

impl fmt::Debug for SpecUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.exprs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tags_round_trip() {
        for t in DialogType::ALL {
            assert_eq!(DialogType::from_tag(t.tag()), Some(t));
        }
        assert_eq!(DialogType::from_tag("pe*"), None);
    }

    #[test]
    fn identifiers() {
        assert!(QuestionId::new("dine-in/takeout").is_some());
        assert!(QuestionId::new("PIN").is_some());
        assert!(QuestionId::new("a b").is_none());
        assert!(QuestionId::new("").is_none());
        assert!(QuestionId::new("x'").is_none());
        assert_ne!(q("PIN"), q("pin"));
    }

    #[test]
    fn nesting_rules() {
        let ab = DialogExpr::atomic(DialogType::C, [q("a"), q("b")]).unwrap();
        let cd = DialogExpr::atomic(DialogType::C, [q("c"), q("d")]).unwrap();
        // I forbids any sub-dialog, even one
        let err =
            DialogExpr::new(DialogType::I, vec![q("x").into(), ab.clone().into()]).unwrap_err();
        assert!(matches!(
            err,
            ExprError::Nesting {
                numerator: DialogType::I,
                ..
            }
        ));
        // PFA with two sub-dialogs needs exactly two terms
        let err = DialogExpr::new(
            DialogType::Pfa,
            vec![ab.clone().into(), cd.clone().into(), q("e").into()],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ExprError::Nesting {
                numerator: DialogType::Pfa,
                ..
            }
        ));
        assert!(
            DialogExpr::new(DialogType::Spe, vec![ab.clone().into(), cd.clone().into()]).is_ok()
        );
        assert!(DialogExpr::new(
            DialogType::C,
            vec![ab.clone().into(), cd.clone().into(), q("e").into()]
        )
        .is_ok());
        let err =
            DialogExpr::new(DialogType::C, vec![ab.clone().into(), q("a").into()]).unwrap_err();
        assert_eq!(err, ExprError::DuplicateQuestion(q("a")));
    }

    #[test]
    fn union_requires_same_questions() {
        let ab = DialogExpr::atomic(DialogType::C, [q("a"), q("b")]).unwrap();
        let ba = DialogExpr::atomic(DialogType::C, [q("b"), q("a")]).unwrap();
        let ac = DialogExpr::atomic(DialogType::C, [q("a"), q("c")]).unwrap();
        assert_eq!(
            SpecUnion::new([ab.clone(), ba.clone(), ab.clone()])
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            SpecUnion::new([ab, ac]).unwrap_err(),
            ExprError::MixedQuestionSets
        );
    }

    #[test]
    fn episode_display() {
        let e = Episode::new(vec![
            AbstractUtterance::single(q("size")),
            AbstractUtterance::new([q("cream"), q("blend")]).unwrap(),
        ]);
        assert_eq!(alloc::format!("{e}"), "(size (blend cream))");
        let whole = Episode::new(vec![AbstractUtterance::new([q("a"), q("b")]).unwrap()]);
        assert_eq!(alloc::format!("{whole}"), "((a b))");
    }
}
