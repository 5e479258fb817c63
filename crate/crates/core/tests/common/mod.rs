//! Seeded generators of valid expressions and unions for property tests.
#![allow(dead_code)]

use mixdialog_core::model::q;
use mixdialog_core::{enumerate, DialogExpr, DialogType, QuestionId, SpecUnion, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn questions(n: usize) -> Vec<QuestionId> {
    NAMES[..n].iter().map(|s| q(s)).collect()
}

fn split<R: Rng>(rng: &mut R, qs: &[QuestionId], k: usize) -> Vec<Vec<QuestionId>> {
    // k - 1 distinct cut points
    let mut cuts: Vec<usize> = (1..qs.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort();
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([qs.len()]) {
        out.push(qs[start..c].to_vec());
        start = c;
    }
    out
}

/// A random term over exactly `qs` that enumerates successfully.
pub fn random_term<R: Rng>(rng: &mut R, qs: &[QuestionId], depth: usize) -> Term {
    if qs.len() == 1 {
        return Term::Question(qs[0].clone());
    }
    loop {
        let t = DialogType::ALL[rng.gen_range(0..DialogType::ALL.len())];
        let mut shuffled = qs.to_vec();
        shuffled.shuffle(rng);
        let nest = t.admits_subdialogs() && qs.len() >= 3 && depth < 2 && rng.gen_bool(0.5);
        let terms: Vec<Term> = if nest {
            let k = if matches!(t, DialogType::Pfa | DialogType::Spe) {
                2
            } else {
                rng.gen_range(2..qs.len())
            };
            split(rng, &shuffled, k)
                .iter()
                .map(|chunk| random_term(rng, chunk, depth + 1))
                .collect()
        } else {
            shuffled.into_iter().map(Term::Question).collect()
        };
        if let Ok(e) = DialogExpr::new(t, terms) {
            if enumerate(&e).is_ok() {
                return Term::Expr(e);
            }
        }
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, n: usize) -> DialogExpr {
    match random_term(rng, &questions(n), 0) {
        Term::Expr(e) => e,
        Term::Question(x) => DialogExpr::atomic(DialogType::C, [x]).unwrap(),
    }
}

/// A union of 2 to 4 random expressions over `n` questions.
pub fn random_union<R: Rng>(rng: &mut R, n: usize) -> SpecUnion {
    let k = rng.gen_range(2..=4);
    SpecUnion::new((0..k).map(|_| random_expr(rng, n))).unwrap()
}

fn permutations_of(qs: &[QuestionId]) -> Vec<Vec<QuestionId>> {
    if qs.len() <= 1 {
        return vec![qs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..qs.len() {
        let mut rest = qs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations_of(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// Every single-type expression over 1..=max_q questions, in every term order.
pub fn single_type_corpus(max_q: usize) -> Vec<DialogExpr> {
    let mut out = Vec::new();
    for n in 1..=max_q {
        for t in DialogType::ALL {
            for p in permutations_of(&questions(n)) {
                out.push(DialogExpr::atomic(t, p).unwrap());
            }
        }
    }
    out
}

/// The six worked dialogs: gas, ATM, lunch, breakfast, coffee, and the
/// three-way coffee union.
pub const TABLE_EXAMPLES: [&str; 6] = [
    r#"("C" credit-card grade receipt)"#,
    r#"("C" PIN ("SPE'" transaction account) amount)"#,
    r#"("C" receipt sandwich drink dine-in/take-out) ("C" dine-in/take-out sandwich drink receipt)"#,
    r#"("SPE'" ("PE*" cream sugar) ("PE*" eggs toast))"#,
    r#"("PE*" size blend cream)"#,
    r#"("C" size ("SPE" blend cream)) ("C" blend ("SPE" cream size)) ("C" cream blend size)"#,
];

/// Ordered set partitions of `0..n` as rank vectors: slot i is answered in
/// block `ranks[i]`, and the ranks used are exactly `0..k`.
pub fn rank_vectors(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for code in 0..n.pow(n as u32) {
        let ranks: Vec<usize> = (0..n).map(|i| code / n.pow(i as u32) % n).collect();
        let k = ranks.iter().max().unwrap() + 1;
        if (0..k).all(|b| ranks.contains(&b)) {
            out.push(ranks);
        }
    }
    out
}

pub const PE_STAR_COFFEE: &str = "((size blend cream) (size cream blend) (blend size cream) (blend cream size)
  (cream size blend) (cream blend size) ((size blend) cream) (cream (size blend)) (size (blend cream))
  ((blend cream) size) ((size cream) blend) (blend (size cream)) ((size blend cream)))";

pub const BREAKFAST: &str =
    "((cream sugar eggs toast) (cream sugar toast eggs) (sugar cream eggs toast)
  (sugar cream toast eggs) (eggs toast sugar cream) (eggs toast cream sugar)
  (eggs toast (cream sugar)) (toast eggs sugar cream) (toast eggs cream sugar)
  (toast eggs (cream sugar)) ((cream sugar) eggs toast) ((cream sugar) toast eggs)
  (cream sugar (eggs toast)) (sugar cream (eggs toast)) ((cream sugar) (eggs toast))
  ((eggs toast) (cream sugar)) ((eggs toast) cream sugar) ((eggs toast) sugar cream))";

/// Mining transcripts with a single-expression answer: (input, expected).
pub const MINER_CASES: [(&str, &str); 7] = [
    ("(((credit-card grade receipt)))", r#"("I" credit-card grade receipt)"#),
    ("((credit-card grade receipt))", r#"("C" credit-card grade receipt)"#),
    (
        "((size blend cream) ((size blend) cream) (size (blend cream)) ((size blend cream)))",
        r#"("PFA_n*" size blend cream)"#,
    ),
    (
        "((size blend cream) (size cream blend) (blend size cream) (blend cream size) (cream size blend) (cream blend size))",
        r#"("SPE'" size blend cream)"#,
    ),
    (PE_STAR_COFFEE, r#"("PE*" blend cream size)"#),
    (
        "((PIN account transaction amount) (PIN transaction account amount))",
        r#"("C" PIN ("SPE'" account transaction) amount)"#,
    ),
    (BREAKFAST, r#"("SPE'" ("PE*" cream sugar) ("PE*" eggs toast))"#),
];

pub const THREE_UNION_INPUT: &str =
    "((size blend cream) (size cream blend) (blend cream size) (cream blend size) (blend size cream))";
pub const THREE_UNION_OUTPUT: &str =
    r#"("C" ("SPE'" size blend) cream) ("C" size cream blend) ("C" ("SPE'" blend cream) size)"#;

pub const INCOMPLETE_INPUT: &str = "((x y z) (y z x))";
pub const INCOMPLETE_MINIMAL: &str = r#"("SPE'" x ("C" y z))"#;
pub const INCOMPLETE_FALLBACK: &str = r#"("C" x y z) ("C" y z x)"#;
