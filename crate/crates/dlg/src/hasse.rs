//! Hasse diagrams of specifications in Graphviz DOT.
//!
//! Nodes are utterances; an edge `a -> b` means `a` is answered before `b`
//! in every episode and nothing is forced in between. A specification whose
//! episodes are exactly the linear extensions of one such order is drawn as
//! one graph. Otherwise each expression gets a cluster, and within it each
//! group of episodes that share the same utterances gets its own poset (or,
//! failing that, one chain per episode).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use mixdialog_core::{
    enumerate, enumerate_union, AbstractUtterance, EnumerateError, Episode, SpecUnion,
};

type Element = AbstractUtterance;

/// An order on utterances, as a strict `before` relation.
struct Poset {
    elements: Vec<Element>,
    before: Vec<Vec<bool>>,
}

impl Poset {
    /// The orders common to all `episodes`, which must share one element
    /// set.
    fn common(episodes: &[&Episode]) -> Poset {
        let elements: Vec<Element> = {
            let set: BTreeSet<&Element> = episodes[0].utterances().iter().collect();
            set.into_iter().cloned().collect()
        };
        let n = elements.len();
        let mut before = vec![vec![true; n]; n];
        for (i, row) in before.iter_mut().enumerate() {
            row[i] = false;
        }
        for ep in episodes {
            let pos: BTreeMap<&Element, usize> = ep
                .utterances()
                .iter()
                .enumerate()
                .map(|(k, u)| (u, k))
                .collect();
            for i in 0..n {
                for j in 0..n {
                    if pos[&elements[i]] >= pos[&elements[j]] {
                        before[i][j] = false;
                    }
                }
            }
        }
        Poset { elements, before }
    }

    fn chain(ep: &Episode) -> Poset {
        let elements = ep.utterances().to_vec();
        let n = elements.len();
        let before = (0..n).map(|i| (0..n).map(|j| i < j).collect()).collect();
        Poset { elements, before }
    }

    /// Counts linear extensions by dynamic programming over placed subsets.
    fn linear_extensions(&self) -> u128 {
        let n = self.elements.len();
        if n > 20 {
            return u128::MAX;
        }
        let preds: Vec<u32> = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| self.before[i][j])
                    .fold(0, |m, i| m | 1 << i)
            })
            .collect();
        let mut ways = vec![0u128; 1 << n];
        ways[0] = 1;
        for placed in 0..(1usize << n) {
            if ways[placed] == 0 {
                continue;
            }
            for (j, &p) in preds.iter().enumerate() {
                if placed >> j & 1 == 0 && (p as usize) & placed == p as usize {
                    ways[placed | 1 << j] += ways[placed];
                }
            }
        }
        ways[(1 << n) - 1]
    }

    fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.before[i][j] && !(0..n).any(|k| self.before[i][k] && self.before[k][j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Splits episodes into posets: per shared element set, one poset if its
/// linear extensions are exactly those episodes, else one chain each.
fn posets(episodes: &BTreeSet<Episode>) -> Vec<Poset> {
    let mut groups: BTreeMap<BTreeSet<&Element>, Vec<&Episode>> = BTreeMap::new();
    for ep in episodes {
        groups
            .entry(ep.utterances().iter().collect())
            .or_default()
            .push(ep);
    }
    let mut out = Vec::new();
    for eps in groups.values() {
        let p = Poset::common(eps);
        if p.linear_extensions() == eps.len() as u128 {
            out.push(p);
        } else {
            out.extend(eps.iter().map(|e| Poset::chain(e)));
        }
    }
    out
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

fn write_poset(dot: &mut String, p: &Poset, prefix: &str, indent: &str) {
    for (i, e) in p.elements.iter().enumerate() {
        let _ = writeln!(
            dot,
            "{indent}{prefix}{i} [label={}];",
            quote(&e.to_string())
        );
    }
    for (i, j) in p.covers() {
        let _ = writeln!(dot, "{indent}{prefix}{i} -> {prefix}{j};");
    }
}

/// Renders the DOT text for `u`.
pub fn to_dot(u: &SpecUnion) -> Result<String, EnumerateError> {
    let mut dot = String::from("digraph dialog {\n  rankdir=TB;\n  node [shape=box];\n");
    let all = enumerate_union(u)?;
    let whole = posets(all.episodes());
    if whole.len() == 1 {
        write_poset(&mut dot, &whole[0], "n", "  ");
    } else {
        for (ci, e) in u.exprs().iter().enumerate() {
            let _ = writeln!(dot, "  subgraph cluster_{ci} {{");
            let _ = writeln!(dot, "    label={};", quote(&e.to_string()));
            let ps = posets(enumerate(e)?.episodes());
            for (pi, p) in ps.iter().enumerate() {
                if ps.len() == 1 {
                    write_poset(&mut dot, p, &format!("c{ci}_"), "    ");
                } else {
                    let _ = writeln!(dot, "    subgraph cluster_{ci}_{pi} {{");
                    let _ = writeln!(dot, "      label=\"\";");
                    write_poset(&mut dot, p, &format!("c{ci}_{pi}_"), "      ");
                    let _ = writeln!(dot, "    }}");
                }
            }
            let _ = writeln!(dot, "  }}");
        }
    }
    dot.push_str("}\n");
    Ok(dot)
}
