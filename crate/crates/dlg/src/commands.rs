//! The batch subcommands. Each takes file contents and writes its report to
//! `out`, returning the process exit code: 0 for success, 1 when a check
//! finds a difference. Errors are input errors (exit code 2).

use std::io::Write;

use anyhow::{bail, Context, Result};
use mixdialog_core::counting::{class_size, count_table, factorial, ordered_bell, space_sizes};
use mixdialog_core::mine::mine;
use mixdialog_core::rewrite::{normalize_traced, reduce_to_primitives, residual_union};
use mixdialog_core::stager::analyze_excess_deficit;
use mixdialog_core::text::{render_episodes, sorted_episode_lines};
use mixdialog_core::{
    enumerate_union, parse_episodes, parse_spec, render_spec, DialogType, SpecUnion,
};
use num_bigint::BigUint;

/// Exit code for a successful run or an empty difference.
pub const EXIT_OK: u8 = 0;
/// Exit code when `check` finds excess or deficit episodes.
pub const EXIT_DIFF: u8 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;

/// Largest question count `count` accepts.
pub const COUNT_MAX_Q: usize = 20;

/// Universes with more bits than this are printed as `2^N - 1`.
const PRINT_MAX_BITS: usize = 256;

pub fn enumerate(spec_text: &str, as_file: bool, out: &mut dyn Write) -> Result<u8> {
    let u = parse_spec(spec_text)?;
    let spec = enumerate_union(&u)?;
    if as_file {
        out.write_all(render_episodes(&spec).as_bytes())?;
    } else {
        for line in sorted_episode_lines(&spec) {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "# episodes: {}", spec.len())?;
    }
    Ok(EXIT_OK)
}

pub fn mine_cmd(episodes_text: &str, out: &mut dyn Write) -> Result<u8> {
    let spec = parse_episodes(episodes_text)?;
    let r = mine(&spec);
    out.write_all(render_spec(&r.union).as_bytes())?;
    writeln!(
        out,
        "minimal: {}",
        if r.minimal_claimed { "yes" } else { "unknown" }
    )?;
    Ok(EXIT_OK)
}

pub fn check(spec_text: &str, episodes_text: &str, out: &mut dyn Write) -> Result<u8> {
    let u = parse_spec(spec_text).context("spec")?;
    let target = parse_episodes(episodes_text).context("episodes")?;
    let ed = analyze_excess_deficit(&u, &target)?;
    for (name, set) in [("excess", &ed.excess), ("deficit", &ed.deficit)] {
        writeln!(out, "{name}: {}", set.len())?;
        let mut lines: Vec<String> = set.iter().map(|e| e.to_string()).collect();
        lines.sort();
        for l in lines {
            writeln!(out, "  {l}")?;
        }
    }
    Ok(if ed.excess.is_empty() && ed.deficit.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIFF
    })
}

pub fn count(q: usize, only: Option<DialogType>, out: &mut dyn Write) -> Result<u8> {
    if !(1..=COUNT_MAX_Q).contains(&q) {
        bail!("q must be between 1 and {COUNT_MAX_Q}");
    }
    writeln!(out, "q: {q}")?;
    let table = count_table(q);
    for (t, n) in &table.counts {
        if only.is_none_or(|o| o == *t) {
            writeln!(out, "{:<8}{n}", t.tag())?;
        }
    }
    if q < 3 {
        return Ok(EXIT_OK);
    }
    if let Some(t) = only {
        writeln!(out, "class_size: {}", class_size(t, q)?)?;
        return Ok(EXIT_OK);
    }
    let d_cmi = ordered_bell(q);
    writeln!(out, "d_cmi: {d_cmi}")?;
    if d_cmi <= BigUint::from(PRINT_MAX_BITS) {
        let s = space_sizes(q)?;
        writeln!(out, "universe: {}", s.universe)?;
        writeln!(out, "single_type: {}", s.single_type)?;
        writeln!(out, "delta_paper: {}", s.delta_paper)?;
    } else {
        let single = BigUint::from(4u32) * factorial(q) + BigUint::from(q + 6);
        writeln!(out, "universe: 2^{d_cmi} - 1")?;
        writeln!(out, "single_type: {single}")?;
        writeln!(out, "delta_paper: 2^{d_cmi} - {single}")?;
    }
    Ok(EXIT_OK)
}

/// Prints the normalized form, optionally with the rule trace, the
/// primitive reduction, or the residual after a history of utterances
/// written like one episode's items (`d (a b)`).
pub fn rewrite(
    spec_text: &str,
    trace: bool,
    primitives: bool,
    after: Option<&str>,
    out: &mut dyn Write,
) -> Result<u8> {
    let u = parse_spec(spec_text)?;
    if let Some(h) = after {
        let ep = parse_episodes(&format!("(({h}))")).context("history")?;
        let history = ep
            .episodes()
            .iter()
            .next()
            .expect("one episode")
            .utterances()
            .to_vec();
        match residual_union(&u, &history)? {
            Some(r) => out.write_all(render_spec(&r).as_bytes())?,
            None => writeln!(out, "complete")?,
        }
        return Ok(EXIT_OK);
    }
    let mut normalized = Vec::new();
    for e in u.exprs() {
        let (n, steps) = normalize_traced(e);
        if trace {
            for s in steps {
                writeln!(out, "; {}: {} => {}", s.rule, s.before, s.after)?;
            }
        }
        normalized.push(n);
    }
    let n = SpecUnion::new(normalized)?;
    if primitives {
        let mut prims = Vec::new();
        for e in n.exprs() {
            prims.extend(reduce_to_primitives(e)?.exprs().iter().cloned());
        }
        out.write_all(render_spec(&SpecUnion::new(prims)?).as_bytes())?;
    } else {
        out.write_all(render_spec(&n).as_bytes())?;
    }
    Ok(EXIT_OK)
}
