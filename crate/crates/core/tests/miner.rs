mod common;

use common::*;
use mixdialog_core::mine::{mine, minimality_report};
use mixdialog_core::rewrite::equivalent;
use mixdialog_core::{enumerate_union, parse_episodes, parse_spec, render_spec};

#[test]
fn transcripts() {
    for (input, expected) in MINER_CASES {
        let spec = parse_episodes(input).unwrap();
        let r = mine(&spec);
        assert_eq!(
            enumerate_union(&r.union).unwrap(),
            spec,
            "unsound: {}",
            render_spec(&r.union)
        );
        let want = parse_spec(expected).unwrap();
        assert!(
            equivalent(&r.union, &want).unwrap(),
            "got {} want {expected}",
            render_spec(&r.union)
        );
        assert!(r.minimal_claimed);
    }
}

#[test]
fn exact_renderings_of_single_type_results() {
    for (input, out) in [
        (
            "(((credit-card grade receipt)))",
            "(\"I\" credit-card grade receipt)\n",
        ),
        (MINER_CASES[2].0, "(\"PFA_n*\" size blend cream)\n"),
        (PE_STAR_COFFEE, "(\"PE*\" size blend cream)\n"),
        (
            BREAKFAST,
            "(\"SPE'\" (\"PE*\" cream sugar) (\"PE*\" eggs toast))\n",
        ),
    ] {
        assert_eq!(
            render_spec(&mine(&parse_episodes(input).unwrap()).union),
            out
        );
    }
    assert_eq!(parse_episodes(BREAKFAST).unwrap().len(), 18);
}

#[test]
fn three_expression_union() {
    let spec = parse_episodes(THREE_UNION_INPUT).unwrap();
    let r = mine(&spec);
    assert_eq!(enumerate_union(&r.union).unwrap(), spec);
    assert!(r.union.len() <= 3, "{}", render_spec(&r.union));
    assert!(equivalent(&r.union, &parse_spec(THREE_UNION_OUTPUT).unwrap()).unwrap());
    let rep = minimality_report(&spec, &r).unwrap();
    assert!(rep.minimum_size <= r.union.len());
}

#[test]
fn incompleteness_case() {
    let spec = parse_episodes(INCOMPLETE_INPUT).unwrap();
    let r = mine(&spec);
    assert_eq!(enumerate_union(&r.union).unwrap(), spec);
    let minimal = parse_spec(INCOMPLETE_MINIMAL).unwrap();
    let fallback = parse_spec(INCOMPLETE_FALLBACK).unwrap();
    assert!(equivalent(&r.union, &minimal).unwrap());
    assert!(r.union.len() == 1 || r.union == fallback);
}

#[test]
fn deterministic_output() {
    let spec = parse_episodes(BREAKFAST).unwrap();
    assert_eq!(
        render_spec(&mine(&spec).union),
        render_spec(&mine(&spec).union)
    );
}
