//! Property tests over randomly generated valid expressions and unions.

mod common;

use std::collections::BTreeSet;

use common::{random_expr, random_union};
use mixdialog_core::mine::mine;
use mixdialog_core::rewrite::{normalize, normalize_traced, reduce_to_primitives, residual_union};
use mixdialog_core::text::render_episodes;
use mixdialog_core::{
    enumerate, enumerate_union, parse_episodes, parse_spec, render_spec, AbstractUtterance,
    DialogType, EnumeratedSpec, Episode, SpecUnion,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>(), n in 1usize..=5) {
        let u = random_union(&mut rng(seed), n);
        let text = render_spec(&u);
        prop_assert_eq!(parse_spec(&text).unwrap(), u);
    }

    #[test]
    fn episodes_round_trip(seed in any::<u64>(), n in 1usize..=4) {
        let spec = enumerate_union(&random_union(&mut rng(seed), n)).unwrap();
        prop_assert_eq!(parse_episodes(&render_episodes(&spec)).unwrap(), spec);
    }

    #[test]
    fn normalize_is_idempotent_and_sound(seed in any::<u64>(), n in 1usize..=5) {
        let e = random_expr(&mut rng(seed), n);
        let (norm, steps) = normalize_traced(&e);
        prop_assert_eq!(normalize(&norm), norm.clone());
        prop_assert_eq!(enumerate(&norm).unwrap(), enumerate(&e).unwrap());
        for s in steps {
            prop_assert_eq!(enumerate(&s.before).unwrap(), enumerate(&s.after).unwrap(), "{}", s.rule);
        }
    }

    #[test]
    fn primitives_preserve_semantics(seed in any::<u64>(), n in 1usize..=4) {
        let e = random_expr(&mut rng(seed), n);
        let p = reduce_to_primitives(&e).unwrap();
        for m in p.exprs() {
            prop_assert!(matches!(m.numerator(), DialogType::I | DialogType::C));
        }
        prop_assert_eq!(enumerate_union(&p).unwrap(), enumerate(&e).unwrap());
    }

    #[test]
    fn residuals_are_exact(seed in any::<u64>(), n in 2usize..=4, pick in any::<prop::sample::Index>(), cut in any::<prop::sample::Index>()) {
        let u = random_union(&mut rng(seed), n);
        let all = enumerate_union(&u).unwrap();
        let eps: Vec<&Episode> = all.episodes().iter().collect();
        let ep = *pick.get(&eps);
        let k = cut.index(ep.len());
        let history: Vec<AbstractUtterance> = ep.utterances()[..k].to_vec();
        let want: BTreeSet<Episode> = all
            .episodes()
            .iter()
            .filter(|e| e.starts_with(&history))
            .map(|e| Episode::new(e.utterances()[k..].to_vec()))
            .collect();
        match residual_union(&u, &history).unwrap() {
            None => prop_assert!(want.iter().all(Episode::is_empty)),
            Some(r) => {
                let got = enumerate_union(&r).unwrap();
                prop_assert_eq!(got.episodes(), &want);
                for m in r.exprs() {
                    prop_assert_eq!(&normalize(m), m);
                }
            }
        }
    }

    #[test]
    fn miner_is_sound_on_unions(seed in any::<u64>(), n in 1usize..=4) {
        let spec = enumerate_union(&random_union(&mut rng(seed), n)).unwrap();
        let r = mine(&spec);
        prop_assert_eq!(enumerate_union(&r.union).unwrap(), spec.clone());
        prop_assert_eq!(render_spec(&mine(&spec).union), render_spec(&r.union));
    }

    #[test]
    fn miner_round_trips_expressions(seed in any::<u64>(), n in 1usize..=4) {
        let e = random_expr(&mut rng(seed), n);
        let spec = enumerate(&e).unwrap();
        let r = mine(&spec);
        prop_assert_eq!(enumerate_union(&r.union).unwrap(), spec.clone());
        if r.minimal_claimed {
            prop_assert!(r.union.len() <= spec.len());
        }
    }

    #[test]
    fn miner_is_sound_on_pe_star_subsets(mask in 1u16..(1 << 13)) {
        let all = enumerate(&mixdialog_core::text::parse_expr_str(r#"("PE*" a b c)"#).unwrap()).unwrap();
        let eps: BTreeSet<Episode> =
            all.episodes().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone()).collect();
        let spec = EnumeratedSpec::from_episodes(eps).unwrap();
        let r = mine(&spec);
        prop_assert_eq!(enumerate_union(&r.union).unwrap(), spec);
    }
}

#[test]
fn miner_sound_on_every_single_type_spec() {
    for e in common::single_type_corpus(4) {
        let spec = enumerate(&e).unwrap();
        let r = mine(&spec);
        assert_eq!(enumerate_union(&r.union).unwrap(), spec, "{e}");
        assert_eq!(r.union.len(), 1, "{e} mined as {}", render_spec(&r.union));
    }
}

#[test]
fn invalid_inputs_are_classified() {
    for bad in [
        "",
        "(",
        "(\"X\" a)",
        "(\"C\")",
        "(\"C\" a a)",
        "(\"I\" a (\"C\" b c))",
        "(\"PE\" a (\"C\" b c))",
        "(\"PFA\" (\"C\" a b) (\"C\" c d) e)",
        "(\"C\" a b) (\"C\" a c)",
        "(\"C\" a b",
        "(\"C\" a)) x",
    ] {
        assert!(parse_spec(bad).is_err(), "{bad:?}");
    }
    let u: SpecUnion = parse_spec("(\"C\" a b) (\"C\" a b)").unwrap();
    assert_eq!(u.len(), 1);
}
