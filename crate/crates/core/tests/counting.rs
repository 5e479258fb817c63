//! Closed-form counts against expansion, with an independent ordered
//! partition count for PE*.

use mixdialog_core::counting::{episode_count, ordered_bell, space_sizes};
use mixdialog_core::enumerate::brute_force_ordered_partitions;
use mixdialog_core::model::q;
use mixdialog_core::{enumerate, DialogExpr, DialogType};
use num_bigint::BigUint;

fn qs(n: usize) -> Vec<mixdialog_core::QuestionId> {
    (0..n).map(|i| q(&format!("q{i}"))).collect()
}

/// Number of surjections from an n-set onto k ranks, by inclusion-exclusion.
fn fubini_oracle(n: u32) -> u64 {
    let binom = |a: u64, b: u64| (0..b).fold(1u64, |acc, i| acc * (a - i) / (i + 1));
    (1..=n as u64)
        .map(|k| {
            let s: i64 = (0..=k)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    sign * binom(k, j) as i64 * (k - j).pow(n) as i64
                })
                .sum();
            s as u64
        })
        .sum()
}

#[test]
fn per_type_counts_q1_to_6() {
    for n in 1..=6usize {
        let closed = |t: DialogType| -> u64 {
            let nn = n as u64;
            match t {
                DialogType::I | DialogType::C | DialogType::Pfa => 1,
                DialogType::PfaN | DialogType::Spe => nn,
                DialogType::PfaNStar => 1 << (n - 1),
                DialogType::SpePrime => (1..=nn).product(),
                DialogType::Pe => (1 << n) - 1,
                DialogType::PeStar => fubini_oracle(n as u32),
            }
        };
        for t in DialogType::ALL {
            let e = DialogExpr::atomic(t, qs(n)).unwrap();
            let got = enumerate(&e).unwrap().len() as u64;
            assert_eq!(got, closed(t), "{t} q={n}");
            assert_eq!(episode_count(t, n), BigUint::from(got), "{t} q={n}");
        }
        let pe_star = enumerate(&DialogExpr::atomic(DialogType::PeStar, qs(n)).unwrap()).unwrap();
        assert_eq!(pe_star, brute_force_ordered_partitions(&qs(n)).unwrap());
    }
    let fubini: Vec<u64> = (1..=6).map(fubini_oracle).collect();
    assert_eq!(fubini, [1, 3, 13, 75, 541, 4683]);
    for n in 1..=6 {
        assert_eq!(ordered_bell(n), BigUint::from(fubini[n - 1]));
    }
}

#[test]
fn space_sizes_q3() {
    let s = space_sizes(3).unwrap();
    assert_eq!(s.single_type, BigUint::from(33u32));
    assert_eq!(s.universe, BigUint::from(8191u32));
}
