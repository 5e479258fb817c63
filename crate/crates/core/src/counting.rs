//! Closed-form episode counts, Stirling/Bell numbers, and the sizes of the
//! dialog classes and of the whole dialog space.

use alloc::collections::BTreeMap;
use alloc::vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::model::DialogType;

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Stirling number of the second kind: partitions of an `m`-set into `n`
/// non-empty blocks. `S(0, 0) = 1`.
pub fn stirling2(m: usize, n: usize) -> BigUint {
    if n > m {
        return BigUint::zero();
    }
    // row-by-row S(i, j) = j S(i-1, j) + S(i-1, j-1)
    let mut row = vec![BigUint::zero(); n + 1];
    row[0] = BigUint::one();
    for i in 1..=m {
        for j in (1..=n.min(i)).rev() {
            row[j] = &row[j] * BigUint::from(j) + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    row[n].clone()
}

/// Bell number: all partitions of an `m`-set.
pub fn bell(m: usize) -> BigUint {
    (0..=m).map(|n| stirling2(m, n)).sum()
}

/// Ordered Bell (Fubini) number: ordered set partitions of a `q`-set.
/// `ordered_bell(0) = 1`.
pub fn ordered_bell(q: usize) -> BigUint {
    (0..=q).map(|p| factorial(p) * stirling2(q, p)).sum()
}

/// Episodes in a dialog of one type over `q` atomic questions.
pub fn episode_count(t: DialogType, q: usize) -> BigUint {
    assert!(q >= 1, "episode counts are defined for q >= 1");
    match t {
        DialogType::I | DialogType::C | DialogType::Pfa => BigUint::one(),
        DialogType::PfaN | DialogType::Spe => BigUint::from(q),
        DialogType::PfaNStar => BigUint::one() << (q - 1),
        DialogType::SpePrime => factorial(q),
        DialogType::Pe => (1..=q).map(|p| binomial(q, p)).sum(),
        DialogType::PeStar => ordered_bell(q),
    }
}

/// Per-type episode counts for one question count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub q: usize,
    pub counts: BTreeMap<DialogType, BigUint>,
}

pub fn count_table(q: usize) -> CountTable {
    CountTable {
        q,
        counts: DialogType::ALL
            .into_iter()
            .map(|t| (t, episode_count(t, q)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SizeError {
    /// Below three questions some specifications belong to several classes.
    #[error("q = {0}: specifications are multi-classified below three questions")]
    MultiClassified(usize),
    #[error("q = {q} exceeds the limit of {limit}")]
    TooLarge { q: usize, limit: usize },
}

/// Number of distinct specifications in the class of type `t`.
pub fn class_size(t: DialogType, q: usize) -> Result<BigUint, SizeError> {
    if q < 3 {
        return Err(SizeError::MultiClassified(q));
    }
    Ok(match t {
        DialogType::I
        | DialogType::Spe
        | DialogType::SpePrime
        | DialogType::Pe
        | DialogType::PeStar => BigUint::one(),
        DialogType::Pfa => BigUint::from(q),
        DialogType::C | DialogType::PfaN | DialogType::PfaNStar => factorial(q),
    })
}

/// Sizes of the dialog space over `q` questions.
///
/// `delta_paper` is `2^d_cmi - 4q! - q - 6`, which is one more than
/// `universe - single_type`. Both are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceSizes {
    pub q: usize,
    pub d_cmi: BigUint,
    pub universe: BigUint,
    pub single_type: BigUint,
    pub delta_paper: BigUint,
}

/// Largest `q` whose universe (a `2^ordered_bell(q)`-sized number) we build.
pub const SPACE_SIZE_MAX_Q: usize = 10;

pub fn space_sizes(q: usize) -> Result<SpaceSizes, SizeError> {
    if q < 3 {
        return Err(SizeError::MultiClassified(q));
    }
    if q > SPACE_SIZE_MAX_Q {
        return Err(SizeError::TooLarge {
            q,
            limit: SPACE_SIZE_MAX_Q,
        });
    }
    let d_cmi = ordered_bell(q);
    let bits: usize = d_cmi.iter_u64_digits().next().unwrap_or(0) as usize;
    let pow = BigUint::one() << bits;
    let universe = &pow - BigUint::one();
    let single_type = BigUint::from(4u32) * factorial(q) + BigUint::from(q + 6);
    let delta_paper = pow - &single_type;
    Ok(SpaceSizes {
        q,
        d_cmi,
        universe,
        single_type,
        delta_paper,
    })
}
