//! Deterministic train/val/test splits.
//!
//! The protocol is pinned down to the bit so a split file can be
//! reproduced from `{seed, ratios, rounding}` alone, on any platform:
//!
//! 1. sort the ids lexicographically (byte order) — input order is
//!    irrelevant;
//! 2. Fisher–Yates shuffle, descending: for `i = n−1 .. 1`,
//!    `j = next() % (i+1)`, swap `ids[i], ids[j]` — `next()` draws from
//!    [`SplitMix64`] seeded with the split seed (modulo bias accepted and
//!    part of the frozen protocol);
//! 3. slice the shuffled list into train / val / test at cut points given
//!    by the [`TestRounding`] rule.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XtalError};
use crate::SCHEMA_SPLIT;

/// SplitMix64 PRNG (Steele, Lea & Flood; Vigna's reference constants).
///
/// `next`: advance state by 0x9E3779B97F4A7C15, then mix
/// `z ^= z>>30, z *= 0xBF58476D1CE4E5B9, z ^= z>>27,
/// z *= 0x94D049BB133111EB, z ^= z>>31` — all wrapping u64 arithmetic.
/// Chosen because the whole generator fits in six lines that any other
/// implementation can replicate exactly.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform f64 in [0, 1): top 53 bits / 2⁵³.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// How the test-set size is rounded when `ratio · n` is fractional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestRounding {
    /// `n_val = ⌊r_val·n⌋`, `n_test = ⌊r_test·n⌋`, train takes the rest.
    /// 1058 records at 0.8/0.1/0.1 → 848/105/105.
    Floor,
    /// Cumulative-floor cut points: `⌊r_train·n⌋` and `⌊(r_train+r_val)·n⌋`,
    /// test takes the remainder. 1058 records → 846/106/106.
    Remainder,
}

impl FromStr for TestRounding {
    type Err = XtalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(TestRounding::Floor),
            "remainder" => Ok(TestRounding::Remainder),
            other => Err(XtalError::InvalidConfig(format!(
                "unknown rounding {other:?} (expected floor or remainder)"
            ))),
        }
    }
}

/// A materialized split: every id lands in exactly one of the three lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Split {
    pub schema_version: String,
    pub seed: u64,
    /// train/val/test fractions; must sum to 1.
    pub ratios: [f64; 3],
    pub rounding: TestRounding,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    pub fn n_total(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    /// The subset named by an `--subset` flag value.
    pub fn subset(&self, name: &str) -> Result<&[String]> {
        match name {
            "train" => Ok(&self.train),
            "val" => Ok(&self.val),
            "test" => Ok(&self.test),
            other => Err(XtalError::InvalidConfig(format!(
                "unknown subset {other:?} (expected train, val, or test)"
            ))),
        }
    }
}

/// Shuffle + slice. See the module docs for the exact protocol.
pub fn split_dataset(
    ids: &[String],
    ratios: [f64; 3],
    seed: u64,
    rounding: TestRounding,
) -> Result<Split> {
    if ids.is_empty() {
        return Err(XtalError::EmptyDataset);
    }
    for r in ratios {
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(XtalError::InvalidRatios(format!(
                "each ratio must lie in (0, 1), got {ratios:?}"
            )));
        }
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(XtalError::InvalidRatios(format!(
            "ratios must sum to 1, got {sum}"
        )));
    }

    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(XtalError::DuplicateId(w[0].clone()));
        }
    }

    let n = sorted.len();
    let mut rng = SplitMix64::new(seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        sorted.swap(i, j);
    }

    // Cut points. Floors are taken on the f64 products; the protocol is
    // defined that way, so published counts reproduce exactly.
    let (n_train, n_val) = match rounding {
        TestRounding::Floor => {
            let n_val = (ratios[1] * n as f64).floor() as usize;
            let n_test = (ratios[2] * n as f64).floor() as usize;
            (n - n_val - n_test, n_val)
        }
        TestRounding::Remainder => {
            let c1 = (ratios[0] * n as f64).floor() as usize;
            let c2 = ((ratios[0] + ratios[1]) * n as f64).floor() as usize;
            (c1, c2 - c1)
        }
    };

    let mut rest = sorted.split_off(n_train);
    let test = rest.split_off(n_val);
    Ok(Split {
        schema_version: SCHEMA_SPLIT.to_string(),
        seed,
        ratios,
        rounding,
        train: sorted,
        val: rest,
        test,
    })
}
