//! Statistic kernels on a single permutation in one-line notation.
//!
//! Slice-based kernels take 1-based one-line buffers so that sampling loops
//! can run without allocating.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StatisticKind {
    FixedPoints,
    Descents,
    DDescents(usize),
    Inversions,
}

impl StatisticKind {
    /// Checks `1 <= d < n` for d-descents.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let StatisticKind::DDescents(d) = *self {
            if d == 0 || d >= n {
                return Err(Error::BadD { d, requirement: format!("1 <= d < n = {n}") });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, sigma: &[u32]) -> u64 {
        match *self {
            StatisticKind::FixedPoints => fixed_points_of(sigma),
            StatisticKind::Descents => descents_of(sigma),
            StatisticKind::DDescents(d) => d_descents_of(sigma, d),
            StatisticKind::Inversions => inversions_naive_of(sigma),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticKind::FixedPoints => f.write_str("fp"),
            StatisticKind::Descents => f.write_str("des"),
            StatisticKind::DDescents(d) => write!(f, "des_d:{d}"),
            StatisticKind::Inversions => f.write_str("inv"),
        }
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fp" => Ok(StatisticKind::FixedPoints),
            "des" => Ok(StatisticKind::Descents),
            "inv" => Ok(StatisticKind::Inversions),
            other => {
                let d = other
                    .strip_prefix("des_d:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown statistic {other:?} (fp, des, des_d:<d>, inv)")))?;
                Ok(StatisticKind::DDescents(d))
            }
        }
    }
}

impl TryFrom<String> for StatisticKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StatisticKind> for String {
    fn from(k: StatisticKind) -> Self {
        k.to_string()
    }
}

pub fn fixed_points_of(sigma: &[u32]) -> u64 {
    sigma.iter().enumerate().filter(|&(i, &v)| v as usize == i + 1).count() as u64
}

pub fn descents_of(sigma: &[u32]) -> u64 {
    sigma.windows(2).map(|w| (w[0] > w[1]) as u64).sum()
}

/// Pairs `i < j <= i + d` with `sigma(i) > sigma(j)`.
pub fn d_descents_of(sigma: &[u32], d: usize) -> u64 {
    let n = sigma.len();
    let mut count = 0;
    for i in 0..n {
        let hi = (i + d).min(n - 1);
        for j in i + 1..=hi {
            count += (sigma[i] > sigma[j]) as u64;
        }
    }
    count
}

/// Quadratic pair loop, kept as the reference for the merge-sort counter.
pub fn inversions_naive_of(sigma: &[u32]) -> u64 {
    d_descents_of(sigma, sigma.len().saturating_sub(1).max(1))
}

/// Merge-sort inversion counter. `scratch` must hold two buffers of `n`.
pub fn inversions_with(sigma: &[u32], scratch: &mut Vec<u32>) -> u64 {
    let n = sigma.len();
    scratch.clear();
    scratch.extend_from_slice(sigma);
    scratch.resize(2 * n, 0);
    let (a, b) = scratch.split_at_mut(n);
    sort_count(a, b)
}

// bottom-up merge sort; counts pairs moved across by the merge
fn sort_count(a: &mut [u32], b: &mut [u32]) -> u64 {
    let n = a.len();
    let mut count = 0u64;
    let mut width = 1;
    let (mut src, mut dst) = (a, b);
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if src[i] <= src[j] {
                    dst[k] = src[i];
                    i += 1;
                } else {
                    dst[k] = src[j];
                    count += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
            k += mid - i;
            dst[k..k + (hi - j)].copy_from_slice(&src[j..hi]);
            lo = hi;
        }
        std::mem::swap(&mut src, &mut dst);
        width *= 2;
    }
    count
}

pub fn inversions_of(sigma: &[u32]) -> u64 {
    let mut scratch = Vec::with_capacity(2 * sigma.len());
    inversions_with(sigma, &mut scratch)
}

pub fn fixed_points(sigma: &Permutation) -> u64 {
    fixed_points_of(sigma.one_line())
}

pub fn descents(sigma: &Permutation) -> u64 {
    descents_of(sigma.one_line())
}

pub fn d_descents(sigma: &Permutation, d: usize) -> Result<u64> {
    StatisticKind::DDescents(d).validate(sigma.n())?;
    Ok(d_descents_of(sigma.one_line(), d))
}

pub fn inversions(sigma: &Permutation) -> u64 {
    inversions_of(sigma.one_line())
}

/// `sigma(a) = b` and `sigma(b) = a` for 1-based `a != b`.
pub fn has_two_cycle(sigma: &Permutation, a: usize, b: usize) -> bool {
    a != b && sigma.apply(a) == b && sigma.apply(b) == a
}

/// Number of eligible d-descent pairs, `d(n-d) + C(d,2)`.
pub fn d_descent_pair_count(n: usize, d: usize) -> usize {
    d * (n - d) + d * (d - 1) / 2
}

/// Evaluates a statistic with the fast kernels (merge-sort inversions).
pub struct StatEvaluator {
    kind: StatisticKind,
    scratch: Vec<u32>,
}

impl StatEvaluator {
    pub fn new(kind: StatisticKind) -> Self {
        StatEvaluator { kind, scratch: Vec::new() }
    }

    #[inline]
    pub fn eval(&mut self, sigma: &[u32]) -> u64 {
        match self.kind {
            StatisticKind::Inversions => inversions_with(sigma, &mut self.scratch),
            k => k.evaluate(sigma),
        }
    }
}
