//! Brute-force reference values computed by walking every element of a coset.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::Result;
use crate::rational::{ratio, Rational};
use crate::sampler::enumerate_coset;
use crate::stats::{StatEvaluator, StatisticKind};
use crate::table::ContingencyTable;

/// Every element of one coset, held in memory as a flat one-line buffer.
pub struct CosetOracle {
    n: usize,
    flat: Vec<u32>,
}

impl CosetOracle {
    pub fn new(t: &ContingencyTable, cap: usize) -> Result<Self> {
        let n = t.n();
        let mut iter = enumerate_coset(t, cap)?;
        let mut flat = Vec::new();
        while let Some(p) = iter.advance() {
            flat.extend_from_slice(p);
        }
        Ok(CosetOracle { n, flat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.flat.len().checked_div(self.n).unwrap_or(1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.flat.chunks_exact(self.n.max(1))
    }

    /// Fraction of coset elements satisfying `pred`.
    pub fn probability(&self, mut pred: impl FnMut(&[u32]) -> bool) -> Rational {
        let hits = self.iter().filter(|s| pred(s)).count();
        ratio(hits, self.size())
    }

    /// Exact average of an integer-valued function over the coset.
    pub fn expectation(&self, f: impl FnMut(&[u32]) -> i64) -> Rational {
        let total: i64 = self.iter().map(f).sum();
        ratio(total, self.size())
    }

    pub fn law(&self, kind: StatisticKind) -> ExactLaw {
        let mut eval = StatEvaluator::new(kind);
        let mut counts = BTreeMap::new();
        for s in self.iter() {
            *counts.entry(eval.eval(s)).or_insert(0u64) += 1;
        }
        ExactLaw { counts, total: self.size() as u64 }
    }
}

/// Exact law of a nonnegative integer statistic as counts over a finite set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactLaw {
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl ExactLaw {
    pub fn prob(&self, v: u64) -> Rational {
        ratio(self.counts.get(&v).copied().unwrap_or(0), self.total)
    }

    pub fn mean(&self) -> Rational {
        let s: BigInt = self.counts.iter().map(|(&v, &c)| BigInt::from(v) * c).sum();
        Rational::new(s, self.total.into())
    }

    pub fn variance(&self) -> Rational {
        let m = self.mean();
        let s2: BigInt = self.counts.iter().map(|(&v, &c)| BigInt::from(v) * v * c).sum();
        Rational::new(s2, self.total.into()) - &m * &m
    }

    /// `P(X >= x)` for real `x`.
    pub fn upper_tail(&self, x: f64) -> Rational {
        let hits: u64 = self.counts.iter().filter(|(&v, _)| v as f64 >= x).map(|(_, &c)| c).sum();
        ratio(hits, self.total)
    }

    /// `P(X <= x)` for real `x`.
    pub fn lower_tail(&self, x: f64) -> Rational {
        let hits: u64 = self.counts.iter().filter(|(&v, _)| v as f64 <= x).map(|(_, &c)| c).sum();
        ratio(hits, self.total)
    }

    pub fn pmf_f64(&self) -> BTreeMap<u64, f64> {
        self.counts.iter().map(|(&v, &c)| (v, c as f64 / self.total as f64)).collect()
    }
}
