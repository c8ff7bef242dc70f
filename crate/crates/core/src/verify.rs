//! Oracle sweeps: every closed form and structural invariant compared with
//! brute-force enumeration over all tables of a given size.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::concentration::exact_tails;
use crate::error::{Error, Result};
use crate::moments::Moments;
use crate::oracle::CosetOracle;
use crate::partition::Partition;
use crate::rational::{factorial, to_f64, Rational};
use crate::sampler::enumerate_coset;
use crate::size_bias::{exact_coupling_law, size_bias_transform, SizeBiasCoupling};
use crate::stats::{d_descents_of, fixed_points_of, inversions_of, StatisticKind};
use crate::stein::{
    descent_graph, exact_tv_to_poisson, independence_certificate, inversion_graph, tv_bound_fixed_points,
};
use crate::table::{compare_sorted, coset_size, ContingencyTable, Majorization};

/// Number of checks run and a description of each failure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub checks: u64,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn eq_check(tally: &mut Tally, got: Result<Rational>, want: Rational, what: impl FnOnce() -> String) {
    match got {
        Ok(g) => {
            let ok = g == want;
            tally.check(ok, || format!("{}: formula {g}, enumeration {want}", what()));
        }
        Err(e) => tally.check(false, || format!("{}: {e}", what())),
    }
}

/// Every exact moment formula against the enumerated coset.
pub fn check_moments(t: &ContingencyTable, cap: usize) -> Result<Tally> {
    let n = t.n();
    let m = Moments::new(t);
    let o = CosetOracle::new(t, cap)?;
    let mut tally = Tally::default();
    let at = |s: &[u32], i: usize| s[i - 1] as usize;
    for a in 1..=n {
        for b in 1..=n {
            let want = o.probability(|s| at(s, a) == b);
            eq_check(&mut tally, m.fp_value_prob(a, b), want, || format!("{t} P(sigma({a}) = {b})"));
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let want = o.probability(|s| at(s, i) == i && at(s, j) == j);
            eq_check(&mut tally, m.fp_pair_prob(i, j), want, || format!("{t} fixed pair ({i}, {j})"));
            let want = o.probability(|s| at(s, i) == j && at(s, j) == i);
            eq_check(&mut tally, m.two_cycle_prob(i, j), want, || format!("{t} two-cycle ({i}, {j})"));
            if i < j {
                let want = o.probability(|s| at(s, i) > at(s, j));
                eq_check(&mut tally, m.inv_prob(i, j), want, || format!("{t} inversion ({i}, {j})"));
            }
        }
    }
    for i in 1..n {
        let want = o.probability(|s| s[i - 1] > s[i]);
        eq_check(&mut tally, m.descent_prob(i), want, || format!("{t} descent at {i}"));
        if i + 2 <= n {
            let want = o.probability(|s| s[i - 1] > s[i] && s[i] > s[i + 1]);
            eq_check(&mut tally, m.consecutive_descent_prob(i), want, || format!("{t} consecutive descents at {i}"));
        }
        for j in i + 2..n {
            let want = o.probability(|s| s[i - 1] > s[i] && s[j - 1] > s[j]);
            eq_check(&mut tally, m.double_descent_prob(i, j), want, || format!("{t} descents at {i} and {j}"));
        }
    }
    let fp = o.law(StatisticKind::FixedPoints);
    let des = o.law(StatisticKind::Descents);
    eq_check(&mut tally, Ok(m.fp_mean()), o.expectation(|s| fixed_points_of(s) as i64), || format!("{t} fp mean"));
    eq_check(&mut tally, Ok(m.fp_variance()), fp.variance(), || format!("{t} fp variance"));
    eq_check(&mut tally, Ok(m.des_mean()), des.mean(), || format!("{t} des mean"));
    eq_check(&mut tally, Ok(m.des_variance_exact()), des.variance(), || format!("{t} des variance"));
    eq_check(&mut tally, Ok(m.inv_mean()), o.expectation(|s| inversions_of(s) as i64), || format!("{t} inv mean"));
    for d in 1..=t.lambda().smallest() / 2 {
        let want = o.expectation(|s| d_descents_of(s, d) as i64);
        eq_check(&mut tally, m.d_des_mean(d), want, || format!("{t} d-descent mean, d = {d}"));
    }
    Ok(tally)
}

/// Coset sizes sum to `n!` and each coset enumerates to its size.
pub fn check_coset_partition(lambda: &Partition, mu: &Partition, cap: usize) -> Result<Tally> {
    let mut tally = Tally::default();
    let mut sum = BigInt::zero();
    for t in ContingencyTable::enumerate(lambda, mu)? {
        let size = coset_size(&t);
        let mut it = enumerate_coset(&t, cap)?;
        let mut count = 0u64;
        while it.advance().is_some() {
            count += 1;
        }
        tally.check(BigInt::from(count) == size, || format!("{t}: enumerated {count}, coset size {size}"));
        sum += size;
    }
    let total = factorial(lambda.n());
    tally.check(sum == total, || format!("{lambda} x {mu}: coset sizes sum to {sum}, n! = {total}"));
    Ok(tally)
}

/// `T ≺ T'` implies `P(T) > P(T')` for every pair of tables with these margins.
pub fn check_fisher_yates_monotone(lambda: &Partition, mu: &Partition) -> Result<Tally> {
    let mut tally = Tally::default();
    // the coset size depends only on the multiset of entries
    let mut classes: BTreeMap<Vec<u32>, (BigInt, ContingencyTable)> = BTreeMap::new();
    for t in ContingencyTable::enumerate(lambda, mu)? {
        classes.entry(t.sorted_entries()).or_insert_with(|| (coset_size(&t), t));
    }
    let classes: Vec<_> = classes.into_iter().collect();
    for (a, (ea, (pa, ta))) in classes.iter().enumerate() {
        for (eb, (pb, tb)) in &classes[a + 1..] {
            let (lo, hi, plo, phi) = match compare_sorted(ea, eb) {
                Majorization::FirstBelow => (ta, tb, pa, pb),
                Majorization::SecondBelow => (tb, ta, pb, pa),
                _ => continue,
            };
            tally.check(plo > phi, || format!("{lo} is majorized by {hi} but has coset size {plo} <= {phi}"));
        }
    }
    Ok(tally)
}

/// Exact TV between the fixed-point law and Poisson with the same mean is at
/// most the stated bound. Tables violating the coupling hypothesis are skipped.
pub fn check_fp_tv_dominance(t: &ContingencyTable, cap: usize) -> Result<Tally> {
    let mut tally = Tally::default();
    let bound = match tv_bound_fixed_points(t) {
        Ok(b) => b.bound,
        Err(Error::HypothesisViolated { .. }) => return Ok(tally),
        Err(e) => return Err(e),
    };
    let law = CosetOracle::new(t, cap)?.law(StatisticKind::FixedPoints);
    let tv = exact_tv_to_poisson(&law.distribution(), to_f64(&law.mean()));
    tally.check(tv <= bound + 1e-12, || format!("{t}: exact TV {tv} exceeds bound {bound}"));
    Ok(tally)
}

/// The exact law of the coupled fixed-point count equals the size-bias
/// transform of the fixed-point law.
pub fn check_size_bias_exact(t: &ContingencyTable, cap: usize) -> Result<Tally> {
    let mut tally = Tally::default();
    if let Err(e) = SizeBiasCoupling::new(t) {
        return match e {
            Error::HypothesisViolated { .. } => Ok(tally),
            e => Err(e),
        };
    }
    let coupled = exact_coupling_law(t, cap)?;
    let target = size_bias_transform(&CosetOracle::new(t, cap)?.law(StatisticKind::FixedPoints).distribution())?;
    tally.check(coupled == target, || format!("{t}: coupled law differs from the size-bias transform"));
    Ok(tally)
}

/// Independence certificates for the descent and inversion graphs.
pub fn check_certificates(t: &ContingencyTable, cap: usize, random_subsets: usize, seed: u64) -> Result<Tally> {
    let mut tally = Tally::default();
    for (name, g) in [("descent", descent_graph(t.lambda())), ("inversion", inversion_graph(t.lambda()))] {
        let r = independence_certificate(t, &g, cap, random_subsets, seed)?;
        tally.check(r.passed(), || format!("{t}: {name} graph certificate failed on {:?}", r.failures.first()));
    }
    Ok(tally)
}

/// Exact tails against the bounds evaluated from their ingredients (coupling
/// constant 3 for fixed points, the dependency-graph bound otherwise).
pub fn check_raw_tail_bounds(t: &ContingencyTable, grid: &[f64], cap: usize) -> Result<Tally> {
    let mut tally = Tally::default();
    for kind in [StatisticKind::FixedPoints, StatisticKind::Descents, StatisticKind::Inversions] {
        if kind == StatisticKind::FixedPoints && SizeBiasCoupling::new(t).is_err() {
            continue;
        }
        match exact_tails(t, kind, grid, cap) {
            Ok(r) => tally.check(r.raw_violations.is_empty(), || format!("{t} {kind}: {:?}", r.raw_violations)),
            Err(Error::ZeroVariance) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(tally)
}

/// Stated claims that enumeration refutes on some tables. Reported, not
/// counted as failures of the implementation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClaimCounts {
    /// `(table, statistic, t)` triples where an exact tail exceeds the stated
    /// closed-form bound.
    pub stated_tail_bound_exceeded: u64,
    pub stated_tail_bound_checked: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub nmax: usize,
    pub tables: u64,
    pub checks: u64,
    pub failures: Vec<String>,
    pub by_check: BTreeMap<String, u64>,
    pub claims: ClaimCounts,
}

pub const TAIL_GRID: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

/// Runs every oracle check over all partition pairs and tables with `n <= nmax`.
pub fn sweep(nmax: usize, cap: usize, seed: u64) -> Result<SweepReport> {
    if nmax > cap {
        return Err(Error::CapExceeded { n: nmax, cap });
    }
    let mut report = SweepReport { nmax, ..Default::default() };
    let add = |report: &mut SweepReport, name: &str, tally: Tally| {
        *report.by_check.entry(name.to_string()).or_default() += tally.checks;
        report.checks += tally.checks;
        report.failures.extend(tally.failures);
    };
    for n in 1..=nmax {
        for lambda in Partition::all(n) {
            for mu in Partition::all(n) {
                add(&mut report, "cosetPartition", check_coset_partition(&lambda, &mu, cap)?);
                add(&mut report, "fisherYatesMonotone", check_fisher_yates_monotone(&lambda, &mu)?);
                for t in ContingencyTable::enumerate(&lambda, &mu)? {
                    report.tables += 1;
                    add(&mut report, "moments", check_moments(&t, cap)?);
                    add(&mut report, "fpTvDominance", check_fp_tv_dominance(&t, cap)?);
                    add(&mut report, "sizeBiasExact", check_size_bias_exact(&t, cap)?);
                    add(&mut report, "certificates", check_certificates(&t, cap, 64, seed)?);
                    add(&mut report, "rawTailBounds", check_raw_tail_bounds(&t, &TAIL_GRID, cap)?);
                    count_stated_tail_claims(&t, cap, &mut report.claims)?;
                }
            }
        }
    }
    Ok(report)
}

fn count_stated_tail_claims(t: &ContingencyTable, cap: usize, claims: &mut ClaimCounts) -> Result<()> {
    for kind in [StatisticKind::FixedPoints, StatisticKind::Descents, StatisticKind::Inversions] {
        if kind == StatisticKind::FixedPoints && SizeBiasCoupling::new(t).is_err() {
            continue;
        }
        match exact_tails(t, kind, &TAIL_GRID, cap) {
            Ok(r) => {
                claims.stated_tail_bound_checked += 2 * TAIL_GRID.len() as u64;
                claims.stated_tail_bound_exceeded += r.violations.len() as u64;
            }
            Err(Error::ZeroVariance) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
