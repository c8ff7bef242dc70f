//! Size-bias laws and the fixed-point size-bias coupling on a double coset.
//!
//! Given `sigma` uniform on the coset of `T`, the coupling picks an index `I`
//! with `P(I = i) = T_{kl} / (nu lambda_k mu_l)` for `i in A_{kl}` and moves
//! values so that `I` becomes a fixed point without changing the table. The
//! number of fixed points of the result has the size-bias law of `fp(sigma)`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{run_blocks, Histogram};
use crate::oracle::{CosetOracle, ExactLaw};
use crate::permutation::Permutation;
use crate::rational::{ratio, Rational};
use crate::rng::RngStream;
use crate::sampler::CosetSampler;
use crate::stats::{fixed_points_of, StatisticKind};
use crate::table::{cell_partition, ContingencyTable};

/// Probability scalar: exact rationals or floats.
pub trait Probability: Clone + PartialOrd + Num + FromPrimitive + Debug {
    fn is_unit_total(&self) -> bool;
    fn as_f64(&self) -> f64;
}

impl Probability for Rational {
    fn is_unit_total(&self) -> bool {
        self.is_one()
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Probability for f64 {
    fn is_unit_total(&self) -> bool {
        (self - 1.0).abs() <= 1e-9
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

/// A law on the nonnegative integers with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerDistribution<P = Rational> {
    pmf: BTreeMap<u64, P>,
}

impl<P: Probability> IntegerDistribution<P> {
    pub fn new(pmf: BTreeMap<u64, P>) -> Result<Self> {
        if pmf.values().any(|p| *p < P::zero()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total = pmf.values().fold(P::zero(), |acc, p| acc + p.clone());
        if !total.is_unit_total() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total:?}")));
        }
        Ok(IntegerDistribution { pmf })
    }

    /// Builds without the unit-total check, e.g. for truncated laws.
    pub fn from_masses(pmf: BTreeMap<u64, P>) -> Self {
        IntegerDistribution { pmf }
    }

    pub fn pmf(&self) -> &BTreeMap<u64, P> {
        &self.pmf
    }

    pub fn prob(&self, v: u64) -> P {
        self.pmf.get(&v).cloned().unwrap_or_else(P::zero)
    }

    pub fn mean(&self) -> P {
        self.pmf.iter().fold(P::zero(), |acc, (&v, p)| acc + P::from_u64(v).expect("value fits") * p.clone())
    }

    pub fn to_f64(&self) -> IntegerDistribution<f64> {
        IntegerDistribution { pmf: self.pmf.iter().map(|(&v, p)| (v, p.as_f64())).collect() }
    }

    /// Half the L1 distance.
    pub fn total_variation(&self, other: &IntegerDistribution<P>) -> P {
        let mut keys: Vec<u64> = self.pmf.keys().chain(other.pmf.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let two = P::from_u64(2).expect("2 fits");
        keys.into_iter()
            .map(|v| {
                let (a, b) = (self.prob(v), other.prob(v));
                if a > b {
                    a - b
                } else {
                    b - a
                }
            })
            .fold(P::zero(), |acc, d| acc + d)
            / two
    }
}

impl ExactLaw {
    pub fn distribution(&self) -> IntegerDistribution<Rational> {
        IntegerDistribution { pmf: self.counts.keys().map(|&v| (v, self.prob(v))).collect() }
    }
}

impl Histogram {
    pub fn distribution(&self) -> IntegerDistribution<f64> {
        IntegerDistribution { pmf: self.counts.keys().map(|&v| (v, self.frequency(v))).collect() }
    }
}

/// `P^s(w) = w P(w) / E W`.
pub fn size_bias_transform<P: Probability>(dist: &IntegerDistribution<P>) -> Result<IntegerDistribution<P>> {
    let mean = dist.mean();
    if mean.is_zero() {
        return Err(Error::ZeroMean);
    }
    let pmf = dist
        .pmf
        .iter()
        .filter(|(&v, p)| v > 0 && !p.is_zero())
        .map(|(&v, p)| (v, P::from_u64(v).expect("value fits") * p.clone() / mean.clone()))
        .collect();
    Ok(IntegerDistribution { pmf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingCase {
    AlreadyFixed,
    SimpleSwap,
    TwoStepSwap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CouplingOutcome {
    pub original: Permutation,
    pub biased: Permutation,
    /// 1-based.
    pub chosen_index: usize,
    pub case: CouplingCase,
}

/// Cumulative integer weights over nonempty cells: cell `A_{kl}` weighs
/// `|A_{kl}| T_{kl} L / (lambda_k mu_l)` with `L` the lcm of the denominators.
#[derive(Debug, Clone)]
enum Cumulative {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

#[derive(Debug, Clone)]
pub struct SizeBiasCoupling {
    n: usize,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    rows: Vec<std::ops::Range<usize>>,
    cells: Vec<std::ops::Range<usize>>,
    cumulative: Cumulative,
}

impl SizeBiasCoupling {
    /// Fails with the first nonempty cell whose table entry is zero.
    pub fn new(t: &ContingencyTable) -> Result<Self> {
        let cp = cell_partition(t.lambda(), t.mu())?;
        let mut cells = Vec::new();
        let mut weights: Vec<(BigUint, BigUint)> = Vec::new();
        for (k, l) in cp.nonempty() {
            let entry = t.get(k, l);
            if entry == 0 {
                return Err(Error::HypothesisViolated { row: k + 1, col: l + 1 });
            }
            let num = BigUint::from(cp.size(k, l) as u64 * entry as u64);
            let den = BigUint::from(t.lambda().part(k) as u64 * t.mu().part(l) as u64);
            cells.push(cp.cell(k, l));
            weights.push((num, den));
        }
        let lcm = weights.iter().fold(BigUint::one(), |acc, (_, d)| acc.lcm(d));
        let mut acc = BigUint::zero();
        let big: Vec<BigUint> = weights
            .iter()
            .map(|(num, den)| {
                acc += num * (&lcm / den);
                acc.clone()
            })
            .collect();
        let cumulative = match big.iter().map(|c| c.to_u64()).collect::<Option<Vec<u64>>>() {
            Some(small) => Cumulative::Small(small),
            None => Cumulative::Big(big),
        };
        let lambda = t.lambda();
        Ok(SizeBiasCoupling {
            n: t.n(),
            row_of: lambda.block_labels(),
            col_of: t.mu().block_labels(),
            rows: (0..lambda.len()).map(|k| lambda.block_start(k)..lambda.block_start(k) + lambda.part(k)).collect(),
            cells,
            cumulative,
        })
    }

    /// Exact `P(I = i)` for a 1-based index.
    pub fn index_probability(&self, t: &ContingencyTable, i: usize) -> Rational {
        let (k, l) = (self.row_of[i - 1], self.col_of[i - 1]);
        let nu: Rational = crate::moments::Moments::new(t).fp_mean();
        ratio(t.get(k, l), t.lambda().part(k) * t.mu().part(l)) / nu
    }

    fn pick_cell(&self, rng: &mut RngStream) -> usize {
        match &self.cumulative {
            Cumulative::Small(c) => {
                let u = rng.below(*c.last().expect("some cell is nonempty"));
                c.partition_point(|&x| x <= u)
            }
            Cumulative::Big(c) => {
                let total = c.last().expect("some cell is nonempty");
                let u = below_big(rng, total);
                c.partition_point(|x| *x <= u)
            }
        }
    }

    /// 1-based index `I`.
    pub fn pick_index(&self, rng: &mut RngStream) -> usize {
        let cell = self.cells[self.pick_cell(rng)].clone();
        cell.start + rng.below(cell.len() as u64) as usize
    }

    /// Writes the biased permutation into `out`; returns `(I, case)`.
    pub fn couple_into(&self, sigma: &[u32], out: &mut [u32], rng: &mut RngStream) -> (usize, CouplingCase) {
        out.copy_from_slice(sigma);
        let i = self.pick_index(rng);
        let ip = i - 1;
        let si = sigma[ip] as usize;
        if si == i {
            return (i, CouplingCase::AlreadyFixed);
        }
        let x = sigma.iter().position(|&v| v as usize == i).expect("sigma is a bijection");
        let (k, l) = (self.row_of[ip], self.col_of[ip]);
        if self.row_of[x] == k || self.col_of[si - 1] == l {
            out[ip] = i as u32;
            out[x] = si as u32;
            return (i, CouplingCase::SimpleSwap);
        }
        let candidates = self.rows[k].clone().filter(|&y| self.col_of[sigma[y] as usize - 1] == l);
        let count = candidates.clone().count();
        let y = candidates.clone().nth(rng.below(count as u64) as usize).expect("T_kl >= 1");
        let z = sigma[y];
        out[ip] = i as u32;
        out[y] = si as u32;
        out[x] = z;
        (i, CouplingCase::TwoStepSwap)
    }

    pub fn couple(&self, sigma: &Permutation, rng: &mut RngStream) -> CouplingOutcome {
        let mut out = vec![0u32; self.n];
        let (chosen_index, case) = self.couple_into(sigma.one_line(), &mut out, rng);
        CouplingOutcome { original: sigma.clone(), biased: Permutation::from_trusted(out), chosen_index, case }
    }

    /// True when `a` and `b` have the same contingency table.
    pub fn same_table(&self, a: &[u32], b: &[u32]) -> bool {
        let mut delta: Vec<((usize, usize), i32)> = Vec::new();
        for p in 0..self.n {
            if a[p] != b[p] {
                for (v, s) in [(a[p], 1), (b[p], -1)] {
                    let key = (self.row_of[p], self.col_of[v as usize - 1]);
                    match delta.iter_mut().find(|(c, _)| *c == key) {
                        Some(e) => e.1 += s,
                        None => delta.push((key, s)),
                    }
                }
            }
        }
        delta.iter().all(|(_, d)| *d == 0)
    }
}

pub fn couple(sigma: &Permutation, t: &ContingencyTable, rng: &mut RngStream) -> Result<CouplingOutcome> {
    Ok(SizeBiasCoupling::new(t)?.couple(sigma, rng))
}

fn below_big(rng: &mut RngStream, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(64) as usize;
    let top = bits % 64;
    loop {
        let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        if top != 0 {
            digits[words - 1] &= (1u64 << top) - 1;
        }
        let u = BigUint::from_slice(&digits.iter().flat_map(|&d| [d as u32, (d >> 32) as u32]).collect::<Vec<u32>>());
        if &u < bound {
            return u;
        }
    }
}

/// The exact law of `fp` of the coupled permutation, averaging over the coset,
/// the index choice and the choice of `z`.
pub fn exact_coupling_law(t: &ContingencyTable, cap: usize) -> Result<IntegerDistribution<Rational>> {
    let coupling = SizeBiasCoupling::new(t)?;
    let oracle = CosetOracle::new(t, cap)?;
    let n = t.n();
    let index_p: Vec<Rational> = (1..=n).map(|i| coupling.index_probability(t, i)).collect();
    let mut pmf: BTreeMap<u64, Rational> = BTreeMap::new();
    let per_sigma = ratio(1, oracle.size());
    let mut out = vec![0u32; n];
    for sigma in oracle.iter() {
        for i in 1..=n {
            if index_p[i - 1].is_zero() {
                continue;
            }
            let w = &per_sigma * &index_p[i - 1];
            for (biased, share) in coupling.all_outcomes(sigma, i, &mut out) {
                *pmf.entry(fixed_points_of(&biased)).or_insert_with(Rational::zero) += &w * share;
            }
        }
    }
    IntegerDistribution::new(pmf)
}

impl SizeBiasCoupling {
    /// Every coupled permutation for a fixed `sigma` and `I`, with its
    /// conditional probability.
    fn all_outcomes(&self, sigma: &[u32], i: usize, out: &mut [u32]) -> Vec<(Vec<u32>, Rational)> {
        out.copy_from_slice(sigma);
        let ip = i - 1;
        let si = sigma[ip] as usize;
        if si == i {
            return vec![(out.to_vec(), Rational::one())];
        }
        let x = sigma.iter().position(|&v| v as usize == i).expect("bijection");
        let (k, l) = (self.row_of[ip], self.col_of[ip]);
        if self.row_of[x] == k || self.col_of[si - 1] == l {
            out[ip] = i as u32;
            out[x] = si as u32;
            return vec![(out.to_vec(), Rational::one())];
        }
        let ys: Vec<usize> = self.rows[k].clone().filter(|&y| self.col_of[sigma[y] as usize - 1] == l).collect();
        let share = ratio(1, ys.len());
        ys.into_iter()
            .map(|y| {
                let mut o = sigma.to_vec();
                o[ip] = i as u32;
                o[y] = si as u32;
                o[x] = sigma[y];
                (o, share.clone())
            })
            .collect()
    }
}

/// Per-draw invariant failures, counted separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CouplingViolations {
    pub not_fixed_at_index: u64,
    pub table_changed: u64,
    pub decreased: u64,
    pub gain_above_two: u64,
    /// Largest `W^s - W` observed.
    pub max_gain: u64,
}

impl CouplingViolations {
    pub fn record(&mut self, sigma: &[u32], biased: &[u32], i: usize, coupling: &SizeBiasCoupling) {
        let (w, ws) = (fixed_points_of(sigma), fixed_points_of(biased));
        self.not_fixed_at_index += (biased[i - 1] as usize != i) as u64;
        self.table_changed += (!coupling.same_table(sigma, biased)) as u64;
        self.decreased += (ws < w) as u64;
        self.gain_above_two += (ws > w + 2) as u64;
        self.max_gain = self.max_gain.max(ws.saturating_sub(w));
    }

    pub fn merge(&mut self, o: &CouplingViolations) {
        self.not_fixed_at_index += o.not_fixed_at_index;
        self.table_changed += o.table_changed;
        self.decreased += o.decreased;
        self.gain_above_two += o.gain_above_two;
        self.max_gain = self.max_gain.max(o.max_gain);
    }

    /// Draws violating any invariant, counted once per invariant.
    pub fn total(&self) -> u64 {
        self.not_fixed_at_index + self.table_changed + self.decreased + self.gain_above_two
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeBiasCheck {
    pub table: ContingencyTable,
    pub samples: u64,
    pub tv: f64,
    pub invariant_violations: u64,
    pub violations: CouplingViolations,
    pub target: BTreeMap<u64, f64>,
    pub empirical: BTreeMap<u64, f64>,
}

#[derive(Debug, Clone, Default)]
struct CheckTally {
    hist: Histogram,
    violations: CouplingViolations,
}

/// Monte Carlo law of `fp` after coupling against the size-bias transform of
/// the exact `fp` law, with every per-draw invariant checked.
pub fn coupling_distribution_check(
    t: &ContingencyTable,
    samples: u64,
    seed: u64,
    threads: usize,
    cap: usize,
) -> Result<SizeBiasCheck> {
    let coupling = SizeBiasCoupling::new(t)?;
    let exact = CosetOracle::new(t, cap)?.law(StatisticKind::FixedPoints).distribution();
    let target = size_bias_transform(&exact)?.to_f64();
    let parts = run_blocks(samples, seed, threads, |_, count, rng| {
        let mut sampler = CosetSampler::new(t);
        let mut sigma = vec![0u32; t.n()];
        let mut biased = vec![0u32; t.n()];
        let mut tally = CheckTally::default();
        for _ in 0..count {
            sampler.sample_into(rng, &mut sigma);
            let (i, _) = coupling.couple_into(&sigma, &mut biased, rng);
            tally.violations.record(&sigma, &biased, i, &coupling);
            tally.hist.add(fixed_points_of(&biased));
        }
        tally
    });
    let mut hist = Histogram::default();
    let mut violations = CouplingViolations::default();
    for p in &parts {
        hist.merge(&p.hist);
        violations.merge(&p.violations);
    }
    let empirical = hist.distribution();
    Ok(SizeBiasCheck {
        table: t.clone(),
        samples,
        tv: empirical.total_variation(&target),
        invariant_violations: violations.total(),
        violations,
        target: target.pmf().clone(),
        empirical: empirical.pmf().clone(),
    })
}
