//! Exact probabilities, means and variances of permutation statistics on a
//! double coset, computed from its contingency table alone.
//!
//! Positions and values are 1-based, block indices 0-based. Row `k` of the
//! table is the `k`-th block `L_k` of positions, column `l` the `l`-th block
//! `M_l` of values.
//!
//! The formulas rest on one structural fact: the column labels seen along
//! row `k` form a uniform arrangement of the multiset `T_{k,.}`, independently
//! across rows, and the values inside each column block are spread uniformly
//! over the positions carrying that label.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{half, int, ratio, serde_exact, Rational};
use crate::stats::StatisticKind;
use crate::table::{cell_partition, CellPartition, ContingencyTable};

fn frac(num: i128, den: i128) -> Rational {
    if den == 0 {
        // the selected case needs two indices in a block of size one
        debug_assert_eq!(num, 0);
        return Rational::zero();
    }
    ratio(BigInt::from(num), BigInt::from(den))
}

/// `below(v)[b] = sum_{a<b} v[a]`.
fn below(v: &[i128]) -> Vec<i128> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0;
    for &x in v {
        out.push(acc);
        acc += x;
    }
    out
}

/// `above(v)[b] = sum_{c>b} v[c]`.
fn above(v: &[i128]) -> Vec<i128> {
    let mut out = vec![0; v.len()];
    let mut acc = 0;
    for b in (0..v.len()).rev() {
        out[b] = acc;
        acc += v[b];
    }
    out
}

fn hadamard(x: &[i128], y: &[i128]) -> Vec<i128> {
    x.iter().zip(y).map(|(a, b)| a * b).collect()
}

fn falling(x: &[i128]) -> Vec<i128> {
    x.iter().map(|&a| a * (a - 1)).collect()
}

/// `f(x, y) = sum_{a<b} (x_a y_b - y_a x_b)`.
pub(crate) fn sum_f(x: &[i128], y: &[i128]) -> i128 {
    let (bx, by) = (below(x), below(y));
    (0..x.len()).map(|b| y[b] * bx[b] - x[b] * by[b]).sum()
}

/// Row `x` holds two positions, row `y` the next one.
pub(crate) fn sum_g(x: &[i128], y: &[i128]) -> i128 {
    let (by, ax, bxy) = (below(y), above(x), below(&hadamard(x, y)));
    let mut acc = 0;
    for b in 0..x.len() {
        acc += x[b] * (x[b] - 1) * y[b];
        acc += 3 * (x[b] * (x[b] - 1) * by[b] + x[b] * bxy[b]);
        acc += 6 * x[b] * by[b] * ax[b];
    }
    acc
}

/// Row `x` holds one position, row `y` the next two.
pub(crate) fn sum_h(x: &[i128], y: &[i128]) -> i128 {
    let (by, ax, byy) = (below(y), above(x), below(&falling(y)));
    let mut acc = 0;
    for b in 0..x.len() {
        acc += x[b] * y[b] * (y[b] - 1);
        acc += 3 * (x[b] * y[b] * by[b] + x[b] * byy[b]);
        acc += 6 * y[b] * by[b] * ax[b];
    }
    acc
}

/// Correction for descents at two consecutive borders sharing row `y`.
pub(crate) fn sum_e(x: &[i128], y: &[i128], z: &[i128]) -> i128 {
    let (bz, ax, byz) = (below(z), above(x), below(&hadamard(y, z)));
    let mut acc = 0;
    for b in 0..x.len() {
        acc += x[b] * y[b] * z[b];
        acc += 2 * x[b] * byz[b];
        acc += 2 * x[b] * y[b] * bz[b];
        acc += 4 * y[b] * bz[b] * ax[b];
    }
    acc
}

/// Three consecutive positions in three consecutive rows (middle row of size one).
pub(crate) fn sum_q(x: &[i128], y: &[i128], z: &[i128]) -> i128 {
    let (bz, ax, byz) = (below(z), above(x), below(&hadamard(y, z)));
    let mut acc = 0;
    for b in 0..x.len() {
        acc += x[b] * y[b] * z[b];
        acc += 3 * (x[b] * y[b] * bz[b] + x[b] * byz[b]);
        acc += 6 * y[b] * bz[b] * ax[b];
    }
    acc
}

/// The table sums `f, g, h, e, q` and `f(l, r)`, computed once per table.
/// `f, g, h` are indexed by `k < I-1`, `e, q` by `k < I-2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BorderSums {
    pub f: Vec<i128>,
    pub g: Vec<i128>,
    pub h: Vec<i128>,
    pub e: Vec<i128>,
    pub q: Vec<i128>,
    blocks: usize,
    f_pair: Vec<i128>,
}

impl BorderSums {
    pub fn new(t: &ContingencyTable) -> Self {
        let rows: Vec<Vec<i128>> = (0..t.rows_len()).map(|k| t.row(k).iter().map(|&x| x as i128).collect()).collect();
        Self::from_rows(&rows)
    }

    fn from_rows(rows: &[Vec<i128>]) -> Self {
        let i = rows.len();
        let adj = |k: usize| (&rows[k][..], &rows[k + 1][..]);
        let f = (0..i.saturating_sub(1))
            .map(|k| {
                let (x, y) = adj(k);
                sum_f(x, y)
            })
            .collect();
        let g = (0..i.saturating_sub(1))
            .map(|k| {
                let (x, y) = adj(k);
                sum_g(x, y)
            })
            .collect();
        let h = (0..i.saturating_sub(1))
            .map(|k| {
                let (x, y) = adj(k);
                sum_h(x, y)
            })
            .collect();
        let e = (0..i.saturating_sub(2)).map(|k| sum_e(&rows[k], &rows[k + 1], &rows[k + 2])).collect();
        let q = (0..i.saturating_sub(2)).map(|k| sum_q(&rows[k], &rows[k + 1], &rows[k + 2])).collect();
        let mut f_pair = vec![0; i * i];
        for l in 0..i {
            for r in l + 1..i {
                let v = sum_f(&rows[l], &rows[r]);
                f_pair[l * i + r] = v;
                f_pair[r * i + l] = -v;
            }
        }
        BorderSums { f, g, h, e, q, blocks: i, f_pair }
    }

    /// `f(l, r) = sum_{a<b} (T_{la} T_{rb} - T_{ra} T_{lb})`; antisymmetric.
    pub fn f_pair(&self, l: usize, r: usize) -> i128 {
        self.f_pair[l * self.blocks + r]
    }
}

/// Asymptotic variance order for statistics without a closed-form variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceOrder {
    Exact,
    NOver12,
    NTimesD(usize),
    NCubed,
}

impl fmt::Display for VarianceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarianceOrder::Exact => f.write_str("exact"),
            VarianceOrder::NOver12 => f.write_str("n/12"),
            VarianceOrder::NTimesD(d) => write!(f, "n*d (d = {d})"),
            VarianceOrder::NCubed => f.write_str("n^3"),
        }
    }
}

impl Serialize for VarianceOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn variance_order(kind: StatisticKind) -> VarianceOrder {
    match kind {
        StatisticKind::FixedPoints => VarianceOrder::Exact,
        StatisticKind::Descents => VarianceOrder::NOver12,
        StatisticKind::DDescents(d) => VarianceOrder::NTimesD(d),
        StatisticKind::Inversions => VarianceOrder::NCubed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variance {
    Exact {
        #[serde(with = "serde_exact")]
        value: Rational,
    },
    AsymptoticOnly {
        order: VarianceOrder,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub statistic: StatisticKind,
    #[serde(with = "serde_exact")]
    pub mean: Rational,
    pub variance: Variance,
    pub order: VarianceOrder,
    /// The asymptotic orders assume few blocks relative to `n`.
    pub blocks: usize,
    pub n: usize,
}

/// Exact moment formulas for one table.
#[derive(Debug, Clone)]
pub struct Moments {
    n: usize,
    lambda: Vec<i128>,
    mu: Vec<i128>,
    t: Vec<Vec<i128>>,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    cells: CellPartition,
    sums: BorderSums,
}

impl Moments {
    pub fn new(table: &ContingencyTable) -> Self {
        let t: Vec<Vec<i128>> =
            (0..table.rows_len()).map(|k| table.row(k).iter().map(|&x| x as i128).collect()).collect();
        Moments {
            n: table.n(),
            lambda: table.lambda().parts().iter().map(|&p| p as i128).collect(),
            mu: table.mu().parts().iter().map(|&p| p as i128).collect(),
            row_of: table.lambda().block_labels(),
            col_of: table.mu().block_labels(),
            cells: cell_partition(table.lambda(), table.mu()).expect("table margins share n"),
            sums: BorderSums::from_rows(&t),
            t,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sums(&self) -> &BorderSums {
        &self.sums
    }

    fn check_index(&self, what: &str, i: usize, hi: usize) -> Result<()> {
        if i == 0 || i > hi {
            return Err(Error::IndexOutOfRange(format!("{what} = {i} not in [1, {hi}]")));
        }
        Ok(())
    }

    fn row(&self, pos: usize) -> usize {
        self.row_of[pos - 1]
    }

    fn col(&self, value: usize) -> usize {
        self.col_of[value - 1]
    }

    /// `P(sigma(a) = b) = T_{kl} / (lambda_k mu_l)` for `a in L_k`, `b in M_l`.
    pub fn fp_value_prob(&self, a: usize, b: usize) -> Result<Rational> {
        self.check_index("a", a, self.n)?;
        self.check_index("b", b, self.n)?;
        let (k, l) = (self.row(a), self.col(b));
        Ok(frac(self.t[k][l], self.lambda[k] * self.mu[l]))
    }

    /// `P(sigma(p1) = v1, sigma(p2) = v2)` for distinct positions and values,
    /// given the cells `(row of p1, column of v1)` and `(row of p2, column of v2)`.
    fn cell_pair(&self, (k, l): (usize, usize), (s, t): (usize, usize)) -> Rational {
        let (a, b) = (self.t[k][l], self.t[s][t]);
        let (lk, ls, ml, mt) = (self.lambda[k], self.lambda[s], self.mu[l], self.mu[t]);
        if (k, l) == (s, t) {
            frac(a * (a - 1), lk * (lk - 1) * ml * (ml - 1))
        } else if k == s {
            frac(a * b, lk * (lk - 1) * ml * mt)
        } else if l == t {
            frac(a * b, lk * ls * ml * (ml - 1))
        } else {
            frac(a * b, lk * ls * ml * mt)
        }
    }

    /// `P(sigma(p1) = v1, sigma(p2) = v2)` for `p1 != p2`, `v1 != v2`.
    pub fn pair_value_prob(&self, p1: usize, v1: usize, p2: usize, v2: usize) -> Result<Rational> {
        for (name, x) in [("p1", p1), ("v1", v1), ("p2", p2), ("v2", v2)] {
            self.check_index(name, x, self.n)?;
        }
        if p1 == p2 || v1 == v2 {
            return Err(Error::IndexOutOfRange("positions and values must be distinct".into()));
        }
        Ok(self.cell_pair((self.row(p1), self.col(v1)), (self.row(p2), self.col(v2))))
    }

    /// `P(sigma(i) = i, sigma(j) = j)`.
    pub fn fp_pair_prob(&self, i: usize, j: usize) -> Result<Rational> {
        self.pair_value_prob(i, i, j, j)
    }

    /// `P(sigma(a) = b, sigma(b) = a)`.
    pub fn two_cycle_prob(&self, a: usize, b: usize) -> Result<Rational> {
        self.pair_value_prob(a, b, b, a)
    }

    fn cell_fixed_prob(&self, k: usize, l: usize) -> Rational {
        frac(self.t[k][l], self.lambda[k] * self.mu[l])
    }

    pub fn fp_mean(&self) -> Rational {
        self.cells.nonempty().map(|(k, l)| self.cell_fixed_prob(k, l) * int(self.cells.size(k, l))).sum()
    }

    /// `E(fp) + sum_{i != j} P(i, j fixed) - E(fp)^2`, grouped by cells.
    pub fn fp_variance(&self) -> Rational {
        let cells: Vec<(usize, usize)> = self.cells.nonempty().collect();
        let mean = self.fp_mean();
        let mut second = Rational::zero();
        for &c in &cells {
            let sc = self.cells.size(c.0, c.1) as i64;
            for &d in &cells {
                let sd = self.cells.size(d.0, d.1) as i64;
                let pairs = if c == d { sc * (sc - 1) } else { sc * sd };
                if pairs > 0 {
                    second += self.cell_pair(c, d) * int(pairs);
                }
            }
        }
        &mean + second - &mean * &mean
    }

    fn same_block(&self, i: usize, j: usize) -> bool {
        self.row(i) == self.row(j)
    }

    fn border_descent(&self, k: usize) -> Rational {
        half() - frac(self.sums.f[k], 2 * self.lambda[k] * self.lambda[k + 1])
    }

    /// `P(sigma(i) > sigma(i+1))`.
    pub fn descent_prob(&self, i: usize) -> Result<Rational> {
        self.check_index("i", i, self.n.saturating_sub(1))?;
        Ok(self.descent_unchecked(i))
    }

    fn descent_unchecked(&self, i: usize) -> Rational {
        if self.same_block(i, i + 1) {
            half()
        } else {
            self.border_descent(self.row(i))
        }
    }

    /// `P(sigma(i) > sigma(i+1) > sigma(i+2))`.
    pub fn consecutive_descent_prob(&self, i: usize) -> Result<Rational> {
        self.check_index("i", i, self.n.saturating_sub(2))?;
        Ok(self.consecutive_unchecked(i))
    }

    fn consecutive_unchecked(&self, i: usize) -> Rational {
        let (a, b, c) = (self.row(i), self.row(i + 1), self.row(i + 2));
        let lam = &self.lambda;
        if a == c {
            ratio(1, 6)
        } else if a == b {
            frac(self.sums.g[a], 6 * lam[a] * (lam[a] - 1) * lam[a + 1])
        } else if b == c {
            frac(self.sums.h[a], 6 * lam[a] * lam[b] * (lam[b] - 1))
        } else {
            frac(self.sums.q[a], 6 * lam[a] * lam[b] * lam[c])
        }
    }

    /// `P(descent at i and at j)` for `j - i >= 2`.
    pub fn double_descent_prob(&self, i: usize, j: usize) -> Result<Rational> {
        self.check_index("i", i, self.n.saturating_sub(1))?;
        self.check_index("j", j, self.n.saturating_sub(1))?;
        if j < i + 2 {
            return Err(Error::IndexOutOfRange(format!("need j - i >= 2, got i = {i}, j = {j}")));
        }
        Ok(self.double_unchecked(i, j))
    }

    fn double_unchecked(&self, i: usize, j: usize) -> Rational {
        if self.same_block(i, i + 1) {
            return half() * self.descent_unchecked(j);
        }
        if self.same_block(j, j + 1) {
            return half() * self.descent_unchecked(i);
        }
        let (l, r) = (self.row(i), self.row(j));
        if r >= l + 2 {
            return self.border_descent(l) * self.border_descent(r);
        }
        let k = l;
        let lam = &self.lambda;
        let (f0, f1) = (self.sums.f[k], self.sums.f[k + 1]);
        let num = (lam[k] * lam[k + 1] - f0) * (lam[k + 1] * lam[k + 2] - f1) - self.sums.e[k];
        frac(num, 4 * lam[k] * lam[k + 1] * (lam[k + 1] - 1) * lam[k + 2])
    }

    /// `(n-1)/2 - (1/2) sum_k f(k) / (lambda_k lambda_{k+1})`.
    pub fn des_mean(&self) -> Rational {
        let border: Rational =
            (0..self.sums.f.len()).map(|k| frac(self.sums.f[k], self.lambda[k] * self.lambda[k + 1])).sum();
        ratio(self.n.saturating_sub(1), 2) - border * half()
    }

    /// Variances, adjacent covariances, and the far covariances at
    /// consecutive borders; every other far pair is independent.
    pub fn des_variance_exact(&self) -> Rational {
        if self.n < 2 {
            return Rational::zero();
        }
        let p: Vec<Rational> = (1..self.n).map(|i| self.descent_unchecked(i)).collect();
        let mut var: Rational = p.iter().map(|x| x * (Rational::one() - x)).sum();
        for i in 1..self.n.saturating_sub(1) {
            var += (self.consecutive_unchecked(i) - &p[i - 1] * &p[i]) * int(2);
        }
        let borders = self.descent_borders();
        for w in borders.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j >= i + 2 {
                var += (self.double_unchecked(i, j) - &p[i - 1] * &p[j - 1]) * int(2);
            }
        }
        var
    }

    /// Last positions of every block but the final one.
    fn descent_borders(&self) -> Vec<usize> {
        (1..self.n).filter(|&i| !self.same_block(i, i + 1)).collect()
    }

    /// Mean of d-descents, valid for `d <= lambda_I / 2`.
    pub fn d_des_mean(&self, d: usize) -> Result<Rational> {
        StatisticKind::DDescents(d).validate(self.n)?;
        let smallest = *self.lambda.last().expect("partition is nonempty") as usize;
        if 2 * d > smallest {
            return Err(Error::DOutOfRange { d, smallest_part: smallest });
        }
        let c = (d * (d + 1) / 2) as i64;
        let border: Rational =
            (0..self.sums.f.len()).map(|k| frac(self.sums.f[k], self.lambda[k] * self.lambda[k + 1])).sum();
        Ok(ratio((self.n * d) as i64 - c, 2) - border * ratio(c, 2))
    }

    /// `P(sigma(i) > sigma(j))` for `i < j`.
    pub fn inv_prob(&self, i: usize, j: usize) -> Result<Rational> {
        self.check_index("i", i, self.n)?;
        self.check_index("j", j, self.n)?;
        if i >= j {
            return Err(Error::IndexOutOfRange(format!("need i < j, got i = {i}, j = {j}")));
        }
        let (l, r) = (self.row(i), self.row(j));
        if l == r {
            return Ok(half());
        }
        Ok(half() - frac(self.sums.f_pair(l, r), 2 * self.lambda[l] * self.lambda[r]))
    }

    /// `n(n-1)/4 - (1/2) sum_{l<r} f(l, r)`.
    pub fn inv_mean(&self) -> Rational {
        let i = self.lambda.len();
        let total: i128 =
            (0..i).flat_map(|l| (l + 1..i).map(move |r| (l, r))).map(|(l, r)| self.sums.f_pair(l, r)).sum();
        ratio((self.n * self.n.saturating_sub(1)) as i64, 4) - frac(total, 2)
    }

    pub fn mean(&self, kind: StatisticKind) -> Result<Rational> {
        match kind {
            StatisticKind::FixedPoints => Ok(self.fp_mean()),
            StatisticKind::Descents => Ok(self.des_mean()),
            StatisticKind::DDescents(d) => self.d_des_mean(d),
            StatisticKind::Inversions => Ok(self.inv_mean()),
        }
    }

    /// Exact variance when a closed form exists.
    pub fn exact_variance(&self, kind: StatisticKind) -> Option<Rational> {
        match kind {
            StatisticKind::FixedPoints => Some(self.fp_variance()),
            StatisticKind::Descents => Some(self.des_variance_exact()),
            _ => None,
        }
    }

    pub fn report(&self, kind: StatisticKind) -> Result<MomentReport> {
        let mean = self.mean(kind)?;
        let order = variance_order(kind);
        let variance = match self.exact_variance(kind) {
            Some(value) => Variance::Exact { value },
            None => Variance::AsymptoticOnly { order },
        };
        Ok(MomentReport { statistic: kind, mean, variance, order, blocks: self.lambda.len(), n: self.n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CosetOracle;
    use crate::partition::Partition;
    use crate::stats::{d_descents_of, fixed_points_of, inversions_of};

    fn table(l: &[usize], m: &[usize], rows: Vec<Vec<u32>>) -> ContingencyTable {
        ContingencyTable::new(Partition::new(l.to_vec()).unwrap(), Partition::new(m.to_vec()).unwrap(), rows).unwrap()
    }

    fn small() -> ContingencyTable {
        table(&[2, 1], &[2, 1], vec![vec![1, 1], vec![1, 0]])
    }

    fn diag() -> ContingencyTable {
        table(&[2, 1], &[2, 1], vec![vec![2, 0], vec![0, 1]])
    }

    // term-by-term transcriptions of the sums, cubic in the number of columns
    fn literal_g(x: &[i128], y: &[i128]) -> i128 {
        let j = x.len();
        let mut acc: i128 = (0..j).map(|l| x[l] * (x[l] - 1) * y[l]).sum();
        for a in 0..j {
            for b in a + 1..j {
                acc += 3 * (x[b] * (x[b] - 1) * y[a] + x[b] * x[a] * y[a]);
                for c in b + 1..j {
                    acc += 6 * x[c] * x[b] * y[a];
                }
            }
        }
        acc
    }

    fn literal_h(x: &[i128], y: &[i128]) -> i128 {
        let j = x.len();
        let mut acc: i128 = (0..j).map(|l| x[l] * y[l] * (y[l] - 1)).sum();
        for a in 0..j {
            for b in a + 1..j {
                acc += 3 * (x[b] * y[b] * y[a] + x[b] * y[a] * (y[a] - 1));
                for c in b + 1..j {
                    acc += 6 * x[c] * y[b] * y[a];
                }
            }
        }
        acc
    }

    fn literal_e(x: &[i128], y: &[i128], z: &[i128]) -> i128 {
        let j = x.len();
        let mut acc: i128 = (0..j).map(|l| x[l] * y[l] * z[l]).sum();
        for a in 0..j {
            for b in a + 1..j {
                acc += 2 * x[b] * y[a] * z[a];
                acc += 2 * x[b] * y[b] * z[a];
                for c in b + 1..j {
                    acc += 4 * x[c] * y[b] * z[a];
                }
            }
        }
        acc
    }

    fn literal_q(x: &[i128], y: &[i128], z: &[i128]) -> i128 {
        let j = x.len();
        let mut acc: i128 = (0..j).map(|l| x[l] * y[l] * z[l]).sum();
        for a in 0..j {
            for b in a + 1..j {
                acc += 3 * (x[b] * y[b] * z[a] + x[b] * y[a] * z[a]);
                for c in b + 1..j {
                    acc += 6 * x[c] * y[b] * z[a];
                }
            }
        }
        acc
    }

    fn literal_f(x: &[i128], y: &[i128]) -> i128 {
        let j = x.len();
        let mut acc = 0;
        for a in 0..j {
            for b in a + 1..j {
                acc += x[a] * y[b] - y[a] * x[b];
            }
        }
        acc
    }

    #[test]
    fn prefix_sums_match_literal_sums() {
        use proptest::prelude::*;
        let strat = (1usize..7).prop_flat_map(|j| proptest::collection::vec(proptest::collection::vec(0i128..6, j), 3));
        proptest!(|(rows in strat)| {
            let (x, y, z) = (&rows[0], &rows[1], &rows[2]);
            prop_assert_eq!(sum_f(x, y), literal_f(x, y));
            prop_assert_eq!(sum_g(x, y), literal_g(x, y));
            prop_assert_eq!(sum_h(x, y), literal_h(x, y));
            prop_assert_eq!(sum_e(x, y, z), literal_e(x, y, z));
            prop_assert_eq!(sum_q(x, y, z), literal_q(x, y, z));
        });
    }

    #[test]
    fn fixed_point_examples() {
        let m = Moments::new(&small());
        assert_eq!(m.fp_value_prob(1, 1).unwrap(), ratio(1, 4));
        assert_eq!(m.fp_value_prob(3, 3).unwrap(), Rational::zero());
        assert_eq!(m.fp_mean(), ratio(1, 2));
        assert_eq!(m.fp_variance(), ratio(1, 4));
        assert_eq!(m.fp_pair_prob(1, 3).unwrap(), Rational::zero());
        assert_eq!(m.two_cycle_prob(1, 2).unwrap(), Rational::zero());

        let m = Moments::new(&diag());
        assert_eq!(m.fp_mean(), int(2));
        assert_eq!(m.fp_variance(), int(1));
        assert_eq!(m.fp_pair_prob(1, 2).unwrap(), half());
        assert_eq!(m.two_cycle_prob(1, 2).unwrap(), half());

        for n in 2..=7 {
            let m = Moments::new(&ContingencyTable::whole_group(n).unwrap());
            assert_eq!(m.fp_mean(), int(1));
            assert_eq!(m.fp_variance(), int(1));
            assert_eq!(m.fp_value_prob(1, n).unwrap(), ratio(1, n));
            assert_eq!(m.fp_pair_prob(1, 2).unwrap(), ratio(1, n * (n - 1)));
            assert_eq!(m.two_cycle_prob(1, 2).unwrap(), ratio(1, n * (n - 1)));
        }
    }

    #[test]
    fn single_row_variance_is_one() {
        let m = Moments::new(&table(&[3], &[2, 1], vec![vec![2, 1]]));
        assert_eq!(m.fp_variance(), int(1));
    }

    #[test]
    fn descent_examples() {
        let m = Moments::new(&small());
        assert_eq!(m.sums().f[0], -1);
        assert_eq!(m.descent_prob(1).unwrap(), half());
        assert_eq!(m.descent_prob(2).unwrap(), ratio(3, 4));
        assert_eq!(m.sums().g[0], 3);
        assert_eq!(m.consecutive_descent_prob(1).unwrap(), ratio(1, 4));
        assert_eq!(m.des_mean(), ratio(5, 4));
        assert_eq!(m.des_variance_exact(), ratio(3, 16));
        assert_eq!(m.inv_prob(1, 3).unwrap(), ratio(3, 4));
        assert_eq!(m.inv_mean(), int(2));

        let m = Moments::new(&diag());
        assert_eq!(m.descent_prob(2).unwrap(), Rational::zero());
        assert_eq!(m.des_mean(), half());
        assert_eq!(m.inv_prob(1, 3).unwrap(), Rational::zero());
        assert_eq!(m.inv_mean(), half());
    }

    #[test]
    fn uniform_case_closed_forms() {
        for n in 3..=9 {
            let m = Moments::new(&ContingencyTable::whole_group(n).unwrap());
            assert_eq!(m.des_mean(), ratio(n - 1, 2));
            assert_eq!(m.des_variance_exact(), ratio(n + 1, 12));
            assert_eq!(m.inv_mean(), ratio(n * (n - 1), 4));
            assert_eq!(m.consecutive_descent_prob(1).unwrap(), ratio(1, 6));
        }
        let m = Moments::new(&ContingencyTable::whole_group(8).unwrap());
        assert_eq!(m.d_des_mean(1).unwrap(), m.des_mean());
        assert_eq!(m.d_des_mean(3).unwrap(), ratio(8 * 3 - 6, 2));
        assert!(matches!(m.d_des_mean(5), Err(Error::DOutOfRange { .. })));
        assert!(matches!(m.d_des_mean(8), Err(Error::BadD { .. })));
    }

    #[test]
    fn index_errors() {
        let m = Moments::new(&small());
        assert!(m.descent_prob(3).is_err());
        assert!(m.consecutive_descent_prob(2).is_err());
        assert!(m.double_descent_prob(1, 2).is_err());
        assert!(m.inv_prob(2, 2).is_err());
        assert!(m.fp_pair_prob(1, 1).is_err());
        assert!(m.fp_value_prob(0, 1).is_err());
    }

    fn assert_matches_enumeration(t: &ContingencyTable) {
        let n = t.n();
        let m = Moments::new(t);
        let o = CosetOracle::new(t, 8).unwrap();
        let at = |s: &[u32], i: usize| s[i - 1] as usize;
        for a in 1..=n {
            for b in 1..=n {
                assert_eq!(m.fp_value_prob(a, b).unwrap(), o.probability(|s| at(s, a) == b), "{t} {a}->{b}");
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let fp = o.probability(|s| at(s, i) == i && at(s, j) == j);
                assert_eq!(m.fp_pair_prob(i, j).unwrap(), fp, "{t} fp pair {i},{j}");
                let tc = o.probability(|s| at(s, i) == j && at(s, j) == i);
                assert_eq!(m.two_cycle_prob(i, j).unwrap(), tc, "{t} two-cycle {i},{j}");
                if i < j {
                    let inv = o.probability(|s| at(s, i) > at(s, j));
                    assert_eq!(m.inv_prob(i, j).unwrap(), inv, "{t} inv {i},{j}");
                }
            }
        }
        for i in 1..n {
            assert_eq!(m.descent_prob(i).unwrap(), o.probability(|s| s[i - 1] > s[i]), "{t} des {i}");
            if i + 2 <= n {
                let c = o.probability(|s| s[i - 1] > s[i] && s[i] > s[i + 1]);
                assert_eq!(m.consecutive_descent_prob(i).unwrap(), c, "{t} consecutive {i}");
            }
            for j in i + 2..n {
                let dd = o.probability(|s| s[i - 1] > s[i] && s[j - 1] > s[j]);
                assert_eq!(m.double_descent_prob(i, j).unwrap(), dd, "{t} double {i},{j}");
            }
        }
        assert_eq!(m.fp_mean(), o.expectation(|s| fixed_points_of(s) as i64));
        let fp = o.law(StatisticKind::FixedPoints);
        assert_eq!(m.fp_variance(), fp.variance(), "{t} fp variance");
        let des = o.law(StatisticKind::Descents);
        assert_eq!(m.des_mean(), des.mean());
        assert_eq!(m.des_variance_exact(), des.variance(), "{t} des variance");
        assert_eq!(m.inv_mean(), o.expectation(|s| inversions_of(s) as i64));
        for d in 1..n {
            if let Ok(mean) = m.d_des_mean(d) {
                assert_eq!(mean, o.expectation(|s| d_descents_of(s, d) as i64), "{t} d = {d}");
            }
        }
    }

    #[test]
    fn formulas_match_enumeration_up_to_five() {
        for n in 1..=5 {
            for l in Partition::all(n) {
                for m in Partition::all(n) {
                    for t in ContingencyTable::enumerate(&l, &m).unwrap() {
                        assert_matches_enumeration(&t);
                    }
                }
            }
        }
    }

    #[test]
    fn consecutive_borders_at_six() {
        let l = Partition::new(vec![2, 2, 2]).unwrap();
        for m in Partition::all(6) {
            for t in ContingencyTable::enumerate(&l, &m).unwrap() {
                assert_matches_enumeration(&t);
            }
        }
    }

    #[test]
    fn d_descent_mean_at_eight() {
        let t = table(&[4, 4], &[4, 4], vec![vec![3, 1], vec![1, 3]]);
        let m = Moments::new(&t);
        let o = CosetOracle::new(&t, 8).unwrap();
        assert_eq!(m.d_des_mean(2).unwrap(), o.expectation(|s| d_descents_of(s, 2) as i64));
    }

    #[test]
    fn normalized_sums_bounded() {
        for n in 2..=7 {
            for l in Partition::all(n) {
                for m in Partition::all(n) {
                    for t in ContingencyTable::enumerate(&l, &m).unwrap() {
                        let mo = Moments::new(&t);
                        let lam = &mo.lambda;
                        for k in 0..mo.sums.f.len() {
                            assert!(mo.sums.f[k].abs() <= lam[k] * lam[k + 1]);
                            assert!(mo.sums.g[k] <= lam[k] * (lam[k] - 1) * lam[k + 1] * 6);
                            assert!(mo.sums.h[k] <= lam[k] * lam[k + 1] * (lam[k + 1] - 1) * 6);
                        }
                        let mean = mo.des_mean();
                        assert!(mean >= Rational::zero() && mean <= int(n - 1));
                        assert!(mo.des_variance_exact() >= Rational::zero());
                        assert!(mo.fp_variance() >= Rational::zero());
                    }
                }
            }
        }
    }

    #[test]
    fn report_shape() {
        let r = Moments::new(&small()).report(StatisticKind::Descents).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["mean"]["exact"], "5/4");
        assert_eq!(json["statistic"], "des");
        assert_eq!(json["variance"]["kind"], "exact");
        let r = Moments::new(&small()).report(StatisticKind::Inversions).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["variance"]["kind"], "asymptotic_only");
        assert_eq!(json["variance"]["order"], "n^3");
    }
}
