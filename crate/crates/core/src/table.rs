//! Contingency tables with fixed margins and the table-level quantities of
//! the Fisher-Yates distribution.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::permutation::Permutation;
use crate::rational::{factorial, int, ratio, Rational};

/// An `I x J` nonnegative integer matrix with row sums `lambda` and column
/// sums `mu`. Indexes the double coset `S_lambda sigma S_mu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TableJson", into = "TableJson")]
pub struct ContingencyTable {
    lambda: Partition,
    mu: Partition,
    entries: Vec<u32>,
}

/// JSON wire form: `{"lambda":[...],"mu":[...],"entries":[[...],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub lambda: Vec<usize>,
    pub mu: Vec<usize>,
    pub entries: Vec<Vec<u32>>,
}

impl TryFrom<TableJson> for ContingencyTable {
    type Error = Error;

    fn try_from(t: TableJson) -> Result<Self> {
        ContingencyTable::new(Partition::new(t.lambda)?, Partition::new(t.mu)?, t.entries)
    }
}

impl From<ContingencyTable> for TableJson {
    fn from(t: ContingencyTable) -> Self {
        TableJson { lambda: t.lambda.parts().to_vec(), mu: t.mu.parts().to_vec(), entries: t.rows() }
    }
}

impl ContingencyTable {
    pub fn new(lambda: Partition, mu: Partition, entries: Vec<Vec<u32>>) -> Result<Self> {
        check_sizes(&lambda, &mu)?;
        let (rows, cols) = (lambda.len(), mu.len());
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::MarginMismatch(format!("expected a {rows}x{cols} table for lambda={lambda}, mu={mu}")));
        }
        for (i, row) in entries.iter().enumerate() {
            let s: usize = row.iter().map(|&v| v as usize).sum();
            if s != lambda.part(i) {
                return Err(Error::MarginMismatch(format!("row {} sums to {s}, expected {}", i + 1, lambda.part(i))));
            }
        }
        for j in 0..cols {
            let s: usize = entries.iter().map(|r| r[j] as usize).sum();
            if s != mu.part(j) {
                return Err(Error::MarginMismatch(format!("column {} sums to {s}, expected {}", j + 1, mu.part(j))));
            }
        }
        Ok(ContingencyTable { lambda, mu, entries: entries.into_iter().flatten().collect() })
    }

    /// The one-cell table `[[n]]`, indexing the whole group.
    pub fn whole_group(n: usize) -> Result<Self> {
        let p = Partition::single(n)?;
        ContingencyTable::new(p.clone(), p, vec![vec![n as u32]])
    }

    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.lambda.n()
    }

    pub fn rows_len(&self) -> usize {
        self.lambda.len()
    }

    pub fn cols_len(&self) -> usize {
        self.mu.len()
    }

    /// `T_{ij}` with 0-based block indices.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.mu.len() + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let j = self.mu.len();
        &self.entries[i * j..(i + 1) * j]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows_len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries_flat(&self) -> &[u32] {
        &self.entries
    }

    /// Entries sorted in decreasing order.
    pub fn sorted_entries(&self) -> Vec<u32> {
        let mut v = self.entries.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// Every table with margins `(lambda, mu)`, rows filled recursively with
    /// pruning on the remaining column sums.
    pub fn enumerate(lambda: &Partition, mu: &Partition) -> Result<Vec<ContingencyTable>> {
        check_sizes(lambda, mu)?;
        let (rows, cols) = (lambda.len(), mu.len());
        let mut out = Vec::new();
        let mut entries = vec![0u32; rows * cols];
        let mut remaining: Vec<u32> = mu.parts().iter().map(|&m| m as u32).collect();
        fill(lambda, cols, 0, 0, lambda.part(0) as u32, &mut entries, &mut remaining, &mut |e| {
            out.push(ContingencyTable { lambda: lambda.clone(), mu: mu.clone(), entries: e.to_vec() });
        });
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn fill(
    lambda: &Partition,
    cols: usize,
    i: usize,
    j: usize,
    row_left: u32,
    entries: &mut [u32],
    remaining: &mut [u32],
    emit: &mut dyn FnMut(&[u32]),
) {
    if j + 1 == cols {
        // last column is forced by the row sum
        if row_left > remaining[j] {
            return;
        }
        entries[i * cols + j] = row_left;
        remaining[j] -= row_left;
        if i + 1 == lambda.len() {
            if remaining.iter().all(|&r| r == 0) {
                emit(entries);
            }
        } else {
            let next = lambda.part(i + 1) as u32;
            fill(lambda, cols, i + 1, 0, next, entries, remaining, emit);
        }
        remaining[j] += row_left;
        return;
    }
    // capacity left in later columns bounds how little this cell may take
    let later: u32 = remaining[j + 1..].iter().sum();
    let lo = row_left.saturating_sub(later);
    let hi = row_left.min(remaining[j]);
    for v in (lo..=hi).rev() {
        entries[i * cols + j] = v;
        remaining[j] -= v;
        fill(lambda, cols, i, j + 1, row_left - v, entries, remaining, emit);
        remaining[j] += v;
    }
}

fn check_sizes(lambda: &Partition, mu: &Partition) -> Result<()> {
    if lambda.n() != mu.n() {
        return Err(Error::SizeMismatch { lambda: lambda.n(), mu: mu.n() });
    }
    Ok(())
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows_len() {
            if i > 0 {
                f.write_str(",")?;
            }
            let r: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "[{}]", r.join(","))?;
        }
        f.write_str("]")
    }
}

/// `A_{kl} = L_k ∩ M_l`, all `I*J` cells including empty ones. Positions are
/// 1-based; cells are contiguous intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPartition {
    rows: usize,
    cols: usize,
    cells: Vec<std::ops::Range<usize>>,
}

impl CellPartition {
    /// Positions in `A_{kl}` (0-based block indices, 1-based positions).
    pub fn cell(&self, k: usize, l: usize) -> std::ops::Range<usize> {
        self.cells[k * self.cols + l].clone()
    }

    pub fn size(&self, k: usize, l: usize) -> usize {
        self.cell(k, l).len()
    }

    pub fn nonempty(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |k| (0..self.cols).map(move |l| (k, l))).filter(|&(k, l)| self.size(k, l) > 0)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

pub fn cell_partition(lambda: &Partition, mu: &Partition) -> Result<CellPartition> {
    check_sizes(lambda, mu)?;
    let mut cells = Vec::with_capacity(lambda.len() * mu.len());
    for k in 0..lambda.len() {
        let (a0, a1) = (lambda.block_start(k) + 1, lambda.block_start(k) + lambda.part(k) + 1);
        for l in 0..mu.len() {
            let (b0, b1) = (mu.block_start(l) + 1, mu.block_start(l) + mu.part(l) + 1);
            let lo = a0.max(b0);
            let hi = a1.min(b1).max(lo);
            cells.push(lo..hi);
        }
    }
    Ok(CellPartition { rows: lambda.len(), cols: mu.len(), cells })
}

/// `T_{ij}` = number of positions in `L_i` whose value lies in `M_j`.
pub fn table_of_permutation(sigma: &Permutation, lambda: &Partition, mu: &Partition) -> Result<ContingencyTable> {
    check_sizes(lambda, mu)?;
    if sigma.n() != lambda.n() {
        return Err(Error::SizeMismatch { lambda: lambda.n(), mu: sigma.n() });
    }
    let cols = mu.len();
    let row_of = lambda.block_labels();
    let col_of = mu.block_labels();
    let mut entries = vec![0u32; lambda.len() * cols];
    for (p, &v) in sigma.one_line().iter().enumerate() {
        entries[row_of[p] * cols + col_of[v as usize - 1]] += 1;
    }
    Ok(ContingencyTable { lambda: lambda.clone(), mu: mu.clone(), entries })
}

/// `(prod lambda_i!)(prod mu_j!) / prod T_{ij}!`.
pub fn coset_size(t: &ContingencyTable) -> BigInt {
    let num: BigInt = t.lambda.parts().iter().chain(t.mu.parts()).map(|&p| factorial(p)).product();
    let den: BigInt = t.entries.iter().map(|&e| factorial(e as usize)).product();
    num / den
}

pub fn fisher_yates_probability(t: &ContingencyTable) -> Rational {
    Rational::new(coset_size(t), factorial(t.n()))
}

/// `T*_{ij} = lambda_i mu_j / n`.
pub fn independence_table(lambda: &Partition, mu: &Partition) -> Result<Vec<Vec<Rational>>> {
    check_sizes(lambda, mu)?;
    let n = lambda.n();
    Ok(lambda.parts().iter().map(|&l| mu.parts().iter().map(|&m| ratio((l * m) as u64, n as u64)).collect()).collect())
}

pub fn chi_squared(t: &ContingencyTable) -> Rational {
    let star = independence_table(&t.lambda, &t.mu).expect("table margins share n");
    let mut acc = Rational::zero();
    for (i, row) in star.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let diff = int(t.get(i, j)) - e;
            acc += &diff * &diff / e;
        }
    }
    acc
}

/// Outcome of comparing two same-margin tables in majorization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Majorization {
    /// The first table is majorized by the second (`T ≺ T'`).
    FirstBelow,
    /// The second table is majorized by the first (`T' ≺ T`).
    SecondBelow,
    /// Identical sorted prefix sums.
    Equal,
    Incomparable,
}

/// Weak majorization on sorted entries: `T ≺ T'` iff every prefix sum of the
/// decreasingly sorted entries of `T'` is at least that of `T`, strictly for
/// at least one prefix.
pub fn majorizes(t: &ContingencyTable, other: &ContingencyTable) -> Result<Majorization> {
    if t.lambda != other.lambda || t.mu != other.mu {
        return Err(Error::MarginMismatch(format!(
            "cannot compare tables with margins {}x{} and {}x{}",
            t.lambda, t.mu, other.lambda, other.mu
        )));
    }
    Ok(compare_sorted(&t.sorted_entries(), &other.sorted_entries()))
}

/// Majorization on two decreasingly sorted vectors of equal length and sum.
pub fn compare_sorted(a: &[u32], b: &[u32]) -> Majorization {
    let (mut sa, mut sb) = (0u64, 0u64);
    let (mut a_below, mut b_below) = (false, false);
    for (&x, &y) in a.iter().zip(b) {
        sa += x as u64;
        sb += y as u64;
        match sa.cmp(&sb) {
            Ordering::Less => a_below = true,
            Ordering::Greater => b_below = true,
            Ordering::Equal => {}
        }
    }
    match (a_below, b_below) {
        (false, false) => Majorization::Equal,
        (true, false) => Majorization::FirstBelow,
        (false, true) => Majorization::SecondBelow,
        (true, true) => Majorization::Incomparable,
    }
}

/// Exact `n!` as a rational, handy for normalization checks.
pub fn group_order(n: usize) -> BigInt {
    if n == 0 {
        BigInt::one()
    } else {
        factorial(n)
    }
}
