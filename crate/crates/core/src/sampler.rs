//! Uniform sampling from a double coset and exhaustive enumeration of small
//! cosets.

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::permutation::{for_each_permutation, Permutation};
use crate::rng::RngStream;
use crate::table::{table_of_permutation, ContingencyTable};

pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// Reusable sampler for the coset indexed by one table.
///
/// A draw first shuffles the values of every column block `M_j` and deals
/// them out in consecutive groups of sizes `T_{1j}, ..., T_{Ij}` to the row
/// blocks, then shuffles the pooled values of each row block over its
/// positions. There are `prod_j mu_j!/prod_i T_ij! * prod_i lambda_i!`
/// equally likely outcomes, each coset element arising equally often.
#[derive(Debug, Clone)]
pub struct CosetSampler {
    n: usize,
    cols: usize,
    counts: Vec<u32>,
    row_starts: Vec<usize>,
    row_ends: Vec<usize>,
    col_values: Vec<Vec<u32>>,
    cursor: Vec<usize>,
}

impl CosetSampler {
    pub fn new(t: &ContingencyTable) -> Self {
        let lambda = t.lambda();
        let mu = t.mu();
        let row_starts: Vec<usize> = (0..lambda.len()).map(|k| lambda.block_start(k)).collect();
        let row_ends = (0..lambda.len()).map(|k| row_starts[k] + lambda.part(k)).collect();
        let col_values = (0..mu.len())
            .map(|l| {
                let s = mu.block_start(l) as u32;
                (s + 1..=s + mu.part(l) as u32).collect()
            })
            .collect();
        CosetSampler {
            n: t.n(),
            cols: mu.len(),
            counts: t.entries_flat().to_vec(),
            cursor: row_starts.clone(),
            row_starts,
            row_ends,
            col_values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes a uniform coset element into `out` (length `n`, one-line, 1-based).
    pub fn sample_into(&mut self, rng: &mut RngStream, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.n);
        self.cursor.copy_from_slice(&self.row_starts);
        let rows = self.row_starts.len();
        for j in 0..self.cols {
            let values = &mut self.col_values[j];
            rng.shuffle(values);
            let mut taken = 0;
            for i in 0..rows {
                let c = self.counts[i * self.cols + j] as usize;
                let at = self.cursor[i];
                out[at..at + c].copy_from_slice(&values[taken..taken + c]);
                self.cursor[i] += c;
                taken += c;
            }
        }
        for i in 0..rows {
            rng.shuffle(&mut out[self.row_starts[i]..self.row_ends[i]]);
        }
    }

    pub fn sample(&mut self, rng: &mut RngStream) -> Permutation {
        let mut out = vec![0u32; self.n];
        self.sample_into(rng, &mut out);
        Permutation::from_trusted(out)
    }
}

/// One uniform draw from the coset indexed by `t`.
pub fn sample_uniform(t: &ContingencyTable, rng: &mut RngStream) -> Permutation {
    CosetSampler::new(t).sample(rng)
}

/// Table of a uniform permutation of `[n]`; distributed as Fisher-Yates.
pub fn sample_fisher_yates_table(lambda: &Partition, mu: &Partition, rng: &mut RngStream) -> Result<ContingencyTable> {
    if lambda.n() != mu.n() {
        return Err(Error::SizeMismatch { lambda: lambda.n(), mu: mu.n() });
    }
    let mut v: Vec<u32> = (1..=lambda.n() as u32).collect();
    rng.shuffle(&mut v);
    table_of_permutation(&Permutation::from_trusted(v), lambda, mu)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// Streams the coset indexed by `t` in lexicographic order, each element
/// exactly once.
///
/// This walks the lexicographic enumeration of `S_n` and prunes every prefix
/// that already overfills a cell of `t`, so it yields exactly the
/// permutations a generate-and-filter pass over `S_n` would keep.
pub fn enumerate_coset(t: &ContingencyTable, cap: usize) -> Result<CosetIter> {
    check_cap(t.n(), cap)?;
    Ok(CosetIter::new(t))
}

/// Plain generate-and-filter enumeration over all of `S_n`.
pub fn enumerate_coset_by_filter(t: &ContingencyTable, cap: usize) -> Result<Vec<Permutation>> {
    check_cap(t.n(), cap)?;
    let mut out = Vec::new();
    for_each_permutation(t.n(), |s| {
        let sigma = Permutation::from_trusted(s.to_vec());
        let got = table_of_permutation(&sigma, t.lambda(), t.mu()).expect("same n");
        if &got == t {
            out.push(sigma);
        }
    });
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CosetIter {
    n: usize,
    cols: usize,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    remaining: Vec<u32>,
    used: Vec<bool>,
    buf: Vec<u32>,
    next_candidate: Vec<usize>,
    depth: usize,
    done: bool,
}

impl CosetIter {
    fn new(t: &ContingencyTable) -> Self {
        let n = t.n();
        CosetIter {
            n,
            cols: t.cols_len(),
            row_of: t.lambda().block_labels(),
            col_of: t.mu().block_labels(),
            remaining: t.entries_flat().to_vec(),
            used: vec![false; n],
            buf: vec![0; n],
            next_candidate: vec![0; n + 1],
            depth: 0,
            done: n == 0,
        }
    }

    fn undo(&mut self, pos: usize) {
        let v = self.buf[pos] as usize - 1;
        self.used[v] = false;
        self.remaining[self.row_of[pos] * self.cols + self.col_of[v]] += 1;
    }

    /// Advances to the next complete element, leaving it in the internal
    /// buffer. Avoids allocation for hot oracle loops.
    pub fn advance(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if self.depth == self.n {
            self.depth -= 1;
            self.undo(self.depth);
        }
        loop {
            let d = self.depth;
            let row = self.row_of[d] * self.cols;
            let mut found = None;
            for v in self.next_candidate[d]..self.n {
                if !self.used[v] && self.remaining[row + self.col_of[v]] > 0 {
                    found = Some(v);
                    break;
                }
            }
            match found {
                Some(v) => {
                    self.used[v] = true;
                    self.remaining[row + self.col_of[v]] -= 1;
                    self.buf[d] = v as u32 + 1;
                    self.next_candidate[d] = v + 1;
                    self.depth += 1;
                    if self.depth == self.n {
                        return Some(&self.buf);
                    }
                    self.next_candidate[self.depth] = 0;
                }
                None => {
                    if d == 0 {
                        self.done = true;
                        return None;
                    }
                    self.depth -= 1;
                    self.undo(self.depth);
                }
            }
        }
    }
}

impl Iterator for CosetIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        self.advance().map(|s| Permutation::from_trusted(s.to_vec()))
    }
}
