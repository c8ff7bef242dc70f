//! Integer partitions and the block structure they induce on `[n]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weakly decreasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
    n: usize,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition { parts, reason: "no parts" });
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition { parts, reason: "parts must be positive" });
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition { parts, reason: "parts must be weakly decreasing" });
        }
        let n = parts.iter().sum();
        Ok(Partition { parts, n })
    }

    /// The one-part partition `(n)`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parts, `I` for lambda and `J` for mu.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn part(&self, k: usize) -> usize {
        self.parts[k]
    }

    /// The smallest part (`lambda_I`).
    pub fn smallest(&self) -> usize {
        *self.parts.last().expect("partition has at least one part")
    }

    /// 0-based start of block `k` as a 0-based position.
    pub fn block_start(&self, k: usize) -> usize {
        self.parts[..k].iter().sum()
    }

    /// Block index (0-based) of a 0-based position.
    pub fn block_of(&self, pos: usize) -> usize {
        let mut acc = 0;
        for (k, &p) in self.parts.iter().enumerate() {
            acc += p;
            if pos < acc {
                return k;
            }
        }
        panic!("position {pos} outside [0, {})", self.n)
    }

    /// Block index for every 0-based position.
    pub fn block_labels(&self) -> Vec<usize> {
        self.parts.iter().enumerate().flat_map(|(k, &p)| std::iter::repeat_n(k, p)).collect()
    }

    pub fn blocks(&self) -> BlockStructure {
        block_structure(self)
    }

    /// All partitions of `n` in reverse lexicographic order, starting with `(n)`.
    pub fn all(n: usize) -> Vec<Partition> {
        fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition { parts: cur.clone(), n: cur.iter().sum() });
                return;
            }
            for k in (1..=rem.min(max)).rev() {
                cur.push(k);
                rec(rem - k, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", strs.join(","))
    }
}

/// Parses `"3,2,1"`, `"(3,2,1)"` or `"[3,2,1]"`.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let parts = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("partition {s:?}: {e}")))?;
        Partition::new(parts)
    }
}

/// Blocks `L_i`, borders `l_i^b` and interiors `L_i^o` of a partition.
/// Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    pub blocks: Vec<std::ops::RangeInclusive<usize>>,
    pub borders: Vec<usize>,
    pub interiors: Vec<Vec<usize>>,
}

impl BlockStructure {
    /// `L_k` minus its two largest indices.
    pub fn double_interior(&self, k: usize) -> Vec<usize> {
        let b = self.borders[k];
        self.blocks[k].clone().filter(|&p| p + 1 < b).collect()
    }
}

pub fn block_structure(p: &Partition) -> BlockStructure {
    let mut blocks = Vec::with_capacity(p.len());
    let mut borders = Vec::with_capacity(p.len());
    let mut interiors = Vec::with_capacity(p.len());
    let mut start = 1;
    for &size in p.parts() {
        let border = start + size - 1;
        blocks.push(start..=border);
        borders.push(border);
        interiors.push((start..border).collect());
        start = border + 1;
    }
    BlockStructure { blocks, borders, interiors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_parts() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn blocks_of_two_one() {
        let b = block_structure(&p(&[2, 1]));
        assert_eq!(b.blocks, vec![1..=2, 3..=3]);
        assert_eq!(b.borders, vec![2, 3]);
        assert_eq!(b.interiors, vec![vec![1], vec![]]);
    }

    #[test]
    fn single_block() {
        let b = block_structure(&p(&[5]));
        assert_eq!(b.blocks, vec![1..=5]);
        assert_eq!(b.borders, vec![5]);
        assert_eq!(b.interiors, vec![vec![1, 2, 3, 4]]);
    }

    #[test]
    fn borders_are_prefix_sums() {
        assert_eq!(block_structure(&p(&[3, 2, 1])).borders, vec![3, 5, 6]);
        assert_eq!(block_structure(&p(&[3, 2, 1])).double_interior(0), vec![1]);
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| Partition::all(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
        assert_eq!(Partition::all(3)[0], p(&[3]));
    }

    #[test]
    fn parse_and_display() {
        let q: Partition = "[3, 2,1]".parse().unwrap();
        assert_eq!(q, p(&[3, 2, 1]));
        assert_eq!(q.to_string(), "(3,2,1)");
        assert!("2,3".parse::<Partition>().is_err());
    }

    #[test]
    fn block_lookup() {
        let q = p(&[3, 2, 1]);
        assert_eq!(q.block_labels(), vec![0, 0, 0, 1, 1, 2]);
        assert_eq!(q.block_of(4), 1);
        assert_eq!(q.block_start(2), 5);
    }
}
