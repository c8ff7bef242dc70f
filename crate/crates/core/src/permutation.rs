use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `[n]` in one-line notation: `sigma(i) = one_line[i - 1]`,
/// values 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    one_line: Vec<u32>,
}

impl Permutation {
    pub fn new(one_line: Vec<u32>) -> Result<Self> {
        let n = one_line.len();
        let mut seen = vec![false; n];
        for &v in &one_line {
            let idx = (v as usize).wrapping_sub(1);
            if idx >= n || seen[idx] {
                return Err(Error::InvalidPermutation(format!("{one_line:?} is not a bijection on [1, {n}]")));
            }
            seen[idx] = true;
        }
        Ok(Permutation { one_line })
    }

    /// Wraps a buffer already known to be a bijection on `[n]`.
    pub(crate) fn from_trusted(one_line: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(one_line.clone()).is_ok());
        Permutation { one_line }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { one_line: (1..=n as u32).collect() }
    }

    pub fn n(&self) -> usize {
        self.one_line.len()
    }

    pub fn one_line(&self) -> &[u32] {
        &self.one_line
    }

    /// `sigma(i)` for a 1-based position.
    pub fn apply(&self, i: usize) -> usize {
        self.one_line[i - 1] as usize
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.n()];
        for (i, &v) in self.one_line.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { one_line: inv }
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.one_line
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.one_line
    }
}

/// Space-separated one-line notation, e.g. `1 3 2`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.one_line {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Accepts `"1 3 2"`, `"1,3,2"` or, when every value is a single digit, `"132"`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let values: Vec<u32> = if s.contains([' ', ',']) {
            s.split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("permutation {s:?}: {e}")))?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::Parse(format!("permutation {s:?}"))))
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

/// Steps a buffer to the next permutation in lexicographic order; `false`
/// once the last one (strictly decreasing) has been reached.
pub fn next_lexicographic(v: &mut [u32]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Calls `f` on every permutation of `[n]` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[u32])) {
    let mut buf: Vec<u32> = (1..=n as u32).collect();
    loop {
        f(&buf);
        if !next_lexicographic(&mut buf) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Permutation::new(vec![2, 1, 3]).is_ok());
        assert!(Permutation::new(vec![2, 2, 3]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 4, 2]).is_err());
    }

    #[test]
    fn parse_forms() {
        let a: Permutation = "132".parse().unwrap();
        let b: Permutation = "1 3 2".parse().unwrap();
        let c: Permutation = "1,3,2".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a.to_string(), "1 3 2");
        assert_eq!(a.apply(2), 3);
    }

    #[test]
    fn inverse_roundtrip() {
        let p: Permutation = "3 1 4 2".parse().unwrap();
        assert_eq!(p.inverse().inverse(), p);
        assert_eq!(p.inverse().one_line(), &[2, 4, 1, 3]);
    }

    #[test]
    fn lexicographic_walk_covers_group() {
        let mut seen = Vec::new();
        for_each_permutation(4, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 24);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        let mut count = 0;
        for_each_permutation(0, |_| count += 1);
        assert_eq!(count, 1);
    }
}
