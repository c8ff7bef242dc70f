//! Parallel Monte Carlo over a coset.
//!
//! Samples are split into fixed-size blocks; block `b` draws from the stream
//! `(seed, b)`. Results depend only on the seed and sample count, never on
//! the number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::CosetSampler;
use crate::stats::{StatEvaluator, StatisticKind};
use crate::table::ContingencyTable;

pub const BLOCK_SIZE: u64 = 1 << 14;

/// Runs `work(block, count, rng)` over every block and returns the results in
/// block order.
pub fn run_blocks<R, F>(samples: u64, seed: u64, threads: usize, work: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64, u64, &mut RngStream) -> R + Sync,
{
    let blocks = samples.div_ceil(BLOCK_SIZE) as usize;
    let count = |b: usize| BLOCK_SIZE.min(samples - b as u64 * BLOCK_SIZE);
    let threads = threads.max(1).min(blocks.max(1));
    if threads == 1 {
        return (0..blocks).map(|b| work(b as u64, count(b), &mut RngStream::new(seed, b as u64))).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..blocks).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                if b >= blocks {
                    break;
                }
                let r = work(b as u64, count(b), &mut RngStream::new(seed, b as u64));
                slots.lock().expect("worker panicked")[b] = Some(r);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every block ran")).collect()
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Counts of each observed value, sorted by value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn add(&mut self, v: u64) {
        *self.counts.entry(v).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&v, &c) in &other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn frequency(&self, v: u64) -> f64 {
        self.counts.get(&v).copied().unwrap_or(0) as f64 / self.total() as f64
    }

    pub fn mean(&self) -> f64 {
        let t = self.total() as f64;
        self.counts.iter().map(|(&v, &c)| v as f64 * c as f64).sum::<f64>() / t
    }

    pub fn variance(&self) -> f64 {
        let t = self.total() as f64;
        let m = self.mean();
        self.counts.iter().map(|(&v, &c)| (v as f64 - m).powi(2) * c as f64).sum::<f64>() / (t - 1.0).max(1.0)
    }

    /// CSV `value,count` sorted by value.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::EmptySample);
        }
        let io = |e: std::io::Error| Error::Io(e.to_string());
        writeln!(w, "value,count").map_err(io)?;
        for (v, c) in &self.counts {
            writeln!(w, "{v},{c}").map_err(io)?;
        }
        Ok(())
    }
}

/// Writes a `value,count` histogram of `samples` to `path`.
pub fn emit_histogram(samples: &[u64], path: &std::path::Path) -> Result<()> {
    let mut h = Histogram::default();
    samples.iter().for_each(|&v| h.add(v));
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    h.write_csv(std::io::BufWriter::new(file))
}

/// Histogram of a statistic over uniform draws from the coset of `t`.
pub fn sample_histogram(
    t: &ContingencyTable,
    kind: StatisticKind,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<Histogram> {
    kind.validate(t.n())?;
    let parts = run_blocks(samples, seed, threads, |_, count, rng| {
        let mut sampler = CosetSampler::new(t);
        let mut eval = StatEvaluator::new(kind);
        let mut buf = vec![0u32; t.n()];
        let mut h = Histogram::default();
        for _ in 0..count {
            sampler.sample_into(rng, &mut buf);
            h.add(eval.eval(&buf));
        }
        h
    });
    let mut all = Histogram::default();
    parts.iter().for_each(|h| all.merge(h));
    Ok(all)
}

/// Statistic values in draw order (block order, then order within block).
pub fn sample_values(
    t: &ContingencyTable,
    kind: StatisticKind,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<Vec<u64>> {
    kind.validate(t.n())?;
    let parts = run_blocks(samples, seed, threads, |_, count, rng| {
        let mut sampler = CosetSampler::new(t);
        let mut eval = StatEvaluator::new(kind);
        let mut buf = vec![0u32; t.n()];
        (0..count)
            .map(|_| {
                sampler.sample_into(rng, &mut buf);
                eval.eval(&buf)
            })
            .collect::<Vec<u64>>()
    });
    Ok(parts.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_results() {
        let t = ContingencyTable::whole_group(9).unwrap();
        let one = sample_histogram(&t, StatisticKind::Descents, 50_000, 3, 1).unwrap();
        let four = sample_histogram(&t, StatisticKind::Descents, 50_000, 3, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.total(), 50_000);
        let a = sample_values(&t, StatisticKind::Inversions, 40_000, 9, 1).unwrap();
        let b = sample_values(&t, StatisticKind::Inversions, 40_000, 9, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_csv() {
        let mut h = Histogram::default();
        for v in [3, 1, 3] {
            h.add(v);
        }
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "value,count\n1,1\n3,2\n");
        assert!(matches!(Histogram::default().write_csv(Vec::new()), Err(Error::EmptySample)));
    }

    #[test]
    fn emitted_file_single_row() {
        let dir = std::env::temp_dir().join(format!("dcoset-hist-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h.csv");
        emit_histogram(&[5], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "value,count\n5,1\n");
        assert!(emit_histogram(&[], &path).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
