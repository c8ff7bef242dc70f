//! Tail bounds for standardized statistics and their empirical and exact
//! verification.
//!
//! For fixed points the bounds come from a bounded monotone size-bias coupling
//! with constant `C`: `P(Z <= -t) <= exp(-t^2 sigma^2 / (2 C mu))` and
//! `P(Z >= t) <= exp(-t^2 sigma^2 / (2 C mu + C sigma t))`. For the other
//! statistics the stated closed forms are reported next to the raw
//! dependency-graph bound `exp(-2 (t sigma)^2 / (D N))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::Moments;
use crate::montecarlo::{sample_histogram, Histogram};
use crate::oracle::CosetOracle;
use crate::rational::to_f64;
use crate::size_bias::SizeBiasCoupling;
use crate::stats::{d_descent_pair_count, StatisticKind};
use crate::stein::pair_graph_max_degree;
use crate::table::ContingencyTable;

/// `C = 2`, the coupling constant used by the stated fixed-point bounds.
pub const STATED_FP_COUPLING_CONSTANT: f64 = 2.0;

/// Largest `W^s - W` the coupling can produce.
pub const ACHIEVED_FP_COUPLING_CONSTANT: f64 = 3.0;

/// `(lower, upper)` size-bias bounds with coupling constant `c`.
pub fn size_bias_tail_bounds(mean: f64, variance: f64, c: f64, t: f64) -> Result<(f64, f64)> {
    if variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sigma = variance.sqrt();
    let lower = (-variance * t * t / (2.0 * c * mean)).exp();
    let upper = (-variance * t * t / (2.0 * c * mean + c * sigma * t)).exp();
    Ok((lower, upper))
}

/// `exp(-sigma^2 t^2 / (4 mu))` and `exp(-sigma^2 t^2 / (4 mu + 2 sigma t))`.
pub fn fp_tail_bounds(t: &ContingencyTable, tt: f64) -> Result<(f64, f64)> {
    SizeBiasCoupling::new(t)?;
    let m = Moments::new(t);
    size_bias_tail_bounds(to_f64(&m.fp_mean()), to_f64(&m.fp_variance()), STATED_FP_COUPLING_CONSTANT, tt)
}

/// `exp(-2 t^2 n / 5)`.
pub fn des_tail_bound(n: usize, t: f64) -> f64 {
    (-2.0 * t * t * n as f64 / 5.0).exp()
}

/// `exp(-2 t^2 n / d)`.
pub fn d_des_tail_bound(n: usize, d: usize, t: f64) -> f64 {
    (-2.0 * t * t * n as f64 / d as f64).exp()
}

/// `exp(-2 t^2 n^2)`.
pub fn inv_tail_bound(n: usize, t: f64) -> f64 {
    (-2.0 * t * t * (n * n) as f64).exp()
}

/// `exp(-2 (t sigma)^2 / (D N))` for `N` indicators in `[0, 1]`.
pub fn dependency_graph_tail_bound(t: f64, variance: f64, d: usize, indicators: usize) -> f64 {
    (-2.0 * t * t * variance / (d as f64 * indicators as f64)).exp()
}

/// Graph size `(D, N)` for the indicator family behind `kind`.
pub fn graph_ingredients(t: &ContingencyTable, kind: StatisticKind) -> (usize, usize) {
    let n = t.n();
    let w = match kind {
        StatisticKind::Descents => 1,
        StatisticKind::DDescents(d) => d,
        _ => n.saturating_sub(1).max(1),
    };
    let count = d_descent_pair_count(n, w.min(n.saturating_sub(1)));
    (pair_graph_max_degree(t.lambda(), w) + 1, count)
}

/// Stated `(upper, lower)` bounds at `t`.
pub fn stated_bounds(
    t: &ContingencyTable,
    kind: StatisticKind,
    mean: f64,
    variance: f64,
    tt: f64,
) -> Result<(f64, f64)> {
    let n = t.n();
    Ok(match kind {
        StatisticKind::FixedPoints => {
            let (lo, up) = size_bias_tail_bounds(mean, variance, STATED_FP_COUPLING_CONSTANT, tt)?;
            (up, lo)
        }
        StatisticKind::Descents => (des_tail_bound(n, tt), des_tail_bound(n, tt)),
        StatisticKind::DDescents(d) => (d_des_tail_bound(n, d, tt), d_des_tail_bound(n, d, tt)),
        StatisticKind::Inversions => (inv_tail_bound(n, tt), inv_tail_bound(n, tt)),
    })
}

/// Bounds evaluated from their ingredients: coupling constant 3 for fixed
/// points, the dependency-graph bound otherwise. Returns `(upper, lower)`.
pub fn raw_bounds(t: &ContingencyTable, kind: StatisticKind, mean: f64, variance: f64, tt: f64) -> Result<(f64, f64)> {
    Ok(match kind {
        StatisticKind::FixedPoints => {
            let (lo, up) = size_bias_tail_bounds(mean, variance, ACHIEVED_FP_COUPLING_CONSTANT, tt)?;
            (up, lo)
        }
        _ => {
            let (d, count) = graph_ingredients(t, kind);
            let b = dependency_graph_tail_bound(tt, variance, d, count);
            (b, b)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    Exact,
    Enumeration,
    Pilot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailViolation {
    pub t: f64,
    pub side: Side,
    pub frequency: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailReport {
    pub statistic: StatisticKind,
    pub table: ContingencyTable,
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub variance_source: VarianceSource,
    /// Standard error of the standard deviation when it was estimated.
    pub sd_standard_error: f64,
    pub t_grid: Vec<f64>,
    pub bound: Vec<f64>,
    pub lower_bound: Vec<f64>,
    pub raw_upper_bound: Vec<f64>,
    pub raw_lower_bound: Vec<f64>,
    pub empirical_upper: Vec<f64>,
    pub empirical_lower: Vec<f64>,
    pub violations: Vec<TailViolation>,
    pub raw_violations: Vec<TailViolation>,
}

impl TailReport {
    /// CSV with columns `t,bound,upperFreq,lowerFreq,lowerBound,rawUpperBound,rawLowerBound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,bound,upperFreq,lowerFreq,lowerBound,rawUpperBound,rawLowerBound\n");
        for k in 0..self.t_grid.len() {
            let row = [
                self.t_grid[k],
                self.bound[k],
                self.empirical_upper[k],
                self.empirical_lower[k],
                self.lower_bound[k],
                self.raw_upper_bound[k],
                self.raw_lower_bound[k],
            ];
            out += &row.map(compact).join(",");
            out.push('\n');
        }
        out
    }
}

/// Plain notation for moderate magnitudes, scientific otherwise.
fn compact(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Mean and variance used for standardization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub mean: f64,
    pub variance: f64,
    pub source: VarianceSource,
    pub sd_standard_error: f64,
}

/// Exact mean; exact variance when available, else enumeration when
/// `n <= cap`, else a pilot run of `pilot_samples` on an independent seed.
pub fn standardization(
    t: &ContingencyTable,
    kind: StatisticKind,
    cap: usize,
    pilot_samples: u64,
    seed: u64,
    threads: usize,
) -> Result<Standardization> {
    let m = Moments::new(t);
    let mean = to_f64(&m.mean(kind)?);
    if let Some(v) = m.exact_variance(kind) {
        return Ok(Standardization {
            mean,
            variance: to_f64(&v),
            source: VarianceSource::Exact,
            sd_standard_error: 0.0,
        });
    }
    if t.n() <= cap {
        let law = CosetOracle::new(t, cap)?.law(kind);
        return Ok(Standardization {
            mean,
            variance: to_f64(&law.variance()),
            source: VarianceSource::Enumeration,
            sd_standard_error: 0.0,
        });
    }
    let pilot = sample_histogram(t, kind, pilot_samples, pilot_seed(seed), threads)?;
    let variance = centered_variance(&pilot, mean);
    let fourth =
        pilot.counts.iter().map(|(&v, &c)| (v as f64 - mean).powi(4) * c as f64).sum::<f64>() / pilot.total() as f64;
    // delta method: se(s) ~ sqrt((m4 - s^4) / n) / (2 s)
    let se = ((fourth - variance * variance).max(0.0) / pilot.total() as f64).sqrt() / (2.0 * variance.sqrt());
    Ok(Standardization { mean, variance, source: VarianceSource::Pilot, sd_standard_error: se })
}

pub fn pilot_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Second moment about a known mean.
pub fn centered_variance(h: &Histogram, mean: f64) -> f64 {
    h.counts.iter().map(|(&v, &c)| (v as f64 - mean).powi(2) * c as f64).sum::<f64>() / h.total() as f64
}

fn tail_frequencies(h: &Histogram, mean: f64, sd: f64, t: f64) -> (f64, f64) {
    let total = h.total() as f64;
    let eps = 1e-9 * (1.0 + sd * t);
    let upper: u64 = h.counts.iter().filter(|(&v, _)| v as f64 - mean >= t * sd - eps).map(|(_, &c)| c).sum();
    let lower: u64 = h.counts.iter().filter(|(&v, _)| v as f64 - mean <= -t * sd + eps).map(|(_, &c)| c).sum();
    (upper as f64 / total, lower as f64 / total)
}

/// Monte Carlo tails at each `t` against the stated and raw bounds. A
/// violation is a frequency more than three binomial standard errors above
/// the bound, with thresholds widened by two standard errors of an estimated
/// standard deviation.
#[allow(clippy::too_many_arguments)]
pub fn verify_tails(
    t: &ContingencyTable,
    kind: StatisticKind,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
    threads: usize,
    cap: usize,
    pilot_samples: u64,
) -> Result<TailReport> {
    kind.validate(t.n())?;
    if kind == StatisticKind::FixedPoints {
        SizeBiasCoupling::new(t)?;
    }
    let st = standardization(t, kind, cap, pilot_samples, seed, threads)?;
    if st.variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let hist = sample_histogram(t, kind, samples, seed, threads)?;
    let sd = st.variance.sqrt();
    let sd_wide = sd + 2.0 * st.sd_standard_error;
    let n = samples as f64;
    let mut report = TailReport {
        statistic: kind,
        table: t.clone(),
        samples,
        mean: st.mean,
        variance: st.variance,
        variance_source: st.source,
        sd_standard_error: st.sd_standard_error,
        t_grid: t_grid.to_vec(),
        bound: Vec::new(),
        lower_bound: Vec::new(),
        raw_upper_bound: Vec::new(),
        raw_lower_bound: Vec::new(),
        empirical_upper: Vec::new(),
        empirical_lower: Vec::new(),
        violations: Vec::new(),
        raw_violations: Vec::new(),
    };
    for &tt in t_grid {
        let (bu, bl) = stated_bounds(t, kind, st.mean, st.variance, tt)?;
        let (ru, rl) = raw_bounds(t, kind, st.mean, st.variance, tt)?;
        let (fu, fl) = tail_frequencies(&hist, st.mean, sd, tt);
        let (wu, wl) = tail_frequencies(&hist, st.mean, sd_wide, tt);
        for (side, freq, conservative, stated, raw) in [(Side::Upper, fu, wu, bu, ru), (Side::Lower, fl, wl, bl, rl)] {
            let se = (conservative * (1.0 - conservative) / n).sqrt();
            if conservative - 3.0 * se > stated {
                report.violations.push(TailViolation { t: tt, side, frequency: freq, bound: stated });
            }
            if conservative - 3.0 * se > raw {
                report.raw_violations.push(TailViolation { t: tt, side, frequency: freq, bound: raw });
            }
        }
        report.bound.push(bu);
        report.lower_bound.push(bl);
        report.raw_upper_bound.push(ru);
        report.raw_lower_bound.push(rl);
        report.empirical_upper.push(fu);
        report.empirical_lower.push(fl);
    }
    Ok(report)
}

/// Exact tail probabilities against the stated and raw bounds.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactTailReport {
    pub statistic: StatisticKind,
    pub table: ContingencyTable,
    pub t_grid: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub violations: Vec<TailViolation>,
    pub raw_violations: Vec<TailViolation>,
}

pub fn exact_tails(t: &ContingencyTable, kind: StatisticKind, t_grid: &[f64], cap: usize) -> Result<ExactTailReport> {
    kind.validate(t.n())?;
    let law = CosetOracle::new(t, cap)?.law(kind);
    let mean = to_f64(&law.mean());
    let variance = to_f64(&law.variance());
    if variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sd = variance.sqrt();
    let hist = Histogram { counts: law.counts.clone() };
    let mut report = ExactTailReport {
        statistic: kind,
        table: t.clone(),
        t_grid: t_grid.to_vec(),
        upper: Vec::new(),
        lower: Vec::new(),
        violations: Vec::new(),
        raw_violations: Vec::new(),
    };
    for &tt in t_grid {
        let (pu, pl) = tail_frequencies(&hist, mean, sd, tt);
        let (bu, bl) = stated_bounds(t, kind, mean, variance, tt)?;
        let (ru, rl) = raw_bounds(t, kind, mean, variance, tt)?;
        for (side, p, b, r) in [(Side::Upper, pu, bu, ru), (Side::Lower, pl, bl, rl)] {
            if p > b + 1e-12 {
                report.violations.push(TailViolation { t: tt, side, frequency: p, bound: b });
            }
            if p > r + 1e-12 {
                report.raw_violations.push(TailViolation { t: tt, side, frequency: p, bound: r });
            }
        }
        report.upper.push(pu);
        report.lower.push(pl);
    }
    Ok(report)
}
