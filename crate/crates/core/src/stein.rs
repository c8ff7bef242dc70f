//! Dependency graphs for descent, d-descent and inversion indicators, the
//! Stein-method error bounds, and distances to the Poisson and normal laws.
//!
//! Every indicator here is `1{sigma(i) > sigma(j)}` for an eligible pair
//! `i < j <= i + w`: `w = 1` for descents, `w = d` for d-descents and
//! `w = n - 1` for inversions. Two pairs are joined when they share a
//! position, or when both cross a block boundary and their blocks intersect.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::Moments;
use crate::oracle::CosetOracle;
use crate::partition::Partition;
use crate::rational::to_f64;
use crate::rng::RngStream;
use crate::size_bias::{IntegerDistribution, Probability, SizeBiasCoupling};
use crate::table::ContingencyTable;

/// Undirected graph on eligible position pairs (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    pub vertices: Vec<(usize, usize)>,
    pub adjacency: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `D`, one more than the maximum degree.
    pub fn d(&self) -> usize {
        self.max_degree() + 1
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

fn window_pairs(n: usize, w: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=(i + w).min(n)).map(move |j| (i, j))).collect()
}

fn pairs_dependent(a: (usize, usize), b: (usize, usize), block: &[usize]) -> bool {
    if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
        return true;
    }
    let (a0, a1, b0, b1) = (block[a.0 - 1], block[a.1 - 1], block[b.0 - 1], block[b.1 - 1]);
    a0 != a1 && b0 != b1 && (a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1)
}

/// Materialized graph on all pairs within distance `w`; quadratic in `N`.
pub fn pair_graph(lambda: &Partition, w: usize) -> DependencyGraph {
    let block = lambda.block_labels();
    let vertices = window_pairs(lambda.n(), w);
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            if pairs_dependent(vertices[a], vertices[b], &block) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    DependencyGraph { vertices, adjacency }
}

/// Vertex `i` is the pair `(i, i+1)`.
pub fn descent_graph(lambda: &Partition) -> DependencyGraph {
    pair_graph(lambda, 1)
}

pub fn d_descent_graph(lambda: &Partition, d: usize) -> Result<DependencyGraph> {
    check_d(lambda, d)?;
    Ok(pair_graph(lambda, d))
}

/// Conservative graph: cross-block pairs sharing a block are all joined.
pub fn inversion_graph(lambda: &Partition) -> DependencyGraph {
    pair_graph(lambda, lambda.n().saturating_sub(1).max(1))
}

fn check_d(lambda: &Partition, d: usize) -> Result<()> {
    if d == 0 || d >= lambda.n() {
        return Err(Error::BadD { d, requirement: format!("1 <= d < n = {}", lambda.n()) });
    }
    if 2 * d > lambda.smallest() {
        return Err(Error::DOutOfRange { d, smallest_part: lambda.smallest() });
    }
    Ok(())
}

/// Maximum degree of `pair_graph(lambda, w)` by counting, without building it.
pub fn pair_graph_max_degree(lambda: &Partition, w: usize) -> usize {
    let n = lambda.n();
    let block = lambda.block_labels();
    let (starts, ends): (Vec<usize>, Vec<usize>) =
        (0..lambda.len()).map(|k| (lambda.block_start(k) + 1, lambda.block_start(k) + lambda.part(k))).unzip();
    let all = |p: usize| w.min(p - 1) + w.min(n - p);
    let cross = |p: usize| {
        let k = block[p - 1];
        let right = ((p + w).min(n)).saturating_sub(ends[k]);
        let left = starts[k].saturating_sub(p.saturating_sub(w).max(1));
        right + left
    };
    let touch: Vec<usize> = (0..lambda.len()).map(|k| (starts[k]..=ends[k]).map(cross).sum()).collect();
    let mut between: HashMap<(usize, usize), usize> = HashMap::new();
    let mut best = 0;
    for (i, j) in window_pairs(n, w) {
        let (l, r) = (block[i - 1], block[j - 1]);
        let mut deg = all(i) + all(j) - 2;
        if l != r {
            let x = *between.entry((l, r)).or_insert_with(|| {
                (starts[l]..=ends[l]).map(|a| ((a + w).min(ends[r]) + 1).saturating_sub(starts[r])).sum()
            });
            let touching = touch[l] + touch[r] - x;
            deg = deg + touching + 1 - cross(i) - cross(j);
        }
        best = best.max(deg);
    }
    best
}

/// Failures of exact factorization over disconnected vertex sets.
/// A position pair `(i, j)` with `i < j`.
pub type Vertex = (usize, usize);

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateReport {
    pub vertex_count: usize,
    pub subsets_checked: u64,
    pub exhaustive: bool,
    pub failures: Vec<(Vec<Vertex>, Vec<Vertex>)>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Largest vertex count for which every subset `A` is tried.
pub const EXHAUSTIVE_VERTICES: usize = 12;

/// For subsets `A` of vertices, checks that the indicators on `A` and on every
/// vertex not adjacent to `A` have a product joint law over the coset.
/// Exhaustive over `A` for small graphs, otherwise singletons, pairs and
/// `random_subsets` random subsets drawn from `seed`.
pub fn independence_certificate(
    t: &ContingencyTable,
    graph: &DependencyGraph,
    cap: usize,
    random_subsets: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let v = graph.vertex_count();
    if v > 128 {
        return Err(Error::IndexOutOfRange(format!("certificate supports at most 128 vertices, got {v}")));
    }
    let oracle = CosetOracle::new(t, cap)?;
    let masks: Vec<u128> = oracle
        .iter()
        .map(|s| {
            graph.vertices.iter().enumerate().fold(0u128, |m, (b, &(i, j))| m | (((s[i - 1] > s[j - 1]) as u128) << b))
        })
        .collect();
    let neighbors: Vec<u128> =
        (0..v).map(|a| graph.adjacency[a].iter().fold(1u128 << a, |m, &b| m | (1u128 << b))).collect();
    let full = if v == 128 { u128::MAX } else { (1u128 << v) - 1 };
    let exhaustive = v <= EXHAUSTIVE_VERTICES;
    let subsets: Vec<u128> = if exhaustive {
        (1..(1u128 << v)).collect()
    } else {
        let mut s: Vec<u128> = (0..v).map(|a| 1u128 << a).collect();
        for a in 0..v {
            for b in a + 1..v {
                s.push((1u128 << a) | (1u128 << b));
            }
        }
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..random_subsets {
            let m = (rng.next_u64() as u128 | ((rng.next_u64() as u128) << 64)) & full;
            if m != 0 {
                s.push(m);
            }
        }
        s
    };
    let mut report = CertificateReport { vertex_count: v, subsets_checked: 0, exhaustive, failures: Vec::new() };
    let size = masks.len() as u64;
    for a in subsets {
        let closed = (0..v).filter(|&x| a >> x & 1 == 1).fold(0u128, |m, x| m | neighbors[x]);
        let b = full & !closed;
        if b == 0 {
            continue;
        }
        report.subsets_checked += 1;
        let mut ca: HashMap<u128, u64> = HashMap::new();
        let mut cb: HashMap<u128, u64> = HashMap::new();
        let mut cab: HashMap<(u128, u128), u64> = HashMap::new();
        for &m in &masks {
            *ca.entry(m & a).or_default() += 1;
            *cb.entry(m & b).or_default() += 1;
            *cab.entry((m & a, m & b)).or_default() += 1;
        }
        let factorizes = ca.iter().all(|(x, &nx)| {
            cb.iter().all(|(y, &ny)| {
                cab.get(&(*x, *y)).copied().unwrap_or(0) as u128 * size as u128 == nx as u128 * ny as u128
            })
        });
        if !factorizes {
            let pick = |m: u128| (0..v).filter(|&x| m >> x & 1 == 1).map(|x| graph.vertices[x]).collect();
            report.failures.push((pick(a), pick(b)));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: f64,
    pub ingredients: BTreeMap<String, f64>,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
}

/// `5 (I + J - 1) min{1, 1/nu} / max{lambda_I, mu_J}`, requiring a positive
/// entry in every nonempty cell.
pub fn tv_bound_fixed_points(t: &ContingencyTable) -> Result<BoundReport> {
    SizeBiasCoupling::new(t)?;
    let nu = to_f64(&Moments::new(t).fp_mean());
    let (i, j) = (t.rows_len() as f64, t.cols_len() as f64);
    let smallest = t.lambda().smallest().max(t.mu().smallest()) as f64;
    let bound = 5.0 * (i + j - 1.0) * (1.0f64).min(1.0 / nu) / smallest;
    let ingredients = BTreeMap::from([
        ("nu".to_string(), nu),
        ("I".to_string(), i),
        ("J".to_string(), j),
        ("max_smallest_part".to_string(), smallest),
    ]);
    Ok(BoundReport { bound, ingredients, vacuous: bound >= 1.0 })
}

/// `8 B^2 D^{3/2} N^{1/2} / sigma^2 + 8 B^3 D^2 N / sigma^3`.
pub fn kolmogorov_bound(b: f64, d: f64, n: f64, variance: f64) -> Result<BoundReport> {
    if variance <= 0.0 || variance.is_nan() {
        return Err(Error::ZeroVariance);
    }
    let sigma = variance.sqrt();
    let first = 8.0 * b * b * d.powf(1.5) * n.sqrt() / variance;
    let second = 8.0 * b.powi(3) * d * d * n / (variance * sigma);
    let bound = first + second;
    let ingredients = BTreeMap::from([
        ("B".to_string(), b),
        ("D".to_string(), d),
        ("N".to_string(), n),
        ("variance".to_string(), variance),
        ("first_term".to_string(), first),
        ("second_term".to_string(), second),
    ]);
    Ok(BoundReport { bound, ingredients, vacuous: bound >= 1.0 })
}

pub fn poisson_ln_pmf(nu: f64, k: u64) -> f64 {
    -nu + k as f64 * nu.ln() - statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// Smallest `K >= nu` whose Poisson tail beyond `K` is below `1e-12`, using
/// the geometric bound `p(K+1) / (1 - nu/(K+2))`.
pub fn poisson_truncation(nu: f64) -> u64 {
    let mut k = nu.ceil() as u64;
    loop {
        let next = poisson_ln_pmf(nu, k + 1).exp();
        let ratio = nu / (k as f64 + 2.0);
        if ratio < 1.0 && next / (1.0 - ratio) < 1e-12 {
            return k;
        }
        k += 1;
    }
}

/// Total variation distance from `dist` to Poisson(`nu`).
pub fn exact_tv_to_poisson<P: Probability>(dist: &IntegerDistribution<P>, nu: f64) -> f64 {
    let top = dist.pmf().keys().next_back().copied().unwrap_or(0);
    let k_max = poisson_truncation(nu).max(top);
    let mut l1 = 0.0;
    for k in 0..=k_max {
        let p = dist.pmf().get(&k).map(Probability::as_f64).unwrap_or(0.0);
        l1 += (p - poisson_ln_pmf(nu, k).exp()).abs();
    }
    let tail: f64 = (k_max + 1..k_max + 200).map(|k| poisson_ln_pmf(nu, k).exp()).sum();
    0.5 * (l1 + tail)
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between the empirical law of `samples` and N(0,1),
/// evaluated on both sides of every jump.
pub fn empirical_kolmogorov_to_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = normal_cdf(x);
        worst = worst.max((i as f64 / n - phi).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    Ok(worst)
}

/// Kolmogorov distance to N(0,1) of `(X - mean) / sd` for integer data.
pub fn kolmogorov_from_counts(counts: &BTreeMap<u64, u64>, mean: f64, sd: f64) -> Result<f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    if sd <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut below = 0u64;
    let mut worst: f64 = 0.0;
    for (&v, &c) in counts {
        let phi = normal_cdf((v as f64 - mean) / sd);
        let before = below as f64 / total as f64;
        below += c;
        let after = below as f64 / total as f64;
        worst = worst.max((before - phi).abs()).max((after - phi).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::stats::StatisticKind;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn descent_graph_examples() {
        let g = descent_graph(&p(&[6]));
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.d(), 3);
        assert_eq!(g.edge_count(), 4);
        let g = descent_graph(&p(&[2]));
        assert_eq!((g.vertex_count(), g.d()), (1, 1));
        let g = descent_graph(&p(&[3, 3, 3]));
        let idx = |i: usize| g.vertices.iter().position(|&v| v == (i, i + 1)).unwrap();
        assert!(g.has_edge(idx(3), idx(6)));
        assert_eq!(g.d(), 4);
        assert_eq!(descent_graph(&p(&[3, 3, 3, 3])).d(), 5);
    }

    #[test]
    fn d_descent_graph_examples() {
        for l in [p(&[4, 4]), p(&[3, 3, 2]), p(&[8])] {
            assert_eq!(d_descent_graph(&l, 1).unwrap(), descent_graph(&l));
        }
        let g = d_descent_graph(&p(&[10]), 2).unwrap();
        assert!(g.max_degree() <= 8);
        let g = d_descent_graph(&p(&[4, 4]), 2).unwrap();
        assert!(g.max_degree() <= 4 * 2 + 2 * 3);
        assert!(matches!(d_descent_graph(&p(&[4, 2]), 2), Err(Error::DOutOfRange { .. })));
    }

    #[test]
    fn inversion_graph_examples() {
        let g = inversion_graph(&p(&[3]));
        assert_eq!((g.vertex_count(), g.edge_count(), g.d()), (3, 3, 3));
        assert_eq!(inversion_graph(&p(&[2])).vertex_count(), 1);
        let g = inversion_graph(&p(&[10]));
        assert_eq!(g.max_degree(), 2 * (10 - 2));
    }

    #[test]
    fn counted_degree_matches_materialized() {
        for n in 2..=9 {
            for l in Partition::all(n) {
                for w in 1..n {
                    assert_eq!(pair_graph_max_degree(&l, w), pair_graph(&l, w).max_degree(), "{l} w={w}");
                }
            }
        }
    }

    fn table(l: &[usize], m: &[usize], rows: Vec<Vec<u32>>) -> ContingencyTable {
        ContingencyTable::new(p(l), p(m), rows).unwrap()
    }

    #[test]
    fn certificates_small() {
        for n in 2..=5 {
            for l in Partition::all(n) {
                for m in Partition::all(n) {
                    for t in ContingencyTable::enumerate(&l, &m).unwrap() {
                        for g in [descent_graph(&l), inversion_graph(&l)] {
                            let r = independence_certificate(&t, &g, 8, 0, 1).unwrap();
                            assert!(r.passed(), "{t}: {:?}", r.failures);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn missing_edge_is_caught() {
        // drop the consecutive-border edge; the certificate must notice
        let t = table(&[2, 2, 2], &[2, 2, 2], vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        let mut g = descent_graph(t.lambda());
        let (a, b) = (1, 3);
        assert!(g.has_edge(a, b));
        g.adjacency[a].retain(|&x| x != b);
        g.adjacency[b].retain(|&x| x != a);
        let r = independence_certificate(&t, &g, 8, 0, 1).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn tv_bound_examples() {
        for n in [3, 10, 100] {
            let r = tv_bound_fixed_points(&ContingencyTable::whole_group(n).unwrap()).unwrap();
            assert!((r.bound - 5.0 / n as f64).abs() < 1e-12);
        }
        let r = tv_bound_fixed_points(&table(&[2, 1], &[2, 1], vec![vec![2, 0], vec![0, 1]])).unwrap();
        assert!((r.bound - 7.5).abs() < 1e-12 && r.vacuous);
        let r = tv_bound_fixed_points(&table(&[6, 6], &[6, 6], vec![vec![6, 0], vec![0, 6]])).unwrap();
        assert!((r.bound - 15.0 / 12.0).abs() < 1e-12);
        assert!(tv_bound_fixed_points(&table(&[2, 1], &[2, 1], vec![vec![1, 1], vec![1, 0]])).is_err());
    }

    #[test]
    fn kolmogorov_bound_scaling() {
        let at = |n: f64| kolmogorov_bound(1.0, 5.0, n - 1.0, (n + 1.0) / 12.0).unwrap().bound;
        let r = at(40_000.0) / at(10_000.0);
        assert!((0.4..=0.6).contains(&r));
        let a = kolmogorov_bound(1.0, 5.0, 99.0, 10.0).unwrap().ingredients;
        let b = kolmogorov_bound(1.0, 5.0, 99.0, 20.0).unwrap().ingredients;
        assert!((a["first_term"] / b["first_term"] - 2.0).abs() < 1e-12);
        assert!((a["second_term"] / b["second_term"] - 2f64.powf(1.5)).abs() < 1e-12);
        assert_eq!(kolmogorov_bound(1.0, 5.0, 9.0, 0.0), Err(Error::ZeroVariance));
    }

    #[test]
    fn tv_to_poisson_examples() {
        let law = CosetOracle::new(&ContingencyTable::whole_group(3).unwrap(), 8)
            .unwrap()
            .law(StatisticKind::FixedPoints)
            .distribution();
        assert!((exact_tv_to_poisson(&law, 1.0) - 0.2375).abs() < 1e-3);
        let nu = 1.7;
        let point = IntegerDistribution::new([(0u64, ratio(1, 1))].into_iter().collect()).unwrap();
        assert!((exact_tv_to_poisson(&point, nu) - (1.0 - (-nu).exp())).abs() < 1e-12);
        let k = poisson_truncation(nu);
        let pois: BTreeMap<u64, f64> = (0..=k).map(|j| (j, poisson_ln_pmf(nu, j).exp())).collect();
        let mass: f64 = pois.values().sum();
        assert!((1.0 - 1e-12..=1.0 + 1e-15).contains(&mass));
        assert!(exact_tv_to_poisson(&IntegerDistribution::from_masses(pois), nu) < 1e-9);
    }

    #[test]
    fn normal_cdf_reference_values() {
        let refs = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (-1.0, 0.158_655_253_931_457_05),
            (2.0, 0.977_249_868_051_820_8),
            (-2.0, 0.022_750_131_948_179_2),
            (4.0, 0.999_968_328_758_166_9),
            (-4.0, 3.167_124_183_311_992e-5),
            (6.0, 0.999_999_999_013_412_4),
            (-6.0, 9.865_876_450_376_98e-10),
        ];
        for (x, v) in refs {
            assert!((normal_cdf(x) - v).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn kolmogorov_examples() {
        assert_eq!(empirical_kolmogorov_to_normal(&[]), Err(Error::EmptySample));
        let c = 0.3;
        let d = empirical_kolmogorov_to_normal(&[c; 10]).unwrap();
        assert!((d - normal_cdf(c).max(1.0 - normal_cdf(c))).abs() < 1e-12);
        let counts = BTreeMap::from([(2u64, 10u64)]);
        assert!((kolmogorov_from_counts(&counts, 1.7, 1.0).unwrap() - d).abs() < 1e-12);

        // Box-Muller draws
        let mut rng = RngStream::new(17, 0);
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                let (u, v) = (1.0 - rng.unit_f64(), rng.unit_f64());
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect();
        assert!(empirical_kolmogorov_to_normal(&xs).unwrap() < 0.005);
    }
}
