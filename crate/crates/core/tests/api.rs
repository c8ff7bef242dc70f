use dcoset::concentration::{exact_tails, fp_tail_bounds};
use dcoset::size_bias::exact_coupling_law;
use dcoset::stein::{exact_tv_to_poisson, tv_bound_fixed_points};
use dcoset::{
    size_bias_transform, ContingencyTable, CosetOracle, CosetSampler, Moments, Partition, RngStream, StatisticKind,
};

fn table(l: &[usize], m: &[usize], rows: Vec<Vec<u32>>) -> ContingencyTable {
    ContingencyTable::new(Partition::new(l.to_vec()).unwrap(), Partition::new(m.to_vec()).unwrap(), rows).unwrap()
}

#[test]
fn sampled_permutations_lie_in_their_coset() {
    let t = table(&[3, 2, 2], &[4, 3], vec![vec![2, 1], vec![1, 1], vec![1, 1]]);
    let oracle = CosetOracle::new(&t, 8).unwrap();
    let members: std::collections::HashSet<Vec<u32>> = oracle.iter().map(<[u32]>::to_vec).collect();
    let mut sampler = CosetSampler::new(&t);
    let mut rng = RngStream::new(7, 0);
    for _ in 0..2000 {
        assert!(members.contains(sampler.sample(&mut rng).one_line()));
    }
}

#[test]
fn moments_tv_and_coupling_agree_on_one_table() {
    let t = table(&[3, 3], &[2, 2, 2], vec![vec![1, 1, 1], vec![1, 1, 1]]);
    let law = CosetOracle::new(&t, 8).unwrap().law(StatisticKind::FixedPoints);
    let m = Moments::new(&t);
    assert_eq!(m.fp_mean(), law.mean());
    assert_eq!(m.fp_variance(), law.variance());
    let tv = exact_tv_to_poisson(&law.distribution(), dcoset::rational::to_f64(&law.mean()));
    assert!(tv <= tv_bound_fixed_points(&t).unwrap().bound);
    let target = size_bias_transform(&law.distribution()).unwrap();
    assert_eq!(exact_coupling_law(&t, 8).unwrap(), target);
}

#[test]
fn exact_fixed_point_tails_respect_coupling_bounds() {
    let t = ContingencyTable::whole_group(7).unwrap();
    let r = exact_tails(&t, StatisticKind::FixedPoints, &[0.5, 1.0, 2.0, 3.0], 8).unwrap();
    assert!(r.violations.is_empty(), "{:?}", r.violations);
    let (lo, up) = fp_tail_bounds(&t, 1.0).unwrap();
    assert!(r.lower[1] <= lo && r.upper[1] <= up);
}
