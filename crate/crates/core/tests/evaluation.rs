mod common;

use netinf::evaluation::ks_statistic;
use netinf::{
    edge_accuracy, parameter_mse, predict_distributions, split_cascades, CascadeSet, DistributionSummary,
    HazardModel, ModelKind, Network, ShapingFunction,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn relabel(net: &Network, perm: &[usize]) -> Network {
    Network::from_edges(
        net.kind(),
        net.num_nodes(),
        net.edges().into_iter().map(|(j, i, a)| (perm[j], perm[i], a)),
    )
    .unwrap()
}

fn perm(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut common::rng(seed));
    p
}

#[test]
fn empty_test_set_gives_empty_prediction() {
    let f = ShapingFunction::exp();
    let (net, cs) = common::random_instance(HazardModel::Additive(f), 5, 3, 2.0, 1);
    let empty = cs.with_cascades(vec![]).unwrap();
    let p = predict_distributions(&net, HazardModel::Additive(f), &empty, 3).unwrap();
    assert!(p.simulated.is_empty());
    assert_eq!(p.size_ks, 0.0);
}

#[test]
fn prediction_uses_test_sources_and_window() {
    let f = ShapingFunction::exp();
    let (net, cs) = common::random_instance(HazardModel::Additive(f), 8, 30, 1.5, 1);
    let p = predict_distributions(&net, HazardModel::Additive(f), &cs, 3).unwrap();
    assert_eq!(p.simulated.len(), cs.len());
    assert_eq!(p.simulated.window(), 1.5);
    for (a, b) in p.simulated.iter().zip(&cs) {
        assert_eq!(a.source(), b.source());
        assert!(a.duration() <= 1.5);
    }
    assert_eq!(p.test_summary.count, 30);
    let small = Network::zeros(ModelKind::Additive, 3);
    assert!(predict_distributions(&small, HazardModel::Additive(f), &cs, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accuracy_is_symmetric_and_relabeling_invariant(s1 in 0u64..10_000, s2 in 0u64..10_000, d in 0.0f64..0.6) {
        let a = common::random_network(ModelKind::Additive, 7, d, 0.1, 1.0, s1);
        let b = common::random_network(ModelKind::Additive, 7, 0.3, 0.1, 1.0, s2);
        let acc = edge_accuracy(&a, &b, 1e-4).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert_eq!(acc, edge_accuracy(&b, &a, 1e-4).unwrap());
        let p = perm(7, s1 ^ s2);
        prop_assert_eq!(acc, edge_accuracy(&relabel(&a, &p), &relabel(&b, &p), 1e-4).unwrap());
        let mse = parameter_mse(&a, &b).unwrap();
        prop_assert!((mse - parameter_mse(&relabel(&a, &p), &relabel(&b, &p)).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn mse_scales_quadratically(s1 in 0u64..10_000, s2 in 0u64..10_000, c in 0.1f64..10.0) {
        let a = common::random_network(ModelKind::Additive, 6, 0.5, 0.1, 1.0, s1);
        let b = common::random_network(ModelKind::Additive, 6, 0.5, 0.1, 1.0, s2);
        let scale = |n: &Network| Network::new(n.kind(), n.params() * c).unwrap();
        let base = parameter_mse(&a, &b).unwrap();
        let scaled = parameter_mse(&scale(&a), &scale(&b)).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-12 * scaled.max(1.0));
        prop_assert_eq!(parameter_mse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn summaries_ignore_cascade_order(seed in 0u64..10_000) {
        let f = ShapingFunction::ray();
        let (_, cs) = common::random_instance(HazardModel::Additive(f), 8, 25, 2.0, seed);
        let mut shuffled = cs.cascades().to_vec();
        shuffled.shuffle(&mut common::rng(seed + 1));
        let other = cs.with_cascades(shuffled).unwrap();
        let (a, b) = (DistributionSummary::from_cascades(&cs), DistributionSummary::from_cascades(&other));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.size_counts.iter().sum::<usize>(), a.count);
        prop_assert_eq!(a.duration_counts.iter().sum::<usize>(), a.count);
        prop_assert_eq!(a.size_ks(&b), 0.0);
    }

    #[test]
    fn split_is_a_partition(seed in 0u64..10_000, len in 2usize..40, frac in 0.05f64..0.95) {
        let f = ShapingFunction::exp();
        let (_, cs) = common::random_instance(HazardModel::Additive(f), 6, len, 1.0, seed);
        let (train, test) = split_cascades(&cs, frac, seed).unwrap();
        prop_assert_eq!(test.len(), (len as f64 * frac).round() as usize);
        prop_assert_eq!(train.len() + test.len(), len);
        let key = |s: &CascadeSet| {
            let mut v: Vec<String> = s.iter().map(|c| format!("{:?}", c.events())).collect();
            v.sort();
            v
        };
        let mut joined = key(&train);
        joined.extend(key(&test));
        joined.sort();
        prop_assert_eq!(joined, key(&cs));
    }

    #[test]
    fn ks_matches_brute_force(a in prop::collection::vec(0u8..6, 1..30), b in prop::collection::vec(0u8..6, 1..30)) {
        let to_sorted = |v: &[u8]| {
            let mut x: Vec<f64> = v.iter().map(|&k| k as f64).collect();
            x.sort_by(f64::total_cmp);
            x
        };
        let (xa, xb) = (to_sorted(&a), to_sorted(&b));
        let ecdf = |x: &[f64], t: f64| x.iter().filter(|&&v| v <= t).count() as f64 / x.len() as f64;
        let brute = (0..6).map(|t| (ecdf(&xa, t as f64) - ecdf(&xb, t as f64)).abs()).fold(0.0, f64::max);
        prop_assert!((ks_statistic(&xa, &xb) - brute).abs() < 1e-15);
    }
}
