//! Recovery metrics, train/test splits and cascade size/duration
//! distributions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cascade::CascadeSet;
use crate::error::{Error, Result};
use crate::network::{ModelKind, Network};
use crate::simulator::{simulate_set, HazardModel, SourcePolicy};

/// Number of log-spaced duration bins above the smallest edge.
pub const DURATION_BINS: usize = 20;

/// The smallest duration edge is this fraction of the window.
pub const DURATION_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub edge_accuracy: f64,
    pub mse: f64,
    pub true_edge_count: usize,
    pub inferred_edge_count: usize,
    /// Fraction of edges present in both networks whose signs agree. Only
    /// reported for multiplicative networks that share at least one edge.
    pub sign_agreement: Option<f64>,
}

fn check_dims(a: &Network, b: &Network) -> Result<()> {
    if a.num_nodes() != b.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: a.num_nodes(),
            found: b.num_nodes(),
        });
    }
    Ok(())
}

fn present(net: &Network, threshold: f64) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
    net.params()
        .indexed_iter()
        .filter(|((j, i), _)| j != i)
        .map(move |((j, i), a)| (j, i, a.abs() > threshold))
}

/// `1 - sum |I(a) - I(b)| / (sum I(a) + sum I(b))` where `I` marks entries
/// with magnitude above `threshold`. Two empty networks score 1.
pub fn edge_accuracy(truth: &Network, inferred: &Network, threshold: f64) -> Result<f64> {
    check_dims(truth, inferred)?;
    let (mut mismatched, mut total) = (0usize, 0usize);
    for ((_, _, a), (_, _, b)) in present(truth, threshold).zip(present(inferred, threshold)) {
        mismatched += usize::from(a != b);
        total += usize::from(a) + usize::from(b);
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(1.0 - mismatched as f64 / total as f64)
}

/// Mean squared difference over all off-diagonal entries.
pub fn parameter_mse(truth: &Network, inferred: &Network) -> Result<f64> {
    check_dims(truth, inferred)?;
    let n = truth.num_nodes();
    if n < 2 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for ((j, i), a) in truth.params().indexed_iter() {
        if j != i {
            sum += (a - inferred.alpha(j, i)).powi(2);
        }
    }
    Ok(sum / (n * (n - 1)) as f64)
}

/// Fraction of entries above `threshold` in both networks that have the same
/// sign, or `None` when no entry qualifies.
pub fn sign_agreement(truth: &Network, inferred: &Network, threshold: f64) -> Result<Option<f64>> {
    check_dims(truth, inferred)?;
    let (mut shared, mut agree) = (0usize, 0usize);
    for ((j, i), &a) in truth.params().indexed_iter() {
        let b = inferred.alpha(j, i);
        if j != i && a.abs() > threshold && b.abs() > threshold {
            shared += 1;
            agree += usize::from(a.signum() == b.signum());
        }
    }
    Ok((shared > 0).then(|| agree as f64 / shared as f64))
}

pub fn evaluate(truth: &Network, inferred: &Network, threshold: f64) -> Result<EvalReport> {
    let count = |net: &Network| present(net, threshold).filter(|e| e.2).count();
    let sign = if truth.kind() == ModelKind::Multiplicative {
        sign_agreement(truth, inferred, threshold)?
    } else {
        None
    };
    Ok(EvalReport {
        edge_accuracy: edge_accuracy(truth, inferred, threshold)?,
        mse: parameter_mse(truth, inferred)?,
        true_edge_count: count(truth),
        inferred_edge_count: count(inferred),
        sign_agreement: sign,
    })
}

/// Random disjoint split into `(train, test)` with
/// `round(len * test_fraction)` test cascades. Both parts keep the input
/// order.
pub fn split_cascades(
    cs: &CascadeSet,
    test_fraction: f64,
    rng_seed: u64,
) -> Result<(CascadeSet, CascadeSet)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let len = cs.len();
    let num_test = (len as f64 * test_fraction).round() as usize;
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let mut is_test = vec![false; len];
    for &k in &order[..num_test] {
        is_test[k] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, flag) in cs.iter().zip(is_test) {
        if flag {
            test.push(c.clone());
        } else {
            train.push(c.clone());
        }
    }
    Ok((cs.with_cascades(train)?, cs.with_cascades(test)?))
}

/// Size and duration distribution of a cascade set.
///
/// Sizes use one bin per node count. Durations (last minus first infection
/// time) use `DURATION_BINS + 1` bins: bin 0 holds `[0, e_0]` and bin `k`
/// holds `(e_{k-1}, e_k]`, where the edges `e_0 .. e_20` are log-spaced from
/// `DURATION_FLOOR * T` to `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    pub count: usize,
    /// `size_counts[s]` cascades infected exactly `s` nodes; index 0 is
    /// always 0.
    pub size_counts: Vec<usize>,
    pub duration_edges: Vec<f64>,
    pub duration_counts: Vec<usize>,
    sizes: Vec<f64>,
    durations: Vec<f64>,
}

pub fn duration_edges(window: f64) -> Vec<f64> {
    let lo = (DURATION_FLOOR * window).ln();
    let hi = window.ln();
    (0..=DURATION_BINS)
        .map(|k| {
            if k == DURATION_BINS {
                window
            } else {
                (lo + (hi - lo) * k as f64 / DURATION_BINS as f64).exp()
            }
        })
        .collect()
}

impl DistributionSummary {
    pub fn from_cascades(cs: &CascadeSet) -> Self {
        let edges = duration_edges(cs.window());
        let mut sizes: Vec<f64> = cs.iter().map(|c| c.len() as f64).collect();
        let mut durations: Vec<f64> = cs.iter().map(|c| c.duration()).collect();
        sizes.sort_by(f64::total_cmp);
        durations.sort_by(f64::total_cmp);

        let max_size = sizes.last().map_or(0, |&s| s as usize);
        let mut size_counts = vec![0; max_size + 1];
        for &s in &sizes {
            size_counts[s as usize] += 1;
        }
        let mut duration_counts = vec![0; edges.len()];
        for &d in &durations {
            let bin = edges.partition_point(|&e| e < d).min(edges.len() - 1);
            duration_counts[bin] += 1;
        }
        DistributionSummary {
            count: cs.len(),
            size_counts,
            duration_edges: edges,
            duration_counts,
            sizes,
            durations,
        }
    }

    /// Two-sample KS statistic between the size distributions.
    pub fn size_ks(&self, other: &DistributionSummary) -> f64 {
        ks_statistic(&self.sizes, &other.sizes)
    }

    /// Two-sample KS statistic between the duration distributions.
    pub fn duration_ks(&self, other: &DistributionSummary) -> f64 {
        ks_statistic(&self.durations, &other.durations)
    }
}

/// `sup_x |F_a(x) - F_b(x)|` for two samples, ties handled exactly.
/// Both inputs must be sorted. Returns 0 if either sample is empty.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub simulated: CascadeSet,
    pub test_summary: DistributionSummary,
    pub simulated_summary: DistributionSummary,
    pub size_ks: f64,
    pub duration_ks: f64,
}

/// Simulates one cascade per test cascade from `trained`, seeded at the test
/// cascade's source and observed over the test window, and compares the
/// two size and duration distributions.
pub fn predict_distributions(
    trained: &Network,
    model: HazardModel,
    test: &CascadeSet,
    rng_seed: u64,
) -> Result<Prediction> {
    if trained.num_nodes() != test.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: trained.num_nodes(),
            found: test.num_nodes(),
        });
    }
    let sources = test.iter().map(|c| c.source()).collect();
    let simulated = simulate_set(
        trained,
        model,
        test.len(),
        test.window(),
        &SourcePolicy::Given(sources),
        rng_seed,
    )?;
    let test_summary = DistributionSummary::from_cascades(test);
    let simulated_summary = DistributionSummary::from_cascades(&simulated);
    Ok(Prediction {
        size_ks: test_summary.size_ks(&simulated_summary),
        duration_ks: test_summary.duration_ks(&simulated_summary),
        simulated,
        test_summary,
        simulated_summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{Cascade, Event};

    fn net(kind: ModelKind, n: usize, edges: &[(usize, usize, f64)]) -> Network {
        Network::from_edges(kind, n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let t = net(ModelKind::Additive, 3, &[(0, 1, 1.0), (0, 2, 1.0)]);
        let i = net(ModelKind::Additive, 3, &[(0, 1, 0.4)]);
        assert!((edge_accuracy(&t, &i, 1e-4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(edge_accuracy(&t, &t, 1e-4).unwrap(), 1.0);
        let d = net(ModelKind::Additive, 3, &[(1, 0, 1.0), (2, 1, 1.0)]);
        assert_eq!(edge_accuracy(&t, &d, 1e-4).unwrap(), 0.0);
        let e = Network::zeros(ModelKind::Additive, 3);
        assert_eq!(edge_accuracy(&e, &e, 1e-4).unwrap(), 1.0);
        let small = Network::zeros(ModelKind::Additive, 2);
        assert!(edge_accuracy(&t, &small, 1e-4).is_err());
    }

    #[test]
    fn mse_example() {
        let t = net(ModelKind::Additive, 2, &[(0, 1, 0.5)]);
        let i = net(ModelKind::Additive, 2, &[(0, 1, 0.3), (1, 0, 0.1)]);
        assert!((parameter_mse(&t, &i).unwrap() - 0.025).abs() < 1e-15);
        assert_eq!(parameter_mse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn sign_agreement_counts_shared_edges() {
        let t = net(
            ModelKind::Multiplicative,
            3,
            &[(0, 1, 0.5), (1, 2, -0.5), (2, 0, 0.5)],
        );
        let i = net(ModelKind::Multiplicative, 3, &[(0, 1, 0.2), (1, 2, 0.3)]);
        assert_eq!(sign_agreement(&t, &i, 0.1).unwrap(), Some(0.5));
        let report = evaluate(&t, &i, 0.1).unwrap();
        assert_eq!(report.true_edge_count, 3);
        assert_eq!(report.inferred_edge_count, 2);
        assert_eq!(report.sign_agreement, Some(0.5));
        let empty = Network::zeros(ModelKind::Multiplicative, 3);
        assert_eq!(sign_agreement(&t, &empty, 0.1).unwrap(), None);
    }

    fn set(n: usize) -> CascadeSet {
        let cascades = (0..n)
            .map(|k| {
                let mut ev = vec![Event::new(k % 4, 0.0)];
                if k % 3 > 0 {
                    ev.push(Event::new(4, 0.1 * (k % 3) as f64));
                }
                Cascade::new(ev).unwrap()
            })
            .collect();
        CascadeSet::new(5, 1.0, cascades).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let cs = set(10);
        let (train, test) = split_cascades(&cs, 0.2, 7).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let again = split_cascades(&cs, 0.2, 7).unwrap();
        assert_eq!(train.cascades(), again.0.cascades());
        assert!(split_cascades(&cs, 0.0, 7).is_err());
        assert!(split_cascades(&cs, 1.0, 7).is_err());
    }

    #[test]
    fn summary_masses_sum_to_count() {
        let cs = set(9);
        let s = DistributionSummary::from_cascades(&cs);
        assert_eq!(s.count, 9);
        assert_eq!(s.size_counts.iter().sum::<usize>(), 9);
        assert_eq!(s.duration_counts.iter().sum::<usize>(), 9);
        assert_eq!(s.size_counts, vec![0, 3, 6]);
        assert_eq!(s.duration_counts[0], 3);
        assert_eq!(s.duration_edges.len(), DURATION_BINS + 1);
        assert_eq!(*s.duration_edges.last().unwrap(), 1.0);
    }

    #[test]
    fn ks_statistic_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert_eq!(ks_statistic(&[1.0, 1.0, 2.0, 2.0], &[1.0, 2.0, 2.0, 2.0]), 0.25);
        assert_eq!(ks_statistic(&[], &[1.0]), 0.0);
    }
}
