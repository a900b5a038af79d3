//! Independent oracles shared by the integration tests: adaptive quadrature,
//! central finite differences and seeded random instances.

#![allow(dead_code)]

use netinf::{
    simulate_set, Baseline, BaselineKind, CascadeSet, HazardModel, ModelKind, Network, ShapingFunction,
    SourcePolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]`. `f` must be smooth on
/// the open interval; split at discontinuities with [`integrate_pieces`].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Evaluate just inside the ends so one-sided limits are used at jumps.
    let (ia, ib) = (a + (b - a) * 1e-15, b - (b - a) * 1e-15);
    let (fa, fb) = (f(ia), f(ib));
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    let g = |t: f64| f(t.clamp(ia, ib));
    adaptive(&g, a, b, fa, fm, fb, whole, tol, 40)
}

/// Integral over `[a, b]` split at every breakpoint inside it.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        total += integrate(f, lo, c, tol);
        lo = c;
    }
    total
}

/// Central differences of `f` at `x` in every coordinate.
pub fn central_differences(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let up = f(&y);
            y[k] = x[k] - h;
            let down = f(&y);
            y[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense random network: every off-diagonal entry is drawn from `[lo, hi]`
/// with probability `density`, else 0.
pub fn random_network(kind: ModelKind, n: usize, density: f64, lo: f64, hi: f64, seed: u64) -> Network {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if j != i && r.random::<f64>() < density {
                let mut a = r.random_range(lo..=hi);
                if kind == ModelKind::Multiplicative && r.random::<f64>() < 0.3 {
                    a = -a;
                }
                edges.push((j, i, a));
            }
        }
    }
    Network::from_edges(kind, n, edges).unwrap()
}

pub fn shapings() -> Vec<ShapingFunction> {
    vec![
        ShapingFunction::exp(),
        ShapingFunction::pow(0.2).unwrap(),
        ShapingFunction::ray(),
    ]
}

pub fn baselines(log_scale: f64) -> Vec<Baseline> {
    [BaselineKind::Const, BaselineKind::Linear, BaselineKind::Inverse]
        .into_iter()
        .map(|k| Baseline::new(k, log_scale, 1e-3).unwrap())
        .collect()
}

pub fn all_models() -> Vec<HazardModel> {
    let mut models: Vec<HazardModel> = shapings().into_iter().map(HazardModel::Additive).collect();
    models.extend(baselines(-0.5).into_iter().map(HazardModel::Multiplicative));
    models
}

/// Cascades simulated from a random network of the model's kind, so that
/// every infection has positive hazard.
pub fn random_instance(
    model: HazardModel,
    n: usize,
    cascades: usize,
    window: f64,
    seed: u64,
) -> (Network, CascadeSet) {
    let net = match model.kind() {
        ModelKind::Additive => random_network(ModelKind::Additive, n, 0.4, 0.2, 1.5, seed),
        ModelKind::Multiplicative => random_network(ModelKind::Multiplicative, n, 0.4, 0.1, 1.0, seed),
    };
    let cs = simulate_set(
        &net,
        model,
        cascades,
        window,
        &SourcePolicy::UniformRandom,
        seed ^ 0xabc,
    )
    .unwrap();
    (net, cs)
}
