//! Synthetic ground truth: Kronecker networks, random edge parameters and
//! exact cascade sampling from either hazard model.
//!
//! Cascades are sampled by inverse transform: every node draws one uniform
//! `u_i` up front and gets infected when its cumulative hazard reaches
//! `-ln u_i`. The cumulative hazard is piecewise in time, with a new piece
//! whenever a node that influences it gets infected, so the sampler keeps a
//! tentative infection time per susceptible node, commits the earliest one
//! and re-inverts only the nodes whose hazard changed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::Baseline;
use crate::cascade::{Cascade, CascadeSet, Event};
use crate::error::{Error, Result};
use crate::inference::par_map;
use crate::network::{ModelKind, Network};
use crate::shaping::{Shape, ShapingFunction};

/// Largest supported Kronecker power; the network is a dense `2^k x 2^k`
/// matrix.
pub const MAX_KRONECKER_SCALE: u32 = 13;

/// Tolerance of the bisection used where no closed-form inverse exists.
pub const INVERSION_TOL: f64 = 1e-10;

/// Well-known 2x2 initiator matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KroneckerFamily {
    CorePeriphery,
    Hierarchical,
    Random,
}

impl KroneckerFamily {
    pub fn seed_matrix(self) -> [[f64; 2]; 2] {
        match self {
            KroneckerFamily::CorePeriphery => [[0.9, 0.5], [0.5, 0.3]],
            KroneckerFamily::Hierarchical => [[0.9, 0.1], [0.1, 0.9]],
            KroneckerFamily::Random => [[0.5, 0.5], [0.5, 0.5]],
        }
    }
}

impl fmt::Display for KroneckerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KroneckerFamily::CorePeriphery => "core-periphery",
            KroneckerFamily::Hierarchical => "hierarchical",
            KroneckerFamily::Random => "random",
        })
    }
}

impl FromStr for KroneckerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core-periphery" | "cp" => Ok(KroneckerFamily::CorePeriphery),
            "hierarchical" | "hi" => Ok(KroneckerFamily::Hierarchical),
            "random" => Ok(KroneckerFamily::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown kronecker family `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KroneckerSpec {
    pub seed_matrix: [[f64; 2]; 2],
    /// The network has `2^scale` nodes.
    pub scale: u32,
    /// Expected number of edges per node.
    pub target_avg_degree: f64,
    pub rng_seed: u64,
}

impl KroneckerSpec {
    pub fn new(family: KroneckerFamily, scale: u32, target_avg_degree: f64, rng_seed: u64) -> Self {
        KroneckerSpec {
            seed_matrix: family.seed_matrix(),
            scale,
            target_avg_degree,
            rng_seed,
        }
    }

    pub fn num_nodes(&self) -> usize {
        1usize << self.scale
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .seed_matrix
            .iter()
            .flatten()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidConfig(format!(
                "seed matrix entries must lie in [0, 1], got {:?}",
                self.seed_matrix
            )));
        }
        if self.scale < 1 || self.scale > MAX_KRONECKER_SCALE {
            return Err(Error::InvalidConfig(format!(
                "kronecker scale must be in 1..={MAX_KRONECKER_SCALE}, got {}",
                self.scale
            )));
        }
        if !(self.target_avg_degree > 0.0 && self.target_avg_degree.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "average degree must be positive, got {}",
                self.target_avg_degree
            )));
        }
        Ok(())
    }

    /// Unscaled Kronecker-power probability of edge `(u, v)`.
    fn raw_probability(&self, u: usize, v: usize) -> f64 {
        (0..self.scale)
            .map(|bit| self.seed_matrix[(u >> bit) & 1][(v >> bit) & 1])
            .product()
    }
}

/// Samples a directed graph without self-loops. Edge `(u, v)` appears
/// independently with probability `c * K[u][v]`, where `K` is the
/// `scale`-fold Kronecker power of the seed matrix and `c` makes the expected
/// edge count `num_nodes * target_avg_degree`.
pub fn generate_kronecker(spec: &KroneckerSpec) -> Result<Vec<(usize, usize)>> {
    spec.validate()?;
    let n = spec.num_nodes();
    let seed = spec.seed_matrix;
    let total: f64 = (seed[0][0] + seed[0][1] + seed[1][0] + seed[1][1]).powi(spec.scale as i32);
    let diagonal: f64 = (seed[0][0] + seed[1][1]).powi(spec.scale as i32);
    let off_diagonal = total - diagonal;
    if !(off_diagonal > 0.0) {
        return Ok(Vec::new());
    }
    let factor = n as f64 * spec.target_avg_degree / off_diagonal;
    let mut max_prob: f64 = 0.0;
    for u in 0..n {
        for v in 0..n {
            if u != v {
                max_prob = max_prob.max(factor * spec.raw_probability(u, v));
            }
        }
    }
    if max_prob > 1.0 {
        return Err(Error::ScaleOverflow { max_prob });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = factor * spec.raw_probability(u, v);
            // Draw for every pair so the stream layout is independent of p.
            let draw: f64 = rng.random();
            if draw < p {
                edges.push((u, v));
            }
        }
    }
    Ok(edges)
}

/// Distribution of the parameter placed on every edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDistribution {
    /// Rates uniform on `[lo, hi]`.
    Additive { lo: f64, hi: f64 },
    /// Magnitudes uniform on `[lo, hi]`, negated with probability `p_neg`.
    Multiplicative { lo: f64, hi: f64, p_neg: f64 },
}

impl ParamDistribution {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Additive => ParamDistribution::Additive { lo: 0.01, hi: 1.0 },
            ModelKind::Multiplicative => ParamDistribution::Multiplicative {
                lo: 0.1,
                hi: 1.0,
                p_neg: 0.3,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ParamDistribution::Additive { .. } => ModelKind::Additive,
            ParamDistribution::Multiplicative { .. } => ModelKind::Multiplicative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = match *self {
            ParamDistribution::Additive { lo, hi } => {
                if !(lo > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "additive rates need a positive lower bound, got {lo}"
                    )));
                }
                (lo, hi)
            }
            ParamDistribution::Multiplicative { lo, hi, p_neg } => {
                if !(0.0..=1.0).contains(&p_neg) {
                    return Err(Error::InvalidConfig(format!(
                        "p_neg must lie in [0, 1], got {p_neg}"
                    )));
                }
                if !(lo >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "magnitude lower bound must be nonnegative, got {lo}"
                    )));
                }
                (lo, hi)
            }
        };
        if !(hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid range [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Draws one parameter per edge in the given order; all other entries are 0.
pub fn assign_parameters(
    num_nodes: usize,
    edges: &[(usize, usize)],
    dist: &ParamDistribution,
    rng_seed: u64,
) -> Result<Network> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let triples = edges.iter().map(|&(j, i)| {
        let value = match *dist {
            ParamDistribution::Additive { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ParamDistribution::Multiplicative { lo, hi, p_neg } => {
                let magnitude = lo + (hi - lo) * rng.random::<f64>();
                if rng.random::<f64>() < p_neg {
                    -magnitude
                } else {
                    magnitude
                }
            }
        };
        (j, i, value)
    });
    let triples: Vec<_> = triples.collect();
    if let Some(&(j, _, _)) = triples.iter().find(|&&(j, i, _)| j == i) {
        return Err(Error::InvalidNetwork(format!("self-loop on node {j}")));
    }
    Network::from_edges(dist.kind(), num_nodes, triples)
}

/// Which hazard model drives a simulation, with its time dependence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HazardModel {
    Additive(ShapingFunction),
    Multiplicative(Baseline),
}

impl HazardModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            HazardModel::Additive(_) => ModelKind::Additive,
            HazardModel::Multiplicative(_) => ModelKind::Multiplicative,
        }
    }
}

impl fmt::Display for HazardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HazardModel::Additive(s) => write!(f, "additive {s}"),
            HazardModel::Multiplicative(b) => write!(f, "multiplicative {b}"),
        }
    }
}

/// Which susceptible nodes get a fresh tentative time after an infection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reinversion {
    /// Only nodes the new infectee influences.
    Changed,
    /// Every susceptible node. Slower; gives identical cascades.
    All,
}

/// Mixes `stream` into `base` (splitmix64 finaliser). Cascade `c` of a set
/// sampled with seed `s` uses `derive_seed(s, c)`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(base ^ mix(stream))
}

/// One uniform on `(0, 1]` per node, in node order.
pub fn draw_uniforms(num_nodes: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..num_nodes).map(|_| 1.0 - rng.random::<f64>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Susceptible,
    Forced,
    Infected,
}

/// Per-node hazard state for the sampler.
#[derive(Debug, Clone, Default)]
struct NodeState {
    /// Cumulative-hazard level at which the node gets infected.
    target: f64,
    /// Additive model: `(alpha, parent time)` of infected influencers.
    parents: Vec<(f64, f64)>,
    /// Multiplicative model: log-multiplier, time of the last change and the
    /// cumulative hazard accrued up to it.
    exponent: f64,
    since: f64,
    accrued: f64,
    tentative: f64,
}

fn additive_cumulative(f: &ShapingFunction, parents: &[(f64, f64)], t: f64) -> f64 {
    parents.iter().map(|&(a, tj)| a * f.cumulative(tj, t)).sum()
}

/// Smallest `t >= now` at which the additive cumulative hazard reaches
/// `target`, or infinity if it never does before `horizon`.
fn invert_additive(f: &ShapingFunction, parents: &[(f64, f64)], target: f64, now: f64, horizon: f64) -> f64 {
    let rate: f64 = parents.iter().map(|p| p.0).sum();
    if !(rate > 0.0) {
        return f64::INFINITY;
    }
    let reached = additive_cumulative(f, parents, now);
    let remaining = target - reached;
    if remaining <= 0.0 {
        return now;
    }
    match f.shape() {
        // Every parent is active after `now`, so the hazard is the constant `rate`.
        Shape::Exp => now + remaining / rate,
        Shape::Ray => {
            // sum a (d_j + s)^2 / 2 grows by rate s^2 / 2 + lag s
            let lag: f64 = parents.iter().map(|&(a, tj)| a * (now - tj)).sum();
            let disc = lag * lag + 2.0 * rate * remaining;
            now + 2.0 * remaining / (lag + disc.sqrt())
        }
        Shape::Pow => {
            if let [(a, tj)] = parents {
                return (tj + f.delta() * (target / a).exp()).max(now);
            }
            let mut hi = now + f.delta();
            while additive_cumulative(f, parents, hi) < target {
                if hi >= horizon {
                    return f64::INFINITY;
                }
                hi = (now + 2.0 * (hi - now)).min(horizon);
            }
            let mut lo = now;
            while hi - lo > INVERSION_TOL * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if additive_cumulative(f, parents, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    }
}

struct Sampler<'a> {
    net: &'a Network,
    model: HazardModel,
    window: f64,
    reinversion: Reinversion,
    out_neighbors: Vec<Vec<usize>>,
}

impl<'a> Sampler<'a> {
    fn new(net: &'a Network, model: HazardModel, window: f64, reinversion: Reinversion) -> Result<Self> {
        net.expect_kind(model.kind())?;
        if !(window > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "observation window must be positive, got {window}"
            )));
        }
        Ok(Sampler {
            net,
            model,
            window,
            reinversion,
            out_neighbors: net.out_neighbors(),
        })
    }

    fn tentative(&self, state: &NodeState, now: f64) -> f64 {
        match self.model {
            HazardModel::Additive(f) => invert_additive(&f, &state.parents, state.target, now, self.window),
            HazardModel::Multiplicative(b) => {
                let remaining = state.target - state.accrued;
                b.invert(state.since, remaining / state.exponent.exp())
            }
        }
    }

    /// Registers the infection of `node` at `time` in the state of `child`.
    fn absorb(&self, state: &mut NodeState, node: usize, child: usize, time: f64) {
        let a = self.net.alpha(node, child);
        if a == 0.0 {
            return;
        }
        match self.model {
            HazardModel::Additive(_) => state.parents.push((a, time)),
            HazardModel::Multiplicative(b) => {
                state.accrued += state.exponent.exp() * b.integral(state.since, time);
                state.since = time;
                state.exponent += a;
            }
        }
    }

    fn run(&self, forced: &[Event], uniforms: &[f64]) -> Result<Cascade> {
        let n = self.net.num_nodes();
        if uniforms.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: uniforms.len(),
            });
        }
        let schedule = Cascade::new(forced.to_vec())?;
        if schedule.max_node() >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: schedule.max_node() + 1,
            });
        }
        if schedule.duration() > self.window {
            return Err(Error::InvalidCascade(format!(
                "forced infection at {} is beyond the window {}",
                schedule.duration(),
                self.window
            )));
        }

        let mut status = vec![Status::Susceptible; n];
        for e in schedule.events() {
            status[e.node] = Status::Forced;
        }
        let mut states: Vec<NodeState> = uniforms
            .iter()
            .map(|&u| NodeState {
                target: -u.ln(),
                tentative: f64::INFINITY,
                ..Default::default()
            })
            .collect();
        if let HazardModel::Multiplicative(_) = self.model {
            for i in 0..n {
                if status[i] == Status::Susceptible {
                    states[i].tentative = self.tentative(&states[i], 0.0);
                }
            }
        }

        let mut events = Vec::new();
        let mut forced_iter = schedule.events().iter().peekable();
        let mut last = f64::NEG_INFINITY;
        loop {
            let mut next: Option<(usize, f64)> = None;
            for (i, s) in states.iter().enumerate() {
                if status[i] == Status::Susceptible
                    && s.tentative <= self.window
                    && next.is_none_or(|(_, t)| s.tentative < t)
                {
                    next = Some((i, s.tentative));
                }
            }
            let (node, mut time) = match (forced_iter.peek(), next) {
                (Some(f), Some((i, t))) if t < f.time => (i, t),
                (Some(_), _) => {
                    let f = forced_iter.next().expect("peeked");
                    (f.node, f.time)
                }
                (None, Some(n)) => n,
                (None, None) => break,
            };
            if time <= last {
                // Round-off can tie a tentative time with the previous infection.
                time = last.next_up();
                if time > self.window {
                    status[node] = Status::Infected;
                    continue;
                }
            }
            last = time;
            status[node] = Status::Infected;
            events.push(Event::new(node, time));

            let update = |i: usize, states: &mut Vec<NodeState>| {
                self.absorb(&mut states[i], node, i, time);
                states[i].tentative = self.tentative(&states[i], time);
            };
            match self.reinversion {
                Reinversion::Changed => {
                    for &i in &self.out_neighbors[node] {
                        if status[i] == Status::Susceptible {
                            update(i, &mut states);
                        }
                    }
                }
                Reinversion::All => {
                    for (i, st) in status.iter().enumerate() {
                        if *st == Status::Susceptible {
                            update(i, &mut states);
                        }
                    }
                }
            }
        }
        Cascade::new(events)
    }
}

/// Samples a cascade seeded by `source` at time 0.
pub fn simulate_cascade(
    net: &Network,
    model: HazardModel,
    source: usize,
    window: f64,
    rng_seed: u64,
) -> Result<Cascade> {
    simulate_forced(net, model, &[Event::new(source, 0.0)], window, rng_seed)
}

/// Samples a cascade in which the nodes of `forced` get infected exactly at
/// the given times (one of them at 0) and every other node follows the
/// model.
pub fn simulate_forced(
    net: &Network,
    model: HazardModel,
    forced: &[Event],
    window: f64,
    rng_seed: u64,
) -> Result<Cascade> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let uniforms = draw_uniforms(net.num_nodes(), &mut rng);
    simulate_with_uniforms(net, model, forced, window, &uniforms, Reinversion::Changed)
}

/// The sampler's core with explicit per-node uniforms on `(0, 1]`.
pub fn simulate_with_uniforms(
    net: &Network,
    model: HazardModel,
    forced: &[Event],
    window: f64,
    uniforms: &[f64],
    reinversion: Reinversion,
) -> Result<Cascade> {
    Sampler::new(net, model, window, reinversion)?.run(forced, uniforms)
}

/// How cascade sources are chosen by [`simulate_set`].
#[derive(Debug, Clone, PartialEq)]
pub enum SourcePolicy {
    UniformRandom,
    Given(Vec<usize>),
}

/// Samples `num_cascades` independent cascades. Cascade `c` draws its source
/// (under [`SourcePolicy::UniformRandom`]) and then its node uniforms from a
/// ChaCha8 stream seeded with `derive_seed(rng_seed, c)`.
pub fn simulate_set(
    net: &Network,
    model: HazardModel,
    num_cascades: usize,
    window: f64,
    sources: &SourcePolicy,
    rng_seed: u64,
) -> Result<CascadeSet> {
    let n = net.num_nodes();
    if n == 0 && num_cascades > 0 {
        return Err(Error::InvalidNetwork(
            "cannot simulate on an empty network".into(),
        ));
    }
    if let SourcePolicy::Given(list) = sources {
        if list.len() != num_cascades {
            return Err(Error::InvalidConfig(format!(
                "{} sources given for {num_cascades} cascades",
                list.len()
            )));
        }
        if let Some(&s) = list.iter().find(|&&s| s >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s + 1,
            });
        }
    }
    let sampler = Sampler::new(net, model, window, Reinversion::Changed)?;
    let cascades = par_map(num_cascades, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(rng_seed, c as u64));
        let source = match sources {
            SourcePolicy::UniformRandom => rng.random_range(0..n),
            SourcePolicy::Given(list) => list[c],
        };
        let uniforms = draw_uniforms(n, &mut rng);
        sampler.run(&[Event::new(source, 0.0)], &uniforms)
    });
    let cascades = cascades.into_iter().collect::<Result<Vec<_>>>()?;
    CascadeSet::new(n, window, cascades)
}
