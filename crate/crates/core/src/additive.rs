//! Likelihood, gradient and constrained maximum-likelihood fitting for the
//! additive hazard model.
//!
//! Under this model the hazard of node `i` is `sum_j alpha_ji gamma(t_j; t)`
//! over already-infected nodes `j`, with `alpha_ji >= 0`. The negative
//! log-likelihood of a cascade set separates over the columns of the
//! parameter matrix; each column is a convex problem of the form
//! `w . x - sum_c ln(g_c . x)` over `x >= 0`.

use ndarray::Array2;

use crate::cascade::{Cascade, CascadeSet};
use crate::error::{Error, Result};
use crate::inference::{assemble, par_map, ColumnFit, InferenceResult};
use crate::network::{ModelKind, Network};
use crate::shaping::ShapingFunction;
use crate::solver::{proximal_gradient, Regularizer, SmoothObjective, SolverOptions};

/// Starting value for every free rate.
pub const INITIAL_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditiveConfig {
    pub shaping: ShapingFunction,
    pub max_iters: usize,
    /// Stop once the relative objective change of an iteration drops below this.
    pub tol: f64,
    pub step_init: f64,
    pub edge_threshold: f64,
}

impl Default for AdditiveConfig {
    fn default() -> Self {
        AdditiveConfig {
            shaping: ShapingFunction::exp(),
            max_iters: 2000,
            tol: 1e-8,
            step_init: 1.0,
            edge_threshold: 1e-4,
        }
    }
}

impl AdditiveConfig {
    pub fn with_shaping(shaping: ShapingFunction) -> Self {
        AdditiveConfig {
            shaping,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_solver_fields(self.max_iters, self.tol, self.step_init, self.edge_threshold)
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            step_init: self.step_init,
            accelerate: false,
        }
    }
}

pub(crate) fn validate_solver_fields(
    max_iters: usize,
    tol: f64,
    step_init: f64,
    edge_threshold: f64,
) -> Result<()> {
    if max_iters < 1 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    if !(step_init > 0.0 && step_init.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step_init must be positive, got {step_init}"
        )));
    }
    if !(edge_threshold >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "edge_threshold must be nonnegative, got {edge_threshold}"
        )));
    }
    Ok(())
}

pub(crate) fn check_cascade(net: &Network, cascade: &Cascade, window: f64) -> Result<()> {
    let n = net.num_nodes();
    if cascade.max_node() >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cascade.max_node() + 1,
        });
    }
    if cascade.duration() > window {
        return Err(Error::InvalidCascade(format!(
            "infection at {} is beyond the window {window}",
            cascade.duration()
        )));
    }
    Ok(())
}

fn uninfected_mask(cascade: &Cascade, n: usize) -> Vec<bool> {
    let mut uninfected = vec![true; n];
    for e in cascade.events() {
        uninfected[e.node] = false;
    }
    uninfected
}

/// Log-likelihood of one cascade observed over `[0, window]`.
///
/// The source (earliest event) contributes no infection term. Returns
/// `f64::NEG_INFINITY` when some other infected node has zero hazard at its
/// infection time.
pub fn additive_cascade_loglik(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    window: f64,
) -> Result<f64> {
    net.expect_kind(ModelKind::Additive)?;
    check_cascade(net, cascade, window)?;
    let events = cascade.events();
    let mut ll = 0.0;
    let mut impossible = false;
    for (p, child) in events.iter().enumerate().skip(1) {
        let mut hazard = 0.0;
        for parent in &events[..p] {
            let a = net.alpha(parent.node, child.node);
            hazard += a * f.hazard(parent.time, child.time);
            ll -= a * f.cumulative(parent.time, child.time);
        }
        if hazard > 0.0 {
            ll += hazard.ln();
        } else {
            impossible = true;
        }
    }
    for (n, _) in uninfected_mask(cascade, net.num_nodes())
        .into_iter()
        .enumerate()
        .filter(|&(_, u)| u)
    {
        for m in events {
            ll -= net.alpha(m.node, n) * f.cumulative(m.time, window);
        }
    }
    Ok(if impossible { f64::NEG_INFINITY } else { ll })
}

/// Sum of [`additive_cascade_loglik`] over a cascade set.
pub fn additive_set_loglik(net: &Network, f: &ShapingFunction, cs: &CascadeSet) -> Result<f64> {
    net.expect_nodes(cs.num_nodes())?;
    let mut total = 0.0;
    for c in cs {
        total += additive_cascade_loglik(net, f, c, cs.window())?;
    }
    Ok(total)
}

/// Gradient of [`additive_set_loglik`] with respect to every `alpha_ji`.
///
/// Fails with [`Error::ZeroHazard`] where a log term vanishes.
pub fn additive_gradient(net: &Network, f: &ShapingFunction, cs: &CascadeSet) -> Result<Array2<f64>> {
    net.expect_kind(ModelKind::Additive)?;
    net.expect_nodes(cs.num_nodes())?;
    let n = net.num_nodes();
    let window = cs.window();
    let mut grad = Array2::zeros((n, n));
    for (c, cascade) in cs.iter().enumerate() {
        let events = cascade.events();
        for (p, child) in events.iter().enumerate().skip(1) {
            let parents = &events[..p];
            let hazard: f64 = parents
                .iter()
                .map(|e| net.alpha(e.node, child.node) * f.hazard(e.time, child.time))
                .sum();
            if !(hazard > 0.0) {
                return Err(Error::ZeroHazard {
                    cascade: c,
                    node: child.node,
                });
            }
            for parent in parents {
                grad[[parent.node, child.node]] +=
                    f.hazard(parent.time, child.time) / hazard - f.cumulative(parent.time, child.time);
            }
        }
        for (u, _) in uninfected_mask(cascade, n)
            .into_iter()
            .enumerate()
            .filter(|&(_, u)| u)
        {
            for m in events {
                grad[[m.node, u]] -= f.cumulative(m.time, window);
            }
        }
    }
    Ok(grad)
}

/// Computes a cascade's log-likelihood twice: by the additive-hazard formula
/// and by the independent-cascade factorisation, where each infected node's
/// density is the product of pairwise survivals times the sum of pairwise
/// hazards (pairwise density over pairwise survival).
///
/// The two values agree for every network; the pair serves as a cross-check.
pub fn additive_equals_independent_cascade(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    window: f64,
) -> Result<(f64, f64)> {
    let direct = additive_cascade_loglik(net, f, cascade, window)?;

    let pair_survival = |a: f64, t_parent: f64, t: f64| (-a * f.cumulative(t_parent, t)).exp();
    let pair_density =
        |a: f64, t_parent: f64, t: f64| a * f.hazard(t_parent, t) * pair_survival(a, t_parent, t);

    let events = cascade.events();
    let mut factored = 0.0;
    for (p, child) in events.iter().enumerate().skip(1) {
        let mut survival = 1.0;
        let mut hazard = 0.0;
        for parent in &events[..p] {
            let a = net.alpha(parent.node, child.node);
            let s = pair_survival(a, parent.time, child.time);
            survival *= s;
            hazard += pair_density(a, parent.time, child.time) / s;
        }
        factored += (survival * hazard).ln();
    }
    for (u, _) in uninfected_mask(cascade, net.num_nodes())
        .into_iter()
        .enumerate()
        .filter(|&(_, u)| u)
    {
        let survival: f64 = events
            .iter()
            .map(|m| pair_survival(net.alpha(m.node, u), m.time, window))
            .product();
        factored += survival.ln();
    }
    Ok((direct, factored))
}

/// One target node's negative log-likelihood `w . x - sum_c ln(g_c . x)`
/// restricted to its candidate parents.
pub(crate) struct AdditiveColumn {
    target: usize,
    /// Global ids of the free parameters.
    parents: Vec<usize>,
    linear: Vec<f64>,
    /// CSR storage of the `g_c` vectors.
    offsets: Vec<usize>,
    index: Vec<u32>,
    value: Vec<f64>,
    /// Infections whose hazard is zero for every parameter value.
    impossible: usize,
}

impl AdditiveColumn {
    pub(crate) fn build(cs: &CascadeSet, f: &ShapingFunction, target: usize) -> Self {
        let n = cs.num_nodes();
        let window = cs.window();
        let mut linear_all = vec![0.0; n];
        let mut raw_terms: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut impossible = 0;
        for cascade in cs {
            let events = cascade.events();
            match events.iter().position(|e| e.node == target) {
                Some(0) => {}
                Some(p) => {
                    let t_i = events[p].time;
                    let mut term = Vec::new();
                    for parent in &events[..p] {
                        linear_all[parent.node] += f.cumulative(parent.time, t_i);
                        let g = f.hazard(parent.time, t_i);
                        if g > 0.0 {
                            term.push((parent.node, g));
                        }
                    }
                    if term.is_empty() {
                        impossible += 1;
                    } else {
                        raw_terms.push(term);
                    }
                }
                None => {
                    for m in events {
                        linear_all[m.node] += f.cumulative(m.time, window);
                    }
                }
            }
        }

        let mut local = vec![u32::MAX; n];
        let mut parents = Vec::new();
        for term in &raw_terms {
            for &(j, _) in term {
                if local[j] == u32::MAX {
                    local[j] = parents.len() as u32;
                    parents.push(j);
                }
            }
        }
        // Sort parents so the column layout does not depend on cascade order.
        parents.sort_unstable();
        for (k, &j) in parents.iter().enumerate() {
            local[j] = k as u32;
        }
        let linear = parents.iter().map(|&j| linear_all[j]).collect();
        let mut offsets = Vec::with_capacity(raw_terms.len() + 1);
        let mut index = Vec::new();
        let mut value = Vec::new();
        offsets.push(0);
        for term in raw_terms {
            for (j, g) in term {
                index.push(local[j]);
                value.push(g);
            }
            offsets.push(index.len());
        }
        AdditiveColumn {
            target,
            parents,
            linear,
            offsets,
            index,
            value,
            impossible,
        }
    }

    fn term_dot(&self, c: usize, x: &[f64]) -> f64 {
        let range = self.offsets[c]..self.offsets[c + 1];
        self.index[range.clone()]
            .iter()
            .zip(&self.value[range])
            .map(|(&k, &g)| g * x[k as usize])
            .sum()
    }

    fn num_terms(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl SmoothObjective for AdditiveColumn {
    fn dim(&self) -> usize {
        self.parents.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut v: f64 = self.linear.iter().zip(x).map(|(w, a)| w * a).sum();
        for c in 0..self.num_terms() {
            let s = self.term_dot(c, x);
            if !(s > 0.0) {
                return f64::INFINITY;
            }
            v -= s.ln();
        }
        v
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(&self.linear);
        let mut v: f64 = self.linear.iter().zip(x).map(|(w, a)| w * a).sum();
        for c in 0..self.num_terms() {
            let s = self.term_dot(c, x);
            if !(s > 0.0) {
                return f64::INFINITY;
            }
            v -= s.ln();
            let range = self.offsets[c]..self.offsets[c + 1];
            for (&k, &g) in self.index[range.clone()].iter().zip(&self.value[range]) {
                grad[k as usize] -= g / s;
            }
        }
        v
    }
}

fn check_set(cs: &CascadeSet) -> Result<()> {
    if cs.is_empty() {
        return Err(Error::InvalidCascade(
            "cannot infer a network from an empty cascade set".into(),
        ));
    }
    Ok(())
}

/// Maximum-likelihood rates under `alpha >= 0`, starting every free rate at
/// [`INITIAL_RATE`].
pub fn infer_additive(cs: &CascadeSet, cfg: &AdditiveConfig) -> Result<InferenceResult> {
    infer_additive_impl(cs, cfg, None)
}

/// As [`infer_additive`], starting from the entries of `start`. Entries that
/// cannot influence the likelihood stay at 0; a start column with zero
/// likelihood falls back to the default initialisation.
pub fn infer_additive_from(
    cs: &CascadeSet,
    cfg: &AdditiveConfig,
    start: &Network,
) -> Result<InferenceResult> {
    start.expect_kind(ModelKind::Additive)?;
    start.expect_nodes(cs.num_nodes())?;
    infer_additive_impl(cs, cfg, Some(start))
}

fn infer_additive_impl(
    cs: &CascadeSet,
    cfg: &AdditiveConfig,
    start: Option<&Network>,
) -> Result<InferenceResult> {
    cfg.validate()?;
    check_set(cs)?;
    let opts = cfg.solver_options();
    let columns = par_map(cs.num_nodes(), |i| {
        let column = AdditiveColumn::build(cs, &cfg.shaping, i);
        let default_start = vec![INITIAL_RATE; column.dim()];
        let x0 = match start {
            Some(net) => {
                let x: Vec<f64> = column.parents.iter().map(|&j| net.alpha(j, i)).collect();
                if column.value(&x).is_finite() {
                    x
                } else {
                    default_start
                }
            }
            None => default_start,
        };
        let solution = proximal_gradient(&column, Regularizer::NonNegative, x0, &opts);
        ColumnFit {
            target: column.target,
            parents: column.parents,
            solution,
        }
    });
    Ok(assemble(
        ModelKind::Additive,
        cs.num_nodes(),
        columns,
        cfg.edge_threshold,
    ))
}

/// Number of infections that no parameter value can explain (zero hazard
/// for every rate), summed over target nodes. These terms are constant in
/// the parameters and are left out of the fitted objective.
pub fn count_unexplainable_infections(cs: &CascadeSet, f: &ShapingFunction) -> usize {
    par_map(cs.num_nodes(), |i| AdditiveColumn::build(cs, f, i).impossible)
        .into_iter()
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::Event;

    fn cascade(events: &[(usize, f64)]) -> Cascade {
        Cascade::new(events.iter().map(|&(n, t)| Event::new(n, t)).collect()).unwrap()
    }

    fn net(n: usize, edges: &[(usize, usize, f64)]) -> Network {
        Network::from_edges(ModelKind::Additive, n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn loglik_examples() {
        let exp = ShapingFunction::exp();
        let two = net(2, &[(0, 1, 1.0)]);
        let c = cascade(&[(0, 0.0), (1, 1.0)]);
        assert!((additive_cascade_loglik(&two, &exp, &c, 2.0).unwrap() + 1.0).abs() < 1e-15);
        let c = cascade(&[(0, 0.0)]);
        assert!((additive_cascade_loglik(&two, &exp, &c, 2.0).unwrap() + 2.0).abs() < 1e-15);
        let c = cascade(&[(1, 0.0), (0, 1.0)]);
        assert_eq!(
            additive_cascade_loglik(&two, &exp, &c, 2.0).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn loglik_rejects_out_of_window_and_wrong_kind() {
        let exp = ShapingFunction::exp();
        let c = cascade(&[(0, 0.0), (1, 3.0)]);
        assert!(additive_cascade_loglik(&net(2, &[]), &exp, &c, 2.0).is_err());
        let m = Network::zeros(ModelKind::Multiplicative, 2);
        assert!(additive_cascade_loglik(&m, &exp, &cascade(&[(0, 0.0)]), 2.0).is_err());
    }

    #[test]
    fn set_loglik_sums_cascades() {
        let exp = ShapingFunction::exp();
        let two = net(2, &[(0, 1, 1.0)]);
        let c = cascade(&[(0, 0.0), (1, 1.0)]);
        let empty = CascadeSet::new(2, 2.0, vec![]).unwrap();
        assert_eq!(additive_set_loglik(&two, &exp, &empty).unwrap(), 0.0);
        let single = CascadeSet::new(2, 2.0, vec![c.clone()]).unwrap();
        let double = CascadeSet::new(2, 2.0, vec![c.clone(), c]).unwrap();
        let one = additive_set_loglik(&two, &exp, &single).unwrap();
        assert_eq!(additive_set_loglik(&two, &exp, &double).unwrap(), 2.0 * one);
    }

    #[test]
    fn gradient_with_only_survival_terms() {
        // Node 1 never infected: d/d alpha_01 = -sum_c G(t_0, T) exactly.
        let exp = ShapingFunction::exp();
        let cs = CascadeSet::new(3, 2.0, vec![cascade(&[(0, 0.0)]), cascade(&[(2, 0.0), (0, 0.5)])]).unwrap();
        let g = additive_gradient(&net(3, &[(0, 1, 0.3), (2, 0, 0.4)]), &exp, &cs).unwrap();
        assert_eq!(g[[0, 1]], -(2.0 + 1.5));
        for k in 0..3 {
            assert_eq!(g[[k, k]], 0.0);
        }
    }

    #[test]
    fn gradient_rejects_zero_hazard() {
        let exp = ShapingFunction::exp();
        let cs = CascadeSet::new(2, 2.0, vec![cascade(&[(0, 0.0), (1, 1.0)])]).unwrap();
        assert!(matches!(
            additive_gradient(&net(2, &[]), &exp, &cs),
            Err(Error::ZeroHazard { cascade: 0, node: 1 })
        ));
    }

    #[test]
    fn ic_identity_single_parent() {
        let ray = ShapingFunction::ray();
        let two = net(2, &[(0, 1, 0.7)]);
        let c = cascade(&[(0, 0.0), (1, 1.5)]);
        let (a, b) = additive_equals_independent_cascade(&two, &ray, &c, 3.0).unwrap();
        let expected = (0.7f64 * 1.5).ln() - 0.7 * 1.5 * 1.5 / 2.0;
        assert!((a - expected).abs() < 1e-14);
        assert!((b - expected).abs() < 1e-14);
    }

    #[test]
    fn column_objective_matches_set_loglik() {
        let exp = ShapingFunction::exp();
        let cs = CascadeSet::new(
            3,
            3.0,
            vec![
                cascade(&[(0, 0.0), (1, 0.5), (2, 1.7)]),
                cascade(&[(1, 0.0), (2, 2.0)]),
                cascade(&[(2, 0.0), (0, 0.4)]),
            ],
        )
        .unwrap();
        let truth = net(3, &[(0, 1, 0.4), (0, 2, 0.2), (1, 2, 0.9), (2, 0, 0.5)]);
        let mut total = 0.0;
        for i in 0..3 {
            let col = AdditiveColumn::build(&cs, &exp, i);
            let x: Vec<f64> = col.parents.iter().map(|&j| truth.alpha(j, i)).collect();
            total += col.value(&x);
        }
        // Entries that are not candidate parents are zero in `truth`.
        let ll = additive_set_loglik(&truth, &exp, &cs).unwrap();
        assert!((total + ll).abs() < 1e-12, "{total} vs {}", -ll);
    }

    #[test]
    fn never_infected_after_another_node_gets_zero_column() {
        let cs = CascadeSet::new(2, 2.0, vec![cascade(&[(0, 0.0)]), cascade(&[(1, 0.0), (0, 1.0)])]).unwrap();
        let res = infer_additive(&cs, &AdditiveConfig::default()).unwrap();
        assert_eq!(res.network.alpha(0, 1), 0.0);
        assert!(res.network.alpha(1, 0) > 0.0);
        assert!(res.converged);
    }

    #[test]
    fn two_node_mle_has_closed_form() {
        // Node 1 infected at delays d_c after node 0 in k cascades and
        // survives to T in m cascades: alpha = k / (sum d_c + m T).
        let exp = ShapingFunction::exp();
        let cs = CascadeSet::new(
            2,
            4.0,
            vec![
                cascade(&[(0, 0.0), (1, 0.5)]),
                cascade(&[(0, 0.0), (1, 1.5)]),
                cascade(&[(0, 0.0)]),
            ],
        )
        .unwrap();
        let cfg = AdditiveConfig {
            tol: 1e-14,
            ..AdditiveConfig::with_shaping(exp)
        };
        let res = infer_additive(&cs, &cfg).unwrap();
        assert!((res.network.alpha(0, 1) - 2.0 / 6.0).abs() < 1e-6);
        assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn infer_rejects_empty_set_and_bad_config() {
        let empty = CascadeSet::new(2, 1.0, vec![]).unwrap();
        assert!(infer_additive(&empty, &AdditiveConfig::default()).is_err());
        let cs = CascadeSet::new(2, 1.0, vec![cascade(&[(0, 0.0)])]).unwrap();
        let bad = AdditiveConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(infer_additive(&cs, &bad).is_err());
    }
}
