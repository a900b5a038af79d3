//! Likelihood, gradient and L1-regularised fitting for the multiplicative
//! hazard model.
//!
//! The hazard of node `i` is a baseline times `exp(sum_k alpha_ki)` over
//! already-infected nodes `k`, so parents may raise (`alpha > 0`) or lower
//! (`alpha < 0`) the risk. Only ordered pairs that were co-infected in some
//! cascade carry a free parameter; all other entries are fixed at 0.

use std::fmt;

use ndarray::Array2;

use crate::additive::{check_cascade, validate_solver_fields};
use crate::baseline::Baseline;
use crate::cascade::{Cascade, CascadeSet};
use crate::error::{Error, Result};
use crate::inference::{assemble, par_map, ColumnFit, InferenceResult};
use crate::network::{ModelKind, Network};
use crate::solver::{proximal_gradient, Regularizer, SmoothObjective, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativeConfig {
    pub baseline: Baseline,
    /// L1 penalty weight; `None` picks [`default_lambda`].
    pub lambda: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub step_init: f64,
    pub edge_threshold: f64,
    /// Use momentum steps (restarted whenever they would increase the
    /// objective).
    pub accelerate: bool,
}

impl Default for MultiplicativeConfig {
    fn default() -> Self {
        MultiplicativeConfig {
            baseline: Baseline::constant(0.0).expect("valid default baseline"),
            lambda: None,
            max_iters: 2000,
            tol: 1e-8,
            step_init: 1.0,
            edge_threshold: 1e-4,
            accelerate: false,
        }
    }
}

impl MultiplicativeConfig {
    pub fn with_baseline(baseline: Baseline) -> Self {
        MultiplicativeConfig {
            baseline,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(lambda) = self.lambda {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "lambda must be nonnegative, got {lambda}"
                )));
            }
        }
        validate_solver_fields(self.max_iters, self.tol, self.step_init, self.edge_threshold)
    }

    pub fn lambda_for(&self, cs: &CascadeSet) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(cs))
    }
}

/// `0.01 * cascades / nodes`, a scale-aware starting point for the penalty.
pub fn default_lambda(cs: &CascadeSet) -> f64 {
    0.01 * cs.len() as f64 / cs.num_nodes().max(1) as f64
}

/// Ordered pairs `(j, i)` with `j` infected strictly before `i` in at least
/// one cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    allowed: Array2<bool>,
}

impl SupportMask {
    /// Every off-diagonal pair allowed.
    pub fn full(num_nodes: usize) -> Self {
        let mut allowed = Array2::from_elem((num_nodes, num_nodes), true);
        allowed.diag_mut().fill(false);
        SupportMask { allowed }
    }

    pub fn num_nodes(&self) -> usize {
        self.allowed.nrows()
    }

    #[inline]
    pub fn contains(&self, j: usize, i: usize) -> bool {
        self.allowed[[j, i]]
    }

    pub fn count(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.allowed
            .indexed_iter()
            .filter(|&(_, &b)| b)
            .map(|(ji, _)| ji)
            .collect()
    }
}

pub fn build_support(cs: &CascadeSet) -> SupportMask {
    let n = cs.num_nodes();
    let mut allowed = Array2::from_elem((n, n), false);
    for cascade in cs {
        let events = cascade.events();
        for (p, child) in events.iter().enumerate() {
            for parent in &events[..p] {
                allowed[[parent.node, child.node]] = true;
            }
        }
    }
    SupportMask { allowed }
}

fn check_mask(net: &Network, mask: &SupportMask) -> Result<()> {
    if mask.num_nodes() != net.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: net.num_nodes(),
            found: mask.num_nodes(),
        });
    }
    Ok(())
}

/// Cumulative hazard of `node` over `[0, end]` and the exponent in force at
/// `end`. Only masked parameters count.
fn masked_cumulative(
    net: &Network,
    b: &Baseline,
    mask: &SupportMask,
    cascade: &Cascade,
    node: usize,
    end: f64,
) -> (f64, f64) {
    let mut total = 0.0;
    let mut exponent = 0.0f64;
    let mut start = 0.0;
    for e in cascade.before(end) {
        if e.node == node || !mask.contains(e.node, node) {
            continue;
        }
        total += exponent.exp() * b.integral(start, e.time);
        exponent += net.alpha(e.node, node);
        start = e.time;
    }
    total += exponent.exp() * b.integral(start, end);
    (total, exponent)
}

/// Log-likelihood of one cascade under the multiplicative model, with every
/// parameter outside `mask` treated as 0.
///
/// The source contributes no infection term. The value is finite except
/// when an infection falls where the baseline is zero (an inverse baseline
/// below its epsilon), which yields `f64::NEG_INFINITY`.
pub fn multiplicative_cascade_loglik(
    net: &Network,
    b: &Baseline,
    mask: &SupportMask,
    cascade: &Cascade,
    window: f64,
) -> Result<f64> {
    net.expect_kind(ModelKind::Multiplicative)?;
    check_mask(net, mask)?;
    check_cascade(net, cascade, window)?;
    let times = cascade.dense_times(net.num_nodes());
    let source = cascade.source();
    let mut ll = 0.0;
    for (i, &t_i) in times.iter().enumerate() {
        if i == source {
            continue;
        }
        let infected = t_i.is_finite();
        let end = if infected { t_i } else { window };
        let (cumulative, exponent) = masked_cumulative(net, b, mask, cascade, i, end);
        if infected {
            ll += exponent + b.log_rate(t_i);
        }
        ll -= cumulative;
    }
    Ok(ll)
}

pub fn multiplicative_set_loglik(
    net: &Network,
    b: &Baseline,
    mask: &SupportMask,
    cs: &CascadeSet,
) -> Result<f64> {
    net.expect_nodes(cs.num_nodes())?;
    let mut total = 0.0;
    for c in cs {
        total += multiplicative_cascade_loglik(net, b, mask, c, cs.window())?;
    }
    Ok(total)
}

/// Gradient of [`multiplicative_set_loglik`]; entries outside `mask` are 0.
pub fn multiplicative_gradient(
    net: &Network,
    b: &Baseline,
    mask: &SupportMask,
    cs: &CascadeSet,
) -> Result<Array2<f64>> {
    net.expect_kind(ModelKind::Multiplicative)?;
    net.expect_nodes(cs.num_nodes())?;
    check_mask(net, mask)?;
    let n = net.num_nodes();
    let window = cs.window();
    let mut grad = Array2::zeros((n, n));
    let mut parents: Vec<usize> = Vec::new();
    let mut pieces: Vec<f64> = Vec::new();
    for cascade in cs {
        let times = cascade.dense_times(n);
        let source = cascade.source();
        for (i, &t_i) in times.iter().enumerate() {
            if i == source {
                continue;
            }
            let infected = t_i.is_finite();
            let end = if infected { t_i } else { window };
            parents.clear();
            pieces.clear();
            let mut exponent = 0.0f64;
            let mut start = 0.0;
            for e in cascade.before(end) {
                if e.node == i || !mask.contains(e.node, i) {
                    continue;
                }
                pieces.push(exponent.exp() * b.integral(start, e.time));
                exponent += net.alpha(e.node, i);
                start = e.time;
                parents.push(e.node);
            }
            pieces.push(exponent.exp() * b.integral(start, end));
            // parents[r] is active on pieces r+1.., so its derivative is the
            // suffix sum of those pieces.
            let mut suffix = 0.0;
            for r in (0..parents.len()).rev() {
                suffix += pieces[r + 1];
                let k = parents[r];
                grad[[k, i]] += if infected { 1.0 } else { 0.0 } - suffix;
            }
        }
    }
    Ok(grad)
}

/// One target node's negative log-likelihood over its masked parents:
/// `constant - counts . x + sum_terms sum_m exp(S_m) * pieces_m` with `S_m`
/// the running sum of the parameters of the term's first `m` parents.
pub(crate) struct MultiplicativeColumn {
    target: usize,
    parents: Vec<usize>,
    counts: Vec<f64>,
    constant: f64,
    /// CSR: term `c` owns `vars[var_off[c]..var_off[c+1]]` and the pieces
    /// after each of those parents at the same positions in `pieces`.
    var_off: Vec<usize>,
    vars: Vec<u32>,
    pieces: Vec<f64>,
}

impl MultiplicativeColumn {
    pub(crate) fn build(cs: &CascadeSet, b: &Baseline, mask: &SupportMask, target: usize) -> Self {
        let n = cs.num_nodes();
        let window = cs.window();
        let mut local = vec![u32::MAX; n];
        let mut parents = Vec::new();
        for (j, slot) in local.iter_mut().enumerate() {
            if mask.contains(j, target) {
                *slot = parents.len() as u32;
                parents.push(j);
            }
        }
        let mut counts = vec![0.0; parents.len()];
        let mut constant = 0.0;
        let mut var_off = vec![0];
        let mut vars = Vec::new();
        let mut pieces = Vec::new();
        for cascade in cs {
            let events = cascade.events();
            let (end, infected) = match events.iter().position(|e| e.node == target) {
                Some(0) => continue,
                Some(p) => {
                    // A zero baseline rate makes the term constant in x; it is dropped.
                    let log_rate = b.log_rate(events[p].time);
                    if log_rate.is_finite() {
                        constant -= log_rate;
                    }
                    (events[p].time, true)
                }
                None => (window, false),
            };
            let mut start = 0.0;
            for e in cascade.before(end) {
                let k = local[e.node];
                if e.node == target || k == u32::MAX {
                    continue;
                }
                if vars.len() == *var_off.last().unwrap() {
                    // first parent of this term: the piece before it has exponent 0
                    constant += b.integral(start, e.time);
                } else {
                    pieces.push(b.integral(start, e.time));
                }
                vars.push(k);
                if infected {
                    counts[k as usize] += 1.0;
                }
                start = e.time;
            }
            if vars.len() == *var_off.last().unwrap() {
                constant += b.integral(start, end);
            } else {
                pieces.push(b.integral(start, end));
                var_off.push(vars.len());
            }
        }
        MultiplicativeColumn {
            target,
            parents,
            counts,
            constant,
            var_off,
            vars,
            pieces,
        }
    }

    fn num_terms(&self) -> usize {
        self.var_off.len() - 1
    }
}

impl SmoothObjective for MultiplicativeColumn {
    fn dim(&self) -> usize {
        self.parents.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.constant - self.counts.iter().zip(x).map(|(c, a)| c * a).sum::<f64>();
        for c in 0..self.num_terms() {
            let mut s = 0.0;
            for p in self.var_off[c]..self.var_off[c + 1] {
                s += x[self.vars[p] as usize];
                v += s.exp() * self.pieces[p];
            }
        }
        v
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        for (g, c) in grad.iter_mut().zip(&self.counts) {
            *g = -c;
        }
        let mut v = self.constant - self.counts.iter().zip(x).map(|(c, a)| c * a).sum::<f64>();
        let mut scratch: Vec<f64> = Vec::new();
        for c in 0..self.num_terms() {
            let range = self.var_off[c]..self.var_off[c + 1];
            scratch.clear();
            let mut s = 0.0;
            for p in range.clone() {
                s += x[self.vars[p] as usize];
                let contrib = s.exp() * self.pieces[p];
                v += contrib;
                scratch.push(contrib);
            }
            let mut suffix = 0.0;
            for (q, p) in range.rev().enumerate() {
                suffix += scratch[scratch.len() - 1 - q];
                grad[self.vars[p] as usize] += suffix;
            }
        }
        v
    }
}

/// L1-regularised maximum-likelihood log-influences over the support mask,
/// starting from `alpha = 0`.
pub fn infer_multiplicative(cs: &CascadeSet, cfg: &MultiplicativeConfig) -> Result<InferenceResult> {
    infer_multiplicative_impl(cs, cfg, None)
}

/// As [`infer_multiplicative`], starting from the masked entries of `start`.
pub fn infer_multiplicative_from(
    cs: &CascadeSet,
    cfg: &MultiplicativeConfig,
    start: &Network,
) -> Result<InferenceResult> {
    start.expect_kind(ModelKind::Multiplicative)?;
    start.expect_nodes(cs.num_nodes())?;
    infer_multiplicative_impl(cs, cfg, Some(start))
}

fn infer_multiplicative_impl(
    cs: &CascadeSet,
    cfg: &MultiplicativeConfig,
    start: Option<&Network>,
) -> Result<InferenceResult> {
    cfg.validate()?;
    if cs.is_empty() {
        return Err(Error::InvalidCascade(
            "cannot infer a network from an empty cascade set".into(),
        ));
    }
    let lambda = cfg.lambda_for(cs);
    let mask = build_support(cs);
    let opts = SolverOptions {
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        step_init: cfg.step_init,
        accelerate: cfg.accelerate,
    };
    let columns = par_map(cs.num_nodes(), |i| {
        let column = MultiplicativeColumn::build(cs, &cfg.baseline, &mask, i);
        let x0 = match start {
            Some(net) => column.parents.iter().map(|&j| net.alpha(j, i)).collect(),
            None => vec![0.0; column.dim()],
        };
        let solution = proximal_gradient(&column, Regularizer::L1(lambda), x0, &opts);
        ColumnFit {
            target: column.target,
            parents: column.parents,
            solution,
        }
    });
    Ok(assemble(
        ModelKind::Multiplicative,
        cs.num_nodes(),
        columns,
        cfg.edge_threshold,
    ))
}

/// Penalised objective minimised by [`infer_multiplicative`]:
/// negative masked log-likelihood plus `lambda * sum |alpha|` over the mask.
/// Infections the baseline cannot produce are left out, as in the solver.
pub fn multiplicative_objective(net: &Network, b: &Baseline, cs: &CascadeSet, lambda: f64) -> Result<f64> {
    net.expect_kind(ModelKind::Multiplicative)?;
    net.expect_nodes(cs.num_nodes())?;
    let mask = build_support(cs);
    let parts = par_map(cs.num_nodes(), |i| {
        let column = MultiplicativeColumn::build(cs, b, &mask, i);
        let x: Vec<f64> = column.parents.iter().map(|&j| net.alpha(j, i)).collect();
        column.value(&x) + lambda * x.iter().map(|a| a.abs()).sum::<f64>()
    });
    Ok(parts.into_iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Influence {
    Positive,
    Negative,
}

impl fmt::Display for Influence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Influence::Positive => "+",
            Influence::Negative => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEdge {
    pub source: usize,
    pub target: usize,
    pub influence: Influence,
    pub alpha: f64,
}

/// Edges with `|alpha| > threshold`, labelled by the sign of their influence.
pub fn extract_signed_edges(net: &Network, threshold: f64) -> Result<Vec<SignedEdge>> {
    net.expect_kind(ModelKind::Multiplicative)?;
    Ok(net
        .edges()
        .into_iter()
        .filter(|&(_, _, a)| a.abs() > threshold)
        .map(|(source, target, alpha)| SignedEdge {
            source,
            target,
            influence: if alpha > 0.0 {
                Influence::Positive
            } else {
                Influence::Negative
            },
            alpha,
        })
        .collect())
}
