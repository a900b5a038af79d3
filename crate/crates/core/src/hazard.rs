//! Per-node hazard, cumulative hazard, CDF and density given a cascade's
//! history, for both hazard models.

use crate::baseline::Baseline;
use crate::cascade::Cascade;
use crate::error::{Error, Result};
use crate::network::{ModelKind, Network};
use crate::shaping::ShapingFunction;

fn check_inputs(net: &Network, kind: ModelKind, cascade: &Cascade, node: usize) -> Result<()> {
    net.expect_kind(kind)?;
    let n = net.num_nodes();
    if node >= n || cascade.max_node() >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: node.max(cascade.max_node()) + 1,
        });
    }
    Ok(())
}

/// `sum_{j: t_j < t} alpha_ji * gamma(t_j; t)`.
pub fn additive_hazard(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    check_inputs(net, ModelKind::Additive, cascade, node)?;
    Ok(cascade
        .before(t)
        .iter()
        .map(|e| net.alpha(e.node, node) * f.hazard(e.time, t))
        .sum())
}

/// Integral of [`additive_hazard`] over `[0, t]`.
pub fn additive_cumulative_hazard(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    check_inputs(net, ModelKind::Additive, cascade, node)?;
    Ok(cascade
        .before(t)
        .iter()
        .map(|e| net.alpha(e.node, node) * f.cumulative(e.time, t))
        .sum())
}

/// Probability that `node` is infected by `t` given the cascade history.
pub fn additive_cdf(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    let survival: f64 = {
        check_inputs(net, ModelKind::Additive, cascade, node)?;
        cascade
            .before(t)
            .iter()
            .map(|e| (-net.alpha(e.node, node) * f.cumulative(e.time, t)).exp())
            .product()
    };
    Ok(1.0 - survival)
}

/// Infection density of `node` at `t`: hazard times survival.
pub fn additive_density(
    net: &Network,
    f: &ShapingFunction,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    let h = additive_hazard(net, f, cascade, node, t)?;
    let cum = additive_cumulative_hazard(net, f, cascade, node, t)?;
    Ok(h * (-cum).exp())
}

/// Hazard of `node` at `t`: the baseline times `exp(sum of alpha_ki)` over
/// nodes infected strictly before `t`.
pub fn multiplicative_hazard(
    net: &Network,
    b: &Baseline,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    check_inputs(net, ModelKind::Multiplicative, cascade, node)?;
    let exponent: f64 = cascade.before(t).iter().map(|e| net.alpha(e.node, node)).sum();
    Ok(b.rate(t) * exponent.exp())
}

/// Integral of [`multiplicative_hazard`] over `[0, t]`.
///
/// The interval is split at the infection times of other nodes; on each
/// piece `[a, b)` the hazard is the baseline scaled by `exp` of the summed
/// influences of nodes infected by `a`.
pub fn multiplicative_cumulative_hazard(
    net: &Network,
    b: &Baseline,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    check_inputs(net, ModelKind::Multiplicative, cascade, node)?;
    let mut total = 0.0;
    let mut exponent = 0.0f64;
    let mut start = 0.0;
    for e in cascade.before(t).iter().filter(|e| e.node != node) {
        total += exponent.exp() * b.integral(start, e.time);
        exponent += net.alpha(e.node, node);
        start = e.time;
    }
    if t > start {
        total += exponent.exp() * b.integral(start, t);
    }
    Ok(total)
}

pub fn multiplicative_cdf(
    net: &Network,
    b: &Baseline,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    Ok(1.0 - (-multiplicative_cumulative_hazard(net, b, cascade, node, t)?).exp())
}

pub fn multiplicative_density(
    net: &Network,
    b: &Baseline,
    cascade: &Cascade,
    node: usize,
    t: f64,
) -> Result<f64> {
    let h = multiplicative_hazard(net, b, cascade, node, t)?;
    let cum = multiplicative_cumulative_hazard(net, b, cascade, node, t)?;
    Ok(h * (-cum).exp())
}
