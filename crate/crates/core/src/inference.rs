use ndarray::Array2;

use crate::network::{ModelKind, Network};
use crate::solver::ColumnSolution;

/// Fitted network with solver diagnostics.
#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub network: Network,
    /// Total objective (negative log-likelihood, plus the L1 penalty when one
    /// is used) after every iteration. Index 0 is the starting point. Columns
    /// that converge early keep contributing their final value.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// Largest iteration count over the per-node subproblems.
    pub iterations: usize,
    /// Minimum magnitude for an entry to count as an edge.
    pub edge_threshold: f64,
}

impl InferenceResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace starts with the initial objective")
    }

    /// Entries with `|alpha| > edge_threshold` as `(j, i, alpha)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.network
            .edges()
            .into_iter()
            .filter(|&(_, _, a)| a.abs() > self.edge_threshold)
            .collect()
    }
}

/// Solution of one target node's subproblem: its parents' global ids and
/// their fitted values.
pub(crate) struct ColumnFit {
    pub target: usize,
    pub parents: Vec<usize>,
    pub solution: ColumnSolution,
}

pub(crate) fn assemble(
    kind: ModelKind,
    num_nodes: usize,
    columns: Vec<ColumnFit>,
    edge_threshold: f64,
) -> InferenceResult {
    let mut params = Array2::zeros((num_nodes, num_nodes));
    let len = columns.iter().map(|c| c.solution.trace.len()).max().unwrap_or(1);
    let mut trace = vec![0.0; len];
    let mut converged = true;
    let mut iterations = 0;
    for col in &columns {
        for (&j, &a) in col.parents.iter().zip(&col.solution.x) {
            params[[j, col.target]] = a;
        }
        let t = &col.solution.trace;
        for (k, slot) in trace.iter_mut().enumerate() {
            *slot += t[k.min(t.len() - 1)];
        }
        converged &= col.solution.converged;
        iterations = iterations.max(col.solution.iterations);
    }
    let network = Network::new(kind, params).expect("solver keeps parameters feasible");
    InferenceResult {
        network,
        objective_trace: trace,
        converged,
        iterations,
        edge_threshold,
    }
}

/// Evaluates `f` for every index in `0..len`, in parallel when the
/// `parallel` feature is on. Output order follows the indices, so results do
/// not depend on the number of workers.
pub(crate) fn par_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}
