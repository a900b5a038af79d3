//! Diffusion network inference from cascades of infection times.
//!
//! A cascade records when each node of a fixed universe got infected by one
//! contagion. Given many cascades observed over a common window, the crate
//! fits the pairwise influence parameters of one of two hazard models:
//!
//! * **additive**: node `i`'s hazard is `sum_j alpha_ji gamma(t_j; t)` over
//!   infected parents `j`, with a shaping function `gamma` (exponential,
//!   power-law or Rayleigh) and `alpha_ji >= 0`;
//! * **multiplicative**: the hazard is `alpha_0(t) exp(sum_k alpha_ki)`, so
//!   parents may raise or lower the risk, fitted with an L1 penalty.
//!
//! Both negative log-likelihoods are convex and separate over target nodes.
//! The [`simulator`] produces ground truth (Kronecker networks and exact
//! cascade sampling) and [`evaluation`] scores recovered networks and
//! compares cascade size/duration distributions.
//!
//! ```
//! use netinf::{
//!     infer_additive, simulate_set, AdditiveConfig, HazardModel, ModelKind, Network,
//!     ShapingFunction, SourcePolicy,
//! };
//!
//! let truth = Network::from_edges(ModelKind::Additive, 2, [(0, 1, 0.8)])?;
//! let model = HazardModel::Additive(ShapingFunction::exp());
//! let cascades = simulate_set(&truth, model, 200, 10.0, &SourcePolicy::Given(vec![0; 200]), 1)?;
//! let fit = infer_additive(&cascades, &AdditiveConfig::default())?;
//! assert!((fit.network.alpha(0, 1) - 0.8).abs() < 0.2);
//! # Ok::<(), netinf::Error>(())
//! ```

pub mod additive;
pub mod baseline;
pub mod cascade;
pub mod error;
pub mod evaluation;
pub mod hazard;
mod inference;
pub mod io;
pub mod multiplicative;
pub mod network;
pub mod shaping;
pub mod simulator;
mod solver;

pub use additive::{
    additive_cascade_loglik, additive_equals_independent_cascade, additive_gradient, additive_set_loglik,
    count_unexplainable_infections, infer_additive, infer_additive_from, AdditiveConfig,
};
pub use baseline::{Baseline, BaselineKind};
pub use cascade::{Cascade, CascadeSet, Event};
pub use error::{Error, Result};
pub use evaluation::{
    edge_accuracy, evaluate, parameter_mse, predict_distributions, sign_agreement, split_cascades,
    DistributionSummary, EvalReport, Prediction,
};
pub use inference::InferenceResult;
pub use multiplicative::{
    build_support, default_lambda, extract_signed_edges, infer_multiplicative, infer_multiplicative_from,
    multiplicative_cascade_loglik, multiplicative_gradient, multiplicative_objective,
    multiplicative_set_loglik, Influence, MultiplicativeConfig, SignedEdge, SupportMask,
};
pub use network::{ModelKind, Network};
pub use shaping::{Shape, ShapingFunction};
pub use simulator::{
    assign_parameters, derive_seed, generate_kronecker, simulate_cascade, simulate_forced, simulate_set,
    simulate_with_uniforms, HazardModel, KroneckerFamily, KroneckerSpec, ParamDistribution, Reinversion,
    SourcePolicy,
};
pub use solver::soft_threshold;
