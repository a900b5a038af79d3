//! Browser bindings for the interactive demo in `www/`.
//!
//! Each exported function has a plain-Rust counterpart in [`demo`] so the
//! logic can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use netinf::hazard::{additive_cdf, additive_hazard, multiplicative_cdf, multiplicative_hazard};
    use netinf::{
        assign_parameters, derive_seed, evaluate, generate_kronecker, infer_additive, infer_multiplicative,
        simulate_set, AdditiveConfig, Baseline, BaselineKind, Cascade, DistributionSummary, Error, Event,
        HazardModel, KroneckerFamily, KroneckerSpec, MultiplicativeConfig, Network, ParamDistribution,
        Result, Shape, ShapingFunction, SourcePolicy,
    };

    /// Largest network the demo will build, to keep the page responsive.
    pub const MAX_SCALE: u32 = 9;

    /// `name` is a shaping function (`exp`, `pow`, `ray`) or a baseline
    /// (`const`, `linear`, `inverse`). `param` is the power-law cutoff for
    /// `pow`, the log-scale for baselines, and unused otherwise.
    pub fn model(name: &str, param: f64) -> Result<HazardModel> {
        if let Ok(shape) = name.parse::<Shape>() {
            let delta = if shape == Shape::Pow { param } else { 1.0 };
            return Ok(HazardModel::Additive(ShapingFunction::new(shape, delta)?));
        }
        let kind: BaselineKind = name
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("unknown model `{name}`")))?;
        Ok(HazardModel::Multiplicative(Baseline::new(
            kind,
            param,
            netinf::baseline::DEFAULT_INVERSE_EPSILON,
        )?))
    }

    /// Hazard and CDF of one node whose parents were infected at
    /// `parent_times` with strengths `alphas`, sampled at `points` evenly
    /// spaced times in `(0, t_max]`. Returns the hazards followed by the CDF
    /// values. The first parent is infected at time 0.
    pub fn curves(
        model: HazardModel,
        alphas: &[f64],
        parent_times: &[f64],
        t_max: f64,
        points: usize,
    ) -> Result<Vec<f64>> {
        if alphas.len() != parent_times.len() || alphas.is_empty() {
            return Err(Error::InvalidConfig(
                "need one time per parent and at least one parent".into(),
            ));
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        let target = alphas.len();
        let mut events: Vec<Event> = parent_times
            .iter()
            .enumerate()
            .map(|(j, &t)| Event::new(j, t))
            .collect();
        events[0].time = 0.0;
        let history = Cascade::new(events)?;
        let edges = alphas.iter().enumerate().map(|(j, &a)| (j, target, a));
        let net = Network::from_edges(model.kind(), target + 1, edges)?;
        let times = (1..=points).map(|k| t_max * k as f64 / points as f64);
        let mut hazards = Vec::with_capacity(points);
        let mut cdfs = Vec::with_capacity(points);
        for t in times {
            let (h, c) = match model {
                HazardModel::Additive(f) => (
                    additive_hazard(&net, &f, &history, target, t)?,
                    additive_cdf(&net, &f, &history, target, t)?,
                ),
                HazardModel::Multiplicative(b) => (
                    multiplicative_hazard(&net, &b, &history, target, t)?,
                    multiplicative_cdf(&net, &b, &history, target, t)?,
                ),
            };
            hazards.push(h);
            cdfs.push(c);
        }
        hazards.extend(cdfs);
        Ok(hazards)
    }

    /// Random Kronecker network with default parameters for `model`.
    pub fn network(model: HazardModel, family: &str, scale: u32, seed: u64) -> Result<Network> {
        if scale > MAX_SCALE {
            return Err(Error::InvalidConfig(format!(
                "the demo allows scale up to {MAX_SCALE}"
            )));
        }
        let family: KroneckerFamily = family.parse()?;
        let spec = KroneckerSpec::new(family, scale, 4.0, derive_seed(seed, 0));
        let edges = generate_kronecker(&spec)?;
        let dist = ParamDistribution::default_for(model.kind());
        assign_parameters(spec.num_nodes(), &edges, &dist, derive_seed(seed, 1))
    }

    /// `result[s]` is the number of simulated cascades that infected `s`
    /// nodes.
    pub fn size_histogram(
        model: HazardModel,
        family: &str,
        scale: u32,
        cascades: usize,
        window: f64,
        seed: u64,
    ) -> Result<Vec<u32>> {
        let net = network(model, family, scale, seed)?;
        let cs = simulate_set(
            &net,
            model,
            cascades,
            window,
            &SourcePolicy::UniformRandom,
            derive_seed(seed, 2),
        )?;
        let summary = DistributionSummary::from_cascades(&cs);
        Ok(summary.size_counts.iter().map(|&c| c as u32).collect())
    }

    /// Simulates cascades on a random network, fits the model back and
    /// reports the recovery metrics as a JSON object.
    pub fn recover(
        model: HazardModel,
        family: &str,
        scale: u32,
        cascades: usize,
        window: f64,
        seed: u64,
    ) -> Result<String> {
        let truth = network(model, family, scale, seed)?;
        let cs = simulate_set(
            &truth,
            model,
            cascades,
            window,
            &SourcePolicy::UniformRandom,
            derive_seed(seed, 2),
        )?;
        let fit = match model {
            HazardModel::Additive(f) => infer_additive(&cs, &AdditiveConfig::with_shaping(f))?,
            HazardModel::Multiplicative(b) => {
                infer_multiplicative(&cs, &MultiplicativeConfig::with_baseline(b))?
            }
        };
        let report = evaluate(&truth, &fit.network, 1e-4)?;
        let sign = report
            .sign_agreement
            .map_or("null".to_string(), |s| s.to_string());
        let mean_size = cs.cascades().iter().map(|c| c.len()).sum::<usize>() as f64 / cs.len().max(1) as f64;
        Ok(format!(
            "{{\"nodes\":{},\"edge_accuracy\":{},\"mse\":{},\"true_edges\":{},\"inferred_edges\":{},\
             \"sign_agreement\":{sign},\"mean_cascade_size\":{mean_size},\"converged\":{}}}",
            truth.num_nodes(),
            report.edge_accuracy,
            report.mse,
            report.true_edge_count,
            report.inferred_edge_count,
            fit.converged,
        ))
    }
}

fn js(e: netinf::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Hazard values followed by CDF values for one node; see [`demo::curves`].
#[wasm_bindgen]
pub fn curves(
    model: &str,
    param: f64,
    alphas: Vec<f64>,
    parent_times: Vec<f64>,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    demo::curves(
        demo::model(model, param).map_err(js)?,
        &alphas,
        &parent_times,
        t_max,
        points,
    )
    .map_err(js)
}

#[wasm_bindgen(js_name = sizeHistogram)]
pub fn size_histogram(
    model: &str,
    param: f64,
    family: &str,
    scale: u32,
    cascades: usize,
    window: f64,
    seed: u64,
) -> Result<Vec<u32>, JsError> {
    let m = demo::model(model, param).map_err(js)?;
    demo::size_histogram(m, family, scale, cascades, window, seed).map_err(js)
}

#[wasm_bindgen]
pub fn recover(
    model: &str,
    param: f64,
    family: &str,
    scale: u32,
    cascades: usize,
    window: f64,
    seed: u64,
) -> Result<String, JsError> {
    let m = demo::model(model, param).map_err(js)?;
    demo::recover(m, family, scale, cascades, window, seed).map_err(js)
}
