use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netinf::io::{read_cascades, read_network, write_cascades, write_network};
use netinf::simulator::MAX_KRONECKER_SCALE;
use netinf::{
    assign_parameters, derive_seed, evaluate, generate_kronecker, infer_additive, infer_multiplicative,
    predict_distributions, simulate_set, split_cascades, AdditiveConfig, Baseline, BaselineKind, Error,
    HazardModel, InferenceResult, KroneckerFamily, KroneckerSpec, ModelKind, MultiplicativeConfig, Network,
    ParamDistribution, Shape, ShapingFunction, SourcePolicy,
};

/// Infer diffusion networks from cascades of infection times, and generate,
/// simulate, evaluate and predict cascades.
#[derive(Debug, Parser)]
#[command(name = "netinf", version)]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Maximum number of worker threads (defaults to all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a Kronecker network and random edge parameters.
    Generate(GenerateArgs),
    /// Simulate cascades over a network.
    Simulate(SimulateArgs),
    /// Fit a network to a cascade file.
    Infer(InferArgs),
    /// Compare an inferred network against the true one.
    Evaluate(EvaluateArgs),
    /// Compare held-out cascades with cascades simulated from a model.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    CorePeriphery,
    Hierarchical,
    Random,
}

impl From<Family> for KroneckerFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::CorePeriphery => KroneckerFamily::CorePeriphery,
            Family::Hierarchical => KroneckerFamily::Hierarchical,
            Family::Random => KroneckerFamily::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Additive,
    Multiplicative,
}

impl From<Kind> for ModelKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Additive => ModelKind::Additive,
            Kind::Multiplicative => ModelKind::Multiplicative,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShapeArg {
    Exp,
    Pow,
    Ray,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Const,
    Linear,
    Inverse,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "core-periphery")]
    family: Family,
    /// The network has 2^scale nodes.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_KRONECKER_SCALE as i64))]
    scale: u32,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    #[arg(long, value_enum)]
    model: Kind,
    /// Lower end of the uniform parameter (magnitude) range.
    #[arg(long)]
    lo: Option<f64>,
    /// Upper end of the uniform parameter (magnitude) range.
    #[arg(long)]
    hi: Option<f64>,
    /// Probability that a multiplicative parameter is negative.
    #[arg(long)]
    p_neg: Option<f64>,
    /// Output network file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Time dependence of the hazard. Only the flags matching the network's
/// model kind are used.
#[derive(Debug, Args)]
struct HazardArgs {
    #[arg(long, value_enum, default_value = "exp")]
    shaping: ShapeArg,
    /// Cutoff of the power-law shaping function.
    #[arg(long, default_value_t = netinf::shaping::DEFAULT_POW_DELTA)]
    delta: f64,
    #[arg(long, value_enum, default_value = "const")]
    baseline: BaselineArg,
    /// Log-scale of the multiplicative baseline.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a0: f64,
    /// Start of the inverse baseline.
    #[arg(long, default_value_t = netinf::baseline::DEFAULT_INVERSE_EPSILON)]
    epsilon: f64,
}

impl HazardArgs {
    fn shaping(&self) -> Result<ShapingFunction, Error> {
        let shape = match self.shaping {
            ShapeArg::Exp => Shape::Exp,
            ShapeArg::Pow => Shape::Pow,
            ShapeArg::Ray => Shape::Ray,
        };
        ShapingFunction::new(shape, self.delta)
    }

    fn baseline(&self) -> Result<Baseline, Error> {
        let kind = match self.baseline {
            BaselineArg::Const => BaselineKind::Const,
            BaselineArg::Linear => BaselineKind::Linear,
            BaselineArg::Inverse => BaselineKind::Inverse,
        };
        Baseline::new(kind, self.a0, self.epsilon)
    }

    fn model(&self, kind: ModelKind) -> Result<HazardModel, Error> {
        Ok(match kind {
            ModelKind::Additive => HazardModel::Additive(self.shaping()?),
            ModelKind::Multiplicative => HazardModel::Multiplicative(self.baseline()?),
        })
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    cascades: usize,
    /// Observation window.
    #[arg(long, default_value_t = 4.0)]
    window: f64,
    #[command(flatten)]
    hazard: HazardArgs,
    /// Output cascade file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// L1 penalty for the multiplicative model (default 0.01 * cascades / nodes).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Relative objective change at which a node's fit stops.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Minimum magnitude for an entry to count as an edge.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long, value_enum)]
    model: Kind,
    #[arg(long)]
    cascades: PathBuf,
    #[command(flatten)]
    hazard: HazardArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output network file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV of the total objective after every iteration.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    inferred: PathBuf,
    /// Minimum magnitude for an entry to count as an edge.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Output metrics CSV (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// All cascades; a random fraction is held out as the test set.
    #[arg(long)]
    cascades: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Use this network instead of fitting one to the training cascades.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Model to fit when no network is given.
    #[arg(long, value_enum, default_value = "additive")]
    model: Kind,
    #[command(flatten)]
    hazard: HazardArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory for the CSVs and cascade files.
    #[arg(long)]
    out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::ScaleOverflow { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn provenance(cli: &Cli) -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("netinf {} seed={}", args.join(" "), cli.seed)
}

fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv(header: &str, note: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("# {note}\n{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn generate(args: &GenerateArgs, seed: u64, note: &str) -> CmdResult {
    let spec = KroneckerSpec::new(
        args.family.into(),
        args.scale,
        args.avg_degree,
        derive_seed(seed, 0),
    );
    let edges = generate_kronecker(&spec)?;
    let kind = ModelKind::from(args.model);
    let dist = match (ParamDistribution::default_for(kind), args.p_neg) {
        (ParamDistribution::Additive { lo, hi }, None) => ParamDistribution::Additive {
            lo: args.lo.unwrap_or(lo),
            hi: args.hi.unwrap_or(hi),
        },
        (ParamDistribution::Additive { .. }, Some(_)) => {
            return Err(Failure::Usage(
                "--p-neg only applies to multiplicative networks".into(),
            ))
        }
        (ParamDistribution::Multiplicative { lo, hi, p_neg }, p) => ParamDistribution::Multiplicative {
            lo: args.lo.unwrap_or(lo),
            hi: args.hi.unwrap_or(hi),
            p_neg: p.unwrap_or(p_neg),
        },
    };
    let net = assign_parameters(spec.num_nodes(), &edges, &dist, derive_seed(seed, 1))?;
    emit(
        args.output.as_deref(),
        &netinf::io::format_network(&net, &[note.to_string()]),
    )
}

fn simulate(args: &SimulateArgs, seed: u64, note: &str) -> CmdResult {
    let net = read_network(&args.network)?;
    let model = args.hazard.model(net.kind())?;
    let cs = simulate_set(
        &net,
        model,
        args.cascades,
        args.window,
        &SourcePolicy::UniformRandom,
        seed,
    )?;
    emit(
        args.output.as_deref(),
        &netinf::io::format_cascades(&cs, &[note.to_string()]),
    )
}

fn fit(
    kind: ModelKind,
    cs: &netinf::CascadeSet,
    hazard: &HazardArgs,
    solver: &SolverArgs,
) -> Result<InferenceResult, Failure> {
    Ok(match kind {
        ModelKind::Additive => {
            if solver.lambda.is_some() {
                return Err(Failure::Usage(
                    "--lambda only applies to the multiplicative model".into(),
                ));
            }
            let cfg = AdditiveConfig {
                max_iters: solver.max_iters,
                tol: solver.tol,
                edge_threshold: solver.threshold,
                ..AdditiveConfig::with_shaping(hazard.shaping()?)
            };
            infer_additive(cs, &cfg)?
        }
        ModelKind::Multiplicative => {
            let cfg = MultiplicativeConfig {
                lambda: solver.lambda,
                max_iters: solver.max_iters,
                tol: solver.tol,
                edge_threshold: solver.threshold,
                ..MultiplicativeConfig::with_baseline(hazard.baseline()?)
            };
            infer_multiplicative(cs, &cfg)?
        }
    })
}

/// Inferred entries below the edge threshold are written as 0.
fn thresholded(result: &InferenceResult) -> Result<Network, Error> {
    Network::from_edges(result.network.kind(), result.network.num_nodes(), result.edges())
}

fn infer(args: &InferArgs, note: &str) -> CmdResult {
    let cs = read_cascades(&args.cascades)?;
    let result = fit(args.model.into(), &cs, &args.hazard, &args.solver)?;
    if !result.converged {
        eprintln!(
            "warning: some nodes hit --max-iters ({}) before converging",
            args.solver.max_iters
        );
    }
    if let Some(path) = &args.trace {
        let rows = result
            .objective_trace
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{k},{v}"));
        emit(Some(path), &csv("iteration,objective", note, rows))?;
    }
    let net = thresholded(&result)?;
    emit(
        args.output.as_deref(),
        &netinf::io::format_network(&net, &[note.to_string()]),
    )
}

fn evaluate_cmd(args: &EvaluateArgs, note: &str) -> CmdResult {
    let truth = read_network(&args.truth)?;
    let inferred = read_network(&args.inferred)?;
    if truth.kind() != inferred.kind() {
        return Err(Failure::Runtime(format!(
            "cannot compare a {} network with a {} network",
            truth.kind(),
            inferred.kind()
        )));
    }
    let report = evaluate(&truth, &inferred, args.threshold)?;
    let sign = report.sign_agreement.map_or(String::new(), |s| s.to_string());
    let rows = [
        format!("edge_accuracy,{}", report.edge_accuracy),
        format!("mse,{}", report.mse),
        format!("true_edges,{}", report.true_edge_count),
        format!("inferred_edges,{}", report.inferred_edge_count),
        format!("sign_agreement,{sign}"),
    ];
    emit(args.output.as_deref(), &csv("metric,value", note, rows))
}

fn predict(args: &PredictArgs, seed: u64, note: &str) -> CmdResult {
    let cs = read_cascades(&args.cascades)?;
    let (train, test) = split_cascades(&cs, args.test_fraction, derive_seed(seed, 0))?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.out_dir.display())))?;
    let out = |name: &str| args.out_dir.join(name);
    let comments = [note.to_string()];

    let net = match &args.network {
        Some(path) => read_network(path)?,
        None => {
            if train.is_empty() {
                return Err(Failure::Runtime("the training split is empty".into()));
            }
            let net = thresholded(&fit(args.model.into(), &train, &args.hazard, &args.solver)?)?;
            write_network(out("trained.txt"), &net, &comments)?;
            net
        }
    };
    let model = args.hazard.model(net.kind())?;
    let prediction = predict_distributions(&net, model, &test, derive_seed(seed, 1))?;
    write_cascades(out("test.txt"), &test, &comments)?;
    write_cascades(out("simulated.txt"), &prediction.simulated, &comments)?;

    let (t, s) = (&prediction.test_summary, &prediction.simulated_summary);
    let max_size = t.size_counts.len().max(s.size_counts.len());
    let count = |v: &[usize], k: usize| v.get(k).copied().unwrap_or(0);
    let rows =
        (1..max_size).map(|k| format!("{k},{},{}", count(&t.size_counts, k), count(&s.size_counts, k)));
    emit(
        Some(&out("sizes.csv")),
        &csv("size,test_count,simulated_count", note, rows),
    )?;

    let edges = &t.duration_edges;
    let rows = (0..edges.len()).map(|k| {
        let lo = if k == 0 { 0.0 } else { edges[k - 1] };
        format!(
            "{lo},{},{},{}",
            edges[k], t.duration_counts[k], s.duration_counts[k]
        )
    });
    emit(
        Some(&out("durations.csv")),
        &csv("bin_lo,bin_hi,test_count,simulated_count", note, rows),
    )?;

    let mut summary = String::new();
    let _ = writeln!(summary, "test_cascades,{}", t.count);
    let _ = writeln!(summary, "size_ks,{}", prediction.size_ks);
    let _ = write!(summary, "duration_ks,{}", prediction.duration_ks);
    emit(
        Some(&out("summary.csv")),
        &csv("metric,value", note, summary.lines().map(String::from)),
    )
}

fn run(cli: &Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let note = provenance(cli);
    match &cli.command {
        Command::Generate(a) => generate(a, cli.seed, &note),
        Command::Simulate(a) => simulate(a, cli.seed, &note),
        Command::Infer(a) => infer(a, &note),
        Command::Evaluate(a) => evaluate_cmd(a, &note),
        Command::Predict(a) => predict(a, cli.seed, &note),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
