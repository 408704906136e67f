use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hypermagnet::edvw::{degree_edvw, EdvwMatrix};
use hypermagnet::experiment::{
    parse_charge, run_experiment, DataSource, EdvwSource, ExperimentConfig, Method, THREADS_ENV,
};
use hypermagnet::generate::{generate_planted_hypergraph, PlantedConfig};
use hypermagnet::io;
use hypermagnet::magnetic::{magnetic_laplacian, ChargeMatrix, ChargeParams, LaplacianForm};
use hypermagnet::network::{ChargeMode, ModelConfig};
use hypermagnet::spectral::hermitian_eigenvalues;
use hypermagnet::walks::{
    edvw_transition, hitting_times, is_reversible, stationary_distribution, zhou_transition,
    StationaryOptions,
};
use hypermagnet::{Error, Hypergraph, Result};

#[derive(Parser)]
#[command(
    name = "hypermagnet",
    version,
    about = "Hypergraph random walks, magnetic Laplacians and node classification",
    after_help = format!("Set {THREADS_ENV} to limit the number of worker threads used for splits.")
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the magnetic network over random train/test splits.
    Train(TrainArgs),
    /// Train or run a baseline with the same data flags and report schema.
    Baseline {
        /// Baseline to run.
        #[arg(long, value_enum)]
        method: BaselineMethod,
        #[command(flatten)]
        args: TrainArgs,
    },
    /// Build a random walk and print its chain diagnostics.
    Walk(WalkArgs),
    /// Build a magnetic Laplacian and print lambda_max and the smallest eigenvalues.
    Laplacian(LaplacianArgs),
    /// Write a planted-partition hypergraph with features and labels.
    Generate(GenerateArgs),
    /// Run an experiment described by a JSON configuration file.
    Experiment {
        /// ExperimentConfig as JSON.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configuration's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Hgnn,
    HgnnStar,
    Gcn,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum EdvwFlag {
    /// The edvw arrays stored in the hypergraph file.
    File,
    /// Degree-based weights.
    Degree,
    /// Constant weights (the Zhou walk).
    Uniform,
}

impl From<EdvwFlag> for EdvwSource {
    fn from(f: EdvwFlag) -> Self {
        match f {
            EdvwFlag::File => EdvwSource::File,
            EdvwFlag::Degree => EdvwSource::Degree,
            EdvwFlag::Uniform => EdvwSource::Uniform,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Hypergraph in line-JSON format.
    #[arg(long)]
    hypergraph: PathBuf,
    /// Source of the edge-dependent vertex weights.
    #[arg(long, value_enum, default_value = "file")]
    edvw: EdvwFlag,
    /// Features CSV.
    #[arg(long)]
    features: PathBuf,
    /// Labels CSV.
    #[arg(long)]
    labels: PathBuf,
    /// Charge: `q=<float>` for a fixed scalar or `matrix` for a learned matrix.
    #[arg(long, default_value = "matrix")]
    charge: String,
    /// Width of each hidden layer.
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    /// Training epochs per split.
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Number of random train/test splits.
    #[arg(long, default_value_t = 10)]
    splits: usize,
    /// Master seed; each split derives its own streams from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for report.json and history.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Adam learning rate for the weights.
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Adam learning rate for the charge matrix (defaults to --lr).
    #[arg(long)]
    charge_lr: Option<f64>,
    /// L2 penalty on the weight matrices.
    #[arg(long, default_value_t = 0.0005)]
    weight_decay: f64,
    /// Fraction of labeled vertices used for training.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

impl TrainArgs {
    fn config(&self, method: Method) -> Result<ExperimentConfig> {
        let model = ModelConfig {
            hidden: self.hidden,
            epochs: self.epochs,
            learning_rate: self.lr,
            charge_learning_rate: self.charge_lr,
            weight_decay: self.weight_decay,
            charge_mode: parse_charge(&self.charge)?,
            ..Default::default()
        };
        let data = DataSource::Files {
            hypergraph: self.hypergraph.clone(),
            features: self.features.clone(),
            labels: self.labels.clone(),
            edvw: self.edvw.into(),
        };
        let mut cfg = ExperimentConfig::new(data, method, model);
        cfg.n_splits = self.splits;
        cfg.seed = self.seed;
        cfg.train_fraction = self.train_fraction;
        cfg.output_dir = self.out.clone();
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkKindFlag {
    Zhou,
    Edvw,
}

#[derive(Args)]
struct WalkArgs {
    /// Hypergraph in line-JSON format.
    #[arg(long)]
    hypergraph: PathBuf,
    /// Walk to build.
    #[arg(long, value_enum, default_value = "edvw")]
    kind: WalkKindFlag,
    /// Source of the vertex weights for the EDVW walk.
    #[arg(long, value_enum, default_value = "file")]
    edvw: EdvwFlag,
    /// Use the lazy chain (P + I)/2 if the chain is periodic.
    #[arg(long)]
    lazy: bool,
    /// Detailed-balance tolerance for the reversibility verdict.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write P in coordinate format to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormFlag {
    Normalized,
    Unnormalized,
}

#[derive(Args)]
struct LaplacianArgs {
    /// Hypergraph in line-JSON format.
    #[arg(long)]
    hypergraph: PathBuf,
    /// Source of the vertex weights.
    #[arg(long, value_enum, default_value = "file")]
    edvw: EdvwFlag,
    /// Charge: `q=<float>`, or `matrix` together with --charge-file.
    #[arg(long, default_value = "q=0.25")]
    charge: String,
    /// Symmetric charge matrix in real coordinate format.
    #[arg(long)]
    charge_file: Option<PathBuf>,
    /// Laplacian normalization.
    #[arg(long, value_enum, default_value = "normalized")]
    form: FormFlag,
    /// Write the renormalized Laplacian (2/lambda_max) L - I instead of L.
    #[arg(long)]
    renormalized: bool,
    /// Write the matrix in complex coordinate format to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for hypergraph.jsonl, features.csv and labels.csv.
    #[arg(long)]
    out: PathBuf,
    /// Number of vertices.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Number of classes.
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Hyperedges anchored at each class.
    #[arg(long, default_value_t = 800)]
    edges_per_class: usize,
    /// Probability that a member comes from the edge's anchor class.
    #[arg(long, default_value_t = 0.55)]
    p_within: f64,
    /// Probability that a vertex's feature indicator shows a wrong class.
    #[arg(long, default_value_t = 0.4)]
    p_noise: f64,
    /// Strength of the class-dependent vertex weights, in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    direction_signal: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// Rejects a missing input file as bad input rather than an I/O failure.
fn input(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Invalid(format!("{} does not exist", path.display())))
    }
}

fn weights(
    h: &Hypergraph,
    stored: Option<EdvwMatrix>,
    flag: EdvwFlag,
    path: &Path,
) -> Result<EdvwMatrix> {
    Ok(match flag {
        EdvwFlag::File => stored
            .ok_or_else(|| Error::Invalid(format!("{} has no edvw values", path.display())))?
            .normalized(),
        EdvwFlag::Degree => degree_edvw(h)?.normalized(),
        EdvwFlag::Uniform => EdvwMatrix::incidence(h),
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => print_json(&run_experiment(&args.config(Method::Hmn)?)?),
        Command::Baseline { method, args } => {
            let method = match method {
                BaselineMethod::Hgnn => Method::Hgnn,
                BaselineMethod::HgnnStar => Method::HgnnStar,
                BaselineMethod::Gcn => Method::Gcn,
                BaselineMethod::Spectral => Method::Spectral,
            };
            print_json(&run_experiment(&args.config(method)?)?)
        }
        Command::Walk(args) => walk(args),
        Command::Laplacian(args) => laplacian(args),
        Command::Generate(args) => generate(args),
        Command::Experiment { config, out } => {
            let text = std::fs::read_to_string(input(&config)?)?;
            let mut cfg: ExperimentConfig =
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: config.display().to_string(),
                    line: e.line(),
                    msg: e.to_string(),
                })?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            print_json(&run_experiment(&cfg)?)
        }
    }
}

fn walk(args: WalkArgs) -> Result<()> {
    let (h, stored) = io::load_hypergraph(input(&args.hypergraph)?)?;
    let p = match args.kind {
        WalkKindFlag::Zhou => zhou_transition(&h)?,
        WalkKindFlag::Edvw => {
            edvw_transition(&h, &weights(&h, stored, args.edvw, &args.hypergraph)?)?
        }
    };
    if let Some(out) = &args.out {
        io::save_coo(out, p.values())?;
    }
    let opts = StationaryOptions {
        allow_lazy: args.lazy,
        ..Default::default()
    };
    let pi = stationary_distribution(&p, &opts)?;
    let chain = if pi.chain == hypermagnet::walks::ChainUsed::Lazy {
        p.lazy()
    } else {
        p.clone()
    };
    let (reversible, db_residual) = is_reversible(&chain, &pi, args.tol);
    let hits = hitting_times(&chain)?;
    let max_hit = hits.iter().cloned().fold(0.0, f64::max);
    print_json(&json!({
        "n": p.n(),
        "chain": format!("{:?}", pi.chain).to_lowercase(),
        "stationarity_residual": pi.residual,
        "iterations": pi.iterations,
        "reversible": reversible,
        "detailed_balance_residual": db_residual,
        "max_hitting_time": max_hit,
    }))
}

fn laplacian(args: LaplacianArgs) -> Result<()> {
    let (h, stored) = io::load_hypergraph(input(&args.hypergraph)?)?;
    let r = weights(&h, stored, args.edvw, &args.hypergraph)?;
    let p = edvw_transition(&h, &r)?;
    let charge = match parse_charge(&args.charge)? {
        ChargeMode::Scalar(q) => ChargeParams::Scalar(q),
        ChargeMode::Matrix => {
            let path = args
                .charge_file
                .as_ref()
                .ok_or_else(|| Error::Invalid("--charge matrix needs --charge-file".into()))?;
            ChargeParams::Matrix(ChargeMatrix::from_dense(
                &io::load_coo(input(path)?)?,
                p.values(),
            )?)
        }
    };
    let form = match args.form {
        FormFlag::Normalized => LaplacianForm::Normalized,
        FormFlag::Unnormalized => LaplacianForm::Unnormalized,
    };
    let lap = magnetic_laplacian(p.values(), &charge, form, true)?;
    let eig = hermitian_eigenvalues(&lap.laplacian)?;
    if let Some(out) = &args.out {
        let m = if args.renormalized {
            lap.renormalized.as_ref().expect("requested above")
        } else {
            &lap.laplacian
        };
        io::save_complex_coo(out, m)?;
    }
    print_json(&json!({
        "n": lap.n(),
        "lambda_max": lap.lambda_max,
        "smallest_eigenvalues": eig.iter().take(10).collect::<Vec<_>>(),
    }))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let cfg = PlantedConfig {
        n: args.n,
        n_classes: args.classes,
        edges_per_class: args.edges_per_class,
        p_within: args.p_within,
        p_noise: args.p_noise,
        direction_signal: args.direction_signal,
        seed: args.seed,
        ..Default::default()
    };
    let d = generate_planted_hypergraph(&cfg)?;
    std::fs::create_dir_all(&args.out)?;
    let ids = d.hypergraph.vertex_ids();
    let classes: Vec<String> = (0..cfg.n_classes).map(|c| c.to_string()).collect();
    io::save_hypergraph(
        &args.out.join("hypergraph.jsonl"),
        &d.hypergraph,
        Some(&d.edvw),
    )?;
    io::save_features(&args.out.join("features.csv"), ids, &d.features)?;
    io::save_labels(&args.out.join("labels.csv"), ids, &d.labels, &classes)?;
    print_json(&json!({
        "n_vertices": d.hypergraph.n_vertices(),
        "n_edges": d.hypergraph.n_edges(),
        "out": args.out,
    }))
}
