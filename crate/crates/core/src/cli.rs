//! Command-line front end: `train`, `predict`, `gridsearch`, `bench`, `corrupt`.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{load_csv, Dataset};
use crate::error::{Error, Result};
use crate::eval::{
    grid_search, inject_noise_within, metrics, run_benchmark, write_grid_table, BenchConfig, FeatureBounds, Grid, KernelMode,
    OneClassTask, SearchSpec, SplitPlan,
};
use crate::graph::DEFAULT_GRAPH_K;
use crate::model::GessvddModel;
use crate::trainer::{predict, train, Hyperparams, Kernel, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gessvdd", version, about = "Graph-embedded subspace SVDD for one-class classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on the samples of one class.
    Train(TrainArgs),
    /// Classify samples with a saved model.
    Predict(PredictArgs),
    /// Cross-validated hyperparameter search on a whole file.
    Gridsearch(SearchArgs),
    /// Repeated split / search / test protocol with a CSV report.
    Bench(SearchArgs),
    /// Add clamped Gaussian noise to a dataset.
    Corrupt(CorruptArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelFlag {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Args)]
pub struct VariantArgs {
    /// graph-update-direction, e.g. knn-gr-min.
    #[arg(long, default_value = "knn-gr-min")]
    pub variant: String,
    /// Replace the variant's graph (0/zero, i/identity, pca, sw, sb, knn).
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long, value_enum, default_value = "linear")]
    pub kernel: KernelFlag,
    /// Cluster count for the sw and sb graphs.
    #[arg(long, default_value_t = DEFAULT_GRAPH_K)]
    pub clusters: usize,
    /// Neighbor count for the knn graph.
    #[arg(long, default_value_t = DEFAULT_GRAPH_K)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl VariantArgs {
    pub fn variant(&self) -> Result<Variant> {
        let mut v = Variant::parse_with(&self.variant, self.clusters, self.neighbors)?;
        if let Some(g) = &self.graph {
            let token = match g.to_ascii_lowercase().as_str() {
                "zero" => "0".to_owned(),
                "identity" => "i".to_owned(),
                other => other.to_owned(),
            };
            v.graph = Variant::parse_with(&format!("{token}-gr-min"), self.clusters, self.neighbors)?.graph;
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the model document.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "positive-class")]
    pub positive_class: String,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "C", default_value_t = 0.5)]
    pub c: f64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Prediction CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report metrics against this class when given.
    #[arg(long = "positive-class")]
    pub positive_class: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Target class; every class in turn when absent (bench only).
    #[arg(long = "positive-class")]
    pub positive_class: Option<String>,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Pin sigma instead of sweeping it.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    /// Output CSV (search table or report).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CorruptArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Class whose ranges bound the corrupted values.
    #[arg(long = "positive-class")]
    pub positive_class: String,
    /// Take the bounding ranges from this file instead of `--data`.
    #[arg(long = "bounds-from")]
    pub bounds_from: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit status for an error: 2 configuration, 3 data, 4 numeric.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numeric() {
        return EXIT_NUMERIC;
    }
    match err {
        Error::InvalidParameter(_) | Error::InfeasibleC { .. } => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stage = cli.command.name();
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("gessvdd {stage}: {e}");
            exit_code(&e)
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Gridsearch(_) => "gridsearch",
            Command::Bench(_) => "bench",
            Command::Corrupt(_) => "corrupt",
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Gridsearch(a) => cmd_gridsearch(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Corrupt(a) => cmd_corrupt(a),
    }
}

fn kernel_for(flag: KernelFlag, sigma: Option<f64>) -> Result<Kernel> {
    match (flag, sigma) {
        (KernelFlag::Linear, _) => Ok(Kernel::Linear),
        (KernelFlag::Rbf, Some(sigma)) => Ok(Kernel::Rbf { sigma }),
        (KernelFlag::Rbf, None) => Err(Error::InvalidParameter("--kernel rbf needs --sigma".into())),
    }
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let data = load_csv(&a.data)?;
    let task = OneClassTask::new(data, &a.positive_class)?;
    let mut params = Hyperparams::new(a.variant.variant()?);
    params.c = a.c;
    params.d = a.d;
    params.eta = a.eta;
    params.iterations = a.iterations;
    params.kernel = kernel_for(a.variant.kernel, a.sigma)?;
    params.seed = a.variant.seed;
    let members = task.data.members(task.positive_class);
    let model = train(&task.data.columns(&members), &params)?;
    model.save(&a.model)?;
    for w in &model.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "trained {} on {} samples of {:?}: d = {}, R = {:.6}, objective = {:.6}",
        params.variant(),
        members.len(),
        task.positive_name(),
        model.subspace_dim(),
        model.sphere.radius,
        model.diagnostics.final_objective
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let data = load_csv(&a.data)?;
    let model = GessvddModel::load(&a.model)?;
    let decisions = predict(&model, &data.features)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p).map_err(|e| Error::io(p, e))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["row", "label", "prediction", "score"])?;
    for (i, d) in decisions.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            data.class_names[data.labels[i]].clone(),
            if d.positive { "positive" } else { "negative" }.to_owned(),
            d.score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<predictions>", e))?;
    if let Some(positive) = &a.positive_class {
        let task = OneClassTask::new(data, positive)?;
        let all: Vec<usize> = (0..task.data.len()).collect();
        let predicted: Vec<bool> = decisions.iter().map(|d| d.positive).collect();
        let m = metrics(&predicted, &task.truth(&all))?;
        eprintln!(
            "TPR {:.4} TNR {:.4} FPR {:.4} FNR {:.4} Gmean {:.4}",
            m.tpr, m.tnr, m.fpr, m.fnr, m.gmean
        );
    }
    Ok(())
}

fn search_spec(a: &SearchArgs) -> Result<(SearchSpec, KernelMode)> {
    let kernel = match a.variant.kernel {
        KernelFlag::Linear => KernelMode::Linear,
        KernelFlag::Rbf => KernelMode::Rbf,
    };
    let mut grid = Grid::standard();
    grid.iterations = a.iterations;
    if let Some(c) = a.c {
        grid.c = vec![c];
    }
    if let Some(d) = a.d {
        grid.d = vec![d];
    }
    if let Some(eta) = a.eta {
        grid.eta = vec![eta];
    }
    if let Some(sigma) = a.sigma {
        grid.sigma = vec![sigma];
    }
    let spec = SearchSpec { variant: a.variant.variant()?, kernel, grid, seed: a.variant.seed };
    Ok((spec, kernel))
}

fn cmd_gridsearch(a: &SearchArgs) -> Result<()> {
    let data = load_csv(&a.data)?;
    let positive = a
        .positive_class
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("gridsearch needs --positive-class".into()))?;
    let task = OneClassTask::new(data, positive)?;
    let (spec, _) = search_spec(a)?;
    let plan = SplitPlan { seed: a.variant.seed, ..SplitPlan::default() };
    let all: Vec<usize> = (0..task.data.len()).collect();
    let result = grid_search(&task, &all, &plan, plan.seed, &spec)?;
    let file = File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_grid_table(&result, file)?;
    println!("best {} with CV Gmean {:.4}", result.best, result.best_score);
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Vec<String>,
    data: String,
    samples: usize,
    features: usize,
    classes: &'a [String],
    variant: String,
    kernel: String,
    graph: crate::graph::LaplacianSpec,
    grid: &'a Grid,
    plan: &'a SplitPlan,
    split_seeds: &'a [u64],
    training_seed: u64,
    report: String,
    average_gmean: f64,
}

/// Path of the manifest written next to a report.
pub fn manifest_path(report: &Path) -> PathBuf {
    let mut name = report.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    report.with_file_name(name)
}

fn cmd_bench(a: &SearchArgs) -> Result<()> {
    let data = load_csv(&a.data)?;
    let (search, kernel) = search_spec(a)?;
    let plan = SplitPlan { seed: a.variant.seed, ..SplitPlan::default() };
    if let Some(p) = &a.positive_class {
        if data.class_index(p).is_none() {
            return Err(Error::InvalidParameter(format!("class {p:?} not found")));
        }
    }
    let config = BenchConfig { search, plan, targets: a.positive_class.clone().map(|p| vec![p]) };
    let report = run_benchmark(&data, &config)?;
    report.write_csv(&a.out)?;
    for w in &report.warnings {
        if !w.contains("skipped") {
            eprintln!("warning: {w}");
        }
    }
    let manifest = Manifest {
        tool: "gessvdd",
        version: env!("CARGO_PKG_VERSION"),
        command: std::env::args().collect(),
        data: a.data.display().to_string(),
        samples: data.len(),
        features: data.dim(),
        classes: &data.class_names,
        variant: config.search.variant.to_string(),
        kernel: kernel.to_string(),
        graph: config.search.variant.graph,
        grid: &config.search.grid,
        plan: &config.plan,
        split_seeds: &report.split_seeds,
        training_seed: config.search.seed,
        report: a.out.display().to_string(),
        average_gmean: report.average_gmean(),
    };
    let mpath = manifest_path(&a.out);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Model(e.to_string()))?;
    std::fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))?;
    for agg in &report.aggregates {
        let (m, s) = agg.summary.gmean;
        println!("{:<16} {} {kernel} Gmean {m:.4} +- {s:.4}", agg.target_class, agg.variant);
    }
    println!("average Gmean {:.4}", report.average_gmean());
    Ok(())
}

fn cmd_corrupt(a: &CorruptArgs) -> Result<()> {
    let data = load_csv(&a.data)?;
    let bounds_source: Dataset = match &a.bounds_from {
        Some(p) => load_csv(p)?,
        None => data.clone(),
    };
    if bounds_source.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            context: "bounds file",
            expected: data.dim(),
            found: bounds_source.dim(),
        });
    }
    let class = bounds_source
        .class_index(&a.positive_class)
        .ok_or_else(|| Error::InvalidParameter(format!("class {:?} not found", a.positive_class)))?;
    let bounds = FeatureBounds::of_columns(&bounds_source.columns(&bounds_source.members(class)))?;
    let corrupted = inject_noise_within(&data, &bounds, a.seed)?;
    corrupted.write_csv(&a.out)?;
    println!("wrote {} corrupted samples to {}", corrupted.len(), a.out.display());
    Ok(())
}
