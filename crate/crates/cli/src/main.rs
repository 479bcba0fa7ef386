//! `strconf`: the structural confidence pipeline from the command line.
//!
//! Exit codes are 0 on success, 1 for invalid input or arguments and 2 when
//! a computation fails.

mod settings;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use structural_confidence::bench::run_bench;
use structural_confidence::descriptors::{FeatureVariant, GranularityConfig, Mode};
use structural_confidence::estimator::{fit_pca, train, ConfidenceModel, PcaProjector, TrainConfig};
use structural_confidence::metrics::{EvalReport, DEFAULT_ECE_BINS};
use structural_confidence::table::{join_scores, read_scores, write_scores, FeatureTable};
use structural_confidence::trajectory::format::{read_with_header, MAGIC};
use structural_confidence::trajectory::{Label, Trajectory, MAX_TOKENS};
use structural_confidence::{Error, ErrorKind, Result};

use settings::Settings;

#[derive(Parser)]
#[command(name = "strconf", version, about = "Structural confidence from hidden-state trajectories")]
struct Cli {
    /// Flat `key = value` file; keys are long flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check STRJ, feature, model or projector files and summarize them.
    Validate(ValidateArgs),
    /// Extract one descriptor row per trajectory into a feature CSV.
    Features(FeaturesArgs),
    /// Fit a boosted-tree confidence model on a labeled feature CSV.
    Train(TrainArgs),
    /// Score a feature CSV with a trained model.
    Predict(PredictArgs),
    /// Join scores to labels by id and report AUROC, AUPR, Brier and ECE.
    Eval(EvalArgs),
    /// Time I/O, descriptor extraction and inference separately.
    Bench(BenchArgs),
    /// Fit or apply a PCA projection to feature columns.
    Pca(PcaArgs),
}

#[derive(Args, Default)]
struct GranularityArgs {
    /// global, local or two_scale.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    projector: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Semantic variants append the embedding columns s0.. to the descriptor.
    #[arg(long)]
    variant: Option<FeatureVariant>,
    #[command(flatten)]
    granularity: GranularityArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Columns the trees may split on; every column when omitted.
    #[arg(long)]
    variant: Option<FeatureVariant>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_leaves: Option<usize>,
    #[arg(long)]
    min_samples_leaf: Option<usize>,
    #[arg(long)]
    l2_leaf: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// `id,score` CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// STRJ file or CSV whose first two columns are id,label.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    /// Write the key-value report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write a variant,dataset,auroc,aupr,brier,ece CSV here.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    variant: Option<FeatureVariant>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Include inference with this model; it must take the 70 descriptor columns.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    granularity: GranularityArgs,
}

#[derive(Args)]
struct PcaArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    /// Projected CSV with columns pc0..pc{k-1}.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Columns to project; every column when omitted.
    #[arg(long)]
    variant: Option<FeatureVariant>,
    /// Fit this many components.
    #[arg(long)]
    pca_k: Option<usize>,
    /// Where to save a fitted projector.
    #[arg(long)]
    projector_out: Option<PathBuf>,
    /// Apply a saved projector instead of fitting.
    #[arg(long, conflicts_with_all = ["pca_k", "projector_out"])]
    projector: Option<PathBuf>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Computation(msg) => Error::Computation(format!("{}: {msg}", path.display())),
        Error::SingleClass => Error::SingleClass,
        other => Error::InvalidArgument(format!("{}: {other}", path.display())),
    })
}

fn read_strj(path: &Path) -> Result<(structural_confidence::trajectory::format::Header, Vec<Trajectory>)> {
    with_path(path, read_with_header(open(path)?).map_err(Error::from))
}

fn read_table(path: &Path) -> Result<FeatureTable> {
    with_path(path, FeatureTable::read_csv(open(path)?))
}

fn read_model(path: &Path) -> Result<ConfidenceModel> {
    with_path(path, ConfidenceModel::read_from(open(path)?))
}

fn read_projector(path: &Path) -> Result<PcaProjector> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    with_path(path, PcaProjector::from_json(&text))
}

fn granularity(s: &Settings, args: GranularityArgs) -> Result<GranularityConfig> {
    let base = GranularityConfig::default();
    let cfg = GranularityConfig {
        mode: s.or(args.mode, "mode", base.mode)?,
        window: s.or(args.window, "window", base.window)?,
        stride: s.or(args.stride, "stride", base.stride)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Column indices for `variant`, or every column.
fn columns(table: &FeatureTable, variant: Option<FeatureVariant>) -> Result<Vec<usize>> {
    match variant {
        Some(v) => table.variant_columns(v),
        None => Ok((0..table.columns.len()).collect()),
    }
}

fn validate(s: &Settings, args: ValidateArgs, out: &mut dyn Write) -> Result<()> {
    let input = s.optional(args.input, "input")?;
    let features = s.optional(args.features, "features")?;
    let model = s.optional(args.model, "model")?;
    let projector = s.optional(args.projector, "projector")?;
    if input.is_none() && features.is_none() && model.is_none() && projector.is_none() {
        return Err(Error::InvalidArgument(
            "nothing to validate: give --input, --features, --model or --projector".into(),
        ));
    }
    if let Some(path) = input {
        let (header, records) = read_strj(&path)?;
        let lengths = records.iter().map(Trajectory::len);
        let min = lengths.clone().min().unwrap_or(0);
        let max = lengths.max().unwrap_or(0);
        let labeled = records.iter().filter(|r| r.label != Label::Unknown).count();
        writeln!(out, "input = {}", path.display())?;
        writeln!(out, "records = {}", header.record_count)?;
        writeln!(out, "hidden_dim = {}", header.hidden_dim)?;
        writeln!(out, "semantic_dim = {}", header.semantic_dim)?;
        writeln!(out, "flags = {:#04b}", header.flags.bits())?;
        writeln!(out, "labeled = {labeled}")?;
        writeln!(out, "min_tokens = {min}")?;
        writeln!(out, "max_tokens = {max}")?;
        writeln!(out, "truncated = {}", records.iter().filter(|r| r.len() > MAX_TOKENS).count())?;
    }
    if let Some(path) = features {
        let table = read_table(&path)?;
        writeln!(out, "features = {}", path.display())?;
        writeln!(out, "rows = {}", table.len())?;
        writeln!(out, "columns = {}", table.columns.len())?;
    }
    if let Some(path) = model {
        let m = read_model(&path)?;
        writeln!(out, "model = {}", path.display())?;
        writeln!(out, "n_features = {}", m.n_features)?;
        writeln!(out, "trees = {}", m.trees.len())?;
        writeln!(out, "max_depth = {}", m.max_depth())?;
    }
    if let Some(path) = projector {
        let p = read_projector(&path)?;
        writeln!(out, "projector = {}", path.display())?;
        writeln!(out, "pca_k = {}", p.k)?;
        writeln!(out, "n_features = {}", p.n_features())?;
    }
    Ok(())
}

fn features(s: &Settings, args: FeaturesArgs) -> Result<()> {
    let input = s.path(args.input, "input")?;
    let output = s.path(args.output, "output")?;
    let variant = s.or(args.variant, "variant", FeatureVariant::StructOnly)?;
    let cfg = granularity(s, args.granularity)?;
    let (header, records) = read_strj(&input)?;
    if variant.needs_semantic() && !header.flags.semantic() {
        return Err(Error::InvalidArgument(format!(
            "variant {variant} needs semantic embeddings, but {} does not set flags bit1",
            input.display()
        )));
    }
    let table = with_path(&input, FeatureTable::from_trajectories(&records, &cfg, variant.needs_semantic()))?;
    let mut sink = create(&output)?;
    table.write_csv(&mut sink)?;
    sink.flush()?;
    Ok(())
}

fn train_cmd(s: &Settings, args: TrainArgs) -> Result<()> {
    let path = s.path(args.features, "features")?;
    let model_path = s.path(args.model, "model")?;
    let variant = s.optional(args.variant, "variant")?;
    let base = TrainConfig::default();
    let table = read_table(&path)?;
    let subset = match variant {
        Some(_) => Some(columns(&table, variant)?),
        None => None,
    };
    let cfg = TrainConfig {
        n_trees: s.or(args.n_trees, "n_trees", base.n_trees)?,
        learning_rate: s.or(args.learning_rate, "learning_rate", base.learning_rate)?,
        max_leaves: s.or(args.max_leaves, "max_leaves", base.max_leaves)?,
        min_samples_leaf: s.or(args.min_samples_leaf, "min_samples_leaf", base.min_samples_leaf)?,
        l2_leaf: s.or(args.l2_leaf, "l2_leaf", base.l2_leaf)?,
        seed: s.or(args.seed, "seed", base.seed)?,
        feature_subset: subset,
    };
    let labels = with_path(&path, table.binary_labels())?;
    let model = train(&table.values, &labels, &cfg)?;
    let mut sink = create(&model_path)?;
    model.write_to(&mut sink)?;
    sink.flush()?;
    Ok(())
}

fn predict(s: &Settings, args: PredictArgs) -> Result<()> {
    let path = s.path(args.features, "features")?;
    let model = read_model(&s.path(args.model, "model")?)?;
    let output = s.path(args.output, "output")?;
    let table = read_table(&path)?;
    if table.columns.len() != model.n_features {
        return Err(Error::InvalidArgument(format!(
            "{}: {} feature columns, model expects {}",
            path.display(),
            table.columns.len(),
            model.n_features
        )));
    }
    let scores = model.predict_batch(table.values.iter_rows())?;
    let mut sink = create(&output)?;
    write_scores(&table.ids, &scores, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn read_labels(path: &Path) -> Result<Vec<(String, Label)>> {
    let mut magic = [0u8; 4];
    let is_strj = open(path)?.read_exact(&mut magic).is_ok() && magic == MAGIC;
    if is_strj {
        let (_, records) = read_strj(path)?;
        Ok(records.into_iter().map(|r| (r.id, r.label)).collect())
    } else {
        let table = read_table(path)?;
        Ok(table.ids.into_iter().zip(table.labels).collect())
    }
}

fn eval(s: &Settings, args: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let scores_path = s.path(args.scores, "scores")?;
    let labels_path = s.path(args.labels, "labels")?;
    let bins = s.or(args.bins, "bins", DEFAULT_ECE_BINS)?;
    let scores = with_path(&scores_path, read_scores(open(&scores_path)?))?;
    let labels = read_labels(&labels_path)?;
    let (scores, labels) = join_scores(&scores, &labels)?;
    let report = EvalReport::compute(&scores, &labels, bins)?;

    match s.optional(args.report, "report")? {
        Some(path) => {
            let mut sink = create(&path)?;
            writeln!(sink, "{report}")?;
            sink.flush()?;
        }
        None => writeln!(out, "{report}")?,
    }
    if let Some(path) = s.optional(args.export, "export")? {
        let variant = s.or(args.variant, "variant", FeatureVariant::StructOnly)?;
        let dataset = match s.optional(args.dataset, "dataset")? {
            Some(d) => d,
            None => labels_path.file_stem().map_or_else(String::new, |d| d.to_string_lossy().into_owned()),
        };
        let mut sink = create(&path)?;
        writeln!(sink, "{}", EvalReport::CSV_HEADER)?;
        writeln!(sink, "{}", report.csv_row(&variant.to_string(), &dataset))?;
        sink.flush()?;
    }
    Ok(())
}

fn bench(s: &Settings, args: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let input = s.path(args.input, "input")?;
    let model = match s.optional(args.model, "model")? {
        Some(path) => Some(read_model(&path)?),
        None => None,
    };
    let reps = s.or(args.reps, "reps", 5)?;
    let cfg = granularity(s, args.granularity)?;
    let report = run_bench(|| Ok(read_strj(&input)?.1), model.as_ref(), &cfg, reps)?;
    writeln!(out, "{report}")?;
    Ok(())
}

fn pca(s: &Settings, args: PcaArgs) -> Result<()> {
    let path = s.path(args.features, "features")?;
    let output = s.path(args.output, "output")?;
    let variant = s.optional(args.variant, "variant")?;
    let table = read_table(&path)?;
    let selected = table.values.select_columns(&columns(&table, variant)?)?;

    let projector = match s.optional(args.projector, "projector")? {
        Some(p) => read_projector(&p)?,
        None => {
            let k = s.required(args.pca_k, "pca_k")?;
            let projector = fit_pca(&selected, k)?;
            if let Some(p) = s.optional(args.projector_out, "projector_out")? {
                let mut sink = create(&p)?;
                sink.write_all(projector.to_json().as_bytes())?;
                sink.flush()?;
            }
            projector
        }
    };
    let projected = FeatureTable {
        ids: table.ids,
        labels: table.labels,
        columns: (0..projector.k).map(|i| format!("pc{i}")).collect(),
        values: projector.project_matrix(&selected)?,
    };
    let mut sink = create(&output)?;
    projected.write_csv(&mut sink)?;
    sink.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Validate(args) => validate(&settings, args, &mut out),
        Command::Features(args) => features(&settings, args),
        Command::Train(args) => train_cmd(&settings, args),
        Command::Predict(args) => predict(&settings, args),
        Command::Eval(args) => eval(&settings, args, &mut out),
        Command::Bench(args) => bench(&settings, args, &mut out),
        Command::Pca(args) => pca(&settings, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strconf: {e}");
            match e.kind() {
                ErrorKind::Validation => ExitCode::from(1),
                ErrorKind::Computation => ExitCode::from(2),
            }
        }
    }
}
