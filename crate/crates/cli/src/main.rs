//! `imbalance-forge`: end-to-end CLI for the imbalanced-classification
//! toolkit. Every randomized step takes `--seed`; identical invocations
//! produce identical outputs. All artifacts land under `--out-dir`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use imbalance_forge_core::data::{self, class_counts, Dataset, MissingPolicy};
use imbalance_forge_core::gbdt::{self, GossConfig};
use imbalance_forge_core::metrics;
use imbalance_forge_core::models::{
    fit_forest, fit_logistic, fit_tree, ForestConfig, LogisticConfig, SavedModel, TreeConfig,
};
use imbalance_forge_core::pca::{ComponentSelection, PcaPipeline};
use imbalance_forge_core::pipeline::{
    generate, run_experiment, DataSource, ExperimentConfig, ModelKind, Regime, SmoteennParams,
    SynthConfig,
};
use imbalance_forge_core::resample::{
    enn_scoped, random_undersample, smote, smoteenn, EnnScope, SmoteConfig, SmoteennConfig,
};
use imbalance_forge_core::rng::Seed;

#[derive(Parser)]
#[command(
    name = "imbalance-forge",
    version,
    about = "Imbalanced binary classification toolkit: scoring, resampling, PCA, boosted trees, experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a CSV, validate it, and write the canonical dataset format
    Ingest(IngestArgs),
    /// Generate the seeded two-Gaussian synthetic benchmark
    Synth(SynthArgs),
    /// Rank features by Information Value
    ScoreFeatures(ScoreArgs),
    /// Rebalance a dataset with undersampling, SMOTE, ENN, or SMOTEENN
    Resample(ResampleArgs),
    /// Fit or apply a standardize-then-PCA transform
    Pca(PcaArgs),
    /// Train a model and persist it as JSON
    Train(TrainArgs),
    /// Predict probabilities with a persisted model
    Predict(PredictArgs),
    /// Score predictions against labels and append to the metrics report
    Evaluate(EvaluateArgs),
    /// Run the full (model x regime) comparison grid
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Label map like `approve=0,reject=1`; without it labels must be 0/1
    #[arg(long)]
    label_map: Option<String>,
    /// Policy for empty feature cells
    #[arg(long, value_enum, default_value_t = MissingArg::Error)]
    missing: MissingArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Error,
    ImputeMedian,
}

impl From<MissingArg> for MissingPolicy {
    fn from(value: MissingArg) -> Self {
        match value {
            MissingArg::Error => MissingPolicy::Error,
            MissingArg::ImputeMedian => MissingPolicy::ImputeMedian,
        }
    }
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        let map = self.label_map.as_deref().map(parse_label_map).transpose()?;
        Ok(data::load_csv(
            &self.input,
            &self.label_column,
            self.missing.into(),
            map.as_ref(),
        )?)
    }
}

fn parse_label_map(spec: &str) -> Result<HashMap<String, u8>> {
    let mut map = HashMap::new();
    for pair in spec.split(',') {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("label map entry '{pair}' is not key=value"))?;
        let value: u8 = value
            .trim()
            .parse()
            .with_context(|| format!("label map value in '{pair}' must be 0 or 1"))?;
        map.insert(key.trim().to_string(), value);
    }
    Ok(map)
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 4532)]
    majority: usize,
    #[arg(long, default_value_t = 67)]
    minority: usize,
    #[arg(long, default_value_t = 10)]
    features: usize,
    #[arg(long, default_value_t = 1.6)]
    separation: f64,
    #[arg(long, default_value_t = 0.9)]
    correlation: f64,
    #[arg(long, default_value_t = 0.8)]
    minority_scale: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 0.5)]
    smoothing: f64,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResampleMethod {
    Undersample,
    Smote,
    Enn,
    Smoteenn,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnnScopeArg {
    All,
    Majority,
}

impl From<EnnScopeArg> for EnnScope {
    fn from(value: EnnScopeArg) -> Self {
        match value {
            EnnScopeArg::All => EnnScope::AllRows,
            EnnScopeArg::Majority => EnnScope::MajorityOnly,
        }
    }
}

#[derive(Args)]
struct ResampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: ResampleMethod,
    /// SMOTE neighbor count
    #[arg(long, default_value_t = 5)]
    k_smote: usize,
    /// ENN neighbor count
    #[arg(long, default_value_t = 3)]
    k_enn: usize,
    /// Desired minority/majority ratio after SMOTE
    #[arg(long, default_value_t = 1.0)]
    target_ratio: f64,
    #[arg(long, default_value_t = 1)]
    max_iterations: usize,
    #[arg(long, default_value_t = 0.05)]
    balance_tolerance: f64,
    /// Which rows ENN may remove
    #[arg(long, value_enum, default_value_t = EnnScopeArg::All)]
    enn_scope: EnnScopeArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PcaArgs {
    #[command(subcommand)]
    action: PcaAction,
}

#[derive(Subcommand)]
enum PcaAction {
    /// Fit standardizer + PCA on a dataset; writes the model, the
    /// explained-variance table, and the transformed dataset
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// Keep exactly this many components (overrides the threshold)
        #[arg(long)]
        n_components: Option<usize>,
        /// Keep the smallest count reaching this cumulative variance ratio
        #[arg(long, default_value_t = 0.95)]
        variance_threshold: f64,
        #[arg(long, default_value = "forge-out")]
        out_dir: PathBuf,
    },
    /// Apply a previously fitted model
    Transform {
        #[command(flatten)]
        input: InputArgs,
        /// Path to pca_model.json from `pca fit`
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "forge-out")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Gbdt,
    Logistic,
    Tree,
    Forest,
}

#[derive(Clone, Copy, ValueEnum)]
enum GbdtPreset {
    LightgbmLike,
    XgboostLike,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,

    // gbdt
    #[arg(long, value_enum, default_value_t = GbdtPreset::LightgbmLike)]
    preset: GbdtPreset,
    #[arg(long)]
    n_rounds: Option<usize>,
    #[arg(long)]
    max_leaves: Option<usize>,
    #[arg(long)]
    max_bins: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    min_child_hessian: Option<f64>,
    #[arg(long)]
    goss_top_rate: Option<f64>,
    #[arg(long)]
    goss_other_rate: Option<f64>,
    /// Disable GOSS row sampling regardless of preset
    #[arg(long)]
    no_goss: bool,

    // shared by gbdt and logistic
    #[arg(long)]
    learning_rate: Option<f64>,

    // logistic
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,

    // tree / forest
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_samples_leaf: Option<usize>,

    // forest
    #[arg(long)]
    n_trees: Option<usize>,
    /// Fraction of features per split (default sqrt(d)/d)
    #[arg(long)]
    feature_fraction: Option<f64>,
    /// Train every tree on the full data instead of bootstrap samples
    #[arg(long)]
    no_bootstrap: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Input CSV; the label column, if present, is dropped
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Path to a model.json from `train`
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// predictions.csv from `predict`
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value = "model")]
    model_name: String,
    #[arg(long, default_value = "raw")]
    regime_name: String,
    #[arg(long, default_value = "forge-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV data source (alternative to --config / --synth)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long)]
    label_map: Option<String>,
    /// Use the default synthetic benchmark as the data source
    #[arg(long)]
    synth: bool,
    /// Comma-separated subset of raw,pca,pca_smoteenn
    #[arg(long)]
    regimes: Option<String>,
    /// Comma-separated subset of logistic,decision_tree,random_forest,gbdt
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    ensemble_rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(exit_code) => std::process::exit(exit_code),
        Err(error) => {
            eprintln!("error: {error:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Synth(args) => cmd_synth(args),
        Command::ScoreFeatures(args) => cmd_score(args),
        Command::Resample(args) => cmd_resample(args),
        Command::Pca(args) => cmd_pca(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_ingest(args: IngestArgs) -> Result<i32> {
    let ds = args.input.load()?;
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("dataset.csv");
    data::save_csv(&ds, &out)?;
    let (majority, minority) = class_counts(&ds);
    println!(
        "ingested {} rows x {} features -> {}",
        ds.n_rows(),
        ds.n_features(),
        out.display()
    );
    println!("class counts: majority {majority}, minority {minority}");
    for entry in ds.transform_log.iter().filter(|e| e.starts_with("impute")) {
        println!("  {entry}");
    }
    Ok(0)
}

fn cmd_synth(args: SynthArgs) -> Result<i32> {
    let cfg = SynthConfig {
        n_majority: args.majority,
        n_minority: args.minority,
        n_features: args.features,
        separation: args.separation,
        correlation: args.correlation,
        minority_scale: args.minority_scale,
        seed: Seed::new(args.seed),
    };
    let ds = generate(&cfg)?;
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("synth.csv");
    data::save_csv(&ds, &out)?;
    println!(
        "generated {} rows ({}:{}) x {} features -> {}",
        ds.n_rows(),
        args.majority,
        args.minority,
        args.features,
        out.display()
    );
    Ok(0)
}

fn cmd_score(args: ScoreArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let ranked = imbalance_forge_core::scoring::rank_features(&ds, args.bins, args.smoothing)?;
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("feature_iv.csv");
    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(["feature", "iv"])?;
    for (name, iv) in &ranked {
        writer.write_record([name.as_str(), &format!("{iv:.6}")])?;
    }
    writer.flush()?;
    println!("feature ranking -> {}", out.display());
    for (name, iv) in &ranked {
        println!("  {name}: {iv:.4}");
    }
    Ok(0)
}

fn cmd_resample(args: ResampleArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let seed = Seed::new(args.seed);
    let out_ds = match args.method {
        ResampleMethod::Undersample => random_undersample(&ds, seed)?,
        ResampleMethod::Smote => smote(
            &ds,
            &SmoteConfig {
                k: args.k_smote,
                target_ratio: args.target_ratio,
                seed,
            },
        )?,
        ResampleMethod::Enn => enn_scoped(&ds, args.k_enn, args.enn_scope.into())?,
        ResampleMethod::Smoteenn => smoteenn(
            &ds,
            &SmoteennConfig {
                smote: SmoteConfig {
                    k: args.k_smote,
                    target_ratio: args.target_ratio,
                    seed,
                },
                enn_k: args.k_enn,
                enn_scope: args.enn_scope.into(),
                max_iterations: args.max_iterations,
                balance_tolerance: args.balance_tolerance,
            },
        )?,
    };
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("resampled.csv");
    data::save_csv(&out_ds, &out)?;
    let (majority, minority) = class_counts(&out_ds);
    println!(
        "{} -> {} rows (majority {majority}, minority {minority}) -> {}",
        ds.n_rows(),
        out_ds.n_rows(),
        out.display()
    );
    Ok(0)
}

fn cmd_pca(args: PcaArgs) -> Result<i32> {
    match args.action {
        PcaAction::Fit {
            input,
            n_components,
            variance_threshold,
            out_dir,
        } => {
            let ds = input.load()?;
            let selection = match n_components {
                Some(m) => ComponentSelection::NComponents(m),
                None => ComponentSelection::VarianceThreshold(variance_threshold),
            };
            let pipeline = PcaPipeline::fit(&ds, selection)?;
            ensure_dir(&out_dir)?;

            let model_path = out_dir.join("pca_model.json");
            fs::write(&model_path, serde_json::to_string_pretty(&pipeline)?)?;

            let variance_path = out_dir.join("explained_variance.csv");
            let mut writer = csv::Writer::from_path(&variance_path)?;
            writer.write_record(["component", "eigenvalue", "variance_ratio", "cumulative_ratio"])?;
            let ratios = pipeline.model.explained_variance_ratios();
            let mut cumulative = 0.0;
            for (i, (value, ratio)) in pipeline
                .model
                .explained_variance
                .iter()
                .zip(&ratios)
                .enumerate()
            {
                cumulative += ratio;
                writer.write_record([
                    format!("pc{i}"),
                    format!("{value:.6}"),
                    format!("{ratio:.6}"),
                    format!("{cumulative:.6}"),
                ])?;
            }
            writer.flush()?;

            let transformed = pipeline.transform(&ds)?;
            let data_path = out_dir.join("transformed.csv");
            data::save_csv(&transformed, &data_path)?;
            println!(
                "kept {} of {} components -> {}, {}, {}",
                pipeline.model.n_components,
                ds.n_features(),
                model_path.display(),
                variance_path.display(),
                data_path.display()
            );
            Ok(0)
        }
        PcaAction::Transform {
            input,
            model,
            out_dir,
        } => {
            let ds = input.load()?;
            let pipeline: PcaPipeline = serde_json::from_str(
                &fs::read_to_string(&model)
                    .with_context(|| format!("reading {}", model.display()))?,
            )?;
            let transformed = pipeline.transform(&ds)?;
            ensure_dir(&out_dir)?;
            let out = out_dir.join("transformed.csv");
            data::save_csv(&transformed, &out)?;
            println!(
                "projected {} rows onto {} components -> {}",
                transformed.n_rows(),
                transformed.n_features(),
                out.display()
            );
            Ok(0)
        }
    }
}

fn cmd_train(args: TrainArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let seed = Seed::new(args.seed);
    let model = match args.model {
        ModelArg::Gbdt => {
            let mut cfg = match args.preset {
                GbdtPreset::LightgbmLike => gbdt::GbdtConfig::lightgbm_like(seed),
                GbdtPreset::XgboostLike => gbdt::GbdtConfig::xgboost_like(seed),
            };
            if let Some(v) = args.n_rounds {
                cfg.n_rounds = v;
            }
            if let Some(v) = args.learning_rate {
                cfg.learning_rate = v;
            }
            if let Some(v) = args.max_leaves {
                cfg.max_leaves = v;
            }
            if let Some(v) = args.max_bins {
                cfg.max_bins = v;
            }
            if let Some(v) = args.lambda {
                cfg.lambda_reg = v;
            }
            if let Some(v) = args.gamma {
                cfg.gamma = v;
            }
            if let Some(v) = args.min_child_hessian {
                cfg.min_child_hessian = v;
            }
            if args.goss_top_rate.is_some() || args.goss_other_rate.is_some() {
                let current = cfg.goss.unwrap_or(GossConfig {
                    top_rate: 0.2,
                    other_rate: 0.1,
                });
                cfg.goss = Some(GossConfig {
                    top_rate: args.goss_top_rate.unwrap_or(current.top_rate),
                    other_rate: args.goss_other_rate.unwrap_or(current.other_rate),
                });
            }
            if args.no_goss {
                cfg.goss = None;
            }
            SavedModel::Gbdt(gbdt::fit(&ds.features, &ds.labels, &cfg)?)
        }
        ModelArg::Logistic => {
            let mut cfg = LogisticConfig::default();
            if let Some(v) = args.learning_rate {
                cfg.learning_rate = v;
            }
            if let Some(v) = args.epochs {
                cfg.epochs = v;
            }
            if let Some(v) = args.l2 {
                cfg.l2 = v;
            }
            SavedModel::Logistic(fit_logistic(&ds.features, &ds.labels, &cfg)?)
        }
        ModelArg::Tree => {
            let mut cfg = TreeConfig::default();
            if let Some(v) = args.max_depth {
                cfg.max_depth = v;
            }
            if let Some(v) = args.min_samples_leaf {
                cfg.min_samples_leaf = v;
            }
            SavedModel::DecisionTree(fit_tree(&ds.features, &ds.labels, &cfg)?)
        }
        ModelArg::Forest => {
            let mut cfg = ForestConfig::new(seed);
            if let Some(v) = args.n_trees {
                cfg.n_trees = v;
            }
            if let Some(v) = args.max_depth {
                cfg.max_depth = v;
            }
            if let Some(v) = args.min_samples_leaf {
                cfg.min_samples_leaf = v;
            }
            if args.feature_fraction.is_some() {
                cfg.feature_subsample_fraction = args.feature_fraction;
            }
            if args.no_bootstrap {
                cfg.bootstrap = false;
            }
            SavedModel::RandomForest(fit_forest(&ds.features, &ds.labels, &cfg)?)
        }
    };
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("model.json");
    fs::write(&out, serde_json::to_string(&model)?)?;
    println!(
        "trained {} on {} rows -> {}",
        model.kind_name(),
        ds.n_rows(),
        out.display()
    );
    Ok(0)
}

fn cmd_predict(args: PredictArgs) -> Result<i32> {
    let model: SavedModel = serde_json::from_str(
        &fs::read_to_string(&args.model)
            .with_context(|| format!("reading {}", args.model.display()))?,
    )?;
    let (features, _names) = load_features(&args.input, &args.label_column)?;
    let proba = model.predict_proba(&features)?;
    ensure_dir(&args.out_dir)?;
    let out = args.out_dir.join("predictions.csv");
    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(["row", "proba"])?;
    for (i, p) in proba.iter().enumerate() {
        writer.write_record([i.to_string(), p.to_string()])?;
    }
    writer.flush()?;
    println!("{} predictions -> {}", proba.len(), out.display());
    Ok(0)
}

/// Feature-only CSV load: drops `label_column` when present.
fn load_features(
    path: &Path,
    label_column: &str,
) -> Result<(imbalance_forge_core::Matrix, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = headers.iter().position(|h| h == label_column);
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(names.len());
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_idx {
                continue;
            }
            let value: f64 = cell
                .parse()
                .with_context(|| format!("row {row_no}, column '{}': '{cell}'", headers[col]))?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{} contains no data rows", path.display());
    }
    Ok((imbalance_forge_core::Matrix::from_rows(&rows), names))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let mut reader = csv::Reader::from_path(&args.predictions)
        .with_context(|| format!("reading {}", args.predictions.display()))?;
    let headers = reader.headers()?.clone();
    let proba_idx = headers
        .iter()
        .position(|h| h == "proba")
        .context("predictions file needs a 'proba' column")?;
    let mut proba = Vec::new();
    for record in reader.records() {
        let record = record?;
        proba.push(record[proba_idx].parse::<f64>()?);
    }
    let report = metrics::evaluate(
        &ds.labels,
        &proba,
        args.threshold,
        &args.model_name,
        &args.regime_name,
    )?;

    ensure_dir(&args.out_dir)?;
    let csv_path = args.out_dir.join("metrics.csv");
    let fresh = !csv_path.exists();
    let mut writer = csv::WriterBuilder::new().from_writer(
        fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&csv_path)?,
    );
    if fresh {
        writer.write_record(["model", "regime", "f1", "recall", "precision", "auc_roc"])?;
    }
    writer.write_record([
        args.model_name.as_str(),
        args.regime_name.as_str(),
        &format!("{:.4}", report.f1),
        &format!("{:.4}", report.recall),
        &format!("{:.4}", report.precision),
        &format!("{:.4}", report.auc),
    ])?;
    writer.flush()?;
    rewrite_metrics_markdown(&csv_path, &args.out_dir.join("metrics.md"))?;

    println!(
        "{} / {}: f1 {:.4}, recall {:.4}, precision {:.4}, auc {:.4} (accuracy {:.4})",
        args.model_name,
        args.regime_name,
        report.f1,
        report.recall,
        report.precision,
        report.auc,
        report.accuracy
    );
    if report.zero_division {
        println!("  note: a 0/0 metric was reported as 0");
    }
    println!("appended -> {}", csv_path.display());
    Ok(0)
}

fn rewrite_metrics_markdown(csv_path: &Path, md_path: &Path) -> Result<()> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let mut md = String::from("| Model | Regime | F1 | Recall | Precision | AUC-ROC |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    for record in reader.records() {
        let r = record?;
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            &r[0], &r[1], &r[2], &r[3], &r[4], &r[5]
        ));
    }
    fs::write(md_path, md)?;
    Ok(())
}

fn parse_list<T: Copy>(spec: &str, table: &[(&str, T)], what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        let found = table
            .iter()
            .find(|(name, _)| *name == token)
            .with_context(|| {
                let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
                format!("unknown {what} '{token}' (expected one of {})", names.join(", "))
            })?;
        out.push(found.1);
    }
    Ok(out)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let mut cfg: ExperimentConfig = match &args.config {
        Some(path) => serde_json::from_str(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("parsing {}", path.display()))?,
        None => {
            let data = if let Some(input) = &args.input {
                DataSource::Csv {
                    path: input.clone(),
                    label_column: args.label_column.clone(),
                    label_map: args.label_map.as_deref().map(parse_label_map).transpose()?,
                    missing_policy: MissingPolicy::Error,
                }
            } else if args.synth {
                DataSource::Synth(SynthConfig::default())
            } else {
                bail!("provide --config, --input, or --synth");
            };
            ExperimentConfig {
                data,
                test_fraction: 0.2,
                stratified: true,
                regimes: Regime::all(),
                models: ModelKind::all(),
                logistic: LogisticConfig::default(),
                tree: TreeConfig::default(),
                forest: Default::default(),
                gbdt: Default::default(),
                pca: Default::default(),
                resampler: SmoteennParams::default(),
                threshold: 0.5,
                ensemble_rounds: 1,
                seed: Seed::new(42),
                out_dir: PathBuf::from("forge-out"),
            }
        }
    };
    if args.config.is_some() && args.input.is_some() {
        bail!("--config and --input are mutually exclusive");
    }
    if let Some(regimes) = &args.regimes {
        cfg.regimes = parse_list(
            regimes,
            &[
                ("raw", Regime::Raw),
                ("pca", Regime::Pca),
                ("pca_smoteenn", Regime::PcaSmoteenn),
            ],
            "regime",
        )?;
    }
    if let Some(models) = &args.models {
        cfg.models = parse_list(
            models,
            &[
                ("logistic", ModelKind::Logistic),
                ("decision_tree", ModelKind::DecisionTree),
                ("random_forest", ModelKind::RandomForest),
                ("gbdt", ModelKind::Gbdt),
            ],
            "model",
        )?;
    }
    if let Some(v) = args.test_fraction {
        cfg.test_fraction = v;
    }
    if let Some(v) = args.ensemble_rounds {
        cfg.ensemble_rounds = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = Seed::new(v);
    }
    if let Some(v) = &args.out_dir {
        cfg.out_dir = v.clone();
    }

    let report = run_experiment(&cfg)?;
    println!(
        "experiment grid: {} cells, {} failed -> {}",
        report.cells.len(),
        report.n_failed(),
        cfg.out_dir.join("report.md").display()
    );
    for cell in &report.cells {
        match cell.metrics() {
            Some(m) => println!(
                "  {} / {}: f1 {:.4}, auc {:.4}",
                m.model_name, m.regime_name, m.f1, m.auc
            ),
            None => println!("  {} / {}: FAILED", cell.model_name(), cell.regime_name()),
        }
    }
    Ok(if report.n_failed() > 0 { 2 } else { 0 })
}
