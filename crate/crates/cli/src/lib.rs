//! Subcommands of the `torusym` binary.
//!
//! Every command returns a one-line summary for stdout and writes its full
//! output to files. Errors are split into validation errors (exit code 1)
//! and runtime failures (exit code 2).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};
use torusym_core::data::{self, GeneratorPreset};
use torusym_core::eval::{self, SweepAxis, SweepSpec};
use torusym_core::train::{self, RunReport, SplitSizes, TrainConfig};
use torusym_core::{Checkpoint, Dataset, LossKind};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: arguments, config, or files that are missing or malformed.
    Validation(String),
    /// The command started but could not finish.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn runtime(msg: impl Into<String>) -> CliError {
    CliError::Runtime(msg.into())
}

/// Core errors raised while reading inputs count as validation errors.
fn input_err(path: &Path) -> impl Fn(torusym_core::Error) -> CliError + '_ {
    move |e| invalid(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "torusym",
    version,
    about = "Spectral discovery of rotation symmetries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as JSON lines.
    GenData(GenDataArgs),
    /// Train a model and write its checkpoint and run report.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split of a dataset.
    Eval(EvalArgs),
    /// Repeated training runs along the noise or sample-size axis.
    Sweep(SweepArgs),
    /// Summarize every run report under a directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Six-dimensional coupled-oscillator analog.
    Pendulum6d,
    /// Random frame with rates (1, -1)/sqrt(2) in four dimensions.
    Rotated4d,
    /// Random frame and random rates.
    Random,
    /// Identity frame with rates (1, -1, 0, ...)/sqrt(2).
    Diagonal,
    /// Thresholded labels over a random invariant target.
    Classification,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// Ambient dimension (even); ignored by the fixed-size tasks.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 8000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub bandwidth: u32,
    #[arg(long)]
    pub out: PathBuf,
}

/// Training knobs; flags override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` file using the camelCase config names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub mu_init: Option<f64>,
    #[arg(long)]
    pub mu_max_scale: Option<f64>,
    #[arg(long)]
    pub warmup_epochs: Option<usize>,
    #[arg(long)]
    pub mu_ramp: Option<String>,
    #[arg(long)]
    pub bandwidth: Option<u32>,
    /// Comma-separated hidden widths, e.g. `64,64,64`.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub loss_kind: Option<String>,
    #[arg(long)]
    pub surviving_threshold: Option<f64>,
    #[arg(long)]
    pub first_layer_gain: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory for `checkpoint.json` and `report.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// The split and invariance times follow the seed in this config.
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output report path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Comma-separated axis values; defaults depend on the axis.
    #[arg(long)]
    pub values: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 8000)]
    pub base_samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub base_noise: f64,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Noise,
    Samples,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub dir: PathBuf,
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(invalid(format!("line {}: empty key", i + 1)));
        }
        if out.insert(key.to_string(), v.trim().to_string()).is_some() {
            return Err(invalid(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

fn kv_value(key: &str, raw: &str) -> Value {
    if key == "hidden" {
        let widths: Vec<Value> = raw
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<u64>()
                    .map(Value::from)
                    .unwrap_or_else(|_| Value::String(w.trim().to_string()))
            })
            .collect();
        return Value::Array(widths);
    }
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Effective configuration with the file and flag layers it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedConfig {
    pub config_file: Option<PathBuf>,
    pub file_values: Map<String, Value>,
    pub flag_values: Map<String, Value>,
    pub effective: TrainConfig,
}

impl ConfigArgs {
    fn flag_values(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("epochs", self.epochs.map(Value::from));
        put("lr", self.lr.map(Value::from));
        put("batchSize", self.batch_size.map(Value::from));
        put("muInit", self.mu_init.map(Value::from));
        put("muMaxScale", self.mu_max_scale.map(Value::from));
        put("warmupEpochs", self.warmup_epochs.map(Value::from));
        put("muRamp", self.mu_ramp.clone().map(Value::from));
        put("bandwidth", self.bandwidth.map(Value::from));
        put(
            "hidden",
            self.hidden.as_deref().map(|h| kv_value("hidden", h)),
        );
        put("seed", self.seed.map(Value::from));
        put("lossKind", self.loss_kind.clone().map(Value::from));
        put(
            "survivingThreshold",
            self.surviving_threshold.map(Value::from),
        );
        put("firstLayerGain", self.first_layer_gain.map(Value::from));
        put("restarts", self.restarts.map(Value::from));
        m
    }

    /// Merges defaults, the config file, and flags; unknown keys are rejected.
    pub fn resolve(&self) -> CliResult<ResolvedConfig> {
        let mut file_values = Map::new();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let kv = parse_kv(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            for (k, v) in kv {
                let value = kv_value(&k, &v);
                file_values.insert(k, value);
            }
        }
        let flag_values = self.flag_values();
        let mut merged = file_values.clone();
        merged.extend(flag_values.clone());
        let effective: TrainConfig = serde_json::from_value(Value::Object(merged))
            .map_err(|e| invalid(format!("config: {e}")))?;
        effective
            .validate()
            .map_err(|e| invalid(format!("config: {e}")))?;
        Ok(ResolvedConfig {
            config_file: self.config.clone(),
            file_values,
            flag_values,
            effective,
        })
    }
}

/// A run report as written to disk, with the invocation that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile<'a> {
    #[serde(flatten)]
    pub report: &'a RunReport,
    pub invocation: Invocation<'a>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Invocation<'a> {
    pub command: &'static str,
    pub data: &'a Path,
    pub checkpoint: Option<&'a Path>,
    pub out: &'a Path,
    pub config: &'a ResolvedConfig,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| runtime(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    if !path.exists() {
        return Err(invalid(format!("{}: no such file", path.display())));
    }
    Dataset::load(path).map_err(input_err(path))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), |x| format!("{x:.6}"))
}

fn summary_line(r: &RunReport) -> String {
    let metric = match r.accuracy {
        Some(a) => format!("accuracy={a:.4}"),
        None => format!("testMse={}", fmt_opt(r.test_mse)),
    };
    let mut line = format!(
        "{} seed={} {metric} invarianceError={} cosineSimilarity={}",
        r.task_name,
        r.seed,
        fmt_opt(r.invariance_error),
        fmt_opt(r.cosine_similarity)
    );
    if let Some(f) = &r.failure {
        line.push_str(&format!(" failure=\"{f}\""));
    }
    line
}

pub fn cmd_gen_data(a: &GenDataArgs) -> CliResult<String> {
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(invalid("--sigma must be a non-negative number"));
    }
    if a.n_samples == 0 {
        return Err(invalid("--n-samples must be positive"));
    }
    let check = |r: torusym_core::Result<Dataset>| r.map_err(|e| invalid(e.to_string()));
    let ds = match a.task {
        Task::Pendulum6d => check(data::double_pendulum_task(a.n_samples, a.sigma, a.seed))?,
        Task::Rotated4d => check(eval::rotated_task(
            a.n_samples,
            a.sigma,
            a.seed,
            a.bandwidth,
        ))?,
        Task::Random | Task::Diagonal | Task::Classification => {
            let preset = if a.task == Task::Diagonal {
                GeneratorPreset::Diagonal
            } else {
                GeneratorPreset::Random
            };
            let cf = check_cf(data::make_random_generator(a.n, a.seed, preset))?;
            if a.task == Task::Classification {
                check(data::synth_invariant_classification(
                    &cf,
                    a.n_samples,
                    a.sigma,
                    a.seed,
                    a.bandwidth,
                ))?
            } else {
                check(data::synth_invariant_regression(
                    &cf,
                    a.n_samples,
                    a.sigma,
                    a.seed,
                    a.bandwidth,
                ))?
            }
        }
    };
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    ds.save(&a.out)
        .map_err(|e| runtime(format!("{}: {e}", a.out.display())))?;
    Ok(format!(
        "wrote {} samples of {} (n = {}) to {}",
        ds.len(),
        ds.meta.task_name,
        ds.meta.n,
        a.out.display()
    ))
}

fn check_cf(
    r: torusym_core::Result<torusym_core::CanonicalForm>,
) -> CliResult<torusym_core::CanonicalForm> {
    r.map_err(|e| invalid(e.to_string()))
}

fn loss_matches(ds: &Dataset, cfg: &TrainConfig) -> CliResult<()> {
    if ds.meta.classification && cfg.loss_kind != LossKind::Logistic {
        return Err(invalid("classification data needs lossKind = logistic"));
    }
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> CliResult<String> {
    let resolved = a.cfg.resolve()?;
    let ds = load_dataset(&a.data)?;
    loss_matches(&ds, &resolved.effective)?;
    let (model, report) =
        train::train(&ds, &resolved.effective).map_err(|e| runtime(e.to_string()))?;
    create_dir(&a.out)?;
    write_json(&a.out.join("checkpoint.json"), &Checkpoint::from(&model))?;
    let file = ReportFile {
        report: &report,
        invocation: Invocation {
            command: "train",
            data: &a.data,
            checkpoint: None,
            out: &a.out,
            config: &resolved,
        },
    };
    write_json(&a.out.join("report.json"), &file)?;
    let line = summary_line(&report);
    match &report.failure {
        Some(_) => Err(runtime(line)),
        None => Ok(line),
    }
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<String> {
    let resolved = a.cfg.resolve()?;
    let cfg = resolved.effective.clone();
    if !a.checkpoint.exists() {
        return Err(invalid(format!("{}: no such file", a.checkpoint.display())));
    }
    let text = fs::read_to_string(&a.checkpoint)
        .map_err(|e| invalid(format!("{}: {e}", a.checkpoint.display())))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: {e}", a.checkpoint.display())))?;
    let model = ckpt.into_model().map_err(input_err(&a.checkpoint))?;
    let ds = load_dataset(&a.data)?;
    loss_matches(&ds, &cfg)?;
    if ds.meta.n != model.n() {
        return Err(invalid(format!(
            "checkpoint has n = {} but the dataset has n = {}",
            model.n(),
            ds.meta.n
        )));
    }
    let (train_idx, val_idx, test_idx) =
        train::split_indices(ds.len(), cfg.seed).map_err(|e| invalid(e.to_string()))?;
    let test = ds.subset(&test_idx);
    let assessment = train::assess(&model, &test, &cfg).map_err(|e| runtime(e.to_string()))?;
    let mut report = RunReport {
        task_name: ds.meta.task_name.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
        split: SplitSizes {
            train: train_idx.len(),
            val: val_idx.len(),
            test: test_idx.len(),
        },
        test_mse: None,
        accuracy: None,
        test_loss: None,
        invariance_error: None,
        cosine_similarity: None,
        spectral_cosine_similarity: None,
        agreement: None,
        recovered_lambda: Vec::new(),
        spectral_lambda: Vec::new(),
        nullity: 0,
        spectral_reliable: false,
        surviving_frequencies: Vec::new(),
        learned_generator: None,
        loss_curve: Vec::new(),
        penalty_curve: Vec::new(),
        val_curve: Vec::new(),
        mu_curve: Vec::new(),
        best_epoch: None,
        restart: 0,
        restart_val_losses: Vec::new(),
        failure: None,
        wall_clock: 0.0,
    };
    train::fill(&mut report, assessment);
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let file = ReportFile {
        report: &report,
        invocation: Invocation {
            command: "eval",
            data: &a.data,
            checkpoint: Some(&a.checkpoint),
            out: &a.out,
            config: &resolved,
        },
    };
    write_json(&a.out, &file)?;
    Ok(summary_line(&report))
}

fn parse_values(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("--values: `{}` is not a number", v.trim())))
        })
        .collect()
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<String> {
    let resolved = a.cfg.resolve()?;
    let axis = match a.axis {
        AxisArg::Noise => SweepAxis::Noise,
        AxisArg::Samples => SweepAxis::Samples,
    };
    let mut spec = SweepSpec::new(axis);
    if let Some(v) = &a.values {
        spec.values = parse_values(v)?;
    }
    spec.repeats = a.repeats;
    spec.base = resolved.effective.clone();
    spec.base_samples = a.base_samples;
    spec.base_noise = a.base_noise;
    spec.validate().map_err(|e| invalid(e.to_string()))?;
    if a.jobs == 0 {
        return Err(invalid("--jobs must be positive"));
    }
    let result = eval::run_sweep(&spec, a.jobs).map_err(|e| runtime(e.to_string()))?;

    let runs_dir = a.out.join("runs");
    create_dir(&runs_dir)?;
    for run in &result.runs {
        let name = format!("report_{}_{}.json", run.value, run.repeat);
        write_json(&runs_dir.join(name), run)?;
    }
    write_json(&a.out.join("aggregate.json"), &result.aggregate)?;
    write_json(&a.out.join("spec.json"), &spec)?;
    write_json(&a.out.join("config.json"), &resolved)?;
    let csv_path = a.out.join("aggregate.csv");
    fs::write(&csv_path, result.aggregate.to_csv())
        .map_err(|e| runtime(format!("{}: {e}", csv_path.display())))?;
    let failed: usize = result.aggregate.points.iter().map(|p| p.n_failed).sum();
    Ok(format!(
        "sweep over {}: {} points x {} repeats, {} failed runs, aggregate in {}",
        match axis {
            SweepAxis::Noise => "noise",
            SweepAxis::Samples => "samples",
        },
        spec.values.len(),
        spec.repeats,
        failed,
        a.out.display()
    ))
}

/// One row of the consolidated summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub task_name: String,
    pub n_runs: usize,
    pub test_mse: Option<(f64, f64)>,
    pub accuracy: Option<(f64, f64)>,
    pub invariance_error: Option<(f64, f64)>,
    pub cosine_similarity: Option<(f64, f64)>,
}

fn collect_reports(dir: &Path, out: &mut Vec<(PathBuf, RunReport)>) -> CliResult<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| invalid(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_reports(&path, out)?;
            continue;
        }
        let is_report = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("report") && n.ends_with(".json"));
        if !is_report {
            continue;
        }
        let text =
            fs::read_to_string(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        // Sweep runs wrap the report.
        let inner = match value.get("report") {
            Some(Value::Null) => continue,
            Some(r) => r.clone(),
            None => value,
        };
        let report: RunReport = serde_json::from_value(inner)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        out.push((path, report));
    }
    Ok(())
}

fn stat(xs: Vec<f64>) -> Option<(f64, f64)> {
    if xs.is_empty() {
        None
    } else {
        Some(eval::mean_std(&xs))
    }
}

/// Groups reports by task and computes mean and sample std of each metric.
pub fn summarize(reports: &[RunReport]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<&str, Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.task_name.as_str()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(task, rs)| {
            let pick =
                |f: fn(&RunReport) -> Option<f64>| stat(rs.iter().filter_map(|r| f(r)).collect());
            SummaryRow {
                task_name: task.to_string(),
                n_runs: rs.len(),
                test_mse: pick(|r| r.test_mse),
                accuracy: pick(|r| r.accuracy),
                invariance_error: pick(|r| r.invariance_error),
                cosine_similarity: pick(|r| r.cosine_similarity),
            }
        })
        .collect()
}

fn cell(v: Option<(f64, f64)>) -> String {
    v.map_or_else(|| "-".to_string(), |(m, s)| format!("{m:.5} ± {s:.5}"))
}

pub fn summary_markdown(rows: &[SummaryRow]) -> String {
    let mut md = String::from(
        "| Task | Runs | Test MSE | Accuracy | Inv. error | Cosine similarity |\n|---|---|---|---|---|---|\n",
    );
    for r in rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.task_name,
            r.n_runs,
            cell(r.test_mse),
            cell(r.accuracy),
            cell(r.invariance_error),
            cell(r.cosine_similarity)
        ));
    }
    md
}

pub fn cmd_report(a: &ReportArgs) -> CliResult<String> {
    if !a.dir.is_dir() {
        return Err(invalid(format!("{}: not a directory", a.dir.display())));
    }
    let mut found = Vec::new();
    collect_reports(&a.dir, &mut found)?;
    if found.is_empty() {
        return Err(invalid(format!(
            "{}: no report*.json files",
            a.dir.display()
        )));
    }
    let reports: Vec<RunReport> = found.into_iter().map(|(_, r)| r).collect();
    let rows = summarize(&reports);
    write_json(&a.dir.join("summary.json"), &rows)?;
    let md_path = a.dir.join("summary.md");
    fs::write(&md_path, summary_markdown(&rows))
        .map_err(|e| runtime(format!("{}: {e}", md_path.display())))?;
    Ok(format!(
        "summarized {} reports in {} task groups into {}",
        reports.len(),
        rows.len(),
        md_path.display()
    ))
}

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
    }
}
