//! `polykan` command line: `train`, `eval`, `basis-dump` and `bench`.
//!
//! Exit codes: 0 success, 2 bad flags, 3 unreadable or mismatched data,
//! 4 numeric failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::basis::{eval_basis, BasisError, FamilySpec, ParamValue, FAMILY_NAMES};
use crate::data::{load_mnist, subset, DataError, Dataset};
use crate::exec::Execution;
use crate::format::{load_checkpoint, save_checkpoint, write_document, DataRecord, FormatError, RunRecord};
use crate::kan::{init_network, KanError, KanNetwork};
use crate::train::{evaluate, fit, TrainConfig, TrainError};

pub const EXIT_FLAGS: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

const NORMALIZATION: &str = "pixel/255";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn flags(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FLAGS,
            message: message.into(),
        }
    }

    fn data(message: impl ToString) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    fn numeric(message: impl ToString) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.to_string(),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e)
    }
}

fn basis_error(e: BasisError) -> CliError {
    match e {
        BasisError::UnknownFamily(_)
        | BasisError::InvalidParameter { .. }
        | BasisError::InvalidOrder(_)
        | BasisError::UnsupportedDegree { .. }
        | BasisError::DivisionDegenerate { .. } => CliError::flags(e.to_string()),
        _ => CliError::numeric(e),
    }
}

fn network_error(e: KanError) -> CliError {
    match e {
        KanError::Basis(b) => basis_error(b),
        KanError::InvalidDims(_) => CliError::flags(e.to_string()),
        _ => CliError::numeric(e),
    }
}

fn train_error(e: TrainError) -> CliError {
    match e {
        TrainError::InvalidConfig(_) => CliError::flags(e.to_string()),
        TrainError::ShapeMismatch(_) | TrainError::InvalidLabel { .. } => CliError::data(e),
        TrainError::Network(KanError::ShapeMismatch { .. }) => CliError::data(e),
        _ => CliError::numeric(e),
    }
}

fn format_error(e: FormatError) -> CliError {
    CliError::data(e)
}

#[derive(Parser, Debug)]
#[command(name = "polykan", version, about = "Polynomial-basis KAN toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a KAN classifier on MNIST IDX files
    Train(TrainArgs),
    /// Recompute metrics of a checkpoint on a labelled set
    Eval(EvalArgs),
    /// Sample basis polynomials on a grid as CSV
    BasisDump(DumpArgs),
    /// Train every listed family with one configuration and tabulate the results
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct ExecArgs {
    /// Run on one thread without rayon
    #[arg(long)]
    sequential: bool,
    /// Worker threads for the parallel path (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct TrainingArgs {
    #[arg(long)]
    train_images: PathBuf,
    #[arg(long)]
    train_labels: PathBuf,
    #[arg(long)]
    test_images: PathBuf,
    #[arg(long)]
    test_labels: PathBuf,
    /// Hidden widths, comma separated (empty for none)
    #[arg(long, default_value = "32")]
    hidden: String,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    limit_train: Option<usize>,
    #[arg(long)]
    limit_test: Option<usize>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    family: String,
    /// Family parameter as key=value (repeatable); lists are comma separated
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[command(flatten)]
    training: TrainingArgs,
    /// Checkpoint path
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    #[arg(long, default_value = "metrics.json")]
    metrics_out: PathBuf,
    /// Add wall-clock time to the metrics file (makes it run-dependent)
    #[arg(long)]
    record_timing: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "metrics.json")]
    metrics_out: PathBuf,
    /// Evaluate on a seeded subset of this size
    #[arg(long)]
    limit: Option<usize>,
    /// Subset seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args, Debug)]
struct DumpArgs {
    /// Family name or `all`
    #[arg(long)]
    family: String,
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// Sample interval as lo:hi
    #[arg(long, default_value = "-1:1", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Output file (a directory with `all`); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma separated family names or `all`
    #[arg(long, default_value = "all")]
    families: String,
    #[command(flatten)]
    training: TrainingArgs,
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

/// Runs the tool with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FLAGS } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::BasisDump(a) => cmd_basis_dump(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, ParamValue>, CliError> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::flags(format!("--param expects key=value, got `{item}`")))?;
        let value = ParamValue::parse(value).map_err(CliError::flags)?;
        if out.insert(key.trim().to_string(), value).is_some() {
            return Err(CliError::flags(format!("parameter `{key}` given twice")));
        }
    }
    Ok(out)
}

fn family_spec(name: &str, degree: usize, params: &[String]) -> Result<FamilySpec, CliError> {
    FamilySpec::from_params(name, degree, &parse_params(params)?).map_err(basis_error)
}

fn parse_hidden(text: &str) -> Result<Vec<usize>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|w| match w.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(CliError::flags(format!("--hidden expects positive integers, got `{w}`"))),
        })
        .collect()
}

fn execution(args: &ExecArgs) -> Result<Execution, CliError> {
    if args.sequential {
        return Ok(Execution::Sequential);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::flags("--threads must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        {
            // the global pool can only be configured once per process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    Ok(Execution::Parallel)
}

impl TrainingArgs {
    fn config(&self) -> Result<TrainConfig, CliError> {
        let cfg = TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            seed: self.seed,
            ..TrainConfig::default()
        };
        cfg.validate().map_err(train_error)?;
        Ok(cfg)
    }

    fn load(&self) -> Result<(Dataset, Dataset), CliError> {
        let mut train = load_mnist("mnist-train", &self.train_images, &self.train_labels)?;
        let mut test = load_mnist("mnist-test", &self.test_images, &self.test_labels)?;
        if let Some(n) = self.limit_train {
            train = subset(&train, n, self.seed)?;
        }
        if let Some(n) = self.limit_test {
            test = subset(&test, n, self.seed)?;
        }
        Ok((train, test))
    }

    fn dims(&self, input: usize, classes: usize) -> Result<Vec<usize>, CliError> {
        let mut dims = vec![input];
        dims.extend(parse_hidden(&self.hidden)?);
        dims.push(classes);
        Ok(dims)
    }
}

fn data_record(ds: &Dataset) -> DataRecord {
    DataRecord {
        name: ds.name().to_string(),
        samples: ds.len(),
        normalization: NORMALIZATION.to_string(),
    }
}

struct TrainedRun {
    net: KanNetwork,
    record: RunRecord,
    seconds: f64,
}

fn train_family(
    spec: &FamilySpec,
    training: &TrainingArgs,
    cfg: &TrainConfig,
    train: &Dataset,
    test: &Dataset,
    exec: Execution,
) -> Result<TrainedRun, CliError> {
    let dims = training.dims(train.dim(), train.num_classes())?;
    let start = Instant::now();
    let mut net = init_network(spec, &dims, training.degree, cfg.seed).map_err(network_error)?;
    let log = fit(&mut net, train, cfg, Some(test), exec).map_err(train_error)?;
    let seconds = start.elapsed().as_secs_f64();
    let eval = evaluate(&net, test, exec).map_err(train_error)?;
    let mut record = RunRecord::new(&net, cfg.seed, data_record(test), eval.metrics, &eval.confusion);
    record.config = Some(cfg.clone());
    record.train_data = Some(data_record(train));
    record.epoch_log = log.epochs;
    Ok(TrainedRun { net, record, seconds })
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let spec = family_spec(&a.family, a.training.degree, &a.params)?;
    let cfg = a.training.config()?;
    let exec = execution(&a.training.exec)?;
    a.training.dims(1, 1)?;
    let (train, test) = a.training.load()?;
    let mut run = train_family(&spec, &a.training, &cfg, &train, &test, exec)?;
    if a.record_timing {
        run.record.wall_clock_seconds = Some(run.seconds);
    }
    save_checkpoint(&a.out, &run.net, cfg.seed).map_err(format_error)?;
    write_document(&a.metrics_out, &run.record).map_err(format_error)?;
    let m = &run.record.metrics;
    println!(
        "{spec} accuracy={:.4} kappa={:.4} f1={:.4} params={} seconds={:.1}",
        m.overall_accuracy, m.kappa, m.f1_micro, run.record.parameter_count, run.seconds
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let exec = execution(&a.exec)?;
    let net = load_checkpoint(&a.model).map_err(format_error)?;
    let seed = crate::format::read_document::<crate::format::Checkpoint>(&a.model)
        .map_err(format_error)?
        .seed;
    let mut ds = load_mnist("mnist-eval", &a.images, &a.labels)?;
    if let Some(n) = a.limit {
        ds = subset(&ds, n, a.seed)?;
    }
    if ds.dim() != net.input_dim() || ds.num_classes() != net.output_dim() {
        return Err(CliError::data(format!(
            "checkpoint expects {} inputs and {} classes, data has {} and {}",
            net.input_dim(),
            net.output_dim(),
            ds.dim(),
            ds.num_classes()
        )));
    }
    let eval = evaluate(&net, &ds, exec).map_err(train_error)?;
    let record = RunRecord::new(&net, seed, data_record(&ds), eval.metrics, &eval.confusion);
    write_document(&a.metrics_out, &record).map_err(format_error)?;
    let m = &eval.metrics;
    println!(
        "{} accuracy={:.4} kappa={:.4} f1={:.4} samples={}",
        net.spec(),
        m.overall_accuracy,
        m.kappa,
        m.f1_micro,
        ds.len()
    );
    Ok(())
}

/// 17 significant digits, round-trip exact.
pub fn float_field(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::flags(format!("--range expects lo:hi with lo < hi, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Basis samples with header `x,n0,...,nD`; the grid includes both endpoints.
pub fn basis_csv(spec: &FamilySpec, max_degree: usize, lo: f64, hi: f64, samples: usize) -> Result<String, BasisError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string()];
    header.extend((0..=max_degree).map(|d| format!("n{d}")));
    wtr.write_record(&header).expect("in-memory write");
    for i in 0..samples {
        let x = if i + 1 == samples {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        };
        let e = eval_basis(spec, max_degree, x)?;
        let mut row = vec![float_field(x)];
        row.extend(e.values.iter().map(|&v| float_field(v)));
        wtr.write_record(&row).expect("in-memory write");
    }
    Ok(String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("ascii output"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn cmd_basis_dump(a: DumpArgs) -> Result<(), CliError> {
    let (lo, hi) = parse_range(&a.range)?;
    if a.samples < 2 {
        return Err(CliError::flags("--samples must be at least 2"));
    }
    if a.family == "all" {
        if !a.params.is_empty() {
            return Err(CliError::flags("--param cannot be combined with --family all"));
        }
        let dir = a
            .out
            .ok_or_else(|| CliError::flags("--family all needs --out <directory>"))?;
        fs::create_dir_all(&dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        for name in FAMILY_NAMES {
            let spec = FamilySpec::default_for(name, a.max_degree).map_err(basis_error)?;
            let text = basis_csv(&spec, a.max_degree, lo, hi, a.samples).map_err(basis_error)?;
            write_file(&dir.join(format!("{name}.csv")), &text)?;
        }
        return Ok(());
    }
    let spec = family_spec(&a.family, a.max_degree, &a.params)?;
    let text = basis_csv(&spec, a.max_degree, lo, hi, a.samples).map_err(basis_error)?;
    match a.out {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn param_string(spec: &FamilySpec) -> String {
    let mut s = String::new();
    for (i, (k, v)) in spec.params().iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        let _ = write!(s, "{k}={v}");
    }
    s
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let names: Vec<String> = if a.families.trim() == "all" {
        FAMILY_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        a.families.split(',').map(|s| s.trim().to_string()).collect()
    };
    let specs = names
        .iter()
        .map(|n| FamilySpec::default_for(n, a.training.degree).map_err(basis_error))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = a.training.config()?;
    let exec = execution(&a.training.exec)?;
    a.training.dims(1, 1)?;
    let (train, test) = a.training.load()?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "family",
        "params",
        "accuracy",
        "kappa",
        "f1_micro",
        "f1_macro",
        "parameter_count",
        "train_seconds",
        "status",
    ])
    .expect("in-memory write");
    for spec in &specs {
        let row = match train_family(spec, &a.training, &cfg, &train, &test, exec) {
            Ok(run) => {
                let m = run.record.metrics;
                println!("{} accuracy={:.4} seconds={:.1}", spec.name(), m.overall_accuracy, run.seconds);
                vec![
                    spec.name().to_string(),
                    param_string(spec),
                    float_field(m.overall_accuracy),
                    float_field(m.kappa),
                    float_field(m.f1_micro),
                    float_field(m.f1_macro),
                    run.record.parameter_count.to_string(),
                    float_field(run.seconds),
                    "ok".to_string(),
                ]
            }
            Err(e) if e.code == EXIT_NUMERIC => {
                eprintln!("{}: {}", spec.name(), e.message);
                let mut row = vec![spec.name().to_string(), param_string(spec)];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push("failed".to_string());
                row
            }
            Err(e) => return Err(e),
        };
        wtr.write_record(&row).expect("in-memory write");
    }
    let text = String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("ascii output");
    write_file(&a.out, &text)
}
