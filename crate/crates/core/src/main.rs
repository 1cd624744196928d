use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bfc_core::runner::{
    cmd_bench, cmd_cluster, cmd_eval, cmd_partition, cmd_train, DataFormat, DataSource,
    KernelChoice, RunConfig, TestSplit,
};
use bfc_core::{BfcError, ModelKind, WORKERS_ENV};

/// Best friend clustering with balanced per-cluster regression.
#[derive(Parser)]
#[command(name = "bfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the cluster hierarchy and report HCI per level.
    Cluster(RunArgs),
    /// Plan a balanced partition onto virtual processes.
    Partition(RunArgs),
    /// Train a per-cluster ensemble and evaluate it on the test split.
    Train(RunArgs),
    /// Evaluate a saved ensemble.
    Eval(RunArgs),
    /// Cluster and train over a set of datasets.
    Bench(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Dataset file.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// csv, libsvm or xyl; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<DataFormat>,
    /// Built-in synthetic dataset: r15, aggregation, compound, cadata, city.
    #[arg(long)]
    synthetic: Option<String>,
    /// Seed for synthetic data generation.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Force standardization on or off.
    #[arg(long)]
    standardize: Option<bool>,
    /// Virtual process count.
    #[arg(short, long, default_value_t = 1)]
    p: usize,
    /// Process count used to size groups (default: p).
    #[arg(long)]
    split_p: Option<usize>,
    /// Worker threads.
    #[arg(short, long, env = WORKERS_ENV, default_value_t = 1)]
    workers: usize,
    /// Partition slack.
    #[arg(long, default_value_t = bfc_core::DEFAULT_DELTA)]
    delta: f64,
    /// Seed for train/test and validation splits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "krr")]
    model: ModelKind,
    /// rbf or linear.
    #[arg(long, default_value = "rbf")]
    kernel: String,
    /// RBF width; median heuristic when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// SVR C values as multiples of std(y).
    #[arg(long, value_delimiter = ',')]
    svr_c: Option<Vec<f64>>,
    /// SVR epsilon values as multiples of std(y).
    #[arg(long, value_delimiter = ',')]
    svr_epsilon: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    validation_fraction: f64,
    /// Separate test file.
    #[arg(long, conflicts_with_all = ["test_count", "test_fraction", "no_test"])]
    test: Option<PathBuf>,
    #[arg(long)]
    test_format: Option<DataFormat>,
    #[arg(long, conflicts_with_all = ["test_fraction", "no_test"])]
    test_count: Option<usize>,
    #[arg(long, conflicts_with = "no_test")]
    test_fraction: Option<f64>,
    /// Train on all rows (train) or evaluate on all rows (eval).
    #[arg(long)]
    no_test: bool,
    /// Ensemble file for eval (default: <out>/ensemble.bin).
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    no_svg: bool,
    /// Write per-sample assignments into hierarchy.json.
    #[arg(long)]
    assignments: bool,
    /// Bench datasets: synthetic names or file paths.
    #[arg(long, value_delimiter = ',')]
    sets: Option<Vec<String>>,
    /// Bench process counts.
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<usize>>,
}

fn source_of(spec: &str, format: Option<DataFormat>, seed: u64) -> DataSource {
    let path = PathBuf::from(spec);
    if path.exists() {
        let format = format.unwrap_or_else(|| DataFormat::from_path(&path));
        DataSource::File { path, format }
    } else {
        DataSource::Synthetic {
            name: spec.to_string(),
            seed,
        }
    }
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, BfcError> {
        let mut cfg = RunConfig::default();
        cfg.data = match (&self.data, &self.synthetic) {
            (Some(path), _) => DataSource::File {
                format: self.format.unwrap_or_else(|| DataFormat::from_path(path)),
                path: path.clone(),
            },
            (None, Some(name)) => DataSource::Synthetic {
                name: name.clone(),
                seed: self.data_seed,
            },
            (None, None) => cfg.data,
        };
        cfg.test = if let Some(path) = self.test {
            let format = self
                .test_format
                .unwrap_or_else(|| DataFormat::from_path(&path));
            TestSplit::File { path, format }
        } else if let Some(k) = self.test_count {
            TestSplit::Count(k)
        } else if let Some(f) = self.test_fraction {
            TestSplit::Fraction(f)
        } else if self.no_test {
            TestSplit::None
        } else {
            TestSplit::Auto
        };
        cfg.standardize = self.standardize;
        cfg.model = self.model;
        cfg.kernel = match (self.kernel.to_ascii_lowercase().as_str(), self.sigma) {
            ("rbf", None) => KernelChoice::RbfMedian,
            ("rbf", Some(s)) => KernelChoice::Rbf(s),
            ("linear", _) => KernelChoice::Linear,
            (other, _) => {
                return Err(BfcError::InvalidArgument(format!(
                    "unknown kernel '{other}'"
                )))
            }
        };
        if let Some(l) = self.lambda {
            cfg.lambdas = l;
        }
        if let Some(c) = self.svr_c {
            cfg.svr_c = c;
        }
        if let Some(e) = self.svr_epsilon {
            cfg.svr_epsilon = e;
        }
        cfg.p = self.p;
        cfg.split_p = self.split_p;
        cfg.workers = self.workers;
        cfg.delta = self.delta;
        cfg.seed = self.seed;
        cfg.validation_fraction = self.validation_fraction;
        cfg.out_dir = self.out;
        cfg.ensemble = self.ensemble;
        cfg.svg = !self.no_svg;
        cfg.assignments = self.assignments;
        if let Some(sets) = self.sets {
            cfg.bench_sets = sets
                .iter()
                .map(|s| source_of(s, self.format, self.data_seed))
                .collect();
        }
        if let Some(ps) = self.p_list {
            cfg.bench_p = ps;
        }
        Ok(cfg)
    }
}

fn error_line(kind: &str, message: &str) -> String {
    let msg = serde_json::json!({ "kind": kind, "message": message });
    format!("error: {msg}")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return ExitCode::from(2);
        }
    };
    let (args, run): (RunArgs, fn(&RunConfig) -> Result<_, BfcError>) = match cli.command {
        Command::Cluster(a) => (a, cmd_cluster),
        Command::Partition(a) => (a, cmd_partition),
        Command::Train(a) => (a, cmd_train),
        Command::Eval(a) => (a, cmd_eval),
        Command::Bench(a) => (a, cmd_bench),
    };
    match args.into_config().and_then(|cfg| run(&cfg)) {
        Ok(report) => {
            print!("{}", report.to_csv());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
