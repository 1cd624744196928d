//! Configuration, end-to-end pipelines and the commands behind the CLI.

pub mod dataset;
pub mod report;
pub mod svg;
pub mod synth;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{DataMatrix, Standardizer};
use crate::error::{BfcError, Result};
use crate::hierarchy::{build_hierarchy, organize, Hierarchy};
use crate::metrics::ami;
use crate::partition::{merge_pack, plan_partition, PartitionPlan, DEFAULT_DELTA};
use crate::pool::WorkerPool;
use crate::regress::{
    fit_with_validation, median_heuristic, Candidate, Kernel, ModelKind, ModelParams,
    RegressionEnsemble, SvrParams,
};

pub use dataset::{load_dataset, parse_dataset, DataFormat, Dataset};
pub use report::{LevelRow, ProcessRow, RegressionRow, Report, Timing};
pub use synth::{city_example, synthetic};

use report::secs;

/// Rows used for the RBF median heuristic.
const SIGMA_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File { path: PathBuf, format: DataFormat },
    Synthetic { name: String, seed: u64 },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::File { path, format } => load_dataset(path, *format),
            DataSource::Synthetic { name, seed } => synthetic(name, *seed),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DataSource::File { path, .. } => path.display().to_string(),
            DataSource::Synthetic { name, seed } => format!("synthetic:{name}:{seed}"),
        }
    }

    /// Size of the published test split, where one exists.
    fn published_test_size(&self) -> Option<usize> {
        match self {
            DataSource::Synthetic { name, .. } if name.eq_ignore_ascii_case("cadata") => Some(2208),
            DataSource::File { path, .. } => {
                let stem = path.file_stem()?.to_str()?.to_ascii_lowercase();
                (stem == "cadata").then_some(2208)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestSplit {
    /// Published split if known, otherwise a seeded 10% hold-out.
    Auto,
    /// Train on everything, no test set.
    None,
    File {
        path: PathBuf,
        format: DataFormat,
    },
    /// Seeded hold-out of this many rows.
    Count(usize),
    /// Seeded hold-out of this fraction of rows.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    /// RBF with sigma from the median pairwise distance.
    RbfMedian,
    Rbf(f64),
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataSource,
    pub test: TestSplit,
    /// `None` standardizes regression data and leaves labelled data alone.
    pub standardize: Option<bool>,
    pub model: ModelKind,
    pub kernel: KernelChoice,
    pub lambdas: Vec<f64>,
    /// SVR box constants, as multiples of the target's standard deviation.
    pub svr_c: Vec<f64>,
    /// SVR tube widths, as multiples of the target's standard deviation.
    pub svr_epsilon: Vec<f64>,
    /// Virtual process count.
    pub p: usize,
    /// Process count used to size groups; defaults to `p`. Fixing it makes
    /// the groups, and therefore the models, independent of `p`.
    pub split_p: Option<usize>,
    pub workers: usize,
    pub delta: f64,
    /// Seeds the train/test and validation splits only.
    pub seed: u64,
    pub validation_fraction: f64,
    pub out_dir: Option<PathBuf>,
    /// Ensemble file for `eval`; defaults to `<out_dir>/ensemble.bin`.
    pub ensemble: Option<PathBuf>,
    pub svg: bool,
    /// Include per-sample assignments in `hierarchy.json`.
    pub assignments: bool,
    /// Datasets for `bench`.
    pub bench_sets: Vec<DataSource>,
    /// Process counts for regression runs in `bench`.
    pub bench_p: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic {
                name: "r15".into(),
                seed: 0,
            },
            test: TestSplit::Auto,
            standardize: None,
            model: ModelKind::Krr,
            kernel: KernelChoice::RbfMedian,
            lambdas: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
            svr_c: vec![1.0, 10.0, 100.0],
            svr_epsilon: vec![0.01, 0.1],
            p: 1,
            split_p: None,
            workers: WorkerPool::default_workers(),
            delta: DEFAULT_DELTA,
            seed: 0,
            validation_fraction: 0.1,
            out_dir: None,
            ensemble: None,
            svg: true,
            assignments: false,
            bench_sets: ["r15", "aggregation", "compound", "cadata"]
                .iter()
                .map(|n| DataSource::Synthetic {
                    name: n.to_string(),
                    seed: 0,
                })
                .collect(),
            bench_p: vec![1, 4, 16],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BfcError::InvalidArgument(m));
        if self.p == 0 {
            return bad("p must be >= 1".into());
        }
        if self.split_p == Some(0) {
            return bad("split-p must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation fraction must be in [0, 1), got {}",
                self.validation_fraction
            ));
        }
        if let KernelChoice::Rbf(s) = self.kernel {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma must be > 0, got {s}"));
            }
        }
        Ok(())
    }

    pub fn pool(&self) -> Result<WorkerPool> {
        WorkerPool::new(self.workers)
    }

    fn standardize_for(&self, ds: &Dataset) -> bool {
        self.standardize.unwrap_or(ds.y.is_some())
    }
}

/// A clustered dataset in model space.
#[derive(Debug, Clone)]
pub struct Clustered {
    pub hierarchy: Hierarchy,
    pub standardizer: Standardizer,
    pub standardized: bool,
    /// Features after standardization, original row order.
    pub x: DataMatrix,
    pub seconds: f64,
}

pub fn cluster_dataset(x: &DataMatrix, standardize: bool, pool: &WorkerPool) -> Result<Clustered> {
    let t = Instant::now();
    let standardizer = if standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(x.cols())
    };
    let z = standardizer.apply(x)?;
    let hierarchy = build_hierarchy(&z, pool)?;
    Ok(Clustered {
        hierarchy,
        standardizer,
        standardized: standardize,
        x: z,
        seconds: secs(t.elapsed()),
    })
}

/// Plans groups for `split_p` processes (default `p`) and packs them onto `p`.
pub fn partition_for(
    h: &Hierarchy,
    p: usize,
    split_p: Option<usize>,
    delta: f64,
) -> Result<PartitionPlan> {
    let granularity = split_p.unwrap_or(p);
    let plan = plan_partition(h, granularity, delta)?;
    if granularity == p {
        Ok(plan)
    } else {
        merge_pack(&plan.groups, p, delta)
    }
}

fn std_dev(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Candidate hyperparameters for `cfg.model` on model-space training data.
pub fn hyper_grid(cfg: &RunConfig, x: &DataMatrix, y: &[f64]) -> Result<Vec<ModelParams>> {
    let kernel = match cfg.kernel {
        KernelChoice::RbfMedian => Kernel::Rbf {
            sigma: median_heuristic(x, SIGMA_SAMPLES),
        },
        KernelChoice::Rbf(sigma) => Kernel::Rbf { sigma },
        KernelChoice::Linear => Kernel::Linear,
    };
    let grid: Vec<ModelParams> = match cfg.model {
        ModelKind::Lr => vec![ModelParams::Lr],
        ModelKind::Krr => cfg
            .lambdas
            .iter()
            .map(|&lambda| ModelParams::Krr { lambda, kernel })
            .collect(),
        ModelKind::Svr => {
            let s = std_dev(y);
            let s = if s > 0.0 { s } else { 1.0 };
            cfg.svr_c
                .iter()
                .flat_map(|&c| {
                    cfg.svr_epsilon
                        .iter()
                        .map(move |&e| ModelParams::Svr(SvrParams::new(e * s, c * s, kernel)))
                })
                .collect()
        }
    };
    if grid.is_empty() {
        return Err(BfcError::InvalidArgument(format!(
            "empty hyperparameter grid for {}",
            cfg.model
        )));
    }
    Ok(grid)
}

/// Splits `ds` into train and test rows according to `split`. Both parts
/// keep the original row order.
pub fn split_train_test(
    ds: Dataset,
    split: &TestSplit,
    source: &DataSource,
    seed: u64,
) -> Result<(Dataset, Option<Dataset>)> {
    let n = ds.len();
    let k = match split {
        TestSplit::None => return Ok((ds, None)),
        TestSplit::File { path, format } => {
            let test = load_dataset(path, *format)?;
            if test.x.cols() != ds.x.cols() {
                return Err(BfcError::DimensionMismatch {
                    expected: ds.x.cols(),
                    got: test.x.cols(),
                });
            }
            return Ok((ds, Some(test)));
        }
        TestSplit::Count(k) => *k,
        TestSplit::Fraction(f) => (n as f64 * f).round() as usize,
        TestSplit::Auto => source
            .published_test_size()
            .filter(|&k| k < n)
            .unwrap_or_else(|| (n as f64 * 0.1).round() as usize),
    };
    if k == 0 || k >= n {
        return Err(BfcError::InvalidArgument(format!(
            "test split of {k} rows leaves no training data out of {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test: Vec<usize> = idx[..k].to_vec();
    let mut train: Vec<usize> = idx[k..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((ds.select(&train), Some(ds.select(&test))))
}

/// Result of clustering, partitioning and training.
#[derive(Debug, Clone)]
pub struct Trained {
    pub clustered: Clustered,
    pub plan: PartitionPlan,
    pub ensemble: RegressionEnsemble,
    pub candidates: Vec<Candidate>,
    pub timing: Timing,
}

/// Cluster, organize, partition and train on a labelled-by-target dataset.
pub fn train_pipeline(train: &Dataset, cfg: &RunConfig, pool: &WorkerPool) -> Result<Trained> {
    let y = train.y.as_ref().ok_or_else(|| {
        BfcError::InvalidArgument("training data has no regression target".into())
    })?;
    let clustered = cluster_dataset(&train.x, cfg.standardize_for(train), pool)?;
    let t = Instant::now();
    let h = &clustered.hierarchy;
    let (x_org, order) = organize(&clustered.x, h)?;
    let y_org: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let plan = partition_for(h, cfg.p, cfg.split_p, cfg.delta)?;
    let clustering = clustered.seconds + secs(t.elapsed());

    let t = Instant::now();
    let grid = hyper_grid(cfg, &x_org, &y_org)?;
    let (ensemble, candidates) = fit_with_validation(
        &x_org,
        &y_org,
        &plan,
        &grid,
        clustered.standardizer.clone(),
        cfg.validation_fraction,
        cfg.seed,
        pool,
    )?;
    let regression = secs(t.elapsed());
    Ok(Trained {
        clustered,
        plan,
        ensemble,
        candidates,
        timing: Timing {
            clustering,
            regression,
            reduce: 0.0,
        },
    })
}

#[derive(Serialize)]
struct LevelDoc<'a> {
    level: usize,
    clusters: usize,
    hci: f64,
    counts: &'a [usize],
    compactness: &'a [f64],
    dispersion: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assignment: Option<&'a [usize]>,
}

#[derive(Serialize)]
struct HierarchyDoc<'a> {
    n: usize,
    dim: usize,
    standardized: bool,
    optimal_level: usize,
    levels: Vec<LevelDoc<'a>>,
}

/// JSON summary of a hierarchy: per level, counts, HCI and optionally the
/// sample assignment.
pub fn hierarchy_json(h: &Hierarchy, standardized: bool, assignments: bool) -> Result<String> {
    let doc = HierarchyDoc {
        n: h.n,
        dim: h.dim,
        standardized,
        optimal_level: h.optimal_level,
        levels: h
            .levels
            .iter()
            .zip(&h.hci)
            .map(|(l, &hci)| LevelDoc {
                level: l.level,
                clusters: l.num_clusters(),
                hci,
                counts: &l.counts,
                compactness: &l.compactness,
                dispersion: l.dispersion.as_deref(),
                assignment: assignments.then_some(l.assignment.as_slice()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[derive(Serialize)]
struct ProcessDoc<'a> {
    process: usize,
    load: usize,
    groups: Vec<&'a crate::partition::Group>,
}

#[derive(Serialize)]
struct PartitionDoc<'a> {
    p: usize,
    n: usize,
    delta: f64,
    load_bound: f64,
    processes: Vec<ProcessDoc<'a>>,
}

pub fn partition_json(plan: &PartitionPlan) -> Result<String> {
    let doc = PartitionDoc {
        p: plan.p,
        n: plan.n,
        delta: plan.delta,
        load_bound: plan.load_bound(),
        processes: (0..plan.p)
            .map(|q| {
                let mut ids = plan.processes[q].clone();
                ids.sort_unstable();
                ProcessDoc {
                    process: q,
                    load: plan.loads[q],
                    groups: ids.iter().map(|&g| &plan.groups[g]).collect(),
                }
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn base_report(cfg: &RunConfig, ds: &Dataset, command: &str) -> Report {
    let mut r = Report::default();
    r.meta("command", command);
    r.meta("dataset", cfg.data.name());
    r.meta("n", ds.len());
    r.meta("dim", ds.x.cols());
    r
}

fn write_cluster_outputs(cfg: &RunConfig, dir: &Path, c: &Clustered, title: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("hierarchy.json"),
        hierarchy_json(&c.hierarchy, c.standardized, cfg.assignments)?,
    )?;
    if cfg.svg {
        if let Some(svg) = svg::scatter_svg(&c.x, &c.hierarchy.optimal().assignment, title) {
            std::fs::write(dir.join("clusters.svg"), svg)?;
        }
    }
    Ok(())
}

/// Builds the hierarchy, reports per-level HCI and, for labelled data, AMI
/// at the optimal level.
pub fn cmd_cluster(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let ds = cfg.data.load()?;
    let c = cluster_dataset(&ds.x, cfg.standardize_for(&ds), &pool)?;
    let h = &c.hierarchy;
    let mut r = base_report(cfg, &ds, "cluster");
    r.meta("standardize", c.standardized);
    r.meta("optimal_level", h.optimal_level);
    r.meta("clusters_at_optimal", h.optimal().num_clusters());
    r.set_levels(h);
    if let Some(labels) = &ds.labels {
        r.ami = Some(ami(labels, &h.optimal().assignment)?);
    }
    r.timing.clustering = c.seconds;
    if let Some(dir) = &cfg.out_dir {
        write_cluster_outputs(cfg, dir, &c, &cfg.data.name())?;
        r.write(dir)?;
    }
    Ok(r)
}

/// Clusters and plans a balanced partition onto `p` virtual processes.
pub fn cmd_partition(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let ds = cfg.data.load()?;
    let c = cluster_dataset(&ds.x, cfg.standardize_for(&ds), &pool)?;
    let plan = partition_for(&c.hierarchy, cfg.p, cfg.split_p, cfg.delta)?;
    let mut r = base_report(cfg, &ds, "partition");
    r.meta("standardize", c.standardized);
    r.meta("optimal_level", c.hierarchy.optimal_level);
    r.meta("p", cfg.p);
    r.meta("split_p", cfg.split_p.unwrap_or(cfg.p));
    r.meta("delta", cfg.delta);
    r.meta("groups", plan.groups.len());
    r.meta("load_bound", plan.load_bound());
    r.set_levels(&c.hierarchy);
    r.set_partition(&plan);
    r.timing.clustering = c.seconds;
    if let Some(dir) = &cfg.out_dir {
        write_cluster_outputs(cfg, dir, &c, &cfg.data.name())?;
        std::fs::write(dir.join("partition.json"), partition_json(&plan)?)?;
        r.write(dir)?;
    }
    Ok(r)
}

fn add_mse_rows(r: &mut Report, m: &crate::regress::MseReport) {
    r.mse = Some(m.mse);
    r.meta("test_samples", m.k);
    for (q, (&sse, &k)) in m.per_process.iter().zip(&m.samples_per_process).enumerate() {
        r.extra
            .push(("evaluation".into(), q, "sse".into(), sse.to_string()));
        r.extra
            .push(("evaluation".into(), q, "samples".into(), k.to_string()));
    }
}

/// Trains a per-group ensemble, saves it and evaluates on the test split.
pub fn cmd_train(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let ds = cfg.data.load()?;
    let (train, test) = split_train_test(ds, &cfg.test, &cfg.data, cfg.seed)?;
    let t = train_pipeline(&train, cfg, &pool)?;

    let mut r = base_report(cfg, &train, "train");
    r.meta("standardize", t.clustered.standardized);
    r.meta("model", cfg.model);
    r.meta("p", cfg.p);
    r.meta("split_p", cfg.split_p.unwrap_or(cfg.p));
    r.meta("delta", cfg.delta);
    r.meta("seed", cfg.seed);
    r.meta("optimal_level", t.clustered.hierarchy.optimal_level);
    r.meta("groups", t.plan.groups.len());
    r.set_levels(&t.clustered.hierarchy);
    r.set_partition(&t.plan);
    r.regression = t
        .candidates
        .iter()
        .map(|c| RegressionRow {
            model: c.params.kind().to_string(),
            params: c.params.describe(),
            validation_mse: c.validation_mse,
            selected: c.params == t.ensemble.params,
        })
        .collect();
    r.timing = t.timing;
    if let Some(test) = &test {
        let y = test.y.as_ref().ok_or_else(|| {
            BfcError::InvalidArgument("test data has no regression target".into())
        })?;
        let start = Instant::now();
        let m = t.ensemble.evaluate(&test.x, y, &pool)?;
        r.timing.reduce = secs(start.elapsed());
        add_mse_rows(&mut r, &m);
    }
    if let Some(dir) = &cfg.out_dir {
        write_cluster_outputs(cfg, dir, &t.clustered, &cfg.data.name())?;
        std::fs::write(dir.join("partition.json"), partition_json(&t.plan)?)?;
        t.ensemble.save(&dir.join("ensemble.bin"))?;
        r.write(dir)?;
    }
    Ok(r)
}

fn ensemble_path(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.ensemble
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(|d| d.join("ensemble.bin")))
        .ok_or_else(|| BfcError::InvalidArgument("no ensemble file given".into()))
}

/// Loads a saved ensemble and reports test MSE. Without an explicit test
/// file the test rows are the same seeded split `train` held out.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let path = ensemble_path(cfg)?;
    if !path.exists() {
        return Err(BfcError::InvalidArgument(format!(
            "ensemble file {} not found",
            path.display()
        )));
    }
    let ens = RegressionEnsemble::load(&path)?;
    let test = match &cfg.test {
        TestSplit::File { path, format } => load_dataset(path, *format)?,
        TestSplit::None => cfg.data.load()?,
        split => {
            let (_, test) = split_train_test(cfg.data.load()?, split, &cfg.data, cfg.seed)?;
            test.expect("hold-out split yields a test set")
        }
    };
    let y = test
        .y
        .as_ref()
        .ok_or_else(|| BfcError::InvalidArgument("test data has no regression target".into()))?;
    let mut r = base_report(cfg, &test, "eval");
    r.meta("model", ens.params.kind());
    r.meta("params", ens.params.describe());
    r.meta("p", ens.p);
    r.meta("groups", ens.groups.len());
    let start = Instant::now();
    let m = ens.evaluate(&test.x, y, &pool)?;
    r.timing.reduce = secs(start.elapsed());
    add_mse_rows(&mut r, &m);
    if let Some(dir) = &cfg.out_dir {
        r.write(dir)?;
    }
    Ok(r)
}

/// Runs clustering on every bench dataset and, for regression data, the full
/// training pipeline once per process count in `bench_p`.
pub fn cmd_bench(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    let mut r = Report::default();
    r.meta("command", "bench");
    r.meta("model", cfg.model);
    r.meta("delta", cfg.delta);
    let mut row = 0;
    for source in &cfg.bench_sets {
        let ds = source.load()?;
        let push = |r: &mut Report, f: &str, v: String| {
            r.extra.push(("bench".into(), row, f.into(), v));
        };
        let standardize = cfg.standardize.unwrap_or(ds.y.is_some());
        let c = cluster_dataset(&ds.x, standardize, &pool)?;
        let h = &c.hierarchy;
        push(&mut r, "dataset", source.name());
        push(&mut r, "n", ds.len().to_string());
        push(&mut r, "levels", h.num_levels().to_string());
        let sizes: Vec<String> = h.level_sizes().iter().map(|s| s.to_string()).collect();
        push(&mut r, "level_sizes", sizes.join(" "));
        push(&mut r, "optimal_level", h.optimal_level.to_string());
        if let Some(labels) = &ds.labels {
            push(
                &mut r,
                "ami",
                ami(labels, &h.optimal().assignment)?.to_string(),
            );
        }
        r.timing.clustering += c.seconds;
        row += 1;

        if ds.y.is_some() {
            let (train, test) = split_train_test(ds, &TestSplit::Auto, source, cfg.seed)?;
            let test = test.expect("auto split yields a test set");
            let split_p = cfg.split_p.or(cfg.bench_p.iter().copied().max());
            for &p in &cfg.bench_p {
                let run = RunConfig {
                    data: source.clone(),
                    p,
                    split_p,
                    ..cfg.clone()
                };
                let t = train_pipeline(&train, &run, &pool)?;
                let start = Instant::now();
                let m = t
                    .ensemble
                    .evaluate(&test.x, test.y.as_ref().unwrap(), &pool)?;
                let mut timing = t.timing;
                timing.reduce = secs(start.elapsed());
                r.timing.add(timing);
                let mut push =
                    |f: &str, v: String| r.extra.push(("bench".into(), row, f.into(), v));
                push("dataset", source.name());
                push("p", p.to_string());
                push("groups", t.plan.groups.len().to_string());
                push("max_load", t.plan.max_load().to_string());
                push("params", t.ensemble.params.describe());
                push("mse", m.mse.to_string());
                row += 1;
            }
        }
    }
    if let Some(dir) = &cfg.out_dir {
        r.write(dir)?;
    }
    Ok(r)
}
