//! Python bindings for `bfc_core`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use bfc_core::runner::{hyper_grid, partition_for, synthetic, KernelChoice, RunConfig};
use bfc_core::{BfcError, DataMatrix, ModelKind, WorkerPool};

fn to_py(e: BfcError) -> PyErr {
    match e {
        BfcError::Io(io) => PyIOError::new_err(io.to_string()),
        e => PyValueError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_rows(&rows).map_err(to_py)
}

fn pool(workers: usize) -> PyResult<WorkerPool> {
    WorkerPool::new(workers).map_err(to_py)
}

/// Nearest-neighbour targets and edge weights of every point.
#[pyfunction]
#[pyo3(signature = (points, workers = 1))]
fn best_friend_graph(points: Vec<Vec<f64>>, workers: usize) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let g = bfc_core::build_best_friend_graph(&matrix(points)?, workers).map_err(to_py)?;
    Ok((g.targets().to_vec(), g.weights().to_vec()))
}

/// Cluster hierarchy over a point set.
#[pyclass(frozen)]
struct Hierarchy {
    inner: bfc_core::Hierarchy,
}

#[pymethods]
impl Hierarchy {
    #[new]
    #[pyo3(signature = (points, standardize = false, workers = 1))]
    fn new(points: Vec<Vec<f64>>, standardize: bool, workers: usize) -> PyResult<Self> {
        let c = bfc_core::runner::cluster_dataset(&matrix(points)?, standardize, &pool(workers)?)
            .map_err(to_py)?;
        Ok(Self { inner: c.hierarchy })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn level_sizes(&self) -> Vec<usize> {
        self.inner.level_sizes()
    }

    #[getter]
    fn hci(&self) -> Vec<f64> {
        self.inner.hci.clone()
    }

    /// 1-based level with the largest HCI.
    #[getter]
    fn optimal_level(&self) -> usize {
        self.inner.optimal_level
    }

    /// Organized order: position -> original sample index.
    #[getter]
    fn order(&self) -> Vec<usize> {
        self.inner.order.clone()
    }

    /// Cluster id of every sample at a 1-based level (default: optimal).
    #[pyo3(signature = (level = None))]
    fn assignment(&self, level: Option<usize>) -> PyResult<Vec<usize>> {
        Ok(self.level(level)?.assignment.clone())
    }

    #[pyo3(signature = (level = None))]
    fn compactness(&self, level: Option<usize>) -> PyResult<Vec<f64>> {
        Ok(self.level(level)?.compactness.clone())
    }

    #[pyo3(signature = (level = None))]
    fn dispersion(&self, level: Option<usize>) -> PyResult<Option<Vec<f64>>> {
        Ok(self.level(level)?.dispersion.clone())
    }

    /// Balanced partition onto `p` virtual processes.
    #[pyo3(signature = (p, delta = bfc_core::DEFAULT_DELTA, split_p = None))]
    fn partition(&self, p: usize, delta: f64, split_p: Option<usize>) -> PyResult<Plan> {
        let plan = partition_for(&self.inner, p, split_p, delta).map_err(to_py)?;
        Ok(Plan { inner: plan })
    }

    fn to_json(&self) -> PyResult<String> {
        bfc_core::runner::hierarchy_json(&self.inner, false, true).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Hierarchy(n={}, levels={:?}, optimal_level={})",
            self.inner.n,
            self.inner.level_sizes(),
            self.inner.optimal_level
        )
    }
}

impl Hierarchy {
    fn level(&self, level: Option<usize>) -> PyResult<&bfc_core::ClusterLevel> {
        let k = level.unwrap_or(self.inner.optimal_level);
        if k == 0 || k > self.inner.num_levels() {
            return Err(PyValueError::new_err(format!("no level {k}")));
        }
        Ok(self.inner.level(k))
    }
}

#[pyclass(frozen)]
struct Plan {
    inner: bfc_core::PartitionPlan,
}

#[pymethods]
impl Plan {
    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn loads(&self) -> Vec<usize> {
        self.inner.loads.clone()
    }

    #[getter]
    fn load_bound(&self) -> f64 {
        self.inner.load_bound()
    }

    /// `(start, len)` of every group in the organized order.
    #[getter]
    fn groups(&self) -> Vec<(usize, usize)> {
        self.inner.groups.iter().map(|g| (g.start, g.len)).collect()
    }

    #[getter]
    fn process_of(&self) -> Vec<usize> {
        self.inner.process_of.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Plan(p={}, groups={}, loads={:?})",
            self.inner.p,
            self.inner.groups.len(),
            self.inner.loads
        )
    }
}

/// Per-cluster regression ensemble.
#[pyclass(frozen)]
struct Ensemble {
    inner: bfc_core::RegressionEnsemble,
}

#[pymethods]
impl Ensemble {
    /// Clusters `x`, partitions onto `p` processes and trains one model per
    /// group, choosing hyperparameters on a seeded validation split.
    #[staticmethod]
    #[pyo3(signature = (
        x, y, model = "krr", p = 1, delta = bfc_core::DEFAULT_DELTA, split_p = None,
        lambdas = None, sigma = None, standardize = true, seed = 0, workers = 1
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        model: &str,
        p: usize,
        delta: f64,
        split_p: Option<usize>,
        lambdas: Option<Vec<f64>>,
        sigma: Option<f64>,
        standardize: bool,
        seed: u64,
        workers: usize,
    ) -> PyResult<Self> {
        let mut cfg = RunConfig {
            model: model.parse::<ModelKind>().map_err(to_py)?,
            p,
            delta,
            split_p,
            standardize: Some(standardize),
            seed,
            workers,
            kernel: sigma.map_or(KernelChoice::RbfMedian, KernelChoice::Rbf),
            ..RunConfig::default()
        };
        if let Some(l) = lambdas {
            cfg.lambdas = l;
        }
        cfg.validate().map_err(to_py)?;
        let ds = bfc_core::runner::Dataset {
            x: matrix(x)?,
            y: Some(y),
            labels: None,
        };
        let t = bfc_core::runner::train_pipeline(&ds, &cfg, &pool(workers)?).map_err(to_py)?;
        Ok(Self { inner: t.ensemble })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: bfc_core::RegressionEnsemble::load(&path).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    #[pyo3(signature = (x, workers = 1))]
    fn predict(&self, x: Vec<Vec<f64>>, workers: usize) -> PyResult<Vec<f64>> {
        self.inner
            .predict(&matrix(x)?, &pool(workers)?)
            .map_err(to_py)
    }

    /// Test MSE after routing every row to its nearest group.
    #[pyo3(signature = (x, y, workers = 1))]
    fn evaluate(&self, x: Vec<Vec<f64>>, y: Vec<f64>, workers: usize) -> PyResult<f64> {
        Ok(self
            .inner
            .evaluate(&matrix(x)?, &y, &pool(workers)?)
            .map_err(to_py)?
            .mse)
    }

    #[getter]
    fn params(&self) -> String {
        self.inner.params.describe()
    }

    #[getter]
    fn num_groups(&self) -> usize {
        self.inner.groups.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Ensemble({}, p={}, groups={})",
            self.inner.params.describe(),
            self.inner.p,
            self.inner.groups.len()
        )
    }
}

#[pyfunction]
fn ami(labels_true: Vec<i64>, labels_pred: Vec<i64>) -> PyResult<f64> {
    bfc_core::ami(&labels_true, &labels_pred).map_err(to_py)
}

#[pyfunction]
fn mse(pred: Vec<f64>, truth: Vec<f64>) -> PyResult<f64> {
    bfc_core::mse(&pred, &truth).map_err(to_py)
}

/// HCI from per-cluster compactness and dispersion.
#[pyfunction]
fn hci(compactness: Vec<f64>, dispersion: Vec<f64>) -> PyResult<f64> {
    if compactness.len() != dispersion.len() {
        return Err(PyValueError::new_err(
            "compactness and dispersion differ in length",
        ));
    }
    Ok(bfc_core::hci_from(&compactness, &dispersion))
}

/// Built-in synthetic dataset as `(x, labels, y)`; one of the last two is None.
#[pyfunction]
#[pyo3(signature = (name, seed = 0))]
#[allow(clippy::type_complexity)]
fn synthetic_dataset(
    name: &str,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Option<Vec<i64>>, Option<Vec<f64>>)> {
    let ds = synthetic(name, seed).map_err(to_py)?;
    Ok((
        ds.x.iter_rows().map(|r| r.to_vec()).collect(),
        ds.labels,
        ds.y,
    ))
}

/// Default hyperparameter grid description for a model kind on `x, y`.
#[pyfunction]
fn default_grid(model: &str, x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Vec<String>> {
    let cfg = RunConfig {
        model: model.parse::<ModelKind>().map_err(to_py)?,
        ..RunConfig::default()
    };
    Ok(hyper_grid(&cfg, &matrix(x)?, &y)
        .map_err(to_py)?
        .iter()
        .map(|p| p.describe())
        .collect())
}

#[pymodule]
fn bfc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Hierarchy>()?;
    m.add_class::<Plan>()?;
    m.add_class::<Ensemble>()?;
    m.add_function(wrap_pyfunction!(best_friend_graph, m)?)?;
    m.add_function(wrap_pyfunction!(ami, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(hci, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(default_grid, m)?)?;
    Ok(())
}
