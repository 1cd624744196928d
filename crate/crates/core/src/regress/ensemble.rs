//! One regression model per partition group, with nearest-center routing.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Standardizer};
use crate::distance::squared_distance;
use crate::error::{BfcError, Result};
use crate::partition::PartitionPlan;
use crate::pool::WorkerPool;
use crate::regress::kernel::Kernel;
use crate::regress::krr::{train_krr, KrrModel};
use crate::regress::lr::{train_lr, LinearModel};
use crate::regress::svr::{train_svr, SvrModel, SvrParams};

const MAGIC: &[u8; 8] = b"BFCENSM\0";
pub const ENSEMBLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Krr,
    Svr,
}

impl std::str::FromStr for ModelKind {
    type Err = BfcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(ModelKind::Lr),
            "krr" => Ok(ModelKind::Krr),
            "svr" => Ok(ModelKind::Svr),
            other => Err(BfcError::InvalidArgument(format!(
                "unknown model kind '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Lr => "lr",
            ModelKind::Krr => "krr",
            ModelKind::Svr => "svr",
        })
    }
}

/// Hyperparameters of one model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Lr,
    Krr { lambda: f64, kernel: Kernel },
    Svr(SvrParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Lr => ModelKind::Lr,
            ModelParams::Krr { .. } => ModelKind::Krr,
            ModelParams::Svr(_) => ModelKind::Svr,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelParams::Lr => "lr".into(),
            ModelParams::Krr { lambda, kernel } => {
                format!("krr lambda={lambda} kernel={}", kernel.name())
            }
            ModelParams::Svr(p) => format!(
                "svr epsilon={} C={} kernel={}",
                p.epsilon,
                p.c,
                p.kernel.name()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Lr(LinearModel),
    Krr(KrrModel),
    Svr(SvrModel),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Lr(m) => m.predict(x),
            Model::Krr(m) => m.predict(x),
            Model::Svr(m) => m.predict(x),
        }
    }
}

/// Trains one model. Kernel models are fitted to the centered target and
/// carry the mean as their offset.
pub fn train_model(x: &DataMatrix, y: &[f64], params: &ModelParams) -> Result<Model> {
    let mean = if y.is_empty() {
        0.0
    } else {
        y.iter().sum::<f64>() / y.len() as f64
    };
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    Ok(match *params {
        ModelParams::Lr => Model::Lr(train_lr(x, y)?),
        ModelParams::Krr { lambda, kernel } => {
            let mut m = train_krr(x, &centered, lambda, kernel)?;
            m.offset = mean;
            Model::Krr(m)
        }
        ModelParams::Svr(p) => {
            let mut m = train_svr(x, &centered, p)?;
            m.offset = mean;
            Model::Svr(m)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub group: usize,
    pub process: usize,
    pub center: Vec<f64>,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEnsemble {
    pub params: ModelParams,
    /// Virtual process count the groups were placed on.
    pub p: usize,
    /// Maps raw features into the space the models were trained in.
    pub standardizer: Standardizer,
    pub groups: Vec<GroupModel>,
}

fn mean_row(x: &DataMatrix, rows: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; x.cols()];
    for &r in rows {
        for (a, v) in c.iter_mut().zip(x.row(r)) {
            *a += v;
        }
    }
    c.iter_mut().for_each(|a| *a /= rows.len() as f64);
    c
}

/// Trains every group of `plan` on its rows of the organized training set,
/// using only the rows accepted by `use_row` (all rows of a group if that
/// would leave it empty). Groups are trained in parallel.
fn train_groups(
    x_org: &DataMatrix,
    y_org: &[f64],
    plan: &PartitionPlan,
    params: &ModelParams,
    standardizer: Standardizer,
    use_row: &(dyn Fn(usize) -> bool + Sync),
    pool: &WorkerPool,
) -> Result<RegressionEnsemble> {
    let groups = pool.try_map_indexed(plan.groups.len(), |g| {
        let group = &plan.groups[g];
        let mut rows: Vec<usize> = group.range().filter(|&r| use_row(r)).collect();
        if rows.is_empty() {
            rows = group.range().collect();
        }
        let x = x_org.select_rows(&rows);
        let y: Vec<f64> = rows.iter().map(|&r| y_org[r]).collect();
        Ok(GroupModel {
            group: g,
            process: plan.process_of[g],
            center: mean_row(x_org, &rows),
            model: train_model(&x, &y, params)?,
        })
    })?;
    Ok(RegressionEnsemble {
        params: *params,
        p: plan.p,
        standardizer,
        groups,
    })
}

/// Trains the ensemble for `plan` on organized (reordered) training data that
/// is already in model space.
pub fn train_ensemble(
    x_org: &DataMatrix,
    y_org: &[f64],
    plan: &PartitionPlan,
    params: &ModelParams,
    standardizer: Standardizer,
    pool: &WorkerPool,
) -> Result<RegressionEnsemble> {
    if x_org.rows() != plan.n || y_org.len() != plan.n {
        return Err(BfcError::DimensionMismatch {
            expected: plan.n,
            got: x_org.rows().min(y_org.len()),
        });
    }
    train_groups(x_org, y_org, plan, params, standardizer, &|_| true, pool)
}

/// Index of the group center nearest to `x`; lowest group id on ties.
pub fn route(x: &[f64], ensemble: &RegressionEnsemble) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (g, gm) in ensemble.groups.iter().enumerate() {
        let d = squared_distance(x, &gm.center);
        if d < best_d {
            best_d = d;
            best = g;
        }
    }
    best
}

/// Squared-error accumulators per virtual process plus the reduced MSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub k: usize,
    pub per_process: Vec<f64>,
    pub samples_per_process: Vec<usize>,
    pub mse: f64,
}

impl RegressionEnsemble {
    pub fn dim(&self) -> usize {
        self.standardizer.mean.len()
    }

    /// Prediction for a point already in model space.
    pub fn predict_model_space(&self, x: &[f64]) -> f64 {
        self.groups[route(x, self)].model.predict(x)
    }

    /// Predictions for raw feature rows.
    pub fn predict(&self, x: &DataMatrix, pool: &WorkerPool) -> Result<Vec<f64>> {
        let z = self.standardizer.apply(x)?;
        Ok(pool.map_indexed(z.rows(), |i| self.predict_model_space(z.row(i))))
    }

    /// Routes every raw test row, accumulates squared errors on the process
    /// that owns the chosen group, then reduces once.
    pub fn evaluate(&self, x: &DataMatrix, y: &[f64], pool: &WorkerPool) -> Result<MseReport> {
        if x.rows() != y.len() {
            return Err(BfcError::DimensionMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if y.is_empty() {
            return Err(BfcError::TooFewSamples { needed: 1, got: 0 });
        }
        let z = self.standardizer.apply(x)?;
        let routed = pool.map_indexed(z.rows(), |i| {
            let g = route(z.row(i), self);
            let e = self.groups[g].model.predict(z.row(i)) - y[i];
            (self.groups[g].process, e * e)
        });
        let mut per_process = vec![0.0; self.p];
        let mut samples_per_process = vec![0usize; self.p];
        for (proc_id, sq) in routed {
            per_process[proc_id] += sq;
            samples_per_process[proc_id] += 1;
        }
        let total: f64 = per_process.iter().sum();
        Ok(MseReport {
            k: y.len(),
            mse: total / y.len() as f64,
            per_process,
            samples_per_process,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let body = serde_json::to_vec(self)?;
        let mut out = Vec::with_capacity(body.len() + 20);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&ENSEMBLE_VERSION.to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&body);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(BfcError::BadEnsemble("missing header".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != ENSEMBLE_VERSION {
            return Err(BfcError::BadEnsemble(format!(
                "unsupported version {version}"
            )));
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        if bytes.len() != 20 + len {
            return Err(BfcError::BadEnsemble(format!(
                "payload is {} bytes, header says {len}",
                bytes.len() - 20
            )));
        }
        Ok(serde_json::from_slice(&bytes[20..])?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

/// Validation score of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: ModelParams,
    pub validation_mse: f64,
}

/// Picks hyperparameters on a seeded hold-out of `validation_fraction` of
/// the training rows, then retrains the winner on all rows. Candidates that
/// fail to train are scored as infinite.
#[allow(clippy::too_many_arguments)]
pub fn fit_with_validation(
    x_org: &DataMatrix,
    y_org: &[f64],
    plan: &PartitionPlan,
    grid: &[ModelParams],
    standardizer: Standardizer,
    validation_fraction: f64,
    seed: u64,
    pool: &WorkerPool,
) -> Result<(RegressionEnsemble, Vec<Candidate>)> {
    if grid.is_empty() {
        return Err(BfcError::InvalidArgument(
            "empty hyperparameter grid".into(),
        ));
    }
    let n = x_org.rows();
    let mut scores = Vec::with_capacity(grid.len());
    if grid.len() > 1 {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_val = ((n as f64 * validation_fraction).round() as usize).clamp(1, n);
        let mut is_val = vec![false; n];
        for &i in &idx[..n_val] {
            is_val[i] = true;
        }
        let val_rows: Vec<usize> = (0..n).filter(|&i| is_val[i]).collect();
        let x_val = x_org.select_rows(&val_rows);
        let y_val: Vec<f64> = val_rows.iter().map(|&i| y_org[i]).collect();
        for params in grid {
            let ens = train_groups(
                x_org,
                y_org,
                plan,
                params,
                Standardizer::identity(x_org.cols()),
                &|r| !is_val[r],
                pool,
            );
            let validation_mse = match ens {
                Ok(e) => e.evaluate(&x_val, &y_val, pool)?.mse,
                Err(_) => f64::INFINITY,
            };
            scores.push(Candidate {
                params: *params,
                validation_mse,
            });
        }
    } else {
        scores.push(Candidate {
            params: grid[0],
            validation_mse: f64::NAN,
        });
    }
    let best = scores.iter().enumerate().fold(0, |b, (i, c)| {
        if c.validation_mse < scores[b].validation_mse {
            i
        } else {
            b
        }
    });
    let ens = train_ensemble(x_org, y_org, plan, &scores[best].params, standardizer, pool)?;
    Ok((ens, scores))
}
