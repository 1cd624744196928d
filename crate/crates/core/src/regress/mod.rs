//! Regression models and the per-group ensemble.

pub mod ensemble;
pub mod kernel;
pub mod krr;
pub mod linalg;
pub mod lr;
pub mod svr;

pub use ensemble::{
    fit_with_validation, route, train_ensemble, train_model, Candidate, GroupModel, Model,
    ModelKind, ModelParams, MseReport, RegressionEnsemble,
};
pub use kernel::{median_heuristic, Kernel};
pub use krr::{krr_residual, train_krr, KrrModel};
pub use lr::{train_lr, LinearModel};
pub use svr::{train_svr, SvrModel, SvrParams};
