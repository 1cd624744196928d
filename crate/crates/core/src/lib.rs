//! Best friend clustering, balanced partitioning over virtual processes and
//! per-cluster regression ensembles.
//!
//! ```
//! use bfc_core::{build_hierarchy, DataMatrix, WorkerPool};
//!
//! let x = DataMatrix::from_rows(&[[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]).unwrap();
//! let h = build_hierarchy(&x, &WorkerPool::single()).unwrap();
//! assert_eq!(h.level_sizes(), vec![2, 1]);
//! ```

pub mod bfgraph;
pub mod data;
pub mod distance;
pub mod error;
pub mod hierarchy;
pub mod metrics;
pub mod partition;
pub mod pool;
pub mod regress;
pub mod runner;

pub use bfgraph::{
    build_best_friend_graph, build_best_friend_graph_with, component_labels, find_components,
    BestFriendEdge, BestFriendGraph, Component,
};
pub use data::{DataMatrix, Standardizer};
pub use distance::{distance, squared_distance};
pub use error::{BfcError, Result};
pub use hierarchy::{
    build_hierarchy, hci, hci_from, organize, select_optimal_level, ClusterLevel, Hierarchy,
};
pub use metrics::{ami, mse, ContingencyTable};
pub use partition::{
    load_bound, merge_pack, plan_partition, plan_partition_at, split_backtrack, Group, GroupSource,
    PartitionPlan, DEFAULT_DELTA,
};
pub use pool::{WorkerPool, WORKERS_ENV};
pub use regress::{
    route, train_ensemble, train_krr, train_lr, train_svr, Kernel, Model, ModelKind, ModelParams,
    RegressionEnsemble,
};
