//! Learning stack: dataset split, standardization, SMOTE, random forest and
//! evaluation metrics.

mod dataset;
mod forest;
mod metrics;
mod smote;
mod standardize;

pub use dataset::{stratified_split, Dataset, MlError};
pub use forest::{balance, train_tree, ForestModel, Hyperparams, Node, Tree};
pub use metrics::{compute_metrics, ConfusionCounts, Metrics};
pub use smote::{nearest_neighbors, smote};
pub use standardize::Standardizer;
