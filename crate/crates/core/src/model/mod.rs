//! Per-angle MLP classifiers, their softmax mixture, the trainer and the AUC metric.

pub mod artifact;
pub mod metrics;
pub mod mixture;
pub mod mlp;
pub mod optim;
pub mod train;

pub use artifact::ModelArtifact;
pub use metrics::auc;
pub use mixture::{bce, softmax, FeatureSet, MaPhlpModel, MixtureGrad, Standardizer};
pub use mlp::{mlp_forward, Dense, Mlp, MlpGrad};
pub use train::{
    train_ma_phlp, train_phlp, EpochRecord, PhlpModel, TrainConfig, TrainMode, Trained,
};
