//! Metrics, significance testing, cross-validation and experiment runners.

mod experiment;
mod featurize;
mod folds;
mod metrics;
mod report;
mod stats;

pub use experiment::{
    compare_kfold, final_classes, kfold_scores, run_single, run_two_stage, ClassifierEntry, Comparison, DataPaths,
    ExperimentConfig, FittedClassifier, Mode, SingleRun, TrainingSetup, TwoStageRun, DEFAULT_K, DEFAULT_SEED, RELEVANT,
    TARGET,
};
pub use featurize::{documents, label_strings, FeatureSettings, Features, Featurizer};
pub use folds::{fold_rows, stratified_folds};
pub use metrics::{
    collapse_binary, compute_metrics, compute_metrics_with_classes, confusion_matrix, f1, ClassMetrics,
    ConfusionMatrix, MetricsReport, NOT_MISINFORMATION,
};
pub use report::{experiment_report, Leaderboard, LeaderboardRow};
pub use stats::{is_significant, paired_ttest, ttest, welch_ttest, TTest, TestMode, ALPHA};
