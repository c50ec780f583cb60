//! Gap k-fold cross-validation, regression metrics and the fold-position
//! consistency check.

mod consistency;
mod cv;
mod folds;
mod metrics;

pub use consistency::{consistency_check, normalize_scores, ConsistencyCheck, NormalizedScores};
pub use cv::{
    derive_seed, evaluate_model, prepare_folds, run_cross_validation, window_fold, ConvergenceHistory, CvConfig,
    CvOutcome, EncoderKey, EncoderStore, FoldMetrics, FoldRun, FoldWindows, MetricBoxes, MetricKind, MetricSummary,
    MetricsReport, NoStore, PreparedFold,
};
pub use folds::{gap_kfold_split, Fold, FoldPlan, DEFAULT_FOLDS, DEFAULT_GAP, DEFAULT_VAL_FRACTION};
pub use metrics::{box_stats, compute_metrics, mean_std, spearman, BoxStats, MeanStd, Metrics};
