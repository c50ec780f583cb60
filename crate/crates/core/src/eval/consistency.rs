use serde::{Deserialize, Serialize};

use super::cv::{MetricKind, MetricsReport};
use super::metrics::{mean_std, spearman};
use crate::error::{usage, Result};

/// Per-fold scores divided by their cross-fold mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedScores {
    pub metric: MetricKind,
    /// `(fold index, score / mean)`.
    pub points: Vec<(usize, f64)>,
    pub std: f64,
    /// Rank correlation of normalized score against fold position.
    pub spearman: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub scores: Vec<NormalizedScores>,
    /// Metrics left out, with the reason.
    pub skipped: Vec<(MetricKind, String)>,
}

/// Normalizes one metric's per-fold values; `None` when the mean is zero.
pub fn normalize_scores(metric: MetricKind, values: &[f64]) -> Option<NormalizedScores> {
    let mean = mean_std(values).mean;
    if mean == 0.0 || !mean.is_finite() {
        return None;
    }
    let normalized: Vec<f64> = values.iter().map(|v| v / mean).collect();
    let positions: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    Some(NormalizedScores {
        metric,
        std: mean_std(&normalized).std,
        spearman: spearman(&positions, &normalized),
        points: normalized.into_iter().enumerate().collect(),
    })
}

pub fn consistency_check(report: &MetricsReport) -> Result<ConsistencyCheck> {
    if report.folds.len() < 2 {
        return Err(usage("consistency check needs at least two folds"));
    }
    let mut out = ConsistencyCheck { scores: Vec::new(), skipped: Vec::new() };
    for metric in MetricKind::ALL {
        let values: Option<Vec<f64>> = report.per_fold(metric).into_iter().collect();
        match values.and_then(|v| normalize_scores(metric, &v)) {
            Some(s) => out.scores.push(s),
            None => out.skipped.push((metric, "zero or undefined mean".to_string())),
        }
    }
    Ok(out)
}
