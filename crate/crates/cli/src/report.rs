//! Report schema, CSV exports, and text tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qtraffic::data::{MinMaxScaler, TimeSeries, TIMESTAMP_FORMAT};
use qtraffic::eval::{ConsistencyCheck, ConvergenceHistory, FoldPlan, FoldRun, MeanStd, MetricKind, MetricsReport};
use qtraffic::models::{Architecture, ModelLabel, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{CliError, CliResult};

/// Bumped whenever a field is renamed, removed, or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;
/// `generated_at` value written under the fixed-timestamp flag.
pub const FIXED_TIMESTAMP: &str = "1970-01-01T00:00:00Z";
/// Relative tolerance used for the reported epochs-to-converge.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataInfo {
    pub source: String,
    pub n_samples: usize,
    pub interval_secs: i64,
    pub origin: String,
    pub content_hash: String,
}

impl DataInfo {
    pub fn new(source: impl Into<String>, series: &TimeSeries) -> Self {
        Self {
            source: source.into(),
            n_samples: series.len(),
            interval_secs: series.interval_secs,
            origin: series.origin.format(TIMESTAMP_FORMAT).to_string(),
            content_hash: format!("{:016x}", series.content_hash()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldInfo {
    pub index: usize,
    /// Half-open `[start, end)`.
    pub test: [usize; 2],
    pub gap_before: [usize; 2],
    pub gap_after: [usize; 2],
    pub n_validation: usize,
    pub n_train: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanInfo {
    pub n: usize,
    pub k: usize,
    pub gap_size: usize,
    pub val_fraction: f64,
    pub folds: Vec<FoldInfo>,
}

impl From<&FoldPlan> for PlanInfo {
    fn from(p: &FoldPlan) -> Self {
        let r = |r: &std::ops::Range<usize>| [r.start, r.end];
        Self {
            n: p.n,
            k: p.k,
            gap_size: p.gap_size,
            val_fraction: p.val_fraction,
            folds: p
                .folds
                .iter()
                .map(|f| FoldInfo {
                    index: f.index,
                    test: r(&f.test),
                    gap_before: r(&f.gap_before),
                    gap_after: r(&f.gap_after),
                    n_validation: f.validation.len(),
                    n_train: f.train.len(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub label: ModelLabel,
    pub name: String,
    pub architecture: Architecture,
    pub metrics: MetricsReport,
    pub convergence: ConvergenceHistory,
    pub epochs_to_converge: Option<usize>,
    /// Autoencoder reconstruction loss per epoch, one row per fold.
    pub autoencoder_loss: Vec<Vec<f64>>,
    pub consistency: Option<ConsistencyCheck>,
    /// Wall-clock seconds for regressor training and scoring; 0 under the
    /// fixed-timestamp flag.
    pub runtime_secs: f64,
    /// Wall-clock seconds spent obtaining the encoders (training or cache).
    pub encoder_runtime_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub generated_at: String,
    pub config: ExperimentConfig,
    pub data: DataInfo,
    pub plan: PlanInfo,
    pub models: Vec<ModelReport>,
    /// File name (relative to the report) to SHA-256 hex digest.
    pub artifacts: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        if text.trim().is_empty() {
            return Err(CliError::Config(format!("{}: report file is empty", origin.display())));
        }
        let report: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: not a valid report: {e}", origin.display())))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "{}: schema version {} is not supported (expected {SCHEMA_VERSION})",
                origin.display(),
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }
}

pub fn generated_at(fixed: bool) -> String {
    if fixed {
        FIXED_TIMESTAMP.to_string()
    } else {
        chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `epoch,mean,std,fold0_train,fold0_validation,...`; missing values blank.
pub fn loss_history_csv(h: &ConvergenceHistory) -> String {
    let mut out = String::from("epoch,mean,std");
    for i in 0..h.train.len() {
        let _ = write!(out, ",fold{i}_train,fold{i}_validation");
    }
    out.push('\n');
    let epochs = h.train.iter().map(Vec::len).max().unwrap_or(0);
    let cell = |v: Option<&f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in 0..epochs {
        let _ = write!(out, "{},{},{}", e + 1, cell(h.mean.get(e)), cell(h.std.get(e)));
        for (i, t) in h.train.iter().enumerate() {
            let v = h.validation.get(i).and_then(|v| v.get(e));
            let _ = write!(out, ",{},{}", cell(t.get(e)), cell(v));
        }
        out.push('\n');
    }
    out
}

/// Test-set predictions per fold, normalized and in vehicles/hour.
pub fn predictions_csv(series: &TimeSeries, runs: &[FoldRun], scalers: &[MinMaxScaler]) -> String {
    let mut out = String::from("fold,index,timestamp,target,prediction,target_raw,prediction_raw\n");
    for (run, scaler) in runs.iter().zip(scalers) {
        for ((&i, &t), &p) in run.target_index.iter().zip(&run.targets).zip(&run.predictions) {
            let _ = writeln!(
                out,
                "{},{i},{},{t},{p},{},{}",
                run.metrics.fold,
                series.timestamp(i).format(TIMESTAMP_FORMAT),
                scaler.invert(t),
                scaler.invert(p)
            );
        }
    }
    out
}

/// Box-plot statistics of the normalized per-fold scores of every model.
pub fn boxplots_csv(models: &[ModelReport]) -> String {
    let mut out = String::from("model,metric,q1,median,q3,whisker_low,whisker_high,outliers\n");
    for m in models {
        let b = &m.metrics.boxes;
        for (kind, stats) in [(MetricKind::Mse, &b.mse), (MetricKind::Mae, &b.mae), (MetricKind::R2, &b.r2)] {
            let Some(s) = stats else { continue };
            let outliers: Vec<String> = s.outliers.iter().map(f64::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                m.name,
                kind.name(),
                s.q1,
                s.median,
                s.q3,
                s.whisker_low,
                s.whisker_high,
                outliers.join(";")
            );
        }
    }
    out
}

/// Normalized per-fold scores with their spread and rank correlation.
pub fn consistency_csv(models: &[ModelReport]) -> String {
    let mut out = String::from("model,metric,fold,normalized_score,std,spearman\n");
    for m in models {
        let Some(c) = &m.consistency else { continue };
        for s in &c.scores {
            let rho = s.spearman.map(|r| r.to_string()).unwrap_or_default();
            for (fold, v) in &s.points {
                let _ = writeln!(out, "{},{},{fold},{v},{},{rho}", m.name, s.metric.name(), s.std);
            }
        }
    }
    out
}

fn pm(ms: &MeanStd) -> String {
    if ms.mean.is_finite() {
        format!("{:.4} ± {:.4}", ms.mean, ms.std)
    } else {
        "n/a".to_string()
    }
}

/// Mean ± std of every metric per model, normalized units.
pub fn summary_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "| model | folds | MSE | MAE | R² | raw MAE (veh/h) | epochs to converge | runtime (s) |\n|---|---|---|---|---|---|---|---|"
    );
    for m in &report.models {
        let s = &m.metrics.normalized;
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {:.1} |",
            m.name,
            m.metrics.folds.len(),
            pm(&s.mse),
            pm(&s.mae),
            pm(&s.r2),
            pm(&m.metrics.raw.mae),
            m.epochs_to_converge.map(|e| e.to_string()).unwrap_or_else(|| "n/a".into()),
            m.runtime_secs
        );
    }
    out
}

/// Classic and hybrid side by side for each qubit count.
pub fn comparison_table(models: &[ModelReport]) -> String {
    let mut by_q: BTreeMap<usize, [Option<&ModelReport>; 2]> = BTreeMap::new();
    for m in models {
        let slot = match m.label.variant {
            Variant::Classic => 0,
            Variant::Hybrid => 1,
        };
        by_q.entry(m.label.n_q).or_default()[slot] = Some(m);
    }
    let mut out = String::from(
        "| N_q | classic R² | hybrid R² | classic MSE | hybrid MSE | classic params | hybrid params |\n|---|---|---|---|---|---|---|\n",
    );
    let get = |m: Option<&ModelReport>, f: &dyn Fn(&ModelReport) -> String| m.map(f).unwrap_or_else(|| "-".into());
    for (q, [c, h]) in by_q {
        let _ = writeln!(
            out,
            "| {q} | {} | {} | {} | {} | {} | {} |",
            get(c, &|m| pm(&m.metrics.normalized.r2)),
            get(h, &|m| pm(&m.metrics.normalized.r2)),
            get(c, &|m| pm(&m.metrics.normalized.mse)),
            get(h, &|m| pm(&m.metrics.normalized.mse)),
            get(c, &|m| m.architecture.trainable_params.to_string()),
            get(h, &|m| m.architecture.trainable_params.to_string()),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_garbage_reports_are_rejected() {
        let p = Path::new("r.json");
        let e = ExperimentReport::parse("  \n", p).unwrap_err();
        assert!(e.to_string().contains("empty"), "{e}");
        assert!(ExperimentReport::parse("{\"x\":1}", p).is_err());
    }

    #[test]
    fn sha_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn loss_csv_layout() {
        let h = ConvergenceHistory {
            train: vec![vec![0.5, 0.25], vec![0.75, 0.5]],
            validation: vec![vec![0.6, 0.3], vec![]],
            mean: vec![0.625, 0.375],
            std: vec![0.125, 0.125],
        };
        let csv = loss_history_csv(&h);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epoch,mean,std,fold0_train,fold0_validation,fold1_train,fold1_validation");
        assert_eq!(lines[2], "2,0.375,0.125,0.25,0.3,0.5,");
    }
}
