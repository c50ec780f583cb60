//! The five subcommands as library functions returning their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qtraffic::data::{generate_synthetic, load_csv, write_csv, LoadOptions, TimeSeries, SAMPLE_INTERVAL_SECS};
use qtraffic::eval::{
    consistency_check, evaluate_model, gap_kfold_split, prepare_folds, FoldPlan, MetricKind, PreparedFold,
};
use qtraffic::models::{build_model, ModelLabel, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DataSource, ExperimentConfig};
use crate::plot::{boxplot_svg, loss_curve_svg};
use crate::report::{
    boxplots_csv, comparison_table, consistency_csv, generated_at, loss_history_csv, predictions_csv, sha256_hex,
    summary_table, DataInfo, ExperimentReport, ModelReport, PlanInfo, CONVERGENCE_TOLERANCE, SCHEMA_VERSION,
};
use crate::store::FileStore;
use crate::{CliError, CliResult};

pub const REPORT_FILE: &str = "report.json";
pub const GRID_REPORT_FILE: &str = "grid_report.json";
pub const ENCODER_DIR: &str = "encoders";

pub fn load_series(cfg: &ExperimentConfig) -> CliResult<(TimeSeries, String)> {
    match &cfg.data {
        DataSource::Csv { path, sort, fill_gaps } => {
            let opts = LoadOptions { sort: *sort, fill_gaps: *fill_gaps, interval_secs: SAMPLE_INTERVAL_SECS };
            let series = load_csv(path, opts)?;
            Ok((series, format!("csv:{}", path.display())))
        }
        DataSource::Synthetic(s) => Ok((generate_synthetic(s)?, "synthetic".to_string())),
    }
}

pub fn fold_plan(cfg: &ExperimentConfig, n: usize) -> CliResult<FoldPlan> {
    Ok(gap_kfold_split(n, cfg.folds, cfg.gap_size, cfg.val_fraction)?)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], artifacts: &mut BTreeMap<String, String>) -> CliResult<()> {
    fs::write(dir.join(name), bytes)?;
    artifacts.insert(name.to_string(), sha256_hex(bytes));
    Ok(())
}

fn elapsed(start: Instant, fixed: bool) -> f64 {
    if fixed {
        0.0
    } else {
        start.elapsed().as_secs_f64()
    }
}

/// Writes the synthetic series described by `cfg` to `output`.
pub fn cmd_synth(cfg: &ExperimentConfig, output: &Path) -> CliResult<usize> {
    let DataSource::Synthetic(s) = &cfg.data else {
        return Err(CliError::Usage("synth needs a synthetic data source".into()));
    };
    let series = generate_synthetic(s)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = fs::File::create(output)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", output.display()))))?;
    write_csv(BufWriter::new(file), &series)?;
    Ok(series.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderFoldSummary {
    pub n_q: usize,
    pub fold: usize,
    pub epochs: usize,
    pub final_train_loss: Option<f64>,
    pub test_reconstruction_mse: f64,
    pub checkpoint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderSummary {
    pub schema_version: u32,
    pub generated_at: String,
    pub config: ExperimentConfig,
    pub data: DataInfo,
    pub encoders: Vec<EncoderFoldSummary>,
}

/// Pre-trains (or loads) the encoder of every fold for every N_q.
pub fn cmd_train_ae(cfg: &ExperimentConfig) -> CliResult<EncoderSummary> {
    cfg.validate()?;
    let (series, source) = load_series(cfg)?;
    let plan = fold_plan(cfg, series.len())?;
    let cv = cfg.cv_config();
    let mut store = FileStore::new(cfg.output_dir.join(ENCODER_DIR));
    let mut encoders = Vec::new();
    for &n_q in &cfg.n_q {
        let folds = prepare_folds(&series.values, &plan, n_q, &cv, &mut store)?;
        for pf in &folds {
            encoders.push(EncoderFoldSummary {
                n_q,
                fold: pf.index,
                epochs: pf.ae_history.len(),
                final_train_loss: pf.ae_history.last().copied(),
                test_reconstruction_mse: pf.autoencoder.mean_reconstruction_mse(&pf.windows.test)?,
                checkpoint: store
                    .keys
                    .iter()
                    .rev()
                    .find(|k| k.n_latent == n_q && k.fold == pf.index)
                    .map(|k| format!("{ENCODER_DIR}/{}", FileStore::file_name(k)))
                    .unwrap_or_default(),
            });
        }
    }
    let summary = EncoderSummary {
        schema_version: SCHEMA_VERSION,
        generated_at: generated_at(cfg.fixed_timestamp),
        config: cfg.clone(),
        data: DataInfo::new(source, &series),
        encoders,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(cfg.output_dir.join("encoders.json"), text)?;
    Ok(summary)
}

/// Trains and scores one model on prepared folds and writes its artifacts
/// (everything except the report) into `dir`.
fn run_cell(
    cfg: &ExperimentConfig,
    series: &TimeSeries,
    folds: &[PreparedFold],
    label: ModelLabel,
    encoder_secs: f64,
    dir: &Path,
) -> CliResult<(ModelReport, BTreeMap<String, String>)> {
    let start = Instant::now();
    let outcome = evaluate_model(label, folds, &cfg.cv_config())?;
    let runtime_secs = elapsed(start, cfg.fixed_timestamp);
    let architecture = build_model(label, 0, cfg.angle_scale)?.architecture();
    let consistency = if outcome.report.folds.len() >= 2 { Some(consistency_check(&outcome.report)?) } else { None };
    let model = ModelReport {
        label,
        name: label.to_string(),
        architecture,
        epochs_to_converge: outcome.convergence.epochs_to_converge(CONVERGENCE_TOLERANCE),
        metrics: outcome.report,
        convergence: outcome.convergence,
        autoencoder_loss: folds.iter().map(|f| f.ae_history.clone()).collect(),
        consistency,
        runtime_secs,
        encoder_runtime_secs: encoder_secs,
    };

    fs::create_dir_all(dir)?;
    let mut artifacts = BTreeMap::new();
    write_file(dir, "loss_history.csv", loss_history_csv(&model.convergence).as_bytes(), &mut artifacts)?;
    let scalers: Vec<_> = folds.iter().map(|f| f.windows.scaler).collect();
    write_file(dir, "predictions.csv", predictions_csv(series, &outcome.runs, &scalers).as_bytes(), &mut artifacts)?;
    let svg = loss_curve_svg(&format!("{} training loss", model.name), &model.convergence);
    write_file(dir, "loss_curve.svg", svg.as_bytes(), &mut artifacts)?;
    Ok((model, artifacts))
}

fn single_label(cfg: &ExperimentConfig) -> CliResult<ModelLabel> {
    match (cfg.variants.as_slice(), cfg.n_q.as_slice()) {
        ([v], [q]) => Ok(ModelLabel::new(cfg.scenario, *v, *q)?),
        _ => Err(CliError::Usage(format!(
            "run needs exactly one variant and one N_q (got {} and {}); use grid for several",
            cfg.variants.len(),
            cfg.n_q.len()
        ))),
    }
}

/// Directory holding one model's artifacts.
pub fn cell_dir(cfg: &ExperimentConfig, label: ModelLabel) -> PathBuf {
    cfg.output_dir.join(label.to_string())
}

/// Full cross-validated pipeline for one (scenario, variant, N_q).
/// Writes `<output_dir>/<label>/report.json` and its companion files.
pub fn cmd_run(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let label = single_label(cfg)?;
    let (series, source) = load_series(cfg)?;
    let plan = fold_plan(cfg, series.len())?;
    let start = Instant::now();
    let mut store = FileStore::new(cfg.output_dir.join(ENCODER_DIR));
    let folds = prepare_folds(&series.values, &plan, label.n_q, &cfg.cv_config(), &mut store)?;
    let encoder_secs = elapsed(start, cfg.fixed_timestamp);
    let dir = cell_dir(cfg, label);
    let (model, artifacts) = run_cell(cfg, &series, &folds, label, encoder_secs, &dir)?;
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        generated_at: generated_at(cfg.fixed_timestamp),
        config: cfg.clone(),
        data: DataInfo::new(source, &series),
        plan: PlanInfo::from(&plan),
        models: vec![model],
        artifacts,
    };
    fs::write(dir.join(REPORT_FILE), report.to_json()?)?;
    Ok(report)
}

/// Every (N_q, variant) cell on one shared fold plan. Encoders are trained
/// once per N_q and shared by both variants. Each finished cell is written
/// to its own directory immediately; the combined report and comparison
/// files go to the output directory.
pub fn cmd_grid(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let labels = cfg.labels()?;
    let (series, source) = load_series(cfg)?;
    let plan = fold_plan(cfg, series.len())?;
    let cv = cfg.cv_config();
    let data = DataInfo::new(source, &series);
    let plan_info = PlanInfo::from(&plan);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let groups: Vec<usize> = cfg.n_q.clone();
    let results: Vec<CliResult<Vec<ModelReport>>> = pool.install(|| {
        groups
            .par_iter()
            .map(|&n_q| {
                let start = Instant::now();
                let mut store = FileStore::new(cfg.output_dir.join(ENCODER_DIR));
                let folds = prepare_folds(&series.values, &plan, n_q, &cv, &mut store)?;
                let encoder_secs = elapsed(start, cfg.fixed_timestamp);
                labels
                    .iter()
                    .filter(|l| l.n_q == n_q)
                    .map(|&label| {
                        let dir = cell_dir(cfg, label);
                        let (model, artifacts) = run_cell(cfg, &series, &folds, label, encoder_secs, &dir)?;
                        let cell = ExperimentReport {
                            schema_version: SCHEMA_VERSION,
                            generated_at: generated_at(cfg.fixed_timestamp),
                            config: cfg.clone(),
                            data: data.clone(),
                            plan: plan_info.clone(),
                            models: vec![model.clone()],
                            artifacts,
                        };
                        fs::write(dir.join(REPORT_FILE), cell.to_json()?)?;
                        Ok(model)
                    })
                    .collect()
            })
            .collect()
    });
    let mut models = Vec::new();
    for r in results {
        models.extend(r?);
    }
    models.sort_by_key(|m| (m.label.n_q, m.label.variant));

    let dir = &cfg.output_dir;
    let mut artifacts = BTreeMap::new();
    write_file(dir, "boxplots.csv", boxplots_csv(&models).as_bytes(), &mut artifacts)?;
    write_file(dir, "consistency.csv", consistency_csv(&models).as_bytes(), &mut artifacts)?;
    write_file(dir, "comparison.md", comparison_table(&models).as_bytes(), &mut artifacts)?;
    for kind in MetricKind::ALL {
        let entries: Vec<_> = models
            .iter()
            .map(|m| {
                let b = &m.metrics.boxes;
                let stats = match kind {
                    MetricKind::Mse => b.mse.clone(),
                    MetricKind::Mae => b.mae.clone(),
                    MetricKind::R2 => b.r2.clone(),
                };
                (m.label.q_name(), m.label.variant == Variant::Hybrid, stats)
            })
            .collect();
        let title = format!("Scenario {} per-fold {}", cfg.scenario, kind.name().to_uppercase());
        let svg = boxplot_svg(&title, kind.name(), &entries);
        write_file(dir, &format!("boxplot_{}.svg", kind.name()), svg.as_bytes(), &mut artifacts)?;
    }
    for m in &models {
        let cell = Path::new(&m.name);
        for name in [REPORT_FILE, "loss_history.csv", "predictions.csv", "loss_curve.svg"] {
            let bytes = fs::read(dir.join(cell).join(name))?;
            artifacts.insert(format!("{}/{name}", m.name), sha256_hex(&bytes));
        }
    }
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        generated_at: generated_at(cfg.fixed_timestamp),
        config: cfg.clone(),
        data,
        plan: plan_info,
        models,
        artifacts,
    };
    fs::write(dir.join(GRID_REPORT_FILE), report.to_json()?)?;
    Ok(report)
}

/// Renders a saved report as a text table and writes one loss-curve plot
/// per model into `plot_dir`.
pub fn cmd_report(path: &Path, plot_dir: &Path) -> CliResult<String> {
    let report = ExperimentReport::load(path)?;
    fs::create_dir_all(plot_dir)?;
    let mut out = format!(
        "report {} (schema {}, generated {})\ndata: {} samples, {}, hash {}\nfolds: {} (gap {}, validation fraction {})\n\n",
        path.display(),
        report.schema_version,
        report.generated_at,
        report.data.n_samples,
        report.data.source,
        report.data.content_hash,
        report.plan.k,
        report.plan.gap_size,
        report.plan.val_fraction
    );
    out.push_str(&summary_table(&report));
    if report.models.iter().any(|m| m.label.variant == Variant::Hybrid)
        && report.models.iter().any(|m| m.label.variant == Variant::Classic)
    {
        out.push('\n');
        out.push_str(&comparison_table(&report.models));
    }
    out.push_str("\nplots:\n");
    for m in &report.models {
        let file = plot_dir.join(format!("{}_loss.svg", m.name));
        fs::write(&file, loss_curve_svg(&format!("{} training loss", m.name), &m.convergence))?;
        out.push_str(&format!("  {}\n", file.display()));
    }
    Ok(out)
}
