use std::path::{Path, PathBuf};

use qtraffic::data::{SyntheticConfig, DEFAULT_WINDOW};
use qtraffic::eval::{CvConfig, DEFAULT_FOLDS, DEFAULT_GAP, DEFAULT_VAL_FRACTION};
use qtraffic::models::{ModelLabel, Scenario, Variant, DEFAULT_ANGLE_SCALE, QUBIT_GRID};
use qtraffic::nn::{DEFAULT_LEARNING_RATE, GRAD_CLIP_NORM};
use qtraffic::train::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QTRAFFIC_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        sort: bool,
        #[serde(default)]
        fill_gaps: bool,
    },
    Synthetic(SyntheticConfig),
}

/// Everything that determines an experiment. Echoed verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub scenario: Scenario,
    pub variants: Vec<Variant>,
    pub n_q: Vec<usize>,
    pub window: usize,
    pub epochs: usize,
    pub ae_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub folds: usize,
    pub gap_size: usize,
    pub val_fraction: f64,
    pub angle_scale: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub fixed_timestamp: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic(SyntheticConfig::default()),
            scenario: Scenario::A,
            variants: vec![Variant::Classic, Variant::Hybrid],
            n_q: QUBIT_GRID.to_vec(),
            window: DEFAULT_WINDOW,
            epochs: 20,
            ae_epochs: 20,
            batch_size: 32,
            learning_rate: DEFAULT_LEARNING_RATE,
            clip_norm: GRAD_CLIP_NORM,
            folds: DEFAULT_FOLDS,
            gap_size: DEFAULT_GAP,
            val_fraction: DEFAULT_VAL_FRACTION,
            angle_scale: DEFAULT_ANGLE_SCALE,
            seed: 0,
            output_dir: PathBuf::from("qtraffic-out"),
            workers: 1,
            fixed_timestamp: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML config, a JSON config, or the `config` echoed inside a
    /// JSON report.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let inner = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(inner).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.variants.is_empty() {
            return bad("at least one variant is required");
        }
        if self.n_q.is_empty() {
            return bad("at least one N_q is required");
        }
        for &n in &self.n_q {
            ModelLabel::new(self.scenario, Variant::Classic, n)?;
        }
        if self.window == 0 || self.epochs == 0 || self.ae_epochs == 0 || self.batch_size == 0 {
            return bad("window, epochs, ae_epochs and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        if !self.angle_scale.is_finite() {
            return bad("angle_scale must be finite");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if let DataSource::Synthetic(s) = &self.data {
            if s.n_days == 0 {
                return bad("synthetic series needs at least one day");
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Result<Vec<ModelLabel>, CliError> {
        let mut labels = Vec::new();
        for &n in &self.n_q {
            for &v in &self.variants {
                labels.push(ModelLabel::new(self.scenario, v, n)?);
            }
        }
        Ok(labels)
    }

    pub fn cv_config(&self) -> CvConfig {
        let train = |epochs| TrainConfig {
            epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            clip_norm: self.clip_norm,
            seed: self.seed,
        };
        CvConfig {
            window: self.window,
            autoencoder: train(self.ae_epochs),
            regressor: train(self.epochs),
            angle_scale: self.angle_scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!((c.window, c.epochs, c.batch_size), (20, 20, 32));
        assert_eq!(c.learning_rate, 0.0005);
        assert_eq!(c.gap_size, 960);
        assert_eq!(c.n_q, vec![2, 4, 6, 8, 10, 12, 14]);
        c.validate().unwrap();
    }

    #[test]
    fn toml_overrides() {
        let c: ExperimentConfig = toml::from_str(
            "scenario = \"B\"\nvariants = [\"hybrid\"]\nn_q = [4]\nepochs = 3\n[data]\nkind = \"synthetic\"\nn_days = 2\n",
        )
        .unwrap();
        assert_eq!(c.scenario, Scenario::B);
        assert_eq!(c.epochs, 3);
        match c.data {
            DataSource::Synthetic(s) => assert_eq!(s.n_days, 2),
            _ => panic!(),
        }
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
    }

    #[test]
    fn rejects_bad_grid() {
        let c = ExperimentConfig { n_q: vec![1], ..Default::default() };
        assert!(c.validate().is_err());
    }
}
