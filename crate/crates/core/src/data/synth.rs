use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::series::{default_origin, TimeSeries, SAMPLES_PER_DAY, SAMPLES_PER_HOUR};
use crate::error::{config, Result};

/// Parameters of the synthetic commuter-traffic generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_days: usize,
    /// Flow at the top of the weekday peaks, vehicles/hour.
    pub peak_flow: f64,
    /// Off-peak floor, vehicles/hour.
    pub base_flow: f64,
    pub noise_std: f64,
    /// Multiplier on the whole profile for Saturdays and Sundays.
    pub weekend_factor: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { n_days: 40, peak_flow: 2000.0, base_flow: 250.0, noise_std: 60.0, weekend_factor: 0.6, seed: 7 }
    }
}

const MORNING_PEAK_HOUR: f64 = 8.0;
const MORNING_WIDTH_HOURS: f64 = 1.5;
const EVENING_PEAK_HOUR: f64 = 18.0;
const EVENING_WIDTH_HOURS: f64 = 2.0;

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.n_days == 0 {
            return Err(config("synthetic series needs at least one day"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(config("noise_std must be finite and non-negative"));
        }
        if !(self.base_flow >= 0.0 && self.peak_flow > self.base_flow) {
            return Err(config("need 0 <= base_flow < peak_flow"));
        }
        if !(self.weekend_factor > 0.0 && self.weekend_factor.is_finite()) {
            return Err(config("weekend_factor must be positive"));
        }
        Ok(())
    }

    /// Noise-free flow at sample `index` of the series.
    pub fn profile(&self, index: usize) -> f64 {
        let day = index / SAMPLES_PER_DAY;
        let hour = (index % SAMPLES_PER_DAY) as f64 / SAMPLES_PER_HOUR as f64;
        let bump = |centre: f64, width: f64| (-(hour - centre).powi(2) / (2.0 * width * width)).exp();
        let shape = bump(MORNING_PEAK_HOUR, MORNING_WIDTH_HOURS).max(bump(EVENING_PEAK_HOUR, EVENING_WIDTH_HOURS));
        let flow = self.base_flow + (self.peak_flow - self.base_flow) * shape;
        // Origin is a Monday.
        if day % 7 >= 5 {
            flow * self.weekend_factor
        } else {
            flow
        }
    }
}

/// Double-peak weekday profile with damped weekends and seeded Gaussian
/// noise, clamped at zero. Length is `n_days * 960`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| config(e.to_string()))?;
    let values = (0..cfg.n_days * SAMPLES_PER_DAY)
        .map(|i| {
            let eps = if cfg.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            (cfg.profile(i) + eps).max(0.0)
        })
        .collect();
    Ok(TimeSeries::new(values, default_origin()))
}
