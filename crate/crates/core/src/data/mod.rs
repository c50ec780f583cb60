//! Series ingestion, synthetic traffic generation, normalization and windowing.

mod csvio;
mod normalize;
mod series;
mod synth;
mod window;

pub use csvio::{load_csv, read_csv, write_csv, LoadOptions, TIMESTAMP_FORMAT};
pub use normalize::MinMaxScaler;
pub use series::{default_origin, TimeSeries, SAMPLES_PER_DAY, SAMPLES_PER_HOUR, SAMPLE_INTERVAL_SECS};
pub use synth::{generate_synthetic, SyntheticConfig};
pub use window::{contiguous_runs, make_windows, windows_over_runs, WindowSet, DEFAULT_WINDOW};
