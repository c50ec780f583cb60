use chrono::{NaiveDate, NaiveDateTime};

/// Seconds between consecutive loop-detector readings (40 per hour).
pub const SAMPLE_INTERVAL_SECS: i64 = 90;
pub const SAMPLES_PER_HOUR: usize = 40;
pub const SAMPLES_PER_DAY: usize = 24 * SAMPLES_PER_HOUR;

/// Evenly sampled flow series in vehicles per hour.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub interval_secs: i64,
    pub origin: NaiveDateTime,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, origin: NaiveDateTime) -> Self {
        Self { values, interval_secs: SAMPLE_INTERVAL_SECS, origin }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.origin + chrono::Duration::seconds(self.interval_secs * index as i64)
    }

    /// FNV-1a over the raw bits of every value, used to key cached encoders.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&self.interval_secs.to_le_bytes());
        eat(&self.origin.and_utc().timestamp().to_le_bytes());
        for v in &self.values {
            eat(&v.to_bits().to_le_bytes());
        }
        h
    }
}

/// Monday 2024-01-01 00:00:00, the origin of generated series.
pub fn default_origin() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1).and_then(|d| d.and_hms_opt(0, 0, 0)).expect("valid date")
}
