//! `timestamp,flow` CSV ingestion and export.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use super::series::{TimeSeries, SAMPLE_INTERVAL_SECS};
use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    /// Sort rows chronologically instead of rejecting out-of-order input.
    pub sort: bool,
    /// Linearly interpolate missing readings instead of rejecting gaps.
    pub fill_gaps: bool,
    pub interval_secs: i64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { sort: false, fill_gaps: false, interval_secs: SAMPLE_INTERVAL_SECS }
    }
}

fn ingest(row: usize, message: impl Into<String>) -> Error {
    Error::Ingestion { row, message: message.into() }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
        .ok()
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_utc()))
}

pub fn load_csv(path: &Path, opts: LoadOptions) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    read_csv(file, opts)
}

/// Parses and validates a series. Row numbers in errors are file line
/// numbers, the header being row 1.
pub fn read_csv<R: Read>(reader: R, opts: LoadOptions) -> Result<TimeSeries> {
    if opts.interval_secs <= 0 {
        return Err(Error::Config("sample interval must be positive".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| ingest(1, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "flow" {
        return Err(ingest(1, "header must be `timestamp,flow`"));
    }

    let mut rows: Vec<(usize, NaiveDateTime, f64)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| ingest(row, e.to_string()))?;
        if record.len() != 2 {
            return Err(ingest(row, format!("expected 2 fields, found {}", record.len())));
        }
        let ts = parse_timestamp(&record[0])
            .ok_or_else(|| ingest(row, format!("unparseable timestamp `{}`", &record[0])))?;
        let flow: f64 = record[1]
            .parse()
            .map_err(|_| ingest(row, format!("unparseable flow `{}`", &record[1])))?;
        if !flow.is_finite() {
            return Err(ingest(row, "flow must be finite"));
        }
        if flow < 0.0 {
            return Err(ingest(row, format!("negative flow {flow}")));
        }
        rows.push((row, ts, flow));
    }
    if rows.is_empty() {
        return Err(ingest(1, "no data rows"));
    }
    if opts.sort {
        rows.sort_by_key(|r| r.1);
    }

    let interval = opts.interval_secs;
    let mut values = vec![rows[0].2];
    for pair in rows.windows(2) {
        let (_, prev_ts, prev) = pair[0];
        let (row, ts, flow) = pair[1];
        let dt = (ts - prev_ts).num_seconds();
        if dt < 0 {
            return Err(ingest(row, "timestamps out of order"));
        }
        if dt == 0 {
            return Err(ingest(row, "duplicate timestamp"));
        }
        if dt % interval != 0 {
            return Err(ingest(row, format!("{dt} s step is not a multiple of the {interval} s interval")));
        }
        let steps = dt / interval;
        if steps > 1 {
            if !opts.fill_gaps {
                return Err(ingest(row, format!("gap of {} missing readings", steps - 1)));
            }
            for k in 1..steps {
                let a = k as f64 / steps as f64;
                values.push(prev + a * (flow - prev));
            }
        }
        values.push(flow);
    }
    Ok(TimeSeries { values, interval_secs: interval, origin: rows[0].1 })
}

/// Writes `series` in the ingestion schema.
pub fn write_csv<W: Write>(writer: W, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["timestamp", "flow"]).map_err(map)?;
    for (i, v) in series.values.iter().enumerate() {
        let ts = series.timestamp(i).format(TIMESTAMP_FORMAT).to_string();
        w.write_record([ts, v.to_string()]).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticConfig};

    fn read(s: &str, opts: LoadOptions) -> Result<TimeSeries> {
        read_csv(s.as_bytes(), opts)
    }

    #[test]
    fn well_formed() {
        let s = "timestamp,flow\n2024-01-01T00:00:00,10\n2024-01-01T00:01:30,12.5\n2024-01-01T00:03:00,9\n";
        let ts = read(s, LoadOptions::default()).unwrap();
        assert_eq!(ts.values, vec![10.0, 12.5, 9.0]);
        assert_eq!(ts.interval_secs, 90);
    }

    #[test]
    fn negative_flow_names_row() {
        let s = "timestamp,flow\n2024-01-01T00:00:00,10\n2024-01-01T00:01:30,-3\n";
        match read(s, LoadOptions::default()) {
            Err(Error::Ingestion { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_order() {
        let s = "timestamp,flow\n2024-01-01T00:01:30,10\n2024-01-01T00:00:00,12\n";
        assert!(matches!(read(s, LoadOptions::default()), Err(Error::Ingestion { row: 3, .. })));
        let sorted = read(s, LoadOptions { sort: true, ..Default::default() }).unwrap();
        assert_eq!(sorted.values, vec![12.0, 10.0]);
    }

    #[test]
    fn gaps_and_fill() {
        let s = "timestamp,flow\n2024-01-01T00:00:00,10\n2024-01-01T00:04:30,40\n";
        assert!(matches!(read(s, LoadOptions::default()), Err(Error::Ingestion { row: 3, .. })));
        let filled = read(s, LoadOptions { fill_gaps: true, ..Default::default() }).unwrap();
        assert_eq!(filled.values, vec![10.0, 20.0, 30.0, 40.0]);
    }

    #[test]
    fn malformed() {
        assert!(read("time,flow\n", LoadOptions::default()).is_err());
        assert!(read("timestamp,flow\n", LoadOptions::default()).is_err());
        assert!(read("timestamp,flow\nyesterday,3\n", LoadOptions::default()).is_err());
        assert!(read("timestamp,flow\n2024-01-01T00:00:00,abc\n", LoadOptions::default()).is_err());
        let dup = "timestamp,flow\n2024-01-01T00:00:00,1\n2024-01-01T00:00:00,2\n";
        assert!(read(dup, LoadOptions::default()).is_err());
    }

    #[test]
    fn synthetic_round_trip() {
        let series = generate_synthetic(&SyntheticConfig { n_days: 1, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &series).unwrap();
        let back = read_csv(buf.as_slice(), LoadOptions::default()).unwrap();
        assert_eq!(back, series);
    }
}
