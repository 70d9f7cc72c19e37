//! File formats: flat key/value configs, CSV data streams, the trial
//! manifest, and report writers.
//!
//! All numeric output uses Rust's shortest round-trip float formatting with a
//! `.` decimal separator and LF line endings, so a value written by one stage
//! parses back to the identical `f64` in the next — staged pipelines match
//! in-process runs bit for bit. Data files carry no timestamps or other
//! hidden state; identical inputs produce identical bytes.

mod kv;
mod manifest;
mod tables;

pub use kv::{
    read_calibration, read_params, read_scenario, write_calibration, write_params,
    write_scenario, ParamsFile,
};
pub use manifest::{
    read_manifest, write_manifest, Leg, Manifest, ManifestLoad, ManifestSkip, TrialRecord,
};
pub use tables::{
    read_displacement, read_encoder, read_force, read_keypoints, read_trajectory,
    write_displacement, write_encoder, write_force, write_keypoints, write_trajectory,
    EncoderFile,
};

use std::path::Path;

use crate::error::{Error, Result};

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_f64(path: &Path, line: usize, field: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("invalid {field} value {raw:?}")))
}

pub(crate) fn parse_u32(path: &Path, line: usize, field: &str, raw: &str) -> Result<u32> {
    raw.trim()
        .parse::<u32>()
        .map_err(|_| Error::parse(path, line, format!("invalid {field} value {raw:?}")))
}

pub(crate) fn parse_i64(path: &Path, line: usize, field: &str, raw: &str) -> Result<i64> {
    raw.trim()
        .parse::<i64>()
        .map_err(|_| Error::parse(path, line, format!("invalid {field} value {raw:?}")))
}

/// Splits a CSV line, validating the field count against a fixed header.
pub(crate) fn split_fields<'a>(
    path: &Path,
    line_no: usize,
    line: &'a str,
    expected: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected {expected} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}
