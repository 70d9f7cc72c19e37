//! CSV data streams: keypoints, trajectories, displacement/force series, and
//! encoder counts. Columns are fixed, headers are required, and comment lines
//! start with `#`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{fmt_float, parse_f64, parse_i64, read_to_string, split_fields, write_string};
use crate::dynamics::{ForceSeries, ForceSource};
use crate::error::{Error, Result};
use crate::stereo::{Keypoint2D, KeypointTrack, Trajectory3D};
use crate::trajectory::{DisplacementSeries, DisplacementSource};

const KEYPOINT_HEADER: &str = "t_sec,view,joint,x_px,y_px,conf";
const DISPLACEMENT_HEADER: &str = "t_sec,disp_m";
const FORCE_HEADER: &str = "t_sec,force_N";
const ENCODER_HEADER: &str = "t_sec,counts";
const TRAJECTORY_HEADER: &str = "t_sec,x_m,y_m,z_m";

/// Splits a file into `(line_number, text)` pairs, separating leading
/// `# key=value` comments from the body.
fn split_comments(text: &str) -> (Vec<(usize, &str)>, Vec<(usize, &str)>) {
    let mut comments = Vec::new();
    let mut body = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            comments.push((idx + 1, trimmed));
        } else {
            body.push((idx + 1, trimmed));
        }
    }
    (comments, body)
}

fn comment_value<'a>(comments: &[(usize, &'a str)], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|(_, c)| {
        let c = c.trim_start_matches('#').trim();
        c.split_once('=')
            .filter(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim())
    })
}

fn expect_header(path: &Path, body: &[(usize, &str)], header: &str) -> Result<()> {
    match body.first() {
        Some((line, text)) if *text == header => {
            let _ = line;
            Ok(())
        }
        Some((line, text)) => Err(Error::parse(
            path,
            *line,
            format!("expected header {header:?}, found {text:?}"),
        )),
        None => Err(Error::parse(path, 1, "empty file")),
    }
}

/// Reads a keypoint CSV. Rows for one joint are paired by timestamp; a frame
/// missing one view keeps a zero-confidence placeholder so downstream code
/// applies its missing-detection policy.
pub fn read_keypoints(path: &Path, joint: &str) -> Result<KeypointTrack> {
    let text = read_to_string(path)?;
    let (_, body) = split_comments(&text);
    expect_header(path, &body, KEYPOINT_HEADER)?;

    struct Row {
        t: f64,
        is_left: bool,
        kp: Keypoint2D,
    }
    let mut rows = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 6)?;
        if f[2] != joint {
            continue;
        }
        let is_left = match f[1] {
            "L" => true,
            "R" => false,
            other => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("view must be L or R, found {other:?}"),
                ))
            }
        };
        let conf = parse_f64(path, line_no, "conf", f[5])?;
        if !(0.0..=1.0).contains(&conf) {
            return Err(Error::parse(
                path,
                line_no,
                format!("confidence {conf} outside [0, 1]"),
            ));
        }
        rows.push(Row {
            t: parse_f64(path, line_no, "t_sec", f[0])?,
            is_left,
            kp: Keypoint2D {
                x: parse_f64(path, line_no, "x_px", f[3])?,
                y: parse_f64(path, line_no, "y_px", f[4])?,
                confidence: conf,
            },
        });
    }
    if rows.is_empty() {
        return Err(Error::parse(
            path,
            1,
            format!("no rows for joint {joint:?}"),
        ));
    }

    rows.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    let missing = Keypoint2D {
        x: 0.0,
        y: 0.0,
        confidence: 0.0,
    };
    let mut timestamps = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].t;
        let mut l = None;
        let mut r = None;
        while i < rows.len() && rows[i].t == t {
            if rows[i].is_left {
                l = Some(rows[i].kp);
            } else {
                r = Some(rows[i].kp);
            }
            i += 1;
        }
        timestamps.push(t);
        left.push(l.unwrap_or(missing));
        right.push(r.unwrap_or(missing));
    }
    KeypointTrack::new(timestamps, left, right, joint)
}

/// Writes a keypoint track: one `L` row and one `R` row per frame.
pub fn write_keypoints(path: &Path, track: &KeypointTrack) -> Result<()> {
    let mut out = String::with_capacity(track.len() * 64);
    out.push_str(KEYPOINT_HEADER);
    out.push('\n');
    for i in 0..track.len() {
        let t = fmt_float(track.timestamps[i]);
        for (view, kp) in [("L", &track.left[i]), ("R", &track.right[i])] {
            let _ = writeln!(
                out,
                "{t},{view},{},{},{},{}",
                track.joint_name,
                fmt_float(kp.x),
                fmt_float(kp.y),
                fmt_float(kp.confidence)
            );
        }
    }
    write_string(path, &out)
}

pub fn read_displacement(path: &Path) -> Result<DisplacementSeries> {
    let text = read_to_string(path)?;
    let (comments, body) = split_comments(&text);
    let source = comment_value(&comments, "source")
        .and_then(DisplacementSource::from_label)
        .ok_or_else(|| {
            Error::parse(path, 1, "missing `# source=camera|encoder` comment header")
        })?;
    expect_header(path, &body, DISPLACEMENT_HEADER)?;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 2)?;
        timestamps.push(parse_f64(path, line_no, "t_sec", f[0])?);
        values.push(parse_f64(path, line_no, "disp_m", f[1])?);
    }
    DisplacementSeries::new(timestamps, values, source)
}

pub fn write_displacement(path: &Path, series: &DisplacementSeries) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 32);
    let _ = writeln!(out, "# source={}", series.source.label());
    out.push_str(DISPLACEMENT_HEADER);
    out.push('\n');
    for (t, v) in series.timestamps.iter().zip(&series.displacement) {
        let _ = writeln!(out, "{},{}", fmt_float(*t), fmt_float(*v));
    }
    write_string(path, &out)
}

pub fn read_force(path: &Path) -> Result<ForceSeries> {
    let text = read_to_string(path)?;
    let (comments, body) = split_comments(&text);
    let source = comment_value(&comments, "source")
        .and_then(ForceSource::from_label)
        .ok_or_else(|| {
            Error::parse(
                path,
                1,
                "missing `# source=camera|force_plate` comment header",
            )
        })?;
    expect_header(path, &body, FORCE_HEADER)?;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 2)?;
        timestamps.push(parse_f64(path, line_no, "t_sec", f[0])?);
        values.push(parse_f64(path, line_no, "force_N", f[1])?);
    }
    ForceSeries::new(timestamps, values, source)
}

pub fn write_force(path: &Path, series: &ForceSeries) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 32);
    let _ = writeln!(out, "# source={}", series.source.label());
    out.push_str(FORCE_HEADER);
    out.push('\n');
    for (t, v) in series.timestamps.iter().zip(&series.force) {
        let _ = writeln!(out, "{},{}", fmt_float(*t), fmt_float(*v));
    }
    write_string(path, &out)
}

/// Encoder stream with its resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderFile {
    pub timestamps: Vec<f64>,
    pub counts: Vec<i64>,
    pub counts_per_rev: u32,
}

pub fn read_encoder(path: &Path) -> Result<EncoderFile> {
    let text = read_to_string(path)?;
    let (comments, body) = split_comments(&text);
    let cpr = comment_value(&comments, "counts_per_rev")
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| Error::parse(path, 1, "missing `# counts_per_rev=N` comment header"))?;
    expect_header(path, &body, ENCODER_HEADER)?;
    let mut timestamps = Vec::new();
    let mut counts = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 2)?;
        timestamps.push(parse_f64(path, line_no, "t_sec", f[0])?);
        counts.push(parse_i64(path, line_no, "counts", f[1])?);
    }
    Ok(EncoderFile {
        timestamps,
        counts,
        counts_per_rev: cpr,
    })
}

pub fn write_encoder(
    path: &Path,
    timestamps: &[f64],
    counts: &[i64],
    counts_per_rev: u32,
) -> Result<()> {
    let mut out = String::with_capacity(timestamps.len() * 24);
    let _ = writeln!(out, "# counts_per_rev={counts_per_rev}");
    out.push_str(ENCODER_HEADER);
    out.push('\n');
    for (t, c) in timestamps.iter().zip(counts) {
        let _ = writeln!(out, "{},{c}", fmt_float(*t));
    }
    write_string(path, &out)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory3D> {
    let text = read_to_string(path)?;
    let (_, body) = split_comments(&text);
    expect_header(path, &body, TRAJECTORY_HEADER)?;
    let mut timestamps = Vec::new();
    let mut points = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 4)?;
        timestamps.push(parse_f64(path, line_no, "t_sec", f[0])?);
        points.push(Vector3::new(
            parse_f64(path, line_no, "x_m", f[1])?,
            parse_f64(path, line_no, "y_m", f[2])?,
            parse_f64(path, line_no, "z_m", f[3])?,
        ));
    }
    Trajectory3D::new(timestamps, points)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory3D) -> Result<()> {
    let mut out = String::with_capacity(traj.len() * 48);
    out.push_str("# frame=left_camera\n");
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, p) in traj.timestamps.iter().zip(&traj.points) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_float(*t),
            fmt_float(p.x),
            fmt_float(p.y),
            fmt_float(p.z)
        );
    }
    write_string(path, &out)
}
