//! Trial manifest: which recordings belong to which subject, session, leg,
//! and load, plus the shared calibration and machine-parameter files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{parse_f64, parse_u32, read_to_string, split_fields, write_string};
use crate::error::{Error, Result};

const MANIFEST_HEADER: &str =
    "trial_id,subject_id,session_week,leg,load_fraction,keypoint_path,encoder_path,force_path";

/// Which leg performed the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub fn label(&self) -> &'static str {
        match self {
            Leg::Left => "left",
            Leg::Right => "right",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "left" => Some(Leg::Left),
            "right" => Some(Leg::Right),
            _ => None,
        }
    }
}

/// One recorded leg-press interval and its data files. Ground-truth streams
/// are optional; camera keypoints are not.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    pub subject_id: String,
    /// Week of the rehabilitation program, 1..=12.
    pub session_week: u32,
    pub leg: Leg,
    /// Fraction of body weight on the stack; the protocol uses 0.30 and 0.50.
    pub load_fraction: f64,
    pub keypoint_path: PathBuf,
    pub encoder_path: Option<PathBuf>,
    pub force_path: Option<PathBuf>,
}

/// Parsed manifest with paths resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub trials: Vec<TrialRecord>,
    pub calibration_path: PathBuf,
    pub params_path: PathBuf,
}

/// A manifest row that failed validation and was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestSkip {
    pub line: usize,
    pub trial_id: String,
    pub reason: String,
}

/// Manifest plus the skip report for rows that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestLoad {
    pub manifest: Manifest,
    pub skipped: Vec<ManifestSkip>,
}

const ALLOWED_LOAD_FRACTIONS: [f64; 2] = [0.30, 0.50];

/// Reads and validates a manifest. Rows violating the protocol (bad week,
/// load fraction, leg, or a missing keypoint file) are skipped with a reason;
/// duplicate trial ids and an empty manifest are hard errors.
pub fn read_manifest(path: &Path) -> Result<ManifestLoad> {
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let mut calibration_path = None;
    let mut params_path = None;
    let mut body = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                match k.trim() {
                    "calibration" => calibration_path = Some(base.join(v.trim())),
                    "params" => params_path = Some(base.join(v.trim())),
                    _ => {}
                }
            }
            continue;
        }
        body.push((line_no, line));
    }

    let calibration_path = calibration_path
        .ok_or_else(|| Error::parse(path, 1, "missing `# calibration=<path>` directive"))?;
    let params_path =
        params_path.ok_or_else(|| Error::parse(path, 1, "missing `# params=<path>` directive"))?;

    match body.first() {
        Some((line, text)) if *text == MANIFEST_HEADER => {
            let _ = line;
        }
        Some((line, text)) => {
            return Err(Error::parse(
                path,
                *line,
                format!("expected header {MANIFEST_HEADER:?}, found {text:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty manifest")),
    }

    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut skipped = Vec::new();
    for &(line_no, line) in &body[1..] {
        let f = split_fields(path, line_no, line, 8)?;
        let trial_id = f[0].trim().to_string();
        if trial_id.is_empty() {
            return Err(Error::parse(path, line_no, "empty trial_id"));
        }
        if trials.iter().any(|t| t.trial_id == trial_id) {
            return Err(Error::parse(
                path,
                line_no,
                format!("duplicate trial_id {trial_id:?}"),
            ));
        }

        let mut skip = |reason: String| {
            skipped.push(ManifestSkip {
                line: line_no,
                trial_id: trial_id.clone(),
                reason,
            });
        };

        let week = match parse_u32(path, line_no, "session_week", f[2]) {
            Ok(w) if (1..=12).contains(&w) => w,
            Ok(w) => {
                skip(format!("session_week {w} outside 1..=12"));
                continue;
            }
            Err(_) => {
                skip(format!("invalid session_week {:?}", f[2]));
                continue;
            }
        };
        let Some(leg) = Leg::from_label(f[3].trim()) else {
            skip(format!("leg must be left or right, found {:?}", f[3]));
            continue;
        };
        let load = match parse_f64(path, line_no, "load_fraction", f[4]) {
            Ok(l) => l,
            Err(_) => {
                skip(format!("invalid load_fraction {:?}", f[4]));
                continue;
            }
        };
        if !ALLOWED_LOAD_FRACTIONS
            .iter()
            .any(|a| (load - a).abs() < 1e-9)
        {
            skip(format!("load_fraction {load} not in the 0.30/0.50 protocol"));
            continue;
        }
        let keypoint_path = base.join(f[5].trim());
        if !keypoint_path.is_file() {
            skip(format!("keypoint file {} not found", keypoint_path.display()));
            continue;
        }
        let optional = |field: &str| -> Option<PathBuf> {
            let t = field.trim();
            if t.is_empty() {
                None
            } else {
                Some(base.join(t))
            }
        };

        trials.push(TrialRecord {
            trial_id,
            subject_id: f[1].trim().to_string(),
            session_week: week,
            leg,
            load_fraction: load,
            keypoint_path,
            encoder_path: optional(f[6]),
            force_path: optional(f[7]),
        });
    }

    if trials.is_empty() && skipped.is_empty() {
        return Err(Error::parse(path, 1, "manifest lists no trials"));
    }

    Ok(ManifestLoad {
        manifest: Manifest {
            trials,
            calibration_path,
            params_path,
        },
        skipped,
    })
}

/// Writes a manifest; paths are emitted as given (callers pass paths relative
/// to the manifest's directory).
pub fn write_manifest(
    path: &Path,
    calibration: &str,
    params: &str,
    rows: &[(TrialRecord, String, String, String)],
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# calibration={calibration}");
    let _ = writeln!(out, "# params={params}");
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    for (t, kp, enc, force) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{kp},{enc},{force}",
            t.trial_id,
            t.subject_id,
            t.session_week,
            t.leg.label(),
            super::fmt_float(t.load_fraction),
        );
    }
    write_string(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_fixture(dir: &Path, rows: &str) -> PathBuf {
        std::fs::write(dir.join("calib.txt"), "").unwrap();
        std::fs::write(dir.join("machine.txt"), "").unwrap();
        std::fs::write(dir.join("kp.csv"), "").unwrap();
        let path = dir.join("manifest.csv");
        let text = format!(
            "# calibration=calib.txt\n# params=machine.txt\n{MANIFEST_HEADER}\n{rows}"
        );
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn well_formed_manifest_loads_all_trials() {
        let dir = tempdir().unwrap();
        let rows = "t1,s1,1,left,0.3,kp.csv,,\n\
                    t2,s1,1,right,0.3,kp.csv,,\n\
                    t3,s1,1,left,0.5,kp.csv,,\n\
                    t4,s1,1,right,0.5,kp.csv,,\n";
        let load = read_manifest(&write_fixture(dir.path(), rows)).unwrap();
        assert_eq!(load.manifest.trials.len(), 4);
        assert!(load.skipped.is_empty());
        assert!(load.manifest.calibration_path.ends_with("calib.txt"));
    }

    #[test]
    fn off_protocol_load_fraction_is_skipped_with_reason() {
        let dir = tempdir().unwrap();
        let rows = "t1,s1,1,left,0.4,kp.csv,,\nt2,s1,1,right,0.5,kp.csv,,\n";
        let load = read_manifest(&write_fixture(dir.path(), rows)).unwrap();
        assert_eq!(load.manifest.trials.len(), 1);
        assert_eq!(load.skipped.len(), 1);
        assert!(load.skipped[0].reason.contains("0.4"));
    }

    #[test]
    fn duplicate_trial_id_is_fatal() {
        let dir = tempdir().unwrap();
        let rows = "t1,s1,1,left,0.3,kp.csv,,\nt1,s1,2,left,0.3,kp.csv,,\n";
        let err = read_manifest(&write_fixture(dir.path(), rows)).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn empty_manifest_is_fatal() {
        let dir = tempdir().unwrap();
        let path = write_fixture(dir.path(), "");
        assert!(read_manifest(&path).is_err());
    }

    #[test]
    fn missing_keypoint_file_skips_row() {
        let dir = tempdir().unwrap();
        let rows = "t1,s1,1,left,0.3,missing.csv,,\nt2,s1,1,left,0.5,kp.csv,,\n";
        let load = read_manifest(&write_fixture(dir.path(), rows)).unwrap();
        assert_eq!(load.manifest.trials.len(), 1);
        assert_eq!(load.skipped[0].trial_id, "t1");
    }

    #[test]
    fn bad_week_skips_row() {
        let dir = tempdir().unwrap();
        let rows = "t1,s1,13,left,0.3,kp.csv,,\n";
        let load = read_manifest(&write_fixture(dir.path(), rows)).unwrap();
        assert!(load.manifest.trials.is_empty());
        assert_eq!(load.skipped.len(), 1);
    }
}
