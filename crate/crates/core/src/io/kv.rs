//! Flat `key = value` configuration files: stereo calibration, machine
//! parameters, and simulation scenarios.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Unit, Vector3};

use super::{fmt_float, parse_f64, read_to_string, write_string};
use crate::dynamics::LegPressParams;
use crate::error::{Error, Result};
use crate::sim::{MotionSpec, NoiseSpec, RailPose, RateSpec, ScenarioConfig};
use crate::stereo::StereoCalibration;

/// Parsed key/value file with line numbers for error reporting.
struct KvFile<'p> {
    path: &'p Path,
    entries: Vec<(String, String, usize)>,
}

impl<'p> KvFile<'p> {
    fn parse(path: &'p Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(path, line_no, "expected `key = value`"));
            };
            entries.push((key.trim().to_string(), value.trim().to_string(), line_no));
        }
        Ok(Self { path, entries })
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str) -> Result<(&str, usize)> {
        self.get(key)
            .ok_or_else(|| Error::parse(self.path, 1, format!("missing required key `{key}`")))
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        let (raw, line) = self.require(key)?;
        parse_f64(self.path, line, key, raw)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some((raw, line)) => parse_f64(self.path, line, key, raw),
            None => Ok(default),
        }
    }
}

/// Reads a calibration file (`focal_px`, `cx`, `cy`, `baseline_m`, `width`,
/// `height`).
pub fn read_calibration(path: &Path) -> Result<StereoCalibration> {
    let kv = KvFile::parse(path)?;
    let focal = kv.require_f64("focal_px")?;
    let cx = kv.require_f64("cx")?;
    let cy = kv.require_f64("cy")?;
    let baseline = kv.require_f64("baseline_m")?;
    let width = kv.require_f64("width")?;
    let height = kv.require_f64("height")?;
    StereoCalibration::new(focal, (cx, cy), baseline, (width as u32, height as u32))
}

pub fn write_calibration(path: &Path, calib: &StereoCalibration) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "focal_px = {}", fmt_float(calib.focal_length_px));
    let _ = writeln!(out, "cx = {}", fmt_float(calib.principal_point.0));
    let _ = writeln!(out, "cy = {}", fmt_float(calib.principal_point.1));
    let _ = writeln!(out, "baseline_m = {}", fmt_float(calib.baseline_m));
    let _ = writeln!(out, "width = {}", calib.image_size.0);
    let _ = writeln!(out, "height = {}", calib.image_size.1);
    write_string(path, &out)
}

/// Machine parameter file plus its calibration flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsFile {
    pub params: LegPressParams,
    /// False while the file still carries placeholder constants.
    pub calibrated: bool,
}

/// Reads a machine parameter file (`m_kg`, `m_s_kg`, `m_w_kg`, `I_kgm2`,
/// `r1_m`, `r2_m`, `alpha_rad`, `beta_rad`, `g`, optional `calibrated`).
pub fn read_params(path: &Path) -> Result<ParamsFile> {
    let kv = KvFile::parse(path)?;
    let params = LegPressParams {
        patient_mass_kg: kv.require_f64("m_kg")?,
        sled_mass_kg: kv.require_f64("m_s_kg")?,
        stack_mass_kg: kv.require_f64("m_w_kg")?,
        pulley_inertia_kgm2: kv.require_f64("I_kgm2")?,
        strap_radius_m: kv.require_f64("r1_m")?,
        stack_radius_m: kv.require_f64("r2_m")?,
        plate_angle_rad: kv.require_f64("alpha_rad")?,
        rail_angle_rad: kv.require_f64("beta_rad")?,
        gravity: kv.f64_or("g", crate::dynamics::STANDARD_GRAVITY)?,
    };
    params.validate()?;
    let calibrated = match kv.get("calibrated") {
        Some((raw, line)) => match raw {
            "true" => true,
            "false" => false,
            _ => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("invalid calibrated flag {raw:?}, expected true or false"),
                ))
            }
        },
        None => true,
    };
    Ok(ParamsFile { params, calibrated })
}

pub fn write_params(path: &Path, params: &LegPressParams, calibrated: bool) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "m_kg = {}", fmt_float(params.patient_mass_kg));
    let _ = writeln!(out, "m_s_kg = {}", fmt_float(params.sled_mass_kg));
    let _ = writeln!(out, "m_w_kg = {}", fmt_float(params.stack_mass_kg));
    let _ = writeln!(out, "I_kgm2 = {}", fmt_float(params.pulley_inertia_kgm2));
    let _ = writeln!(out, "r1_m = {}", fmt_float(params.strap_radius_m));
    let _ = writeln!(out, "r2_m = {}", fmt_float(params.stack_radius_m));
    let _ = writeln!(out, "alpha_rad = {}", fmt_float(params.plate_angle_rad));
    let _ = writeln!(out, "beta_rad = {}", fmt_float(params.rail_angle_rad));
    let _ = writeln!(out, "g = {}", fmt_float(params.gravity));
    let _ = writeln!(out, "calibrated = {calibrated}");
    write_string(path, &out)
}

/// Reads a scenario file. Calibration and machine parameters are inlined with
/// the same keys as their standalone files; a `force_profile_path` is
/// resolved relative to the scenario file and loaded as a force CSV.
pub fn read_scenario(path: &Path) -> Result<ScenarioConfig> {
    let kv = KvFile::parse(path)?;

    let params = LegPressParams {
        patient_mass_kg: kv.require_f64("m_kg")?,
        sled_mass_kg: kv.require_f64("m_s_kg")?,
        stack_mass_kg: kv.require_f64("m_w_kg")?,
        pulley_inertia_kgm2: kv.require_f64("I_kgm2")?,
        strap_radius_m: kv.require_f64("r1_m")?,
        stack_radius_m: kv.require_f64("r2_m")?,
        plate_angle_rad: kv.require_f64("alpha_rad")?,
        rail_angle_rad: kv.require_f64("beta_rad")?,
        gravity: kv.f64_or("g", crate::dynamics::STANDARD_GRAVITY)?,
    };
    let calib = StereoCalibration::new(
        kv.require_f64("focal_px")?,
        (kv.require_f64("cx")?, kv.require_f64("cy")?),
        kv.require_f64("baseline_m")?,
        (
            kv.require_f64("width")? as u32,
            kv.require_f64("height")? as u32,
        ),
    )?;
    let rail = RailPose {
        origin: Vector3::new(
            kv.require_f64("rail_origin_x")?,
            kv.require_f64("rail_origin_y")?,
            kv.require_f64("rail_origin_z")?,
        ),
        direction: Unit::new_normalize(Vector3::new(
            kv.require_f64("rail_dir_x")?,
            kv.require_f64("rail_dir_y")?,
            kv.require_f64("rail_dir_z")?,
        )),
    };

    let (motion_raw, motion_line) = kv.require("motion")?;
    let motion = match motion_raw {
        "sinusoid" => MotionSpec::Sinusoid {
            amplitude_m: kv.require_f64("amplitude_m")?,
            frequency_hz: kv.require_f64("frequency_hz")?,
            cycles: kv.require_f64("cycles")? as u32,
        },
        "force_profile" => {
            let (rel, _) = kv.require("force_profile_path")?;
            let profile_path = path.parent().unwrap_or(Path::new(".")).join(rel);
            let profile = super::read_force(&profile_path)?;
            MotionSpec::ForceProfile {
                timestamps: profile.timestamps,
                force_n: profile.force,
            }
        }
        other => {
            return Err(Error::parse(
                path,
                motion_line,
                format!("unknown motion {other:?}, expected sinusoid or force_profile"),
            ))
        }
    };

    let cfg = ScenarioConfig {
        params,
        calib,
        rail,
        motion,
        lead_in_s: kv.f64_or("lead_in_s", 0.0)?,
        lead_out_s: kv.f64_or("lead_out_s", 0.0)?,
        noise: NoiseSpec {
            pixel_std_px: kv.f64_or("pixel_std_px", 1.0)?,
            encoder_counts_per_rev: kv.f64_or("encoder_counts_per_rev", 10_000.0)? as u32,
            force_noise_std_n: kv.f64_or("force_noise_std_n", 0.0)?,
            timestamp_jitter_frac: kv.f64_or("timestamp_jitter_frac", 0.0)?,
        },
        rates: RateSpec {
            camera_hz: kv.f64_or("camera_hz", 8.0)?,
            encoder_hz: kv.f64_or("encoder_hz", 55.0)?,
            force_plate_hz: kv.f64_or("force_plate_hz", 192.0)?,
        },
        seed: kv.f64_or("seed", 0.0)? as u64,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes a scenario file. A force-profile motion is written to a sibling
/// `<stem>_force_profile.csv` and referenced by relative path.
pub fn write_scenario(path: &Path, cfg: &ScenarioConfig) -> Result<()> {
    let mut out = String::new();
    macro_rules! kv {
        ($key:expr, $val:expr) => {
            let _ = writeln!(out, "{} = {}", $key, $val);
        };
    }

    match &cfg.motion {
        MotionSpec::Sinusoid {
            amplitude_m,
            frequency_hz,
            cycles,
        } => {
            kv!("motion", "sinusoid");
            kv!("amplitude_m", fmt_float(*amplitude_m));
            kv!("frequency_hz", fmt_float(*frequency_hz));
            kv!("cycles", cycles);
        }
        MotionSpec::ForceProfile { timestamps, force_n } => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario");
            let profile_name = format!("{stem}_force_profile.csv");
            let profile_path = path.parent().unwrap_or(Path::new(".")).join(&profile_name);
            let profile = crate::dynamics::ForceSeries::new(
                timestamps.clone(),
                force_n.clone(),
                crate::dynamics::ForceSource::ForcePlate,
            )?;
            super::write_force(&profile_path, &profile)?;
            kv!("motion", "force_profile");
            kv!("force_profile_path", profile_name);
        }
    }
    kv!("lead_in_s", fmt_float(cfg.lead_in_s));
    kv!("lead_out_s", fmt_float(cfg.lead_out_s));
    kv!("pixel_std_px", fmt_float(cfg.noise.pixel_std_px));
    kv!("encoder_counts_per_rev", cfg.noise.encoder_counts_per_rev);
    kv!("force_noise_std_n", fmt_float(cfg.noise.force_noise_std_n));
    kv!(
        "timestamp_jitter_frac",
        fmt_float(cfg.noise.timestamp_jitter_frac)
    );
    kv!("camera_hz", fmt_float(cfg.rates.camera_hz));
    kv!("encoder_hz", fmt_float(cfg.rates.encoder_hz));
    kv!("force_plate_hz", fmt_float(cfg.rates.force_plate_hz));
    kv!("seed", cfg.seed);
    kv!("rail_origin_x", fmt_float(cfg.rail.origin.x));
    kv!("rail_origin_y", fmt_float(cfg.rail.origin.y));
    kv!("rail_origin_z", fmt_float(cfg.rail.origin.z));
    kv!("rail_dir_x", fmt_float(cfg.rail.direction.x));
    kv!("rail_dir_y", fmt_float(cfg.rail.direction.y));
    kv!("rail_dir_z", fmt_float(cfg.rail.direction.z));
    kv!("focal_px", fmt_float(cfg.calib.focal_length_px));
    kv!("cx", fmt_float(cfg.calib.principal_point.0));
    kv!("cy", fmt_float(cfg.calib.principal_point.1));
    kv!("baseline_m", fmt_float(cfg.calib.baseline_m));
    kv!("width", cfg.calib.image_size.0);
    kv!("height", cfg.calib.image_size.1);
    kv!("m_kg", fmt_float(cfg.params.patient_mass_kg));
    kv!("m_s_kg", fmt_float(cfg.params.sled_mass_kg));
    kv!("m_w_kg", fmt_float(cfg.params.stack_mass_kg));
    kv!("I_kgm2", fmt_float(cfg.params.pulley_inertia_kgm2));
    kv!("r1_m", fmt_float(cfg.params.strap_radius_m));
    kv!("r2_m", fmt_float(cfg.params.stack_radius_m));
    kv!("alpha_rad", fmt_float(cfg.params.plate_angle_rad));
    kv!("beta_rad", fmt_float(cfg.params.rail_angle_rad));
    kv!("g", fmt_float(cfg.params.gravity));
    write_string(path, &out)
}
