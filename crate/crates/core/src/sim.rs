//! Synthetic measurement-chain simulator used as the test oracle.
//!
//! A scenario prescribes the sled motion (directly as a sinusoidal press, or
//! indirectly as a force profile integrated through the machine model) and
//! the simulator emits everything the real rig would record: stereo keypoint
//! detections with pixel noise, quantized encoder counts, and a noisy force
//! plate stream, together with the exact ground truth for each quantity.
//!
//! All randomness comes from a single seeded generator drawn in a fixed
//! order, so a scenario reproduces byte-identical outputs run after run.

use nalgebra::{Unit, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{ForceSeries, ForceSource, LegPressParams};
use crate::error::{Error, Result};
use crate::series::interp_at;
use crate::stereo::{project, Keypoint2D, KeypointTrack, StereoCalibration, Trajectory3D};
use crate::trajectory::{DisplacementSeries, DisplacementSource};

/// Fixed integration rate for force-profile scenarios, Hz.
pub const ODE_RATE_HZ: f64 = 1000.0;

/// Placement of the leg-press rail in the left-camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RailPose {
    /// Hip position at zero displacement, meters.
    pub origin: Vector3<f64>,
    /// Unit direction the hip moves along as the sled extends.
    pub direction: Unit<Vector3<f64>>,
}

impl Default for RailPose {
    /// Rail four meters from the camera, moving mostly across the image with
    /// a small depth component, so plane projection has real work to do.
    fn default() -> Self {
        Self {
            origin: Vector3::new(-0.2, 0.1, 4.0),
            direction: Unit::new_normalize(Vector3::new(0.9, -0.3, 0.1)),
        }
    }
}

/// Prescribed sled motion.
#[derive(Debug, Clone, PartialEq)]
pub enum MotionSpec {
    /// `x(t) = amplitude (1 - cos(2 pi f t))` for `cycles` full periods:
    /// displacement starts at zero, peaks at `2 * amplitude`, and produces
    /// exactly one repetition per cycle.
    Sinusoid {
        amplitude_m: f64,
        frequency_hz: f64,
        cycles: u32,
    },
    /// Piecewise-linear foot-plate force profile `f*(t)`; the motion is
    /// integrated from it with fixed-step RK4 at [`ODE_RATE_HZ`].
    ForceProfile {
        timestamps: Vec<f64>,
        force_n: Vec<f64>,
    },
}

/// Sensor noise and quantization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Std of i.i.d. Gaussian pixel noise added to every keypoint coordinate.
    pub pixel_std_px: f64,
    /// Encoder resolution, counts per revolution (ideal quantizer).
    pub encoder_counts_per_rev: u32,
    /// Std of Gaussian noise on the force-plate samples, newtons.
    pub force_noise_std_n: f64,
    /// Camera timestamp jitter as a fraction of the frame interval.
    pub timestamp_jitter_frac: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            pixel_std_px: 1.0,
            encoder_counts_per_rev: 10_000,
            force_noise_std_n: 2.0,
            timestamp_jitter_frac: 0.1,
        }
    }
}

/// Nominal sensor sampling rates, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSpec {
    pub camera_hz: f64,
    pub encoder_hz: f64,
    pub force_plate_hz: f64,
}

impl Default for RateSpec {
    fn default() -> Self {
        Self {
            camera_hz: 8.0,
            encoder_hz: 55.0,
            force_plate_hz: 192.0,
        }
    }
}

/// Complete description of one simulated trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: LegPressParams,
    pub calib: StereoCalibration,
    pub rail: RailPose,
    pub motion: MotionSpec,
    /// Rest time before the motion starts, seconds.
    pub lead_in_s: f64,
    /// Rest time after the motion ends, seconds.
    pub lead_out_s: f64,
    pub noise: NoiseSpec,
    pub rates: RateSpec,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            params: LegPressParams::default(),
            calib: StereoCalibration::default_rig(),
            rail: RailPose::default(),
            motion: MotionSpec::Sinusoid {
                amplitude_m: 0.2,
                frequency_hz: 0.5,
                cycles: 15,
            },
            lead_in_s: 2.0,
            lead_out_s: 3.0,
            noise: NoiseSpec::default(),
            rates: RateSpec::default(),
            seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.calib.validate()?;
        if !(self.rates.camera_hz > 0.0
            && self.rates.encoder_hz > 0.0
            && self.rates.force_plate_hz > 0.0)
        {
            return Err(Error::Scenario("sensor rates must be positive".into()));
        }
        if self.lead_in_s < 0.0 || self.lead_out_s < 0.0 {
            return Err(Error::Scenario("lead times must be non-negative".into()));
        }
        if !(0.0..0.5).contains(&self.noise.timestamp_jitter_frac) {
            return Err(Error::Scenario(
                "timestamp jitter fraction must lie in [0, 0.5)".into(),
            ));
        }
        if self.noise.pixel_std_px < 0.0 || self.noise.force_noise_std_n < 0.0 {
            return Err(Error::Scenario("noise levels must be non-negative".into()));
        }
        if self.noise.encoder_counts_per_rev == 0 {
            return Err(Error::Scenario("encoder resolution must be positive".into()));
        }
        match &self.motion {
            MotionSpec::Sinusoid {
                amplitude_m,
                frequency_hz,
                cycles,
            } => {
                if !(*amplitude_m > 0.0) || !(*frequency_hz > 0.0) || *cycles < 1 {
                    return Err(Error::Scenario(
                        "sinusoid needs positive amplitude and frequency and at least one cycle"
                            .into(),
                    ));
                }
            }
            MotionSpec::ForceProfile { timestamps, force_n } => {
                if timestamps.len() != force_n.len() || timestamps.len() < 2 {
                    return Err(Error::Scenario(
                        "force profile needs matching timestamp/force vectors of length >= 2"
                            .into(),
                    ));
                }
                if timestamps.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Scenario(
                        "force profile timestamps must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Total trial duration, seconds.
    pub fn duration(&self) -> f64 {
        let active = match &self.motion {
            MotionSpec::Sinusoid {
                frequency_hz,
                cycles,
                ..
            } => *cycles as f64 / frequency_hz,
            MotionSpec::ForceProfile { timestamps, .. } => {
                timestamps.last().copied().unwrap_or(0.0)
            }
        };
        self.lead_in_s + active + self.lead_out_s
    }
}

/// Exact rail displacement and acceleration laws used by the simulator.
#[derive(Debug, Clone)]
enum MotionLaw {
    Sinusoid {
        amplitude: f64,
        omega: f64,
        lead_in: f64,
        active: f64,
    },
    Tabulated {
        timestamps: Vec<f64>,
        x: Vec<f64>,
        accel: Vec<f64>,
    },
}

impl MotionLaw {
    fn displacement(&self, t: f64) -> f64 {
        match self {
            MotionLaw::Sinusoid {
                amplitude,
                omega,
                lead_in,
                active,
            } => {
                let tau = t - lead_in;
                if (*lead_in > 0.0 && tau < 0.0) || tau > *active {
                    // Integer cycles end at x = 0, so both rests sit at zero.
                    0.0
                } else {
                    amplitude * (1.0 - (omega * tau).cos())
                }
            }
            MotionLaw::Tabulated { timestamps, x, .. } => interp_at(timestamps, x, t),
        }
    }

    fn acceleration(&self, t: f64) -> f64 {
        match self {
            MotionLaw::Sinusoid {
                amplitude,
                omega,
                lead_in,
                active,
            } => {
                let tau = t - lead_in;
                if (*lead_in > 0.0 && tau < 0.0) || tau > *active {
                    0.0
                } else {
                    amplitude * omega * omega * (omega * tau).cos()
                }
            }
            MotionLaw::Tabulated {
                timestamps, accel, ..
            } => interp_at(timestamps, accel, t),
        }
    }
}

/// Exact per-trial truth the estimation pipeline is scored against.
#[derive(Debug, Clone)]
pub struct GroundTruthBundle {
    /// True displacement from the first camera sample, on the camera grid.
    pub x_true: DisplacementSeries,
    /// True foot-plate force on the camera grid.
    pub f_true: ForceSeries,
    /// Commanded repetition count.
    pub rep_count_true: u32,
    /// Noise-free hip path on the camera grid, left-camera frame.
    pub hip_path_3d: Trajectory3D,
}

/// Everything one simulated trial produces.
#[derive(Debug, Clone)]
pub struct SimulatedTrial {
    /// Noisy stereo detections of the hip joint.
    pub keypoints: KeypointTrack,
    /// Encoder samples: (timestamps, quantized counts).
    pub encoder: (Vec<f64>, Vec<i64>),
    /// Noisy force-plate stream.
    pub force_plate: ForceSeries,
    pub truth: GroundTruthBundle,
}

/// Runs the full measurement chain for a scenario.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulatedTrial> {
    cfg.validate()?;
    let duration = cfg.duration();
    let law = build_motion_law(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Camera stream: jittered timestamps, exact projection, pixel noise.
    // Draw order is fixed: jitter first, then per-frame pixel noise, then
    // the force-plate noise, so identical seeds give identical bytes.
    let cam_h = 1.0 / cfg.rates.camera_hz;
    let n_cam = (duration * cfg.rates.camera_hz).floor() as usize;
    if n_cam < 2 {
        return Err(Error::Scenario(format!(
            "camera rate {} Hz over {duration} s yields fewer than 2 frames",
            cfg.rates.camera_hz
        )));
    }
    let mut cam_ts = Vec::with_capacity(n_cam);
    for i in 0..n_cam {
        let jitter = if cfg.noise.timestamp_jitter_frac > 0.0 {
            let j: f64 = rng.random_range(-1.0..1.0);
            j * cfg.noise.timestamp_jitter_frac * cam_h
        } else {
            0.0
        };
        cam_ts.push(i as f64 * cam_h + jitter);
    }

    let dir = cfg.rail.direction.into_inner();
    let mut left = Vec::with_capacity(n_cam);
    let mut right = Vec::with_capacity(n_cam);
    let mut hip_points = Vec::with_capacity(n_cam);
    let (w, h) = cfg.calib.image_size;
    for &t in &cam_ts {
        let hip = cfg.rail.origin + dir * law.displacement(t);
        let (l, r) = project(&hip, &cfg.calib).map_err(|_| {
            Error::Scenario(format!("hip at t = {t:.3} s lies behind the camera"))
        })?;
        for kp in [&l, &r] {
            if kp.x < 0.0 || kp.x > w as f64 || kp.y < 0.0 || kp.y > h as f64 {
                return Err(Error::Scenario(format!(
                    "hip projects outside the {w}x{h} image at t = {t:.3} s"
                )));
            }
        }
        let noisy = |kp: Keypoint2D, rng: &mut ChaCha8Rng| -> Keypoint2D {
            if cfg.noise.pixel_std_px > 0.0 {
                Keypoint2D {
                    x: kp.x + cfg.noise.pixel_std_px * rng.sample::<f64, _>(StandardNormal),
                    y: kp.y + cfg.noise.pixel_std_px * rng.sample::<f64, _>(StandardNormal),
                    confidence: 1.0,
                }
            } else {
                kp
            }
        };
        left.push(noisy(l, &mut rng));
        right.push(noisy(r, &mut rng));
        hip_points.push(hip);
    }
    let keypoints = KeypointTrack::new(cam_ts.clone(), left, right, "hip")?;

    // Encoder: ideal quantizer of the pulley angle at its own exact grid.
    let n_enc = (duration * cfg.rates.encoder_hz).floor() as usize;
    let enc_h = 1.0 / cfg.rates.encoder_hz;
    let cpr = cfg.noise.encoder_counts_per_rev as f64;
    let two_pi_r1 = std::f64::consts::TAU * cfg.params.strap_radius_m;
    let mut enc_ts = Vec::with_capacity(n_enc);
    let mut enc_counts = Vec::with_capacity(n_enc);
    for j in 0..n_enc {
        let t = j as f64 * enc_h;
        enc_ts.push(t);
        enc_counts.push((law.displacement(t) / two_pi_r1 * cpr).round() as i64);
    }

    // Force plate: exact model force plus Gaussian noise at its own grid.
    let n_fp = (duration * cfg.rates.force_plate_hz).floor() as usize;
    let fp_h = 1.0 / cfg.rates.force_plate_hz;
    let mut fp_ts = Vec::with_capacity(n_fp);
    let mut fp_vals = Vec::with_capacity(n_fp);
    for k in 0..n_fp {
        let t = k as f64 * fp_h;
        let noise = if cfg.noise.force_noise_std_n > 0.0 {
            cfg.noise.force_noise_std_n * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        fp_ts.push(t);
        fp_vals.push(cfg.params.force_from_accel(law.acceleration(t)) + noise);
    }
    let force_plate = ForceSeries::new(fp_ts, fp_vals, ForceSource::ForcePlate)?;

    // Ground truth on the camera grid. Displacement is referenced to the
    // first camera sample so it matches what a start-referenced estimator
    // can observe.
    let hip0 = hip_points[0];
    let x_true_vals: Vec<f64> = hip_points.iter().map(|p| (p - hip0).norm()).collect();
    let f_true_vals: Vec<f64> = cam_ts
        .iter()
        .map(|&t| cfg.params.force_from_accel(law.acceleration(t)))
        .collect();
    let rep_count_true = match &cfg.motion {
        MotionSpec::Sinusoid { cycles, .. } => *cycles,
        MotionSpec::ForceProfile { .. } => {
            count_true_reps(&cam_ts, &x_true_vals)
        }
    };

    Ok(SimulatedTrial {
        keypoints,
        encoder: (enc_ts, enc_counts),
        force_plate,
        truth: GroundTruthBundle {
            x_true: DisplacementSeries::new(
                cam_ts.clone(),
                x_true_vals,
                DisplacementSource::Encoder,
            )?,
            f_true: ForceSeries::new(cam_ts.clone(), f_true_vals, ForceSource::ForcePlate)?,
            rep_count_true,
            hip_path_3d: Trajectory3D::new(cam_ts, hip_points)?,
        },
    })
}

fn build_motion_law(cfg: &ScenarioConfig) -> Result<MotionLaw> {
    match &cfg.motion {
        MotionSpec::Sinusoid {
            amplitude_m,
            frequency_hz,
            cycles,
        } => Ok(MotionLaw::Sinusoid {
            amplitude: *amplitude_m,
            omega: std::f64::consts::TAU * frequency_hz,
            lead_in: cfg.lead_in_s,
            active: *cycles as f64 / frequency_hz,
        }),
        MotionSpec::ForceProfile { timestamps, force_n } => {
            let (ts, x, accel) =
                integrate_force_profile(&cfg.params, timestamps, force_n, cfg.lead_in_s)?;
            Ok(MotionLaw::Tabulated { timestamps: ts, x, accel })
        }
    }
}

/// Integrates the sled motion produced by a force profile with fixed-step
/// RK4 at [`ODE_RATE_HZ`]. State is (x, v); the force enters through the
/// inverted machine model.
fn integrate_force_profile(
    params: &LegPressParams,
    profile_ts: &[f64],
    profile_force: &[f64],
    lead_in: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let h = 1.0 / ODE_RATE_HZ;
    let t_end = lead_in + profile_ts[profile_ts.len() - 1];
    let n = (t_end / h).ceil() as usize + 1;

    let accel_at = |t: f64| -> f64 {
        if t < lead_in {
            0.0
        } else {
            params.accel_from_force(interp_at(profile_ts, profile_force, t - lead_in))
        }
    };

    let mut ts = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    let mut accels = Vec::with_capacity(n);
    let mut x = 0.0_f64;
    let mut v = 0.0_f64;
    for i in 0..n {
        let t = i as f64 * h;
        ts.push(t);
        xs.push(x);
        accels.push(accel_at(t));

        // Classic RK4 on (x' = v, v' = a(t)).
        let k1x = v;
        let k1v = accel_at(t);
        let k2x = v + 0.5 * h * k1v;
        let k2v = accel_at(t + 0.5 * h);
        let k3x = v + 0.5 * h * k2v;
        let k3v = accel_at(t + 0.5 * h);
        let k4x = v + h * k3v;
        let k4v = accel_at(t + h);
        x += h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0;
        v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
    }
    if xs.iter().any(|&x| x < -1e-9) {
        return Err(Error::Scenario(
            "force profile drives the sled behind its start stop".into(),
        ));
    }
    Ok((ts, xs, accels))
}

/// Bare negative-slope crossing count of the exact displacement signal.
fn count_true_reps(ts: &[f64], x: &[f64]) -> u32 {
    let series = DisplacementSeries {
        timestamps: ts.to_vec(),
        displacement: x.to_vec(),
        source: DisplacementSource::Encoder,
    };
    crate::metrics::count_reps(
        &series,
        (ts[0], ts[ts.len() - 1]),
        crate::metrics::RepCountMode::Bare,
    )
    .map(|r| r.count() as u32)
    .unwrap_or(0)
}

/// Decodes encoder counts back to displacement through the strap radius.
pub fn decode_encoder(
    timestamps: &[f64],
    counts: &[i64],
    counts_per_rev: u32,
    strap_radius_m: f64,
) -> Result<DisplacementSeries> {
    if counts_per_rev == 0 {
        return Err(Error::InvalidConfig {
            what: "encoder",
            why: "counts per revolution must be positive".into(),
        });
    }
    let scale = std::f64::consts::TAU * strap_radius_m / counts_per_rev as f64;
    DisplacementSeries::new(
        timestamps.to_vec(),
        counts.iter().map(|&c| c as f64 * scale).collect(),
        DisplacementSource::Encoder,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quiet_scenario() -> ScenarioConfig {
        ScenarioConfig {
            noise: NoiseSpec {
                pixel_std_px: 0.0,
                force_noise_std_n: 0.0,
                timestamp_jitter_frac: 0.0,
                ..NoiseSpec::default()
            },
            motion: MotionSpec::Sinusoid {
                amplitude_m: 0.2,
                frequency_hz: 0.5,
                cycles: 5,
            },
            lead_in_s: 0.0,
            lead_out_s: 0.0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn stream_lengths_match_rates() {
        let cfg = ScenarioConfig::default();
        let trial = simulate(&cfg).unwrap();
        let dur = cfg.duration();
        let expect = |rate: f64| (dur * rate).floor() as i64;
        assert!((trial.keypoints.len() as i64 - expect(cfg.rates.camera_hz)).abs() <= 1);
        assert!((trial.encoder.0.len() as i64 - expect(cfg.rates.encoder_hz)).abs() <= 1);
        assert!((trial.force_plate.len() as i64 - expect(cfg.rates.force_plate_hz)).abs() <= 1);
    }

    #[test]
    fn truth_is_kinematically_consistent() {
        let trial = simulate(&ScenarioConfig::default()).unwrap();
        let hip0 = trial.truth.hip_path_3d.points[0];
        for (p, &x) in trial
            .truth
            .hip_path_3d
            .points
            .iter()
            .zip(&trial.truth.x_true.displacement)
        {
            assert!(((p - hip0).norm() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn truth_force_matches_model_exactly() {
        // Substituting the simulated motion into the force model reproduces
        // the emitted truth bit for bit (same code path, zero noise budget).
        let cfg = quiet_scenario();
        let trial = simulate(&cfg).unwrap();
        let omega = std::f64::consts::TAU * 0.5;
        for (&t, &f) in trial
            .truth
            .f_true
            .timestamps
            .iter()
            .zip(&trial.truth.f_true.force)
        {
            let accel = 0.2 * omega * omega * (omega * t).cos();
            let expected = cfg.params.force_from_accel(accel);
            assert!((f - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn same_seed_reproduces_identical_streams() {
        let cfg = ScenarioConfig::default();
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.keypoints, b.keypoints);
        assert_eq!(a.encoder, b.encoder);
        assert_eq!(a.force_plate, b.force_plate);
    }

    #[test]
    fn different_seed_changes_noise() {
        let mut cfg = ScenarioConfig::default();
        let a = simulate(&cfg).unwrap();
        cfg.seed = 43;
        let b = simulate(&cfg).unwrap();
        assert_ne!(a.keypoints, b.keypoints);
    }

    #[test]
    fn constant_force_profile_gives_quadratic_motion() {
        // Constant force above statics: constant acceleration, so the exact
        // displacement is a t^2 / 2.
        let params = LegPressParams::default();
        let f_const = params.statics_force() + 50.0;
        let accel = params.accel_from_force(f_const);
        let cfg = ScenarioConfig {
            motion: MotionSpec::ForceProfile {
                timestamps: vec![0.0, 4.0],
                force_n: vec![f_const, f_const],
            },
            lead_in_s: 0.0,
            lead_out_s: 0.0,
            noise: NoiseSpec {
                pixel_std_px: 0.0,
                force_noise_std_n: 0.0,
                timestamp_jitter_frac: 0.0,
                ..NoiseSpec::default()
            },
            rail: RailPose {
                // Keep the long quadratic run inside the viewing frustum.
                origin: Vector3::new(-0.5, 0.0, 6.0),
                direction: Unit::new_normalize(Vector3::new(0.9, -0.3, 0.1)),
            },
            ..ScenarioConfig::default()
        };
        let trial = simulate(&cfg).unwrap();
        for (&t, &x) in trial
            .truth
            .x_true
            .timestamps
            .iter()
            .zip(&trial.truth.x_true.displacement)
        {
            let expected = 0.5 * accel * t * t;
            assert_relative_eq!(x, expected, epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn encoder_decode_error_bounded_by_half_step() {
        // Slow motion so quantization dominates interpolation error.
        let cfg = ScenarioConfig {
            motion: MotionSpec::Sinusoid {
                amplitude_m: 0.2,
                frequency_hz: 0.1,
                cycles: 2,
            },
            lead_in_s: 0.0,
            lead_out_s: 0.0,
            noise: NoiseSpec {
                pixel_std_px: 0.0,
                force_noise_std_n: 0.0,
                timestamp_jitter_frac: 0.0,
                ..NoiseSpec::default()
            },
            ..ScenarioConfig::default()
        };
        let trial = simulate(&cfg).unwrap();
        let decoded = decode_encoder(
            &trial.encoder.0,
            &trial.encoder.1,
            cfg.noise.encoder_counts_per_rev,
            cfg.params.strap_radius_m,
        )
        .unwrap();
        let half_step = std::f64::consts::TAU * cfg.params.strap_radius_m
            / cfg.noise.encoder_counts_per_rev as f64
            / 2.0;
        let omega = std::f64::consts::TAU * 0.1;
        for (&t, &d) in decoded.timestamps.iter().zip(&decoded.displacement) {
            let truth = 0.2 * (1.0 - (omega * t).cos());
            assert!((d - truth).abs() <= half_step + 1e-12);
        }
    }

    #[test]
    fn hip_behind_camera_is_a_scenario_error() {
        let cfg = ScenarioConfig {
            rail: RailPose {
                origin: Vector3::new(0.0, 0.0, -1.0),
                direction: Unit::new_normalize(Vector3::x()),
            },
            ..ScenarioConfig::default()
        };
        assert!(matches!(simulate(&cfg), Err(Error::Scenario(_))));
    }

    #[test]
    fn rep_truth_equals_commanded_cycles() {
        let trial = simulate(&ScenarioConfig::default()).unwrap();
        assert_eq!(trial.truth.rep_count_true, 15);
    }
}
