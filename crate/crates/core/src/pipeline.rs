//! End-to-end estimation pipeline and evaluation harness.
//!
//! `keypoints -> 3D trajectory -> plane projection -> displacement -> force
//! -> reps/peaks`, plus the manifest-driven evaluation that scores estimates
//! against encoder and force-plate recordings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{estimate_force, ForceSeries, LegPressParams, SmoothingConfig};
use crate::error::{Error, Result};
use crate::io::{self, Leg, ManifestLoad, TrialRecord};
use crate::metrics::{
    align_and_compare, count_reps, peak_force, percent_symmetry, progress_trend_at,
    trimmed_window, AccuracyReport, Normalization, ProgressTrend, RepCount, RepCountMode,
    DEFAULT_EDGE_TRIM_S,
};
use crate::sim::{decode_encoder, simulate, ScenarioConfig};
use crate::stereo::{
    track_to_trajectory_filtered, KeypointTrack, StereoCalibration, Trajectory3D,
    DEFAULT_CONFIDENCE_THRESHOLD,
};
use crate::trajectory::{
    displacement_from_start, fit_motion_plane, project_to_plane, DisplacementSeries, MotionPlane,
    StartPolicy,
};

/// Whether the PCA plane projection runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// Project when the fitted dominant direction actually looks like depth
    /// noise (normal within 45 degrees of the optical axis); skip when the
    /// cloud is collinear or motion-dominated, where projecting would erase
    /// the motion itself.
    #[default]
    Auto,
    /// Always project; degenerate geometry becomes an error.
    Always,
    /// Never project.
    Never,
}

/// Minimum Z component of the fitted normal for Auto mode to project
/// (cos 45 degrees).
pub const PROJECTION_MIN_NORMAL_Z: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Tunables of the estimation pipeline; defaults follow the shipped
/// configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Detections below this confidence are treated as missing.
    pub confidence_threshold: f64,
    pub start_policy: StartPolicy,
    pub projection: ProjectionMode,
    pub smoothing: SmoothingConfig,
    pub rep_mode: RepCountMode,
    /// Seconds trimmed from each end of the trial for the window of interest.
    pub edge_trim_s: f64,
    /// Joint to triangulate.
    pub joint: String,
    /// Cross-correlation lag search half-width for ground-truth alignment.
    pub max_lag_s: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            start_policy: StartPolicy::default(),
            projection: ProjectionMode::default(),
            smoothing: SmoothingConfig::default(),
            rep_mode: RepCountMode::default(),
            edge_trim_s: DEFAULT_EDGE_TRIM_S,
            joint: "hip".to_string(),
            max_lag_s: 2.0,
        }
    }
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub trajectory: Trajectory3D,
    /// Fitted plane when one was computed (Auto may skip on degenerate or
    /// motion-dominated clouds).
    pub plane: Option<MotionPlane>,
    pub projection_applied: bool,
    /// Unsmoothed displacement on a uniform grid; the pipeline's displacement
    /// product.
    pub displacement: DisplacementSeries,
    /// Displacement after the configured smoothing; input to rep counting.
    pub smoothed_displacement: DisplacementSeries,
    pub force: ForceSeries,
    pub reps: RepCount,
    /// Window of interest used for reps and peak force.
    pub window: (f64, f64),
    pub peak_force_n: f64,
}

/// Plane-projects (per the configured mode) and reduces a trajectory to a
/// uniform-grid displacement series. Returns the fitted plane, whether
/// projection ran, and the displacement.
pub fn displacement_stage(
    traj: &Trajectory3D,
    projection: ProjectionMode,
    start_policy: StartPolicy,
) -> Result<(Option<MotionPlane>, bool, DisplacementSeries)> {
    let (plane, projected) = match projection {
        ProjectionMode::Never => (None, None),
        ProjectionMode::Always => {
            let plane = fit_motion_plane(traj)?;
            let projected = project_to_plane(traj, &plane);
            (Some(plane), Some(projected))
        }
        ProjectionMode::Auto => match fit_motion_plane(traj) {
            Ok(plane) => {
                if plane.normal.z >= PROJECTION_MIN_NORMAL_Z {
                    let projected = project_to_plane(traj, &plane);
                    (Some(plane), Some(projected))
                } else {
                    (Some(plane), None)
                }
            }
            Err(Error::DegenerateGeometry(_)) => (None, None),
            Err(e) => return Err(e),
        },
    };
    let applied = projected.is_some();
    let source = projected.as_ref().unwrap_or(traj);
    let displacement = displacement_from_start(source, start_policy)?.resample_uniform()?;
    Ok((plane, applied, displacement))
}

/// Runs the full estimation pipeline on one keypoint track.
pub fn run_pipeline(
    track: &KeypointTrack,
    calib: &StereoCalibration,
    params: &LegPressParams,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let trajectory = track_to_trajectory_filtered(track, calib, cfg.confidence_threshold)?;
    let (plane, projection_applied, displacement) =
        displacement_stage(&trajectory, cfg.projection, cfg.start_policy)?;
    let smoothed_displacement = crate::dynamics::smooth(&displacement, &cfg.smoothing)?;
    let force = estimate_force(&displacement, params, &cfg.smoothing)?;
    let window = trimmed_window(&smoothed_displacement.timestamps, cfg.edge_trim_s);
    let reps = count_reps(&smoothed_displacement, window, cfg.rep_mode)?;
    let windowed_force = restrict_force(&force, window);
    let peak_force_n = peak_force(&windowed_force)?;
    Ok(PipelineOutput {
        trajectory,
        plane,
        projection_applied,
        displacement,
        smoothed_displacement,
        force,
        reps,
        window,
        peak_force_n,
    })
}

fn restrict_force(series: &ForceSeries, window: (f64, f64)) -> ForceSeries {
    let mut timestamps = Vec::new();
    let mut force = Vec::new();
    for (i, &t) in series.timestamps.iter().enumerate() {
        if t >= window.0 && t <= window.1 {
            timestamps.push(t);
            force.push(series.force[i]);
        }
    }
    if timestamps.is_empty() {
        return series.clone();
    }
    ForceSeries {
        timestamps,
        force,
        source: series.source,
    }
}

fn restrict_pair(ts: &[f64], vals: &[f64], window: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let mut out_ts = Vec::new();
    let mut out_vals = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        if t >= window.0 && t <= window.1 {
            out_ts.push(t);
            out_vals.push(vals[i]);
        }
    }
    if out_ts.is_empty() {
        (ts.to_vec(), vals.to_vec())
    } else {
        (out_ts, out_vals)
    }
}

/// Closed-loop report of a simulated trial scored against its ground truth.
#[derive(Debug, Clone)]
pub struct InvertReport {
    pub displacement: AccuracyReport,
    /// Same comparison with projection forced off, quantifying what the PCA
    /// step bought.
    pub displacement_unprojected: AccuracyReport,
    pub force: AccuracyReport,
    pub reps_estimated: usize,
    pub reps_true: u32,
    pub peak_force_estimated_n: f64,
    pub peak_force_true_n: f64,
    pub projection_applied: bool,
}

/// Simulates a scenario, runs the estimation pipeline on its outputs, and
/// scores the estimates against the exact ground truth.
pub fn invert_check(cfg: &ScenarioConfig, pcfg: &PipelineConfig) -> Result<InvertReport> {
    let trial = simulate(cfg)?;
    invert_check_on(&trial.keypoints, cfg, pcfg, &trial.truth)
}

/// [`invert_check`] against an already-materialized keypoint track (e.g. one
/// parsed back from files), so the file path and the in-process path share
/// the scoring code.
pub fn invert_check_on(
    track: &KeypointTrack,
    cfg: &ScenarioConfig,
    pcfg: &PipelineConfig,
    truth: &crate::sim::GroundTruthBundle,
) -> Result<InvertReport> {
    let out = run_pipeline(track, &cfg.calib, &cfg.params, pcfg)?;

    // Score within the window of interest: edge samples carry one-sided
    // stencil transients that the window policy exists to exclude.
    let (dts, dvals) = restrict_pair(
        &out.displacement.timestamps,
        &out.displacement.displacement,
        out.window,
    );
    let displacement = align_and_compare(
        &dts,
        &dvals,
        &truth.x_true.timestamps,
        &truth.x_true.displacement,
        pcfg.max_lag_s,
    )?;
    let (fts, fvals) = restrict_pair(&out.force.timestamps, &out.force.force, out.window);
    let force = align_and_compare(
        &fts,
        &fvals,
        &truth.f_true.timestamps,
        &truth.f_true.force,
        pcfg.max_lag_s,
    )?;

    let mut no_proj_cfg = pcfg.clone();
    no_proj_cfg.projection = ProjectionMode::Never;
    let out_raw = run_pipeline(track, &cfg.calib, &cfg.params, &no_proj_cfg)?;
    let (rts, rvals) = restrict_pair(
        &out_raw.displacement.timestamps,
        &out_raw.displacement.displacement,
        out_raw.window,
    );
    let displacement_unprojected = align_and_compare(
        &rts,
        &rvals,
        &truth.x_true.timestamps,
        &truth.x_true.displacement,
        pcfg.max_lag_s,
    )?;

    let truth_force_windowed = restrict_force(&truth.f_true, out.window);
    let peak_force_true_n = peak_force(&truth_force_windowed)?;

    Ok(InvertReport {
        displacement,
        displacement_unprojected,
        force,
        reps_estimated: out.reps.count(),
        reps_true: truth.rep_count_true,
        peak_force_estimated_n: out.peak_force_n,
        peak_force_true_n,
        projection_applied: out.projection_applied,
    })
}

/// Per-trial evaluation row of the manifest pipeline.
#[derive(Debug, Clone)]
pub struct TrialEvaluation {
    pub trial_id: String,
    pub subject_id: String,
    pub session_week: u32,
    pub leg: Leg,
    pub load_fraction: f64,
    pub reps_est: usize,
    pub reps_meas: Option<usize>,
    pub sym_est: Option<f64>,
    pub sym_meas: Option<f64>,
    pub disp_rmse_m: Option<f64>,
    pub disp_nrmse_pct: Option<f64>,
    pub force_rmse_n: Option<f64>,
    pub force_nrmse_pct: Option<f64>,
    pub peak_force_n: f64,
    /// Peak of the force-plate stream, for progress tracking.
    pub peak_force_meas_n: Option<f64>,
}

/// A manifest trial that could not be evaluated, with the reason it was
/// excluded.
#[derive(Debug, Clone)]
pub struct SkippedTrial {
    pub trial_id: String,
    pub reason: String,
}

/// Outcome of evaluating a manifest: rows ordered by trial id plus the
/// exclusion log.
#[derive(Debug, Clone)]
pub struct EvaluateOutcome {
    pub rows: Vec<TrialEvaluation>,
    pub skipped: Vec<SkippedTrial>,
}

/// Stack mass for a trial: the protocol loads the stack with a fraction of
/// the subject's body weight.
fn trial_params(base: &LegPressParams, load_fraction: f64) -> LegPressParams {
    LegPressParams {
        stack_mass_kg: load_fraction * base.patient_mass_kg,
        ..*base
    }
}

/// Evaluates every trial of a loaded manifest. Trials whose data cannot be
/// read or processed are excluded and logged, mirroring how failed recordings
/// are dropped from study analysis; other trials still produce rows.
pub fn evaluate_manifest(load: &ManifestLoad, pcfg: &PipelineConfig) -> Result<EvaluateOutcome> {
    let calib = io::read_calibration(&load.manifest.calibration_path)?;
    let params_file = io::read_params(&load.manifest.params_path)?;

    let mut rows: Vec<TrialEvaluation> = Vec::new();
    let mut skipped: Vec<SkippedTrial> = load
        .skipped
        .iter()
        .map(|s| SkippedTrial {
            trial_id: s.trial_id.clone(),
            reason: format!("manifest line {}: {}", s.line, s.reason),
        })
        .collect();

    for trial in &load.manifest.trials {
        match evaluate_trial(trial, &calib, &params_file.params, pcfg) {
            Ok(row) => rows.push(row),
            Err(e) => skipped.push(SkippedTrial {
                trial_id: trial.trial_id.clone(),
                reason: e.to_string(),
            }),
        }
    }

    fill_symmetry(&mut rows);
    rows.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    Ok(EvaluateOutcome { rows, skipped })
}

fn evaluate_trial(
    trial: &TrialRecord,
    calib: &StereoCalibration,
    base_params: &LegPressParams,
    pcfg: &PipelineConfig,
) -> Result<TrialEvaluation> {
    let track = io::read_keypoints(&trial.keypoint_path, &pcfg.joint)?;
    let params = trial_params(base_params, trial.load_fraction);
    let out = run_pipeline(&track, calib, &params, pcfg)?;

    let mut row = TrialEvaluation {
        trial_id: trial.trial_id.clone(),
        subject_id: trial.subject_id.clone(),
        session_week: trial.session_week,
        leg: trial.leg,
        load_fraction: trial.load_fraction,
        reps_est: out.reps.count(),
        reps_meas: None,
        sym_est: None,
        sym_meas: None,
        disp_rmse_m: None,
        disp_nrmse_pct: None,
        force_rmse_n: None,
        force_nrmse_pct: None,
        peak_force_n: out.peak_force_n,
        peak_force_meas_n: None,
    };

    if let Some(enc_path) = &trial.encoder_path {
        let enc = io::read_encoder(enc_path)?;
        let meas = decode_encoder(
            &enc.timestamps,
            &enc.counts,
            enc.counts_per_rev,
            params.strap_radius_m,
        )?;
        let (dts, dvals) = restrict_pair(
            &out.displacement.timestamps,
            &out.displacement.displacement,
            out.window,
        );
        let acc = align_and_compare(
            &dts,
            &dvals,
            &meas.timestamps,
            &meas.displacement,
            pcfg.max_lag_s,
        )?;
        row.disp_rmse_m = Some(acc.rmse);
        row.disp_nrmse_pct = Some(acc.nrmse_percent);

        // Count measured reps the same way the estimate is counted.
        let meas_uniform = meas.resample_uniform()?;
        let meas_smooth = crate::dynamics::smooth(&meas_uniform, &pcfg.smoothing)?;
        let window = trimmed_window(&meas_smooth.timestamps, pcfg.edge_trim_s);
        row.reps_meas = Some(count_reps(&meas_smooth, window, pcfg.rep_mode)?.count());
    }

    if let Some(force_path) = &trial.force_path {
        let plate = io::read_force(force_path)?;
        let (fts, fvals) = restrict_pair(&out.force.timestamps, &out.force.force, out.window);
        let acc = align_and_compare(
            &fts,
            &fvals,
            &plate.timestamps,
            &plate.force,
            pcfg.max_lag_s,
        )?;
        row.force_rmse_n = Some(acc.rmse);
        row.force_nrmse_pct = Some(acc.nrmse_percent);
        let window = trimmed_window(&plate.timestamps, pcfg.edge_trim_s);
        row.peak_force_meas_n = Some(peak_force(&restrict_force(&plate, window))?);
    }

    Ok(row)
}

/// Pairs left/right trials of the same (subject, week, load) and fills the
/// symmetry columns of both rows.
fn fill_symmetry(rows: &mut [TrialEvaluation]) {
    let mut groups: BTreeMap<(String, u32, u64), Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        groups
            .entry((
                row.subject_id.clone(),
                row.session_week,
                row.load_fraction.to_bits(),
            ))
            .or_default()
            .push(i);
    }
    for indices in groups.values() {
        let lefts: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| rows[i].leg == Leg::Left)
            .collect();
        let rights: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| rows[i].leg == Leg::Right)
            .collect();
        if lefts.len() != 1 || rights.len() != 1 {
            continue;
        }
        let (li, ri) = (lefts[0], rights[0]);

        let est = percent_symmetry(rows[ri].reps_est as u32, rows[li].reps_est as u32)
            .ok()
            .map(|s| s.percent);
        let meas = match (rows[ri].reps_meas, rows[li].reps_meas) {
            (Some(r), Some(l)) => percent_symmetry(r as u32, l as u32).ok().map(|s| s.percent),
            _ => None,
        };
        for i in [li, ri] {
            rows[i].sym_est = est;
            rows[i].sym_meas = meas;
        }
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(io::fmt_float).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the per-trial evaluation report CSV.
pub fn write_evaluation_report(path: &Path, rows: &[TrialEvaluation]) -> Result<()> {
    let mut out = String::new();
    out.push_str(
        "trial_id,leg,load_frac,reps_est,reps_meas,sym_est,sym_meas,disp_rmse_m,disp_nrmse_pct,force_rmse_N,force_nrmse_pct,peak_force_N\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial_id,
            r.leg.label(),
            io::fmt_float(r.load_fraction),
            r.reps_est,
            opt_usize(r.reps_meas),
            opt_float(r.sym_est),
            opt_float(r.sym_meas),
            opt_float(r.disp_rmse_m),
            opt_float(r.disp_nrmse_pct),
            opt_float(r.force_rmse_n),
            opt_float(r.force_nrmse_pct),
            io::fmt_float(r.peak_force_n)
        );
    }
    io::write_string(path, &out)
}

/// Writes the closed-loop report for a simulated trial.
pub fn write_invert_report(path: &Path, r: &InvertReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(
        "disp_rmse_m,disp_nrmse_pct,disp_noproj_nrmse_pct,force_rmse_N,force_nrmse_pct,reps_est,reps_true,peak_force_est_N,peak_force_true_N,projection_applied\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        io::fmt_float(r.displacement.rmse),
        io::fmt_float(r.displacement.nrmse_percent),
        io::fmt_float(r.displacement_unprojected.nrmse_percent),
        io::fmt_float(r.force.rmse),
        io::fmt_float(r.force.nrmse_percent),
        r.reps_estimated,
        r.reps_true,
        io::fmt_float(r.peak_force_estimated_n),
        io::fmt_float(r.peak_force_true_n),
        r.projection_applied
    );
    io::write_string(path, &out)
}

/// Week-indexed progress of one subject.
#[derive(Debug, Clone)]
pub struct SubjectProgress {
    pub subject_id: String,
    pub weeks: Vec<u32>,
    pub reps_est: ProgressTrend,
    pub reps_meas: Option<ProgressTrend>,
    pub peak_force_est: ProgressTrend,
    pub peak_force_meas: Option<ProgressTrend>,
}

/// Aggregates evaluation rows into per-subject weekly progress trends.
/// Filters to one load fraction (and optionally one leg), averages multiple
/// matching trials within a week, and fits trends on per-subject-max
/// normalized values.
pub fn progress_from_evaluations(
    rows: &[TrialEvaluation],
    load_fraction: f64,
    leg: Option<Leg>,
) -> Result<Vec<SubjectProgress>> {
    let mut by_subject: BTreeMap<String, BTreeMap<u32, Vec<&TrialEvaluation>>> = BTreeMap::new();
    for row in rows {
        if (row.load_fraction - load_fraction).abs() > 1e-9 {
            continue;
        }
        if let Some(l) = leg {
            if row.leg != l {
                continue;
            }
        }
        by_subject
            .entry(row.subject_id.clone())
            .or_default()
            .entry(row.session_week)
            .or_default()
            .push(row);
    }

    let mut out = Vec::new();
    for (subject_id, weeks_map) in by_subject {
        if weeks_map.len() < 2 {
            continue;
        }
        let weeks: Vec<u32> = weeks_map.keys().copied().collect();
        let mean =
            |f: &dyn Fn(&TrialEvaluation) -> Option<f64>, rows: &[&TrialEvaluation]| -> Option<f64> {
                let vals: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
                if vals.is_empty() {
                    None
                } else {
                    Some(vals.iter().sum::<f64>() / vals.len() as f64)
                }
            };

        let mut reps_est = Vec::new();
        let mut reps_meas = Vec::new();
        let mut peak_est = Vec::new();
        let mut peak_meas = Vec::new();
        for rows in weeks_map.values() {
            reps_est.push(mean(&|r| Some(r.reps_est as f64), rows).unwrap());
            reps_meas.push(mean(&|r| r.reps_meas.map(|v| v as f64), rows));
            peak_est.push(mean(&|r| Some(r.peak_force_n), rows).unwrap());
            peak_meas.push(mean(&|r| r.peak_force_meas_n, rows));
        }

        let trend = |vals: &[f64]| progress_trend_at(&weeks, vals, Normalization::PerSubjectMax);
        let opt_trend = |vals: &[Option<f64>]| -> Option<ProgressTrend> {
            let complete: Vec<f64> = vals.iter().copied().collect::<Option<Vec<f64>>>()?;
            trend(&complete).ok()
        };

        out.push(SubjectProgress {
            subject_id,
            weeks: weeks.clone(),
            reps_est: trend(&reps_est)?,
            reps_meas: opt_trend(&reps_meas),
            peak_force_est: trend(&peak_est)?,
            peak_force_meas: opt_trend(&peak_meas),
        });
    }
    Ok(out)
}

/// Writes one subject's progress CSV: normalized weekly values plus trend
/// footers.
pub fn write_progress_report(path: &Path, p: &SubjectProgress) -> Result<()> {
    let mut out = String::new();
    out.push_str("week,norm_reps_est,norm_reps_meas,norm_peak_force_est,norm_peak_force_meas\n");
    for (i, week) in p.weeks.iter().enumerate() {
        let pick = |t: &Option<ProgressTrend>| -> String {
            t.as_ref()
                .map(|t| io::fmt_float(t.normalized_values[i]))
                .unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{week},{},{},{},{}",
            io::fmt_float(p.reps_est.normalized_values[i]),
            pick(&p.reps_meas),
            io::fmt_float(p.peak_force_est.normalized_values[i]),
            pick(&p.peak_force_meas),
        );
    }
    let mut footer = |name: &str, t: &ProgressTrend| {
        let _ = writeln!(
            out,
            "# {name}: slope_per_week={} r_squared={} percent_increase={}",
            io::fmt_float(t.slope),
            io::fmt_float(t.r_squared),
            io::fmt_float(t.percent_increase())
        );
    };
    footer("reps_est", &p.reps_est);
    if let Some(t) = &p.reps_meas {
        footer("reps_meas", t);
    }
    footer("peak_force_est", &p.peak_force_est);
    if let Some(t) = &p.peak_force_meas {
        footer("peak_force_meas", t);
    }
    io::write_string(path, &out)
}
