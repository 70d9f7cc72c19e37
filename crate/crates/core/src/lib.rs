//! Markerless leg-press screening: reconstructs a patient's displacement and
//! foot-plate force from stereo-camera joint keypoints and computes
//! functional-screening criteria (repetitions, left/right symmetry, progress
//! trends), validated against encoder and force-plate ground truth.
//!
//! The crate is organized along the processing chain:
//!
//! - [`stereo`]: y-regulation and DLT triangulation of paired 2D keypoints
//!   into a 3D hip trajectory.
//! - [`trajectory`]: PCA noise-direction removal and reduction to a scalar
//!   displacement-from-start signal.
//! - [`dynamics`]: the free-body machine model turning displacement into
//!   foot-plate force, with smoothing and numerical differentiation.
//! - [`metrics`]: repetition counting, percent symmetry, RMSE/NRMSE accuracy,
//!   and longitudinal progress trends.
//! - [`sim`]: a synthetic measurement-chain simulator (camera, encoder,
//!   force plate) with exact ground truth, used as the test oracle.
//! - [`pipeline`]: end-to-end estimation, closed-loop checking, and
//!   manifest-driven evaluation.
//! - [`io`]: the file formats every stage reads and writes.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod series;
pub mod sim;
pub mod stereo;
pub mod svg;
pub mod trajectory;

pub use dynamics::{
    estimate_force, second_derivative, smooth, strap_tension, ForceSeries, ForceSource,
    LegPressParams, SmoothingConfig, SmoothingMethod,
};
pub use error::{Error, Result};
pub use io::{Leg, Manifest, ManifestLoad, TrialRecord};
pub use metrics::{
    accuracy, align_and_compare, count_reps, peak_force, percent_symmetry, progress_trend,
    progress_trend_at, AccuracyReport, Normalization, ProgressTrend, RepCount, RepCountMode,
    SymmetryResult,
};
pub use pipeline::{
    evaluate_manifest, invert_check, run_pipeline, InvertReport, PipelineConfig, PipelineOutput,
    ProjectionMode, TrialEvaluation,
};
pub use sim::{
    decode_encoder, simulate, GroundTruthBundle, MotionSpec, NoiseSpec, RailPose, RateSpec,
    ScenarioConfig, SimulatedTrial,
};
pub use stereo::{
    regulate_y, reprojection_error, track_to_trajectory, triangulate, Keypoint2D, KeypointTrack,
    StereoCalibration, Trajectory3D,
};
pub use trajectory::{
    displacement_from_start, fit_motion_plane, project_to_plane, DisplacementSeries,
    DisplacementSource, MotionPlane, StartPolicy,
};
