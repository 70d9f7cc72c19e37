//! Stereo keypoint geometry for a rectified pinhole rig.
//!
//! Pose-estimated joints arrive as per-view pixel coordinates. Because the
//! estimator runs independently on the left and right frames, corresponding
//! detections violate the epipolar constraint (their vertical coordinates
//! differ); [`regulate_y`] restores it by averaging. [`triangulate`] then
//! recovers the 3D point by direct linear transformation (DLT) least squares,
//! and [`track_to_trajectory`] maps a whole keypoint track to a 3D trajectory
//! in the left-camera frame.

use nalgebra::{Matrix3, Matrix4x3, Vector3, Vector4};

use crate::error::{Error, Result};

/// Detections with confidence below this value are treated as missing.
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.1;

/// Disparities at or below this bound (pixels) have no usable depth.
pub const MIN_DISPARITY_PX: f64 = 1e-3;

/// Condition number above which the DLT solve falls back to SVD.
const DLT_COND_LIMIT: f64 = 1e8;

/// Geometry of a rectified stereo rig: identical pinhole intrinsics per view,
/// right camera displaced by `baseline_m` along +X of the left camera.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoCalibration {
    /// Focal length in pixels (square pixels, shared by both axes).
    pub focal_length_px: f64,
    /// Principal point (cx, cy) in pixels.
    pub principal_point: (f64, f64),
    /// Distance between the two optical centers, meters.
    pub baseline_m: f64,
    /// Sensor size (width, height) in pixels.
    pub image_size: (u32, u32),
}

impl StereoCalibration {
    pub fn new(
        focal_length_px: f64,
        principal_point: (f64, f64),
        baseline_m: f64,
        image_size: (u32, u32),
    ) -> Result<Self> {
        let calib = Self {
            focal_length_px,
            principal_point,
            baseline_m,
            image_size,
        };
        calib.validate()?;
        Ok(calib)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_px > 0.0) {
            return Err(Error::InvalidConfig {
                what: "calibration",
                why: format!("focal length must be positive, got {}", self.focal_length_px),
            });
        }
        if !(self.baseline_m > 0.0) {
            return Err(Error::InvalidConfig {
                what: "calibration",
                why: format!("baseline must be positive, got {}", self.baseline_m),
            });
        }
        let (cx, cy) = self.principal_point;
        let (w, h) = self.image_size;
        if !(cx >= 0.0 && cx <= w as f64 && cy >= 0.0 && cy <= h as f64) {
            return Err(Error::InvalidConfig {
                what: "calibration",
                why: format!("principal point ({cx}, {cy}) outside {w}x{h} image"),
            });
        }
        Ok(())
    }

    /// Default rig used when no factory calibration is available: 700 px
    /// focal, 0.12 m baseline, 1280x720. Representative of the commercial
    /// stereo-camera class this pipeline targets; override via the
    /// calibration file for a real rig.
    pub fn default_rig() -> Self {
        Self {
            focal_length_px: 700.0,
            principal_point: (640.0, 360.0),
            baseline_m: 0.12,
            image_size: (1280, 720),
        }
    }
}

/// One 2D joint detection in a single view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint2D {
    /// Horizontal pixel coordinate.
    pub x: f64,
    /// Vertical pixel coordinate.
    pub y: f64,
    /// Detector confidence in [0, 1]; 0 marks a missing detection.
    pub confidence: f64,
}

impl Keypoint2D {
    pub fn new(x: f64, y: f64, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidConfig {
                what: "keypoint",
                why: format!("confidence {confidence} outside [0, 1]"),
            });
        }
        Ok(Self { x, y, confidence })
    }

    /// True when the detection is usable at the given confidence threshold.
    pub fn is_valid(&self, threshold: f64) -> bool {
        self.confidence > 0.0 && self.confidence >= threshold
    }
}

/// Time series of paired left/right detections for one joint.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointTrack {
    /// Strictly increasing sample times, seconds.
    pub timestamps: Vec<f64>,
    /// Left-view detections, same length as `timestamps`.
    pub left: Vec<Keypoint2D>,
    /// Right-view detections, same length as `timestamps`.
    pub right: Vec<Keypoint2D>,
    /// Joint label, e.g. `hip`.
    pub joint_name: String,
}

impl KeypointTrack {
    pub fn new(
        timestamps: Vec<f64>,
        left: Vec<Keypoint2D>,
        right: Vec<Keypoint2D>,
        joint_name: impl Into<String>,
    ) -> Result<Self> {
        if left.len() != timestamps.len() || right.len() != timestamps.len() {
            return Err(Error::InvalidConfig {
                what: "keypoint track",
                why: format!(
                    "length mismatch: {} timestamps, {} left, {} right",
                    timestamps.len(),
                    left.len(),
                    right.len()
                ),
            });
        }
        if timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig {
                what: "keypoint track",
                why: "timestamps must be strictly increasing".into(),
            });
        }
        Ok(Self {
            timestamps,
            left,
            right,
            joint_name: joint_name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Timestamped 3D point sequence in the left-camera frame (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory3D {
    pub timestamps: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
}

impl Trajectory3D {
    pub fn new(timestamps: Vec<f64>, points: Vec<Vector3<f64>>) -> Result<Self> {
        if timestamps.len() != points.len() {
            return Err(Error::InvalidConfig {
                what: "trajectory",
                why: format!(
                    "length mismatch: {} timestamps, {} points",
                    timestamps.len(),
                    points.len()
                ),
            });
        }
        Ok(Self { timestamps, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Replaces the vertical coordinates of a corresponding detection pair with
/// their mean, restoring the epipolar constraint of the rectified rig.
/// Horizontal coordinates and confidences are left untouched.
pub fn regulate_y(left: &Keypoint2D, right: &Keypoint2D) -> Result<(Keypoint2D, Keypoint2D)> {
    if left.confidence <= 0.0 || right.confidence <= 0.0 {
        return Err(Error::MissingKeypoint);
    }
    let y = 0.5 * (left.y + right.y);
    Ok((
        Keypoint2D { y, ..*left },
        Keypoint2D { y, ..*right },
    ))
}

/// Projects a 3D point (left-camera frame) into both rectified views.
pub fn project(point: &Vector3<f64>, calib: &StereoCalibration) -> Result<(Keypoint2D, Keypoint2D)> {
    let z = point.z;
    if z <= 0.0 {
        return Err(Error::BehindCamera { z });
    }
    let f = calib.focal_length_px;
    let (cx, cy) = calib.principal_point;
    let v = f * point.y / z + cy;
    let left = Keypoint2D {
        x: f * point.x / z + cx,
        y: v,
        confidence: 1.0,
    };
    let right = Keypoint2D {
        x: f * (point.x - calib.baseline_m) / z + cx,
        y: v,
        confidence: 1.0,
    };
    Ok((left, right))
}

/// Recovers the 3D point that best explains a detection pair, by DLT least
/// squares over the four projection equations of the two rectified views.
///
/// For a y-regulated pair the system is consistent and the result equals the
/// closed-form rectified solution `Z = focal * baseline / disparity`.
pub fn triangulate(
    left: &Keypoint2D,
    right: &Keypoint2D,
    calib: &StereoCalibration,
) -> Result<Vector3<f64>> {
    calib.validate()?;
    let disparity = left.x - right.x;
    if disparity <= MIN_DISPARITY_PX {
        return Err(Error::NonFiniteDepth { disparity });
    }
    let f = calib.focal_length_px;
    let (cx, cy) = calib.principal_point;
    let b = calib.baseline_m;

    // Each view contributes two homogeneous projection equations; after
    // dehomogenization the unknown (X, Y, Z) satisfies A p = rhs.
    let a = Matrix4x3::new(
        f, 0.0, cx - left.x, //
        0.0, f, cy - left.y, //
        f, 0.0, cx - right.x, //
        0.0, f, cy - right.y,
    );
    let rhs = Vector4::new(0.0, 0.0, f * b, 0.0);

    let ata: Matrix3<f64> = a.transpose() * a;
    let atb: Vector3<f64> = a.transpose() * rhs;

    let eig = ata.symmetric_eigenvalues();
    let lambda_max = eig.max();
    let lambda_min = eig.min();
    if lambda_min <= 0.0 {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }
    let cond = (lambda_max / lambda_min).sqrt();

    if cond > DLT_COND_LIMIT {
        // Near-degenerate disparity: solve the rectangular system by SVD.
        let a_dyn = nalgebra::DMatrix::from_iterator(4, 3, a.iter().copied());
        let rhs_dyn = nalgebra::DVector::from_iterator(4, rhs.iter().copied());
        let svd = a_dyn.svd(true, true);
        let sol = svd
            .solve(&rhs_dyn, 1e-12)
            .map_err(|_| Error::IllConditioned { cond })?;
        return Ok(Vector3::new(sol[0], sol[1], sol[2]));
    }

    ata.cholesky()
        .map(|chol| chol.solve(&atb))
        .ok_or(Error::IllConditioned { cond })
}

/// Root-mean-square pixel residual of `point` against a detection pair, over
/// the four coordinates (x and y in each view).
pub fn reprojection_error(
    point: &Vector3<f64>,
    left: &Keypoint2D,
    right: &Keypoint2D,
    calib: &StereoCalibration,
) -> Result<f64> {
    let (pl, pr) = project(point, calib)?;
    let residuals = [pl.x - left.x, pl.y - left.y, pr.x - right.x, pr.y - right.y];
    let sum_sq: f64 = residuals.iter().map(|r| r * r).sum();
    Ok((sum_sq / residuals.len() as f64).sqrt())
}

/// Triangulates every usable frame of a track: y-regulation followed by DLT.
///
/// Frames where either view is missing (confidence below `min_confidence`) or
/// where the disparity admits no finite depth are dropped, so the output
/// timestamps are a subset of the input timestamps.
pub fn track_to_trajectory_filtered(
    track: &KeypointTrack,
    calib: &StereoCalibration,
    min_confidence: f64,
) -> Result<Trajectory3D> {
    calib.validate()?;
    let mut timestamps = Vec::with_capacity(track.len());
    let mut points = Vec::with_capacity(track.len());
    for i in 0..track.len() {
        let (l, r) = (&track.left[i], &track.right[i]);
        if !l.is_valid(min_confidence) || !r.is_valid(min_confidence) {
            continue;
        }
        let (l, r) = regulate_y(l, r)?;
        match triangulate(&l, &r, calib) {
            Ok(p) => {
                timestamps.push(track.timestamps[i]);
                points.push(p);
            }
            Err(Error::NonFiniteDepth { .. }) | Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.len(),
        });
    }
    Trajectory3D::new(timestamps, points)
}

/// [`track_to_trajectory_filtered`] with the default confidence threshold.
pub fn track_to_trajectory(track: &KeypointTrack, calib: &StereoCalibration) -> Result<Trajectory3D> {
    track_to_trajectory_filtered(track, calib, DEFAULT_CONFIDENCE_THRESHOLD)
}
