//! Turns a noisy 3D hip trajectory into a scalar displacement signal.
//!
//! At camera-to-subject distances of several meters, a single pixel of
//! detection noise produces depth errors an order of magnitude larger than
//! the in-plane errors, so the dominant-variance direction of the point
//! cloud is the depth-noise direction. [`fit_motion_plane`] extracts it by
//! PCA, [`project_to_plane`] removes it, and [`displacement_from_start`]
//! reduces the projected trajectory to distance from the starting position.

use nalgebra::{Matrix3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::stereo::Trajectory3D;

/// Relative eigenvalue gap below which the top two principal directions are
/// treated as tied.
const EIGEN_TIE_REL_TOL: f64 = 1e-9;

/// Relative eigenvalue floor below which the cloud is considered collinear.
const COLLINEAR_REL_TOL: f64 = 1e-12;

/// Plane fitted to a trajectory point cloud by principal component analysis.
///
/// `normal` is the direction of maximum variance (the depth-noise direction
/// in the intended regime); `basis` spans the plane of the remaining two
/// components, ordered by descending variance.
#[derive(Debug, Clone)]
pub struct MotionPlane {
    pub centroid: Vector3<f64>,
    pub normal: Unit<Vector3<f64>>,
    pub basis: [Unit<Vector3<f64>>; 2],
    /// Covariance eigenvalues in descending order; exposed so callers can
    /// judge whether the noise-dominance assumption actually held.
    pub eigenvalues: [f64; 3],
    /// Set when the top two eigenvalues are indistinguishable and the normal
    /// direction is therefore arbitrary within their span.
    pub ambiguous_normal: bool,
}

impl MotionPlane {
    /// Ratio of the first to the second eigenvalue; large values mean the
    /// removed direction clearly dominated the cloud.
    pub fn dominance_ratio(&self) -> f64 {
        if self.eigenvalues[1] > 0.0 {
            self.eigenvalues[0] / self.eigenvalues[1]
        } else {
            f64::INFINITY
        }
    }
}

/// Where the reference "starting position" of a displacement series comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// Use the first sample verbatim.
    FirstSample,
    /// Average the first `n` samples to damp first-frame noise.
    MeanFirstN(usize),
}

impl Default for StartPolicy {
    fn default() -> Self {
        StartPolicy::MeanFirstN(3)
    }
}

/// Which instrument a displacement series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementSource {
    Camera,
    Encoder,
}

impl DisplacementSource {
    pub fn label(&self) -> &'static str {
        match self {
            DisplacementSource::Camera => "camera",
            DisplacementSource::Encoder => "encoder",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "camera" => Some(DisplacementSource::Camera),
            "encoder" => Some(DisplacementSource::Encoder),
            _ => None,
        }
    }
}

/// Scalar displacement-from-start signal, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSeries {
    pub timestamps: Vec<f64>,
    pub displacement: Vec<f64>,
    pub source: DisplacementSource,
}

impl DisplacementSeries {
    pub fn new(
        timestamps: Vec<f64>,
        displacement: Vec<f64>,
        source: DisplacementSource,
    ) -> Result<Self> {
        if timestamps.len() != displacement.len() {
            return Err(Error::InvalidConfig {
                what: "displacement series",
                why: format!(
                    "length mismatch: {} timestamps, {} values",
                    timestamps.len(),
                    displacement.len()
                ),
            });
        }
        Ok(Self {
            timestamps,
            displacement,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.displacement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacement.is_empty()
    }

    /// Linearly resamples onto a uniform grid at the median rate; a series
    /// that is already uniform is returned unchanged.
    pub fn resample_uniform(&self) -> Result<Self> {
        let (ts, vals) = crate::series::resample_uniform(&self.timestamps, &self.displacement)?;
        Ok(Self {
            timestamps: ts,
            displacement: vals,
            source: self.source,
        })
    }
}

/// Fits the PCA motion plane of a trajectory's point cloud.
///
/// The covariance of the cloud is eigendecomposed; the normal is the
/// eigenvector of the largest eigenvalue. Signs are fixed deterministically:
/// each direction is oriented to a non-negative Z component, falling back to
/// non-negative X and then Y when components vanish.
pub fn fit_motion_plane(traj: &Trajectory3D) -> Result<MotionPlane> {
    let n = traj.points.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }

    let centroid: Vector3<f64> = traj.points.iter().sum::<Vector3<f64>>() / n as f64;
    let mut cov = Matrix3::zeros();
    for p in &traj.points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= (n - 1) as f64;

    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let eigenvalues = [
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    ];

    // All points on a line (or a single point): the residual plane is not
    // determined and projecting onto it would erase the motion itself.
    if eigenvalues[1] <= COLLINEAR_REL_TOL * eigenvalues[0].max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateGeometry(format!(
            "point cloud is collinear (eigenvalues {:.3e}, {:.3e}, {:.3e})",
            eigenvalues[0], eigenvalues[1], eigenvalues[2]
        )));
    }

    let ambiguous_normal =
        (eigenvalues[0] - eigenvalues[1]).abs() <= EIGEN_TIE_REL_TOL * eigenvalues[0].abs();

    let dir = |idx: usize| -> Unit<Vector3<f64>> {
        let v: Vector3<f64> = eig.eigenvectors.column(order[idx]).into();
        Unit::new_normalize(orient(v))
    };

    Ok(MotionPlane {
        centroid,
        normal: dir(0),
        basis: [dir(1), dir(2)],
        eigenvalues,
        ambiguous_normal,
    })
}

/// Deterministic sign convention: non-negative Z, then X, then Y.
fn orient(v: Vector3<f64>) -> Vector3<f64> {
    const TIE: f64 = 1e-12;
    let keep = if v.z.abs() > TIE {
        v.z > 0.0
    } else if v.x.abs() > TIE {
        v.x > 0.0
    } else {
        v.y >= 0.0
    };
    if keep {
        v
    } else {
        -v
    }
}

/// Projects every trajectory point onto the motion plane:
/// `p - ((p - centroid) . normal) normal`.
pub fn project_to_plane(traj: &Trajectory3D, plane: &MotionPlane) -> Trajectory3D {
    let n = plane.normal.into_inner();
    let points = traj
        .points
        .iter()
        .map(|p| p - n * (p - plane.centroid).dot(&n))
        .collect();
    Trajectory3D {
        timestamps: traj.timestamps.clone(),
        points,
    }
}

/// Reduces a (plane-projected) trajectory to Euclidean distance from the
/// starting position chosen by `policy`.
pub fn displacement_from_start(
    traj: &Trajectory3D,
    policy: StartPolicy,
) -> Result<DisplacementSeries> {
    let n = traj.points.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let start = match policy {
        StartPolicy::FirstSample => traj.points[0],
        StartPolicy::MeanFirstN(k) => {
            if k == 0 {
                return Err(Error::InvalidConfig {
                    what: "start policy",
                    why: "mean_first_n requires n >= 1".into(),
                });
            }
            let k = k.min(n);
            traj.points[..k].iter().sum::<Vector3<f64>>() / k as f64
        }
    };
    let displacement = traj.points.iter().map(|p| (p - start).norm()).collect();
    DisplacementSeries::new(traj.timestamps.clone(), displacement, DisplacementSource::Camera)
}
