//! Functional-screening outputs: repetition counts, left/right symmetry,
//! accuracy against ground truth, and longitudinal progress trends.

use crate::dynamics::ForceSeries;
use crate::error::{Error, Result};
use crate::series::{best_lag, interp_at, median_step};
use crate::trajectory::DisplacementSeries;

/// How zero crossings are accepted as repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RepCountMode {
    /// Pure negative-slope zero-crossing rule.
    Bare,
    /// A crossing counts only after the signal has risen above this fraction
    /// of its range since the previous counted crossing, suppressing
    /// noise-induced double counts.
    Hysteresis { rearm_fraction: f64 },
}

impl Default for RepCountMode {
    fn default() -> Self {
        RepCountMode::Hysteresis { rearm_fraction: 0.1 }
    }
}

/// Repetitions found in a displacement window.
#[derive(Debug, Clone, PartialEq)]
pub struct RepCount {
    /// Interpolated times of the counted negative-slope zero crossings.
    pub crossing_times: Vec<f64>,
}

impl RepCount {
    pub fn count(&self) -> usize {
        self.crossing_times.len()
    }
}

/// Counts repetitions: the series is restricted to `window`, mean-centered,
/// and negative-slope zero crossings are tallied. Crossing times are linearly
/// interpolated between samples.
///
/// The series should already be smoothed; this function does not filter.
pub fn count_reps(
    series: &DisplacementSeries,
    window: (f64, f64),
    mode: RepCountMode,
) -> Result<RepCount> {
    let (t_start, t_end) = window;
    let mut ts = Vec::new();
    let mut vals = Vec::new();
    for (i, &t) in series.timestamps.iter().enumerate() {
        if t >= t_start && t <= t_end {
            ts.push(t);
            vals.push(series.displacement[i]);
        }
    }
    if vals.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: vals.len(),
        });
    }

    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    for v in &mut vals {
        *v -= mean;
    }

    let range = {
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    };
    let rearm_level = match mode {
        RepCountMode::Bare => f64::NEG_INFINITY,
        RepCountMode::Hysteresis { rearm_fraction } => rearm_fraction * range,
    };

    let mut crossing_times = Vec::new();
    let mut armed = matches!(mode, RepCountMode::Bare);
    for i in 0..vals.len() - 1 {
        if vals[i] > rearm_level {
            armed = true;
        }
        if armed && vals[i] > 0.0 && vals[i + 1] <= 0.0 {
            let t = ts[i] + vals[i] * (ts[i + 1] - ts[i]) / (vals[i] - vals[i + 1]);
            crossing_times.push(t);
            if matches!(mode, RepCountMode::Hysteresis { .. }) {
                armed = false;
            }
        }
    }
    Ok(RepCount { crossing_times })
}

/// Left/right repetition balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryResult {
    pub reps_right: u32,
    pub reps_left: u32,
    /// `100 * min / max`, in (0, 100].
    pub percent: f64,
}

/// Percent symmetry between the two legs' repetition counts.
pub fn percent_symmetry(reps_right: u32, reps_left: u32) -> Result<SymmetryResult> {
    if reps_right == 0 && reps_left == 0 {
        return Err(Error::UndefinedSymmetry);
    }
    let min = reps_right.min(reps_left) as f64;
    let max = reps_right.max(reps_left) as f64;
    Ok(SymmetryResult {
        reps_right,
        reps_left,
        percent: 100.0 * min / max,
    })
}

/// RMSE of an estimate against a measurement, plus the range-normalized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// Root-mean-square error in the signal's units.
    pub rmse: f64,
    /// `100 * rmse / range_of_truth`.
    pub nrmse_percent: f64,
    /// Range (max - min) of the measured signal on the compared window.
    pub range_of_truth: f64,
}

/// RMSE/NRMSE of two series already on a common grid.
pub fn accuracy(estimated: &[f64], measured: &[f64]) -> Result<AccuracyReport> {
    if estimated.len() != measured.len() {
        return Err(Error::InvalidConfig {
            what: "accuracy input",
            why: format!(
                "series lengths differ: {} vs {}",
                estimated.len(),
                measured.len()
            ),
        });
    }
    if estimated.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let sum_sq: f64 = estimated
        .iter()
        .zip(measured)
        .map(|(e, m)| (e - m) * (e - m))
        .sum();
    let rmse = (sum_sq / estimated.len() as f64).sqrt();
    let max = measured.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = measured.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if !(range > 0.0) {
        return Err(Error::ZeroRange);
    }
    Ok(AccuracyReport {
        rmse,
        nrmse_percent: 100.0 * rmse / range,
        range_of_truth: range,
    })
}

/// Aligns a measured stream to the estimate's grid and reports accuracy.
///
/// The measurement is lag-aligned by cross-correlation (searched over
/// `±max_lag_s`) and linearly resampled onto the estimator's timestamps, so
/// the comparison happens at the estimator's native resolution.
pub fn align_and_compare(
    est_ts: &[f64],
    est: &[f64],
    meas_ts: &[f64],
    meas: &[f64],
    max_lag_s: f64,
) -> Result<AccuracyReport> {
    let lag = if max_lag_s > 0.0 {
        best_lag(est_ts, est, meas_ts, meas, max_lag_s)?
    } else {
        0.0
    };
    let meas_span = (meas_ts[0], meas_ts[meas_ts.len() - 1]);
    let mut e = Vec::new();
    let mut m = Vec::new();
    for (i, &t) in est_ts.iter().enumerate() {
        let tm = t + lag;
        if tm >= meas_span.0 && tm <= meas_span.1 {
            e.push(est[i]);
            m.push(interp_at(meas_ts, meas, tm));
        }
    }
    accuracy(&e, &m)
}

/// Longitudinal trend of a normalized per-session metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressTrend {
    /// Week indices the sessions happened in.
    pub sessions: Vec<u32>,
    /// Values normalized by the subject's maximum (peak session = 1).
    pub normalized_values: Vec<f64>,
    /// Least-squares slope per week.
    pub slope: f64,
    /// Least-squares intercept (value at week 0).
    pub intercept: f64,
    /// Coefficient of determination of the fit, in [0, 1].
    pub r_squared: f64,
    /// Set when all values are equal and the fit carries no information.
    pub degenerate: bool,
}

impl ProgressTrend {
    /// Fitted percent increase over the observed span:
    /// `slope * (last_week - first_week) / intercept * 100`.
    pub fn percent_increase(&self) -> f64 {
        if self.sessions.is_empty() || self.intercept == 0.0 {
            return 0.0;
        }
        let span = (self.sessions[self.sessions.len() - 1] - self.sessions[0]) as f64;
        100.0 * self.slope * span / self.intercept
    }
}

/// Normalization applied before trend fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by the subject's maximum session value.
    #[default]
    PerSubjectMax,
}

/// Ordinary least-squares trend over `(week, value)` pairs, with values
/// normalized per [`Normalization`]. Weeks need not be consecutive.
pub fn progress_trend_at(
    sessions: &[u32],
    values: &[f64],
    _normalization: Normalization,
) -> Result<ProgressTrend> {
    if sessions.len() != values.len() {
        return Err(Error::InvalidConfig {
            what: "progress input",
            why: format!(
                "{} sessions but {} values",
                sessions.len(),
                values.len()
            ),
        });
    }
    let finite: Vec<(u32, f64)> = sessions
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(&w, &v)| (w, v))
        .collect();
    if finite.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: finite.len(),
        });
    }

    let max = finite.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::InvalidConfig {
            what: "progress input",
            why: format!("per-subject maximum must be positive, got {max}"),
        });
    }
    let weeks: Vec<u32> = finite.iter().map(|(w, _)| *w).collect();
    let normalized: Vec<f64> = finite.iter().map(|(_, v)| v / max).collect();

    let n = normalized.len() as f64;
    let mean_x = weeks.iter().map(|&w| w as f64).sum::<f64>() / n;
    let mean_y = normalized.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&w, &v) in weeks.iter().zip(&normalized) {
        let dx = w as f64 - mean_x;
        let dy = v - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    if syy <= 0.0 {
        // All sessions identical: report a flat, flagged trend instead of
        // dividing by a zero total sum of squares.
        return Ok(ProgressTrend {
            sessions: weeks,
            normalized_values: normalized,
            slope: 0.0,
            intercept: mean_y,
            r_squared: 0.0,
            degenerate: true,
        });
    }
    if sxx <= 0.0 {
        return Err(Error::InvalidConfig {
            what: "progress input",
            why: "all sessions fall in the same week".into(),
        });
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = weeks
        .iter()
        .zip(&normalized)
        .map(|(&w, &v)| {
            let r = v - (intercept + slope * w as f64);
            r * r
        })
        .sum();
    let r_squared = 1.0 - ss_res / syy;

    Ok(ProgressTrend {
        sessions: weeks,
        normalized_values: normalized,
        slope,
        intercept,
        r_squared: r_squared.clamp(0.0, 1.0),
        degenerate: false,
    })
}

/// [`progress_trend_at`] with sessions numbered 1..=n.
pub fn progress_trend(values: &[f64], normalization: Normalization) -> Result<ProgressTrend> {
    let sessions: Vec<u32> = (1..=values.len() as u32).collect();
    progress_trend_at(&sessions, values, normalization)
}

/// Maximum force over the trial window.
pub fn peak_force(series: &ForceSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(series.force.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Default window: the full series span with `trim` seconds dropped at each
/// edge to exclude start/stop transients.
pub fn trimmed_window(timestamps: &[f64], trim: f64) -> (f64, f64) {
    if timestamps.is_empty() {
        return (0.0, 0.0);
    }
    let t0 = timestamps[0];
    let t1 = timestamps[timestamps.len() - 1];
    let span = t1 - t0;
    // Refuse to trim the window away entirely; keep at least the middle half.
    let trim = trim.min(span * 0.25).max(0.0);
    (t0 + trim, t1 - trim)
}

/// Default edge trim, seconds, applied to the window of interest.
pub const DEFAULT_EDGE_TRIM_S: f64 = 1.0;

/// Resamples a measured stream onto the estimator grid and counts its reps
/// with the same smoothing and window, for like-for-like comparisons.
pub fn grid_step_of(series: &DisplacementSeries) -> f64 {
    median_step(&series.timestamps)
}
