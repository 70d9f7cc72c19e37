//! Time-series plumbing shared by the signal modules: uniformity checks,
//! linear resampling, and cross-correlation lag search.

use crate::error::{Error, Result};

/// Relative tolerance for deciding that a timestamp grid is uniform.
pub const UNIFORMITY_REL_TOL: f64 = 1e-6;

/// Returns the (constant) sample interval, or [`Error::ResampleRequired`]
/// when the grid deviates from uniform by more than the tolerance.
pub fn uniform_step(timestamps: &[f64]) -> Result<f64> {
    if timestamps.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: timestamps.len(),
        });
    }
    let h = median_step(timestamps);
    if h <= 0.0 {
        return Err(Error::ResampleRequired);
    }
    for w in timestamps.windows(2) {
        if ((w[1] - w[0]) - h).abs() > UNIFORMITY_REL_TOL * h {
            return Err(Error::ResampleRequired);
        }
    }
    Ok(h)
}

/// Median of consecutive timestamp differences.
pub fn median_step(timestamps: &[f64]) -> f64 {
    let mut diffs: Vec<f64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = diffs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        diffs[n / 2]
    } else {
        0.5 * (diffs[n / 2 - 1] + diffs[n / 2])
    }
}

/// Linear interpolation of `(timestamps, values)` at `t`, clamped to the
/// series endpoints outside its span.
pub fn interp_at(timestamps: &[f64], values: &[f64], t: f64) -> f64 {
    debug_assert_eq!(timestamps.len(), values.len());
    let n = timestamps.len();
    if t <= timestamps[0] {
        return values[0];
    }
    if t >= timestamps[n - 1] {
        return values[n - 1];
    }
    // partition_point returns the first index with timestamp > t.
    let hi = timestamps.partition_point(|&ts| ts <= t);
    let lo = hi - 1;
    let (t0, t1) = (timestamps[lo], timestamps[hi]);
    if t1 == t0 {
        return values[lo];
    }
    let w = (t - t0) / (t1 - t0);
    values[lo] + w * (values[hi] - values[lo])
}

/// Samples `(timestamps, values)` at each target time by linear interpolation.
pub fn resample_linear(timestamps: &[f64], values: &[f64], targets: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .map(|&t| interp_at(timestamps, values, t))
        .collect()
}

/// Builds the uniform grid starting at `t0` with step `h` covering `[t0, t_end]`.
pub fn uniform_grid(t0: f64, t_end: f64, h: f64) -> Vec<f64> {
    let n = ((t_end - t0) / h).floor() as usize + 1;
    (0..n).map(|k| t0 + k as f64 * h).collect()
}

/// Resamples a series onto a uniform grid at its own median rate.
///
/// A series that already satisfies the uniformity tolerance is returned
/// unchanged, preserving its exact values.
pub fn resample_uniform(timestamps: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if timestamps.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: timestamps.len(),
        });
    }
    if uniform_step(timestamps).is_ok() {
        return Ok((timestamps.to_vec(), values.to_vec()));
    }
    let h = median_step(timestamps);
    if h <= 0.0 {
        return Err(Error::ResampleRequired);
    }
    let grid = uniform_grid(timestamps[0], timestamps[timestamps.len() - 1], h);
    let resampled = resample_linear(timestamps, values, &grid);
    Ok((grid, resampled))
}

/// Finds the lag (seconds) that best aligns `meas` to `est` by maximizing the
/// normalized cross-correlation of the mean-centered signals over a grid of
/// candidate lags spaced at the estimator's sample step.
///
/// A positive lag means `meas` runs behind `est`: compare `est(t)` against
/// `meas(t + lag)`.
pub fn best_lag(
    est_ts: &[f64],
    est: &[f64],
    meas_ts: &[f64],
    meas: &[f64],
    max_lag_s: f64,
) -> Result<f64> {
    if est.len() < 2 || meas.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: est.len().min(meas.len()),
        });
    }
    let h = median_step(est_ts);
    if h <= 0.0 {
        return Err(Error::ResampleRequired);
    }
    let steps = (max_lag_s / h).floor() as i64;
    let meas_span = (meas_ts[0], meas_ts[meas_ts.len() - 1]);

    let mut best = (f64::NEG_INFINITY, 0.0_f64);
    for k in -steps..=steps {
        let lag = k as f64 * h;
        // Correlate only where the shifted measurement is actually defined.
        let mut se = Vec::new();
        let mut sm = Vec::new();
        for (i, &t) in est_ts.iter().enumerate() {
            let tm = t + lag;
            if tm >= meas_span.0 && tm <= meas_span.1 {
                se.push(est[i]);
                sm.push(interp_at(meas_ts, meas, tm));
            }
        }
        if se.len() < est.len() / 2 || se.len() < 4 {
            continue;
        }
        let score = normalized_correlation(&se, &sm);
        // Prefer the smaller |lag| on exact ties so a perfectly aligned pair
        // reports zero.
        if score > best.0 + 1e-15 || (score > best.0 - 1e-15 && lag.abs() < best.1.abs()) {
            best = (score.max(best.0), lag);
        }
    }
    Ok(best.1)
}

fn normalized_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    if da <= 0.0 || db <= 0.0 {
        return 0.0;
    }
    num / (da * db).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_step_accepts_exact_grid() {
        let ts: Vec<f64> = (0..100).map(|i| i as f64 * 0.125).collect();
        assert_eq!(uniform_step(&ts).unwrap(), 0.125);
    }

    #[test]
    fn uniform_step_rejects_jitter() {
        let ts = vec![0.0, 0.125, 0.26, 0.375];
        assert!(matches!(uniform_step(&ts), Err(Error::ResampleRequired)));
    }

    #[test]
    fn resample_uniform_is_identity_on_uniform_input() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let vals: Vec<f64> = ts.iter().map(|t| t.sin()).collect();
        let (rt, rv) = resample_uniform(&ts, &vals).unwrap();
        assert_eq!(rt, ts);
        assert_eq!(rv, vals);
    }

    #[test]
    fn resample_uniform_fills_jittered_grid() {
        let ts = vec![0.0, 0.11, 0.19, 0.33, 0.41, 0.52];
        let vals: Vec<f64> = ts.iter().map(|t| 2.0 * t).collect();
        let (rt, rv) = resample_uniform(&ts, &vals).unwrap();
        assert!(uniform_step(&rt).is_ok());
        // A linear signal survives linear resampling exactly.
        for (t, v) in rt.iter().zip(&rv) {
            assert!((v - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn interp_clamps_outside_span() {
        let ts = vec![1.0, 2.0];
        let vals = vec![10.0, 20.0];
        assert_eq!(interp_at(&ts, &vals, 0.0), 10.0);
        assert_eq!(interp_at(&ts, &vals, 3.0), 20.0);
        assert_eq!(interp_at(&ts, &vals, 1.5), 15.0);
    }

    #[test]
    fn best_lag_recovers_known_shift() {
        let h = 0.05;
        let est_ts: Vec<f64> = (0..400).map(|i| i as f64 * h).collect();
        let true_lag = 0.35;
        let sig = |t: f64| (2.0 * std::f64::consts::PI * 0.4 * t).sin() + 0.2 * t;
        let est: Vec<f64> = est_ts.iter().map(|&t| sig(t)).collect();
        let meas_ts: Vec<f64> = (0..500).map(|i| i as f64 * h - 1.0).collect();
        // meas(t) = sig(t - true_lag), so est(t) matches meas(t + true_lag).
        let meas: Vec<f64> = meas_ts.iter().map(|&t| sig(t - true_lag)).collect();
        let lag = best_lag(&est_ts, &est, &meas_ts, &meas, 2.0).unwrap();
        assert!((lag - true_lag).abs() <= h + 1e-12, "lag = {lag}");
    }

    #[test]
    fn best_lag_zero_for_aligned_pair() {
        let ts: Vec<f64> = (0..300).map(|i| i as f64 * 0.125).collect();
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| (2.0 * std::f64::consts::PI * 0.5 * t).cos())
            .collect();
        let lag = best_lag(&ts, &vals, &ts, &vals, 2.0).unwrap();
        assert_eq!(lag, 0.0);
    }
}
