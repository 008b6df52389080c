//! Scalar summaries of a tracking or synchronization error history.

use serde::Serialize;

/// Fraction of the horizon, at its end, over which the tail error is taken.
pub const TAIL_FRACTION: f64 = 0.2;
/// Settling band relative to the signal amplitude.
pub const SETTLING_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMetrics {
    /// First time after which the error stays inside the band; `None` if it never does.
    pub settling_time: Option<f64>,
    pub settling_band: f64,
    /// Supremum of the error over the last 20% of the horizon.
    pub tail_error: f64,
    /// Rate of the exponential envelope fitted to the error; `None` when too short to fit.
    pub decay_rate: Option<f64>,
    pub peak_error: f64,
}

/// Metrics of the sampled error magnitude `err(t_k) ≥ 0` with an explicit settling band.
pub fn error_metrics_with_band(times: &[f64], err: &[f64], band: f64) -> ErrorMetrics {
    assert_eq!(times.len(), err.len());
    if times.is_empty() {
        return ErrorMetrics {
            settling_time: None,
            settling_band: band,
            tail_error: 0.0,
            decay_rate: None,
            peak_error: 0.0,
        };
    }
    let envelope = suffix_max(err);
    let t0 = times[0];
    let t_end = times[times.len() - 1];

    let settling_time = match envelope.iter().position(|&e| e <= band) {
        Some(k) => Some(times[k]),
        None => None,
    };
    let tail_start = t_end - TAIL_FRACTION * (t_end - t0);
    let tail_error = times
        .iter()
        .zip(err)
        .filter(|(t, _)| **t >= tail_start)
        .map(|(_, e)| *e)
        .fold(0.0, f64::max);

    let floor_start = t_end - 0.1 * (t_end - t0);
    let floor = times
        .iter()
        .zip(&envelope)
        .find(|(t, _)| **t >= floor_start)
        .map(|(_, e)| *e)
        .unwrap_or(0.0);
    let cutoff = (10.0 * floor).max(f64::MIN_POSITIVE);
    let fit: Vec<(f64, f64)> = times
        .iter()
        .zip(&envelope)
        .take_while(|(_, e)| **e > cutoff)
        .map(|(t, e)| (*t, e.ln()))
        .collect();
    let decay_rate = if fit.len() >= 3 { Some(-ls_slope(&fit)) } else { None };

    ErrorMetrics {
        settling_time,
        settling_band: band,
        tail_error,
        decay_rate,
        peak_error: err.iter().copied().fold(0.0, f64::max),
    }
}

/// `m_k = max_{l ≥ k} x_l`.
pub fn suffix_max(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        out[k] = out[k].max(out[k + 1]);
    }
    out
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
