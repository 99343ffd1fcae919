//! Upper and lower envelopes of a fast oscillation whose amplitude varies
//! slowly and may change sign.
//!
//! Extremum candidates are taken once per half fast period, at fixed phase
//! relative to `phase_origin`, as the sample deviating most from the local
//! one-period mean. The two phase branches are tracked separately, so a
//! branch crossing does not swap the envelopes.

use crate::dynamics::validate_grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Period of the fast oscillation (μs).
    pub fast_period: f64,
    /// Optional faster ripple removed by a boxcar of this width first.
    pub ripple_period: Option<f64>,
    /// Time of a fast-oscillation extremum.
    pub phase_origin: f64,
}

impl EnvelopeOptions {
    pub fn new(fast_period: f64) -> Self {
        Self { fast_period, ripple_period: None, phase_origin: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// `(t, value)` of the extrema behind each branch.
    pub upper_points: Vec<(f64, f64)>,
    pub lower_points: Vec<(f64, f64)>,
}

const MIN_PERIODS: f64 = 5.0;
const MIN_POINTS_PER_BRANCH: usize = 3;
/// Half-width of the extremum search window, in fast periods.
const SEARCH: f64 = 0.125;

pub fn envelope_extract(times: &[f64], values: &[f64], opts: &EnvelopeOptions) -> Result<Envelopes> {
    validate_grid(times)?;
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    let period = opts.fast_period;
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter { name: "fast_period", reason: format!("must be positive, got {period}") });
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Ok(Envelopes {
            upper: values.to_vec(),
            lower: values.to_vec(),
            upper_points: Vec::new(),
            lower_points: Vec::new(),
        });
    }
    let span = times[times.len() - 1] - times[0];
    let available = (span / (0.5 * period)).floor() as usize;
    if span < MIN_PERIODS * period {
        return Err(Error::TooFewExtrema { found: available, needed: (2.0 * MIN_PERIODS) as usize });
    }

    let smooth = match opts.ripple_period {
        Some(w) if w > 0.0 => boxcar(times, values, w),
        _ => values.to_vec(),
    };
    let mean = boxcar(times, &smooth, period);

    let mut branches: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    let first = ((times[0] - opts.phase_origin) / (0.5 * period)).ceil() as i64;
    let last = ((times[times.len() - 1] - opts.phase_origin) / (0.5 * period)).floor() as i64;
    for k in first..=last {
        let centre = opts.phase_origin + 0.5 * period * k as f64;
        let (a, b) = window(times, centre - SEARCH * period, centre + SEARCH * period);
        if a >= b {
            continue;
        }
        let best = (a..b)
            .max_by(|&i, &j| (smooth[i] - mean[i]).abs().total_cmp(&(smooth[j] - mean[j]).abs()))
            .expect("non-empty window");
        branches[k.rem_euclid(2) as usize].push((times[best], smooth[best]));
    }
    let found = branches[0].len().min(branches[1].len());
    if found < MIN_POINTS_PER_BRANCH {
        return Err(Error::TooFewExtrema { found, needed: MIN_POINTS_PER_BRANCH });
    }

    let [b0, b1] = branches;
    let (upper_points, lower_points) = if b0[0].1 >= b1[0].1 { (b0, b1) } else { (b1, b0) };
    Ok(Envelopes { upper: pchip(&upper_points, times), lower: pchip(&lower_points, times), upper_points, lower_points })
}

/// Index range of samples with `t` in `[t0, t1)`.
fn window(times: &[f64], t0: f64, t1: f64) -> (usize, usize) {
    (times.partition_point(|&t| t < t0), times.partition_point(|&t| t < t1))
}

/// Moving average over a window of width `w`, centred where possible and
/// shifted inward at the edges.
fn boxcar(times: &[f64], values: &[f64], w: f64) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix[prefix.len() - 1] + v);
    }
    let (t_first, t_last) = (times[0], times[times.len() - 1]);
    times
        .iter()
        .map(|&t| {
            let start = (t - 0.5 * w).min(t_last - w).max(t_first);
            let (a, b) = window(times, start, start + w);
            let b = b.max(a + 1);
            (prefix[b] - prefix[a]) / (b - a) as f64
        })
        .collect()
}

/// Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson),
/// held constant outside the data.
pub fn pchip(points: &[(f64, f64)], at: &[f64]) -> Vec<f64> {
    let n = points.len();
    if n == 0 {
        return vec![f64::NAN; at.len()];
    }
    if n == 1 {
        return vec![points[0].1; at.len()];
    }
    let h: Vec<f64> = points.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let delta: Vec<f64> = points.windows(2).zip(&h).map(|(w, h)| (w[1].1 - w[0].1) / h).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    at.iter()
        .map(|&t| {
            if t <= points[0].0 {
                return points[0].1;
            }
            if t >= points[n - 1].0 {
                return points[n - 1].1;
            }
            let k = points.partition_point(|p| p.0 <= t) - 1;
            let s = (t - points[k].0) / h[k];
            let (y0, y1) = (points[k].1, points[k + 1].1);
            let h00 = (1.0 + 2.0 * s) * (1.0 - s).powi(2);
            let h10 = s * (1.0 - s).powi(2);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            h00 * y0 + h10 * h[k] * d[k] + h01 * y1 + h11 * h[k] * d[k + 1]
        })
        .collect()
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn pure_sinusoid() {
        let (a, c, period) = (0.3, 0.5, 0.025);
        let t = grid(0.5, 5000);
        let v: Vec<f64> = t.iter().map(|&t| c + a * (TAU * t / period).cos()).collect();
        let env = envelope_extract(&t, &v, &EnvelopeOptions::new(period)).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            if ti > period {
                assert!((env.upper[i] - (c + a)).abs() < 0.01 * a);
                assert!((env.lower[i] - (c - a)).abs() < 0.01 * a);
            }
        }
    }

    #[test]
    fn constant_series() {
        let t = grid(1.0, 100);
        let v = vec![0.25; t.len()];
        let env = envelope_extract(&t, &v, &EnvelopeOptions::new(0.1)).unwrap();
        assert_eq!(env.upper, v);
        assert_eq!(env.lower, v);
    }

    #[test]
    fn too_short() {
        let t = grid(0.1, 100);
        let v: Vec<f64> = t.iter().map(|&t| (TAU * t / 0.04).cos()).collect();
        assert!(matches!(envelope_extract(&t, &v, &EnvelopeOptions::new(0.04)), Err(Error::TooFewExtrema { .. })));
    }

    #[test]
    fn crossing_branches_keep_their_identity() {
        // amplitude A(t) = 1 − 4t changes sign at t = 0.25
        let period = 0.02;
        let t = grid(0.5, 10_000);
        let v: Vec<f64> = t.iter().map(|&t| 0.5 + 0.4 * (1.0 - 4.0 * t) * (TAU * t / period).cos()).collect();
        let env = envelope_extract(&t, &v, &EnvelopeOptions::new(period)).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            if ti > period && ti < 0.48 {
                let want_upper = 0.5 + 0.4 * (1.0 - 4.0 * ti);
                assert!((env.upper[i] - want_upper).abs() < 5e-3, "t = {ti}");
                assert!((env.lower[i] - (1.0 - want_upper)).abs() < 5e-3, "t = {ti}");
            }
        }
    }

    #[test]
    fn ripple_is_removed() {
        let (period, ripple) = (0.025, 0.0014);
        let t = grid(0.4, 40_000);
        let v: Vec<f64> =
            t.iter().map(|&t| 0.5 + 0.3 * (TAU * t / period).cos() + 0.05 * (TAU * t / ripple).sin()).collect();
        let opts = EnvelopeOptions { ripple_period: Some(ripple), ..EnvelopeOptions::new(period) };
        let env = envelope_extract(&t, &v, &opts).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            if ti > period && ti < 0.38 {
                assert!((env.upper[i] - 0.8).abs() < 0.01, "t = {ti}: {}", env.upper[i]);
                assert!((env.lower[i] - 0.2).abs() < 0.01, "t = {ti}: {}", env.lower[i]);
            }
        }
    }

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let pts = [(0.0, 0.0), (1.0, 0.1), (2.0, 0.1), (3.0, 2.0), (4.0, 2.1)];
        let at: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let y = pchip(&pts, &at);
        for w in y.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
        for (x, v) in pts {
            assert!((y[(x * 100.0) as usize] - v).abs() < 1e-14);
        }
        assert_eq!(pchip(&pts, &[-1.0, 5.0]), vec![0.0, 2.1]);
    }
}
