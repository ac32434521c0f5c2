//! Cusp and suppression-time extraction, least-squares fits and sweep ridges.
//!
//! A cusp is a local minimum of a time series whose topographic prominence
//! (depth below the lower of the two enclosing peaks) is at least a fixed
//! fraction of the value range after the skip window. The ratio makes the
//! criterion invariant under rescaling of the value axis.

use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_CUSP_SKIP: f64 = 5.0;
pub const DEFAULT_CUSP_PROMINENCE: f64 = 0.5;
pub const MIN_SERIES_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Requires strictly ascending, uniformly spaced times.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "times and values differ in length ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("time series contains non-finite entries"));
        }
        if times.len() >= 2 {
            let dt = times[1] - times[0];
            if dt <= 0.0 {
                return Err(Error::invalid("times must be strictly ascending"));
            }
            for w in times.windows(2) {
                let tol = 1e-12 * w[1].abs().max(1.0);
                if (w[1] - w[0] - dt).abs() > tol {
                    return Err(Error::invalid(format!("non-uniform time grid near t = {}", w[0])));
                }
            }
        }
        Ok(Self { times, values })
    }

    /// `t_k = k·dt` for `k = 0..values.len()`.
    pub fn uniform(dt: f64, values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|k| k as f64 * dt).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// A detected cusp and its relative prominence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cusp {
    pub time: f64,
    pub value: f64,
    /// Prominence divided by the post-skip value range.
    pub prominence: f64,
}

/// All cusps after `skip`, in time order.
pub fn cusps(series: &TimeSeries, skip: f64, prominence: f64) -> Result<Vec<Cusp>> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::invalid(format!(
            "cusp detection needs at least {MIN_SERIES_LEN} samples, got {}",
            series.len()
        )));
    }
    if !(skip.is_finite() && skip >= 0.0) || !(prominence > 0.0 && prominence <= 1.0) {
        return Err(Error::invalid(format!(
            "bad cusp parameters: skip={skip}, prominence={prominence}"
        )));
    }
    let start = series.times.partition_point(|&t| t < skip);
    let v = &series.values[start..];
    let t = &series.times[start..];
    if v.len() < 3 {
        return Ok(Vec::new());
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let range = hi - lo;
    if range <= 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for k in 1..v.len() - 1 {
        if !(v[k] < v[k - 1] && v[k] <= v[k + 1]) {
            continue;
        }
        let mut left = v[k];
        for j in (0..k).rev() {
            if v[j] < v[k] {
                break;
            }
            left = left.max(v[j]);
        }
        let mut right = v[k];
        for &x in &v[k + 1..] {
            if x < v[k] {
                break;
            }
            right = right.max(x);
        }
        let p = (left.min(right) - v[k]) / range;
        if p >= prominence {
            out.push(Cusp {
                time: t[k],
                value: v[k],
                prominence: p,
            });
        }
    }
    Ok(out)
}

/// Time of the first cusp after `skip`, if any.
pub fn first_suppression_time(series: &TimeSeries, skip: f64, prominence: f64) -> Result<Option<f64>> {
    Ok(cusps(series, skip, prominence)?.first().map(|c| c.time))
}

/// Ratios of consecutive cusp spacings, the first spacing measured from `t = 0`.
pub fn spacing_ratios(cusp_times: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    let gaps: Vec<f64> = cusp_times
        .iter()
        .map(|&t| {
            let g = t - prev;
            prev = t;
            g
        })
        .collect();
    gaps.windows(2).map(|w| w[1] / w[0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::invalid(format!(
            "linear fit needs at least 3 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::invalid("linear fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Measure values on an `x × t` grid; `values[i][k]` belongs to `x_axis[i]`, `t_axis[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub x_axis: Vec<f64>,
    pub t_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn new(x_axis: Vec<f64>, t_axis: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if x_axis.is_empty() || t_axis.is_empty() {
            return Err(Error::invalid("sweep grid must be nonempty"));
        }
        if values.len() != x_axis.len() || values.iter().any(|r| r.len() != t_axis.len()) {
            return Err(Error::invalid("sweep grid dimensions are inconsistent"));
        }
        Ok(Self { x_axis, t_axis, values })
    }

    pub fn value(&self, x_index: usize, t_index: usize) -> f64 {
        self.values[x_index][t_index]
    }
}

/// `(t, argmax_x)` for each time; ties go to the smaller x.
pub fn maximum_ridge(grid: &SweepGrid) -> Vec<(f64, f64)> {
    par::map_range(grid.t_axis.len(), |k| {
        let mut best = (f64::NEG_INFINITY, grid.x_axis[0]);
        for (i, &x) in grid.x_axis.iter().enumerate() {
            let v = grid.values[i][k];
            if v > best.0 || (v == best.0 && x < best.1) {
                best = (v, x);
            }
        }
        (grid.t_axis[k], best.1)
    })
}
