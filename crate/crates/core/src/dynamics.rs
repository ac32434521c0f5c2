//! Measure time series after a quench: correlators → X-state → measures,
//! evaluated independently per time and collected in time order.

use crate::error::{Error, Result};
use crate::gaussian::{two_site_state, TwoSiteState};
use crate::measures::{quantum_discord, CorrelationMeasures, OptimizerOptions};
use crate::par;
use crate::quench::QuenchSetup;

/// `t_k = k·dt` for `k = 0..=floor(t_max/dt)`, with a small slack so that
/// `t_max` itself is included when it is a multiple of `dt`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) || !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::invalid(format!("bad time grid: t_max={t_max}, dt={dt}")));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Measures for every time and distance; `rows[k][j]` is at `times[k]`, `distances[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub distances: Vec<usize>,
    pub rows: Vec<Vec<CorrelationMeasures>>,
}

impl MeasureSeries {
    /// One measure column for distance index `j`.
    pub fn column(&self, j: usize, pick: impl Fn(&CorrelationMeasures) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| pick(&r[j])).collect()
    }

    pub fn discord(&self, j: usize) -> Vec<f64> {
        self.column(j, |m| m.discord)
    }

    pub fn concurrence(&self, j: usize) -> Vec<f64> {
        self.column(j, |m| m.concurrence)
    }
}

fn check_distances(setup: &QuenchSetup, distances: &[usize]) -> Result<usize> {
    let m_max = distances.iter().copied().max().unwrap_or(0);
    if distances.is_empty() || distances.contains(&0) {
        return Err(Error::invalid("distances must be a nonempty list of positive integers"));
    }
    if m_max >= setup.n_sites() / 2 {
        return Err(Error::invalid(format!(
            "distance {m_max} too large for N = {}",
            setup.n_sites()
        )));
    }
    Ok(m_max)
}

/// Two-site states at one time for each distance.
pub fn states_at(setup: &QuenchSetup, distances: &[usize], t: f64) -> Result<Vec<TwoSiteState>> {
    let m_max = check_distances(setup, distances)?;
    let block = setup.correlator_block(m_max, t)?;
    distances.iter().map(|&m| two_site_state(&block, m)).collect()
}

pub fn measures_at(
    setup: &QuenchSetup,
    distances: &[usize],
    t: f64,
    opts: &OptimizerOptions,
) -> Result<Vec<CorrelationMeasures>> {
    states_at(setup, distances, t)?
        .iter()
        .map(|s| quantum_discord(s, opts))
        .collect()
}

pub fn measure_series(
    setup: &QuenchSetup,
    distances: &[usize],
    times: &[f64],
    opts: &OptimizerOptions,
) -> Result<MeasureSeries> {
    check_distances(setup, distances)?;
    opts.validate()?;
    let rows = par::map_slice(times, |&t| measures_at(setup, distances, t, opts));
    Ok(MeasureSeries {
        times: times.to_vec(),
        distances: distances.to_vec(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::solve;
    use crate::model::ModelParams;
    use crate::quench::prepare_quench;

    #[test]
    fn grid_includes_endpoint() {
        let g = time_grid(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 10.0 * 0.1);
        assert_eq!(time_grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert!(time_grid(1.0, 0.0).is_err());
        assert!(time_grid(-1.0, 0.1).is_err());
    }

    #[test]
    fn series_layout_and_validation() {
        let pre = solve(&ModelParams::unit(0.0, 0.0, 64).unwrap()).unwrap();
        let post = solve(&ModelParams::unit(2.0, 0.0, 64).unwrap()).unwrap();
        let q = prepare_quench(&pre, &post).unwrap();
        let opts = OptimizerOptions::default();
        let times = time_grid(2.0, 0.5).unwrap();
        let s = measure_series(&q, &[1, 2], &times, &opts).unwrap();
        assert_eq!(s.rows.len(), 5);
        assert!(s.rows.iter().all(|r| r.len() == 2));
        let single = measures_at(&q, &[2], 1.5, &opts).unwrap();
        assert_eq!(single[0], s.rows[3][1]);
        assert!(measure_series(&q, &[0], &times, &opts).is_err());
        assert!(measure_series(&q, &[], &times, &opts).is_err());
        assert!(measure_series(&q, &[40], &times, &opts).is_err());
    }
}
