//! The five experiments. Each has a report function returning typed results
//! and a renderer that appends CSV rows and summary lines.

use crate::analysis::{
    cusps, linear_fit, maximum_ridge, spacing_ratios, Cusp, LinearFit, SweepGrid, TimeSeries, MIN_SERIES_LEN,
};
use crate::dynamics::{measure_series, time_grid, MeasureSeries};
use crate::gaussian::TwoSiteState;
use crate::meanfield::{solve_self_consistent, MeanFieldParams, MeanFieldSolution};
use crate::measures::{concurrence, quantum_discord};
use crate::model::ModelParams;
use crate::oracle::{ed_quench_states, generic_discord, off_x_leakage, ChainCouplings};
use crate::quench::{group_velocity_max, mode_velocity, predicted_suppression_time, prepare_quench, QuenchSetup};

use super::config::{Command, ExperimentConfig, SweepMode};
use super::csv::{fmt_f64, CsvDoc};
use super::CliError;

pub fn dispatch(cfg: &ExperimentConfig, doc: &mut CsvDoc) -> Result<(), CliError> {
    match cfg.command {
        Command::Ground => render_ground(&ground_report(cfg)?, doc),
        Command::Quench => render_quench(&quench_report(cfg)?, doc),
        Command::Sweep => render_sweep(&sweep_report(cfg)?, doc),
        Command::Scaling => render_scaling(&scaling_report(cfg)?, doc),
        Command::OracleCompare => render_oracle(&oracle_report(cfg)?, doc),
    }
}

fn solve_at(
    cfg: &ExperimentConfig,
    anisotropy: f64,
    field: f64,
    n_sites: usize,
) -> Result<MeanFieldSolution, CliError> {
    let p = ModelParams::new(cfg.coupling_j, anisotropy, field, n_sites)?;
    Ok(solve_self_consistent(
        &p,
        &MeanFieldParams::half_filling(),
        &cfg.solver,
    )?)
}

fn quench_at(
    cfg: &ExperimentConfig,
    pre: (f64, f64),
    post: (f64, f64),
    n_sites: usize,
) -> Result<QuenchSetup, CliError> {
    let a = solve_at(cfg, pre.0, pre.1, n_sites)?;
    let b = solve_at(cfg, post.0, post.1, n_sites)?;
    Ok(prepare_quench(&a, &b)?)
}

fn header(names: impl IntoIterator<Item = String>) -> Vec<String> {
    names.into_iter().collect()
}

fn measure_columns(distances: &[usize]) -> Vec<String> {
    distances
        .iter()
        .flat_map(|m| [format!("discord_m{m}"), format!("concurrence_m{m}")])
        .collect()
}

fn list(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    format!("[{}]", cells.join(", "))
}

// ---------------------------------------------------------------- ground

#[derive(Debug, Clone)]
pub struct GroundReport {
    pub solution: MeanFieldSolution,
    /// `dε/dq` for each positive mode.
    pub velocities: Vec<f64>,
    pub v_g: f64,
    pub q_vmax: f64,
}

pub fn ground_report(cfg: &ExperimentConfig) -> Result<GroundReport, CliError> {
    let solution = solve_at(cfg, cfg.anisotropy, cfg.field, cfg.n_sites)?;
    let velocities = solution
        .positive_modes()
        .iter()
        .map(|md| mode_velocity(&solution, md.q))
        .collect::<Result<Vec<_>, _>>()?;
    let (v_g, q_vmax) = group_velocity_max(&solution)?;
    Ok(GroundReport {
        solution,
        velocities,
        v_g,
        q_vmax,
    })
}

fn render_ground(r: &GroundReport, doc: &mut CsvDoc) -> Result<(), CliError> {
    doc.columns(&header(
        ["q", "a_q", "b_q", "eps_q", "theta_q", "velocity"].map(String::from),
    ));
    for (md, v) in r.solution.positive_modes().iter().zip(&r.velocities) {
        doc.row(&[md.q, md.a_q, md.b_q, md.eps_q, md.theta_q, *v]);
    }
    let s = &r.solution;
    doc.summary("u1", s.mf.u1);
    doc.summary("u2", s.mf.u2);
    doc.summary("u3", s.mf.u3);
    doc.summary("residual", s.residual);
    doc.comment(format!("iterations = {}", s.iterations));
    doc.comment(format!("restarts_used = {}", s.restarts_used));
    doc.summary("v_g", r.v_g);
    doc.summary("q_vmax", r.q_vmax);
    Ok(())
}

// ---------------------------------------------------------------- quench

#[derive(Debug, Clone)]
pub struct QuenchReport {
    pub series: MeasureSeries,
    /// Post-quench maximal group velocity.
    pub v_g: f64,
    pub predicted_ts: f64,
    /// Discord cusps per distance; `None` when the series is too short.
    pub cusps: Vec<Option<Vec<Cusp>>>,
}

impl QuenchReport {
    pub fn suppression_time(&self, j: usize) -> Option<f64> {
        self.cusps[j].as_ref().and_then(|c| c.first()).map(|c| c.time)
    }
}

fn discord_cusps(cfg: &ExperimentConfig, series: &MeasureSeries, j: usize) -> Result<Option<Vec<Cusp>>, CliError> {
    if series.times.len() < MIN_SERIES_LEN {
        return Ok(None);
    }
    let ts = TimeSeries::new(series.times.clone(), series.discord(j)).map_err(|e| CliError::Analysis(e.to_string()))?;
    let c = cusps(&ts, cfg.cusp_skip, cfg.cusp_prominence).map_err(|e| CliError::Analysis(e.to_string()))?;
    Ok(Some(c))
}

pub fn quench_report(cfg: &ExperimentConfig) -> Result<QuenchReport, CliError> {
    let setup = quench_at(
        cfg,
        (cfg.delta_initial, cfg.field_initial),
        (cfg.delta_final, cfg.field_final),
        cfg.n_sites,
    )?;
    let (v_g, _) = group_velocity_max(&setup.post)?;
    let predicted_ts = predicted_suppression_time(cfg.n_sites, v_g)?;
    let times = time_grid(cfg.t_max, cfg.dt)?;
    let series = measure_series(&setup, &cfg.distances, &times, &cfg.optimizer)?;
    let cusps = (0..cfg.distances.len())
        .map(|j| discord_cusps(cfg, &series, j))
        .collect::<Result<_, _>>()?;
    Ok(QuenchReport {
        series,
        v_g,
        predicted_ts,
        cusps,
    })
}

fn render_quench(r: &QuenchReport, doc: &mut CsvDoc) -> Result<(), CliError> {
    let s = &r.series;
    let mut cols = vec!["t".to_string()];
    cols.extend(measure_columns(&s.distances));
    doc.columns(&cols);
    for (t, row) in s.times.iter().zip(&s.rows) {
        let mut v = vec![*t];
        for m in row {
            v.push(m.discord);
            v.push(m.concurrence);
        }
        doc.row(&v);
    }
    doc.summary("v_g", r.v_g);
    doc.summary("predicted_t_s", r.predicted_ts);
    for (j, m) in s.distances.iter().enumerate() {
        match &r.cusps[j] {
            None => doc.comment(format!(
                "discord_m{m} cusps = unavailable (fewer than {MIN_SERIES_LEN} samples)"
            )),
            Some(c) => {
                let times: Vec<f64> = c.iter().map(|c| c.time).collect();
                doc.comment(format!("discord_m{m} cusps = {}", list(&times)));
                match times.first() {
                    Some(&t) => doc.summary(&format!("discord_m{m} t_s"), t),
                    None => doc.comment(format!("discord_m{m} t_s = none")),
                }
                doc.comment(format!(
                    "discord_m{m} spacing_ratios = {}",
                    list(&spacing_ratios(&times))
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub x_axis: Vec<f64>,
    /// One series per swept value.
    pub series: Vec<MeasureSeries>,
}

impl SweepReport {
    /// Measure grid for distance index `j`.
    pub fn grid(&self, j: usize, discord: bool) -> SweepGrid {
        let values = self
            .series
            .iter()
            .map(|s| if discord { s.discord(j) } else { s.concurrence(j) })
            .collect();
        SweepGrid {
            x_axis: self.x_axis.clone(),
            t_axis: self.series[0].times.clone(),
            values,
        }
    }
}

/// Pre- and post-quench `(Δ, h)` for one swept value.
pub fn sweep_endpoints(cfg: &ExperimentConfig, x: f64) -> ((f64, f64), (f64, f64)) {
    match cfg.sweep_mode {
        SweepMode::Delta => ((cfg.delta_initial, cfg.field_initial), (x, cfg.field_final)),
        SweepMode::Field => ((cfg.delta_initial, x), (cfg.delta_final, cfg.field_final)),
        SweepMode::Anisotropy => ((x, cfg.field_initial), (x, cfg.field_final)),
    }
}

pub fn sweep_report(cfg: &ExperimentConfig) -> Result<SweepReport, CliError> {
    let x_axis = cfg.sweep_axis();
    let times = time_grid(cfg.t_max, cfg.dt)?;
    let mut series = Vec::with_capacity(x_axis.len());
    for &x in &x_axis {
        let (pre, post) = sweep_endpoints(cfg, x);
        let setup = quench_at(cfg, pre, post, cfg.n_sites)?;
        log::debug!("sweep point {} = {x}", cfg.sweep_mode.name());
        series.push(measure_series(&setup, &cfg.distances, &times, &cfg.optimizer)?);
    }
    Ok(SweepReport {
        mode: cfg.sweep_mode,
        x_axis,
        series,
    })
}

fn render_sweep(r: &SweepReport, doc: &mut CsvDoc) -> Result<(), CliError> {
    let distances = &r.series[0].distances;
    let mut cols = vec!["x".to_string(), "t".to_string()];
    cols.extend(measure_columns(distances));
    doc.columns(&cols);
    for (x, s) in r.x_axis.iter().zip(&r.series) {
        for (t, row) in s.times.iter().zip(&s.rows) {
            let mut v = vec![*x, *t];
            for m in row {
                v.push(m.discord);
                v.push(m.concurrence);
            }
            doc.row(&v);
        }
    }
    let ridges: Vec<Vec<(f64, f64)>> = (0..distances.len())
        .flat_map(|j| [maximum_ridge(&r.grid(j, true)), maximum_ridge(&r.grid(j, false))])
        .collect();
    doc.comment(format!("ridge_columns = t,{}", measure_columns(distances).join(",")));
    for k in 0..r.series[0].times.len() {
        let cells: Vec<String> = ridges.iter().map(|ridge| fmt_f64(ridge[k].1)).collect();
        doc.comment(format!("ridge = {},{}", fmt_f64(ridges[0][k].0), cells.join(",")));
    }
    Ok(())
}

// ---------------------------------------------------------------- scaling

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n_sites: usize,
    pub v_g: f64,
    pub predicted_ts: f64,
    pub t_max: f64,
    pub cusp_times: Vec<f64>,
}

impl ScalingRow {
    pub fn suppression_time(&self) -> Option<f64> {
        self.cusp_times.first().copied()
    }

    /// Ratio of the second cusp spacing to the first, if two cusps were found.
    pub fn spacing_ratio(&self) -> Option<f64> {
        spacing_ratios(&self.cusp_times).first().copied()
    }
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `T_s` against `N`; `None` when some size had no cusp.
    pub fit: Option<LinearFit>,
    /// `1/(2 v_g)` at the largest chain.
    pub predicted_slope: f64,
}

pub fn scaling_row(cfg: &ExperimentConfig, n_sites: usize) -> Result<ScalingRow, CliError> {
    let setup = quench_at(
        cfg,
        (cfg.delta_initial, cfg.field_initial),
        (cfg.delta_final, cfg.field_final),
        n_sites,
    )?;
    let (v_g, _) = group_velocity_max(&setup.post)?;
    let predicted_ts = predicted_suppression_time(n_sites, v_g)?;
    let t_max = cfg.t_max_periods * predicted_ts;
    let times = time_grid(t_max, cfg.dt)?;
    let series = measure_series(&setup, &cfg.distances[..1], &times, &cfg.optimizer)?;
    let cusp_times = discord_cusps(cfg, &series, 0)?
        .unwrap_or_default()
        .iter()
        .map(|c| c.time)
        .collect();
    log::info!("scaling N = {n_sites}: cusps {cusp_times:?}");
    Ok(ScalingRow {
        n_sites,
        v_g,
        predicted_ts,
        t_max,
        cusp_times,
    })
}

pub fn scaling_report(cfg: &ExperimentConfig) -> Result<ScalingReport, CliError> {
    let rows = cfg
        .sizes
        .iter()
        .map(|&n| scaling_row(cfg, n))
        .collect::<Result<Vec<_>, _>>()?;
    let largest = rows.iter().max_by_key(|r| r.n_sites).expect("sizes validated nonempty");
    let predicted_slope = 1.0 / (2.0 * largest.v_g);
    let fit = if rows.iter().all(|r| r.suppression_time().is_some()) {
        let x: Vec<f64> = rows.iter().map(|r| r.n_sites as f64).collect();
        let y: Vec<f64> = rows.iter().filter_map(ScalingRow::suppression_time).collect();
        Some(linear_fit(&x, &y).map_err(|e| CliError::Analysis(e.to_string()))?)
    } else {
        None
    };
    Ok(ScalingReport {
        rows,
        fit,
        predicted_slope,
    })
}

fn render_scaling(r: &ScalingReport, doc: &mut CsvDoc) -> Result<(), CliError> {
    doc.columns(&header(
        ["n_sites", "v_g", "predicted_t_s", "t_s", "n_cusps", "spacing_ratio"].map(String::from),
    ));
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for row in &r.rows {
        doc.row_cells(&[
            row.n_sites.to_string(),
            fmt_f64(row.v_g),
            fmt_f64(row.predicted_ts),
            opt(row.suppression_time()),
            row.cusp_times.len().to_string(),
            opt(row.spacing_ratio()),
        ]);
    }
    doc.summary("predicted_slope", r.predicted_slope);
    match &r.fit {
        Some(f) => {
            doc.summary("slope", f.slope);
            doc.summary("intercept", f.intercept);
            doc.summary("r_squared", f.r_squared);
            Ok(())
        }
        None => {
            let missing: Vec<String> = r
                .rows
                .iter()
                .filter(|row| row.suppression_time().is_none())
                .map(|row| row.n_sites.to_string())
                .collect();
            let msg = format!("no suppression cusp found for N = {}", missing.join(", "));
            doc.comment(format!("error = {msg}"));
            Err(CliError::Analysis(msg))
        }
    }
}

// ---------------------------------------------------------------- oracle-compare

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCell {
    pub ed_discord: f64,
    pub mf_discord: f64,
    pub ed_concurrence: f64,
    pub mf_concurrence: f64,
    /// Generic discord of the full ED matrix minus the X-state discord of its projection.
    pub generic_minus_x: f64,
    pub leakage: f64,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub times: Vec<f64>,
    pub distances: Vec<usize>,
    /// `cells[k][j]` at `times[k]`, `distances[j]`.
    pub cells: Vec<Vec<OracleCell>>,
}

impl OracleReport {
    fn column(&self, j: usize, pick: impl Fn(&OracleCell) -> f64) -> Vec<f64> {
        self.cells.iter().map(|r| pick(&r[j])).collect()
    }

    fn max_over(&self, pick: impl Fn(&OracleCell) -> f64) -> f64 {
        self.cells.iter().flatten().map(pick).fold(0.0, f64::max)
    }
}

/// Pearson correlation; NaN when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va > 0.0 && vb > 0.0 {
        cov / (va * vb).sqrt()
    } else {
        f64::NAN
    }
}

pub fn oracle_report(cfg: &ExperimentConfig) -> Result<OracleReport, CliError> {
    let n = cfg.n_sites;
    let pre_p = ModelParams::new(cfg.coupling_j, cfg.delta_initial, cfg.field_initial, n)?;
    let post_p = ModelParams::new(cfg.coupling_j, cfg.delta_final, cfg.field_final, n)?;
    let setup = quench_at(
        cfg,
        (cfg.delta_initial, cfg.field_initial),
        (cfg.delta_final, cfg.field_final),
        n,
    )?;
    let times = time_grid(cfg.t_max, cfg.dt)?;
    let mf = measure_series(&setup, &cfg.distances, &times, &cfg.optimizer)?;
    let ed = ed_quench_states(
        &ChainCouplings::from_model(&pre_p),
        &ChainCouplings::from_model(&post_p),
        &times,
        &cfg.distances,
    )?;
    let mut cells = Vec::with_capacity(times.len());
    for (k, rhos) in ed.iter().enumerate() {
        let mut row = Vec::with_capacity(rhos.len());
        for (j, rho) in rhos.iter().enumerate() {
            let (xs, _) = TwoSiteState::from_density_matrix(cfg.distances[j], rho)?;
            let x_measures = quantum_discord(&xs, &cfg.optimizer)?;
            let generic = generic_discord(rho, &cfg.optimizer)?;
            let m = &mf.rows[k][j];
            row.push(OracleCell {
                ed_discord: generic.discord,
                mf_discord: m.discord,
                ed_concurrence: concurrence(&xs),
                mf_concurrence: m.concurrence,
                generic_minus_x: generic.discord - x_measures.discord,
                leakage: off_x_leakage(rho),
            });
        }
        cells.push(row);
    }
    Ok(OracleReport {
        times,
        distances: cfg.distances.clone(),
        cells,
    })
}

fn render_oracle(r: &OracleReport, doc: &mut CsvDoc) -> Result<(), CliError> {
    let mut cols = vec!["t".to_string()];
    for m in &r.distances {
        for name in [
            "ed_discord",
            "mf_discord",
            "ed_concurrence",
            "mf_concurrence",
            "generic_minus_x",
            "leakage",
        ] {
            cols.push(format!("{name}_m{m}"));
        }
    }
    doc.columns(&cols);
    for (t, row) in r.times.iter().zip(&r.cells) {
        let mut v = vec![*t];
        for c in row {
            v.extend([
                c.ed_discord,
                c.mf_discord,
                c.ed_concurrence,
                c.mf_concurrence,
                c.generic_minus_x,
                c.leakage,
            ]);
        }
        doc.row(&v);
    }
    doc.summary(
        "max_abs_discord_diff",
        r.max_over(|c| (c.ed_discord - c.mf_discord).abs()),
    );
    doc.summary(
        "max_abs_concurrence_diff",
        r.max_over(|c| (c.ed_concurrence - c.mf_concurrence).abs()),
    );
    doc.summary("max_abs_generic_minus_x", r.max_over(|c| c.generic_minus_x.abs()));
    doc.summary("max_leakage", r.max_over(|c| c.leakage));
    for (j, m) in r.distances.iter().enumerate() {
        let p = pearson(&r.column(j, |c| c.ed_discord), &r.column(j, |c| c.mf_discord));
        doc.summary(&format!("pearson_discord_m{m}"), p);
    }
    Ok(())
}
