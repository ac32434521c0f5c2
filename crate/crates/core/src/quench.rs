//! Sudden quench `(Δ_I, h_I) → (Δ_F, h_F)` and the time-dependent
//! translation-averaged two-point functions
//!
//! ```text
//! T_m(t) = (1/N) Σ_l ⟨a†_l a_{l+m}⟩
//!        = (1/N) Σ_{q>0} cos(qm) [1 − cos2θ^F cos2Φ − sin2θ^F sin2Φ cos(2ε^F t)]
//! P_m(t) = (1/N) Σ_l ⟨a†_l a†_{l+m}⟩
//!        = (1/N) Σ_{q>0} sin(qm) [sin2θ^F cos2Φ − sin2Φ cos2θ^F cos(2ε^F t)
//!                                 − i sin2Φ sin(2ε^F t)]
//! ```
//!
//! with `Φ_q = θ_q^F − θ_q^I`. The post-quench averages Υ^F are those of the
//! ground state of the final Hamiltonian; they are not re-solved in time.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::meanfield::MeanFieldSolution;
use crate::sum::{Neumaier, NeumaierComplex};

/// Per-mode trigonometric factors for `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ModeFactors {
    q: f64,
    cos2_theta_f: f64,
    sin2_theta_f: f64,
    cos2_phi: f64,
    sin2_phi: f64,
    eps_f: f64,
}

/// Pre- and post-quench Bogoliubov data; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct QuenchSetup {
    pub pre: MeanFieldSolution,
    pub post: MeanFieldSolution,
    /// `Φ_q = θ_q^F − θ_q^I` for each positive mode, ascending in q.
    pub phi: Vec<f64>,
    factors: Vec<ModeFactors>,
}

/// All `T_m`, `P_m` for `m ≤ m_max` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorBlock {
    pub time: f64,
    /// `T_0 ..= T_{m_max}`.
    pub hop: Vec<f64>,
    /// `P_1 ..= P_{m_max}`.
    pub pair: Vec<Complex64>,
}

impl CorrelatorBlock {
    pub fn m_max(&self) -> usize {
        self.pair.len()
    }

    /// `T_d` for any signed distance (even in `d`).
    pub fn hop_at(&self, d: isize) -> f64 {
        self.hop[d.unsigned_abs()]
    }

    /// `P_d` for any signed distance (odd in `d`, zero at `d = 0`).
    pub fn pair_at(&self, d: isize) -> Complex64 {
        match d {
            0 => Complex64::new(0.0, 0.0),
            d if d > 0 => self.pair[d as usize - 1],
            d => -self.pair[(-d) as usize - 1],
        }
    }

    /// Empty lattice.
    pub fn vacuum(m_max: usize) -> Self {
        Self {
            time: 0.0,
            hop: vec![0.0; m_max + 1],
            pair: vec![Complex64::new(0.0, 0.0); m_max],
        }
    }

    /// Fully occupied lattice.
    pub fn filled(m_max: usize) -> Self {
        let mut b = Self::vacuum(m_max);
        b.hop[0] = 1.0;
        b
    }
}

pub fn prepare_quench(pre: &MeanFieldSolution, post: &MeanFieldSolution) -> Result<QuenchSetup> {
    if pre.params.n_sites != post.params.n_sites || pre.modes.len() != post.modes.len() {
        return Err(Error::invalid(format!(
            "pre- and post-quench chains differ in size ({} vs {})",
            pre.params.n_sites, post.params.n_sites
        )));
    }
    let mut phi = Vec::with_capacity(pre.modes.len() / 2);
    let mut factors = Vec::with_capacity(pre.modes.len() / 2);
    for (i, f) in pre.positive_modes().iter().zip(post.positive_modes()) {
        if i.q != f.q {
            return Err(Error::invalid("pre- and post-quench momentum grids differ"));
        }
        let dphi = wrap_half_turn(f.theta_q - i.theta_q);
        phi.push(dphi);
        let (s2t, c2t) = (2.0 * f.theta_q).sin_cos();
        let (s2p, c2p) = (2.0 * dphi).sin_cos();
        factors.push(ModeFactors {
            q: f.q,
            cos2_theta_f: c2t,
            sin2_theta_f: s2t,
            cos2_phi: c2p,
            sin2_phi: s2p,
            eps_f: f.eps_q,
        });
    }
    Ok(QuenchSetup {
        pre: pre.clone(),
        post: post.clone(),
        phi,
        factors,
    })
}

/// Bogoliubov angles are defined modulo π; reduce a difference to (−π/2, π/2].
fn wrap_half_turn(x: f64) -> f64 {
    let r = x - PI * (x / PI).round();
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

impl QuenchSetup {
    pub fn n_sites(&self) -> usize {
        self.pre.params.n_sites
    }

    /// Whether every `Φ_q` vanishes.
    pub fn is_null(&self) -> bool {
        self.phi.iter().all(|&p| p == 0.0)
    }

    #[inline]
    fn hop_term(f: &ModeFactors, m: usize, cos_wt: f64) -> f64 {
        (f.q * m as f64).cos() * (1.0 - f.cos2_theta_f * f.cos2_phi - f.sin2_theta_f * f.sin2_phi * cos_wt)
    }

    #[inline]
    fn pair_term(f: &ModeFactors, m: usize, cos_wt: f64, sin_wt: f64) -> Complex64 {
        let s = (f.q * m as f64).sin();
        Complex64::new(
            s * (f.sin2_theta_f * f.cos2_phi - f.sin2_phi * f.cos2_theta_f * cos_wt),
            -s * f.sin2_phi * sin_wt,
        )
    }

    pub fn hopping_correlator(&self, m: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        let mut acc = Neumaier::new();
        for f in &self.factors {
            acc.add(Self::hop_term(f, m, (2.0 * f.eps_f * t).cos()));
        }
        Ok(acc.value() / self.n_sites() as f64)
    }

    pub fn pairing_correlator(&self, m: usize, t: f64) -> Result<Complex64> {
        check_time(t)?;
        if m == 0 {
            return Err(Error::invalid("pairing correlator needs m >= 1"));
        }
        let mut acc = NeumaierComplex::default();
        for f in &self.factors {
            let (s, c) = (2.0 * f.eps_f * t).sin_cos();
            acc.add(Self::pair_term(f, m, c, s));
        }
        Ok(acc.value() / self.n_sites() as f64)
    }

    /// `T_0..=T_{m_max}` and `P_1..=P_{m_max}` in one pass over the modes.
    /// Each distance keeps its own accumulator, so values are bitwise equal
    /// to the single-distance calls.
    pub fn correlator_block(&self, m_max: usize, t: f64) -> Result<CorrelatorBlock> {
        check_time(t)?;
        let mut hop = vec![Neumaier::new(); m_max + 1];
        let mut pair = vec![NeumaierComplex::default(); m_max];
        for f in &self.factors {
            let (s, c) = (2.0 * f.eps_f * t).sin_cos();
            let cos_wt = (2.0 * f.eps_f * t).cos();
            for (m, acc) in hop.iter_mut().enumerate() {
                acc.add(Self::hop_term(f, m, cos_wt));
            }
            for (k, acc) in pair.iter_mut().enumerate() {
                acc.add(Self::pair_term(f, k + 1, c, s));
            }
        }
        let n = self.n_sites() as f64;
        Ok(CorrelatorBlock {
            time: t,
            hop: hop.iter().map(|a| a.value() / n).collect(),
            pair: pair.iter().map(|a| a.value() / n).collect(),
        })
    }
}

/// Ground-state `T_m` of a mean-field solution: `(1/N) Σ_{q>0} cos(qm)(1 − cos2θ_q)`.
pub fn ground_hopping(sol: &MeanFieldSolution, m: usize) -> f64 {
    let mut acc = Neumaier::new();
    for md in sol.positive_modes() {
        acc.add((md.q * m as f64).cos() * (1.0 - (2.0 * md.theta_q).cos()));
    }
    acc.value() / sol.params.n_sites as f64
}

/// Ground-state `P_m`: `(1/N) Σ_{q>0} sin(qm) sin2θ_q` (real).
pub fn ground_pairing(sol: &MeanFieldSolution, m: usize) -> f64 {
    let mut acc = Neumaier::new();
    for md in sol.positive_modes() {
        acc.add((md.q * m as f64).sin() * (2.0 * md.theta_q).sin());
    }
    acc.value() / sol.params.n_sites as f64
}

/// Quasiparticle group velocity `dε_q/dq` from the analytic derivative.
pub fn mode_velocity(sol: &MeanFieldSolution, q: f64) -> Result<f64> {
    let p = &sol.params;
    let j = p.coupling_j;
    let hop = j * ((p.anisotropy + 1.0) / 2.0 - 2.0 * sol.mf.u2);
    let shift = j * (2.0 * sol.mf.u1 - 1.0) - p.field;
    let pair = j * (2.0 * sol.mf.u3 + (p.anisotropy - 1.0) / 2.0);
    let (s, c) = q.sin_cos();
    let a = hop * c + shift;
    let b = pair * s;
    let eps = a.hypot(b);
    if eps <= crate::model::GAPLESS_THRESHOLD * p.energy_scale() {
        return Err(Error::SingularMode { q });
    }
    Ok((a * (-hop * s) + b * (pair * c)) / eps)
}

/// Maximum of `|∂ε_q/∂q|` over the grid and the momentum attaining it
/// (first occurrence in ascending q).
pub fn group_velocity_max(sol: &MeanFieldSolution) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for md in &sol.modes {
        let v = mode_velocity(sol, md.q)?.abs();
        if v > best.0 {
            best = (v, md.q);
        }
    }
    Ok(best)
}

/// Light-cone estimate `N / (2 v_g)` of the first suppression time.
pub fn predicted_suppression_time(n_sites: usize, v_g: f64) -> Result<f64> {
    if !(v_g > 0.0 && v_g.is_finite()) {
        return Err(Error::invalid(format!("group velocity must be positive, got {v_g}")));
    }
    Ok(n_sites as f64 / (2.0 * v_g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{solve, MeanFieldParams};
    use crate::model::ModelParams;

    fn sol(d: f64, h: f64, n: usize) -> MeanFieldSolution {
        solve(&ModelParams::unit(d, h, n).unwrap()).unwrap()
    }

    #[test]
    fn identity_quench_has_zero_angles() {
        let s = sol(0.6, 0.2, 64);
        let q = prepare_quench(&s, &s).unwrap();
        assert!(q.is_null());
        assert_eq!(q.phi.len(), 32);
    }

    #[test]
    fn swapping_negates_angles() {
        let a = sol(0.6, 0.2, 64);
        let b = sol(1.4, 0.0, 64);
        let f = prepare_quench(&a, &b).unwrap();
        let r = prepare_quench(&b, &a).unwrap();
        for (x, y) in f.phi.iter().zip(&r.phi) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        assert!(prepare_quench(&sol(0.5, 0.0, 64), &sol(0.5, 0.0, 32)).is_err());
    }

    #[test]
    fn near_critical_quench_angles_small_but_nonzero() {
        let q = prepare_quench(&sol(0.98, 0.0, 800), &sol(1.0, 0.0, 800)).unwrap();
        let max = q.phi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        assert!(max > 0.0 && max < 0.8, "{max}");
    }

    #[test]
    fn null_quench_is_static() {
        let s = sol(0.8, 0.3, 128);
        let q = prepare_quench(&s, &s).unwrap();
        for m in 0..4 {
            let t0 = q.hopping_correlator(m, 0.0).unwrap();
            for k in 1..50 {
                let t = 0.37 * k as f64;
                assert!((q.hopping_correlator(m, t).unwrap() - t0).abs() < 1e-12);
            }
        }
        let p = q.pairing_correlator(2, 13.0).unwrap();
        assert!((p.re - ground_pairing(&s, 2)).abs() < 1e-15);
        assert_eq!(p.im, 0.0);
    }

    #[test]
    fn initial_values_match_pre_quench_ground_state() {
        let pre = sol(0.2, 0.7, 96);
        let post = sol(1.6, 0.1, 96);
        let q = prepare_quench(&pre, &post).unwrap();
        for m in 0..=3 {
            let t = q.hopping_correlator(m, 0.0).unwrap();
            assert!((t - ground_hopping(&pre, m)).abs() < 1e-12);
            if m > 0 {
                let p = q.pairing_correlator(m, 0.0).unwrap();
                assert!((p.re - ground_pairing(&pre, m)).abs() < 1e-12);
                assert_eq!(p.im, 0.0);
            }
        }
    }

    #[test]
    fn ground_correlators_reproduce_averages() {
        let s = sol(0.4, 0.5, 128);
        assert!((ground_hopping(&s, 0) - s.mf.u1).abs() < 1e-12);
        assert!((ground_hopping(&s, 1) - s.mf.u2).abs() < 1e-12);
        assert!((ground_pairing(&s, 1) - s.mf.u3).abs() < 1e-12);
    }

    #[test]
    fn block_matches_single_calls_bitwise() {
        let q = prepare_quench(&sol(0.0, 0.0, 64), &sol(2.0, 0.0, 64)).unwrap();
        for t in [0.0, 1.3, 7.9] {
            let b = q.correlator_block(3, t).unwrap();
            assert_eq!(b.hop.len(), 4);
            assert_eq!(b.pair.len(), 3);
            for m in 0..=3 {
                assert_eq!(b.hop[m], q.hopping_correlator(m, t).unwrap());
            }
            for m in 1..=3 {
                assert_eq!(b.pair[m - 1], q.pairing_correlator(m, t).unwrap());
            }
        }
        let one = q.correlator_block(1, 2.0).unwrap();
        assert_eq!(one.hop[1], q.hopping_correlator(1, 2.0).unwrap());
    }

    #[test]
    fn null_block_time_independent() {
        let s = sol(1.2, 0.0, 64);
        let q = prepare_quench(&s, &s).unwrap();
        let a = q.correlator_block(3, 0.0).unwrap();
        let b = q.correlator_block(3, 7.0).unwrap();
        assert_eq!(a.hop, b.hop);
        for (x, y) in a.pair.iter().zip(&b.pair) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn occupation_stays_in_unit_interval() {
        let q = prepare_quench(&sol(0.5, 2.0, 128), &sol(0.5, 0.0, 128)).unwrap();
        for k in 0..200 {
            let t0 = q.hopping_correlator(0, 0.25 * k as f64).unwrap();
            assert!((0.0..=1.0).contains(&t0));
        }
    }

    #[test]
    fn negative_time_rejected() {
        let s = sol(0.5, 0.0, 16);
        let q = prepare_quench(&s, &s).unwrap();
        assert!(q.hopping_correlator(1, -1.0).is_err());
        assert!(q.pairing_correlator(0, 1.0).is_err());
    }

    #[test]
    fn velocity_without_pairing_peaks_at_half_pi() {
        // Υ₃ = (1 − Δ)/4 removes B_q entirely, leaving ε = |hop·cos q + shift|.
        let params = ModelParams::unit(0.6, 0.0, 400).unwrap();
        let mf = MeanFieldParams::new(0.5, -0.3, 0.1);
        let gm = crate::meanfield::GapMap::new(&params).unwrap();
        let s = MeanFieldSolution {
            params,
            mf,
            modes: gm.modes(&mf),
            residual: 0.0,
            iterations: 0,
            restarts_used: 0,
        };
        let (v, q) = group_velocity_max(&s).unwrap();
        let hop = 0.8 + 0.6;
        let expect = s.modes.iter().map(|m| (hop * m.q.sin()).abs()).fold(0.0, f64::max);
        assert!((v - expect).abs() < 1e-12);
        assert!((q.abs() - std::f64::consts::FRAC_PI_2).abs() <= std::f64::consts::PI / 400.0);
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let s = sol(1.0, 0.0, 800);
        let eps = |q: f64| crate::model::mode_data(&s.params, &s.mf, q).eps_q;
        let dq = 1e-6;
        for md in s.modes.iter().step_by(7) {
            let fd = (eps(md.q + dq) - eps(md.q - dq)) / (2.0 * dq);
            let an = mode_velocity(&s, md.q).unwrap();
            assert!(
                (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
                "q={} fd={fd} an={an}",
                md.q
            );
        }
    }

    #[test]
    fn suppression_time_formula() {
        assert_eq!(predicted_suppression_time(100, 1.0).unwrap(), 50.0);
        assert_eq!(
            predicted_suppression_time(200, 1.7).unwrap(),
            2.0 * predicted_suppression_time(100, 1.7).unwrap()
        );
        assert!(predicted_suppression_time(100, 0.0).is_err());
    }
}
