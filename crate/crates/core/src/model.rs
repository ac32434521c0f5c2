//! Hamiltonian point, momentum grid and the mean-field single-mode dispersion.
//!
//! After the Jordan-Wigner map and the mean-field decoupling each pair of
//! modes `(q, -q)` is governed by
//!
//! ```text
//! A_q = J((Δ+1)/2 − 2Υ₂) cos q + J(2Υ₁ − 1) − h
//! B_q = J(2Υ₃ + (Δ−1)/2) sin q
//! ε_q = sqrt(A_q² + B_q²),   θ_q = ½·atan2(−B_q, A_q)
//! ```
//!
//! Units: ħ = 1, energies in units of the caller's `J`, times in `1/J`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::meanfield::MeanFieldParams;

/// Quasiparticle energies at or below this (relative to `J + |h|`) are
/// treated as exactly gapless.
pub const GAPLESS_THRESHOLD: f64 = 1e-12;

/// One point of the rotated-frame XXZ Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub coupling_j: f64,
    pub anisotropy: f64,
    pub field: f64,
    pub n_sites: usize,
}

impl ModelParams {
    pub fn new(coupling_j: f64, anisotropy: f64, field: f64, n_sites: usize) -> Result<Self> {
        let p = Self {
            coupling_j,
            anisotropy,
            field,
            n_sites,
        };
        p.validate()?;
        Ok(p)
    }

    /// `J = 1` shorthand.
    pub fn unit(anisotropy: f64, field: f64, n_sites: usize) -> Result<Self> {
        Self::new(1.0, anisotropy, field, n_sites)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_j.is_finite() && self.anisotropy.is_finite() && self.field.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if self.coupling_j <= 0.0 {
            return Err(Error::invalid(format!(
                "coupling J must be positive, got {}",
                self.coupling_j
            )));
        }
        check_sites(self.n_sites)
    }

    /// Energy scale used for the gapless test.
    pub(crate) fn energy_scale(&self) -> f64 {
        self.coupling_j + self.field.abs()
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 4 || !n_sites.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n_sites must be even and at least 4, got {n_sites}"
        )));
    }
    Ok(())
}

/// Antiperiodic-sector momenta `±(2n−1)π/N`, `n = 1..N/2`, in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    modes: Vec<f64>,
}

impl MomentumGrid {
    /// All `N` momenta, ascending.
    pub fn modes(&self) -> &[f64] {
        &self.modes
    }

    /// The `q > 0` half, ascending.
    pub fn positive_modes(&self) -> &[f64] {
        &self.modes[self.modes.len() / 2..]
    }

    pub fn n_sites(&self) -> usize {
        self.modes.len()
    }
}

pub fn momentum_grid(n_sites: usize) -> Result<MomentumGrid> {
    check_sites(n_sites)?;
    let n = n_sites as f64;
    let positive: Vec<f64> = (1..=n_sites / 2).map(|k| (2 * k - 1) as f64 * PI / n).collect();
    let modes = positive
        .iter()
        .rev()
        .map(|&q| -q)
        .chain(positive.iter().copied())
        .collect();
    Ok(MomentumGrid { modes })
}

/// Bogoliubov data of a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub q: f64,
    pub a_q: f64,
    pub b_q: f64,
    pub eps_q: f64,
    pub theta_q: f64,
    /// `ε_q` vanished; `θ_q` was set to 0.
    pub gapless: bool,
}

/// Coefficients of `A_q = hop·cos q + shift` and `B_q = pair·sin q`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DispersionCoefficients {
    pub hop: f64,
    pub shift: f64,
    pub pair: f64,
}

impl DispersionCoefficients {
    pub fn new(params: &ModelParams, mf: &MeanFieldParams) -> Self {
        let j = params.coupling_j;
        let d = params.anisotropy;
        Self {
            hop: j * ((d + 1.0) / 2.0 - 2.0 * mf.u2),
            shift: j * (2.0 * mf.u1 - 1.0) - params.field,
            pair: j * (2.0 * mf.u3 + (d - 1.0) / 2.0),
        }
    }

    #[inline]
    pub fn mode(&self, q: f64, cos_q: f64, sin_q: f64, scale: f64) -> ModeData {
        let a_q = self.hop * cos_q + self.shift;
        let b_q = self.pair * sin_q;
        let eps_q = a_q.hypot(b_q);
        let gapless = eps_q <= GAPLESS_THRESHOLD * scale;
        let theta_q = if gapless { 0.0 } else { 0.5 * (-b_q).atan2(a_q) };
        ModeData {
            q,
            a_q,
            b_q,
            eps_q,
            theta_q,
            gapless,
        }
    }
}

pub fn mode_data(params: &ModelParams, mf: &MeanFieldParams, q: f64) -> ModeData {
    DispersionCoefficients::new(params, mf).mode(q, q.cos(), q.sin(), params.energy_scale())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_for_four_sites() {
        let g = momentum_grid(4).unwrap();
        let expect = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
        assert_eq!(g.modes(), &expect);
        assert_eq!(g.positive_modes(), &expect[2..]);
    }

    #[test]
    fn grid_avoids_zero_and_pi() {
        for n in (4..=202).step_by(2) {
            let g = momentum_grid(n).unwrap();
            assert_eq!(g.n_sites(), n);
            for &q in g.modes() {
                assert!(q != 0.0 && q.abs() < PI);
            }
        }
    }

    #[test]
    fn grid_for_800_sites() {
        let g = momentum_grid(800).unwrap();
        assert_eq!(g.positive_modes().len(), 400);
        assert_eq!(g.positive_modes()[0], PI / 800.0);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        for n in [0, 2, 3, 7, 101] {
            assert!(matches!(momentum_grid(n), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 0.0, 8).is_ok());
        assert!(ModelParams::new(0.0, 1.0, 0.0, 8).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 0.0, 8).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 9).is_err());
    }

    #[test]
    fn zero_momentum_has_no_pairing() {
        let p = ModelParams::unit(0.3, 0.7, 8).unwrap();
        let mf = MeanFieldParams::new(0.4, -0.2, 0.1);
        let m = mode_data(&p, &mf, 0.0);
        assert_eq!(m.b_q, 0.0);
        assert_eq!(m.eps_q, m.a_q.abs());
    }

    #[test]
    fn isotropic_zero_field_substitution() {
        let p = ModelParams::new(1.3, 1.0, 0.0, 8).unwrap();
        let (u2, u3) = (-0.31, 0.07);
        let mf = MeanFieldParams::new(0.5, u2, u3);
        for q in [0.1, 1.0, 2.5] {
            let m = mode_data(&p, &mf, q);
            assert!((m.a_q - 1.3 * (1.0 - 2.0 * u2) * q.cos()).abs() < 1e-15);
            assert!((m.b_q - 2.0 * 1.3 * u3 * q.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn fully_gapless_mode_is_flagged() {
        // A ≡ 0 and B ≡ 0 for Δ = 1, h = 0, Υ₂ = 1/2, Υ₃ = 0.
        let p = ModelParams::unit(1.0, 0.0, 8).unwrap();
        let m = mode_data(&p, &MeanFieldParams::new(0.5, 0.5, 0.0), 0.3);
        assert!(m.gapless);
        assert_eq!(m.theta_q, 0.0);
    }

    proptest! {
        #[test]
        fn dispersion_even_and_reconstructs(
            d in -0.95f64..3.0, h in 0.0f64..3.0,
            u1 in 0.0f64..1.0, u2 in -0.5f64..0.5, u3 in -0.5f64..0.5,
            q in 0.01f64..3.13,
        ) {
            let p = ModelParams::unit(d, h, 16).unwrap();
            let mf = MeanFieldParams::new(u1, u2, u3);
            let plus = mode_data(&p, &mf, q);
            let minus = mode_data(&p, &mf, -q);
            prop_assert!((plus.eps_q - minus.eps_q).abs() <= 1e-15 * plus.eps_q.max(1.0));
            prop_assert!(plus.eps_q >= 0.0);
            let e2 = plus.a_q * plus.a_q + plus.b_q * plus.b_q;
            prop_assert!((plus.eps_q * plus.eps_q - e2).abs() <= 1e-14 * e2.max(1e-300));
            if plus.eps_q > 1e-9 {
                let c = plus.eps_q * (2.0 * plus.theta_q).cos();
                let s = -plus.eps_q * (2.0 * plus.theta_q).sin();
                prop_assert!((c - plus.a_q).abs() <= 1e-12 * plus.eps_q);
                prop_assert!((s - plus.b_q).abs() <= 1e-12 * plus.eps_q);
            }
        }
    }
}
