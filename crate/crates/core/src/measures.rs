//! Concurrence, mutual information, classical correlation and discord of a
//! two-spin X-state. All entropies are in bits.
//!
//! The measured spin is the second one (`i+m`). A projective measurement
//! along `n = (sinθ cosφ, sinθ sinφ, cosθ)` with outcome `s = ±1` leaves the
//! first spin with Bloch vector
//!
//! ```text
//! r = (s c₁ sinθ cosφ, s c₂ sinθ sinφ, a_z + s c₃ cosθ) / (1 + s c₄ cosθ)
//! ```
//!
//! where `c₁ = 2(|Z| + |f|)`, `c₂ = 2(|Z| − |f|)` are the `xx`, `yy`
//! correlators, `c₃ = ⟨σᶻσᶻ⟩`, `c₄ = ⟨σᶻ⟩` of the measured spin and `a_z`
//! that of the other one (equal to `c₄` in a translation-invariant chain).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::TwoSiteState;
use crate::par;

/// Negative discord below this magnitude is rounding noise and is clamped silently.
pub const DISCORD_NOISE: f64 = 1e-9;
/// Negative discord beyond this is reported as an internal inconsistency.
pub const DISCORD_FAILURE: f64 = 1e-6;

/// Pauli correlators of a phase-normalized X-state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `⟨σᶻ⟩` of the measured spin.
    pub c4: f64,
    /// `⟨σᶻ⟩` of the unmeasured spin.
    pub a_z: f64,
}

impl XStateCoefficients {
    pub fn from_state(s: &TwoSiteState) -> Self {
        let (z, f) = (s.z.norm(), s.f.norm());
        Self {
            c1: 2.0 * (z + f),
            c2: 2.0 * (z - f),
            c3: s.x_plus + s.x_minus - s.y_plus - s.y_minus,
            c4: s.x_plus - s.x_minus - s.y_plus + s.y_minus,
            a_z: s.x_plus - s.x_minus + s.y_plus - s.y_minus,
        }
    }
}

/// Measurement direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::invalid(format!(
                "basis angles out of range: theta={theta}, phi={phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Canonical angles of an arbitrary direction `(θ, φ) ∈ ℝ²`.
    pub fn canonical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (x, y, z) = (st * cp, st * sp, ct);
        let theta = z.clamp(-1.0, 1.0).acos();
        let mut phi = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        Self { theta, phi }
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Grid and refinement settings of the measurement optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub n_theta: usize,
    pub n_phi: usize,
    pub refine_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            n_theta: 65,
            n_phi: 129,
            refine_tol: 1e-7,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 33 || self.n_phi < 65 {
            return Err(Error::invalid(format!(
                "optimizer grid must be at least 33x65, got {}x{}",
                self.n_theta, self.n_phi
            )));
        }
        if !(self.refine_tol.is_finite() && self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMeasures {
    pub concurrence: f64,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub discord: f64,
    pub argmax_basis: MeasurementBasis,
}

/// `−Σ λ log₂ λ` with `0 log 0 = 0`; tiny negative eigenvalues count as 0.
pub fn shannon_bits(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Von Neumann entropy of a qubit with Bloch-vector length `r`.
pub fn qubit_entropy(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    shannon_bits(&[(1.0 + r) / 2.0, (1.0 - r) / 2.0])
}

pub fn concurrence(s: &TwoSiteState) -> f64 {
    let l1 = 2.0 * (s.z.norm() - (s.x_plus * s.x_minus).max(0.0).sqrt());
    let l2 = 2.0 * (s.f.norm() - (s.y_plus * s.y_minus).max(0.0).sqrt());
    0.0f64.max(l1).max(l2)
}

pub fn xstate_eigenvalues(s: &TwoSiteState) -> [f64; 4] {
    s.eigenvalues()
}

pub fn mutual_information(s: &TwoSiteState) -> f64 {
    let c = XStateCoefficients::from_state(s);
    let joint = shannon_bits(&xstate_eigenvalues(s));
    (qubit_entropy(c.a_z.abs()) + qubit_entropy(c.c4.abs()) - joint).max(0.0)
}

/// `Σ_s p_s S(ρ_A|s)` after measuring the second spin along `basis`.
pub fn conditional_entropy(s: &TwoSiteState, basis: &MeasurementBasis) -> f64 {
    conditional_entropy_coeffs(&XStateCoefficients::from_state(s), basis.theta, basis.phi)
}

fn conditional_entropy_coeffs(c: &XStateCoefficients, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let den = 1.0 + sign * c.c4 * ct;
        let p = den / 2.0;
        if p <= 0.0 {
            continue;
        }
        let rx = sign * c.c1 * st * cp;
        let ry = sign * c.c2 * st * sp;
        let rz = c.a_z + sign * c.c3 * ct;
        let r = (rx * rx + ry * ry + rz * rz).sqrt() / den;
        total += p * qubit_entropy(r);
    }
    total
}

/// Maximizes `f(θ, φ)` over the sphere: full grid scan, then a Nelder–Mead
/// polish from the best grid point. Grid ties go to the smaller θ, then the
/// smaller φ.
pub fn maximize_on_sphere<F>(f: F, opts: &OptimizerOptions) -> (f64, MeasurementBasis)
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let dt = PI / (opts.n_theta - 1) as f64;
    let dp = 2.0 * PI / (opts.n_phi - 1) as f64;
    let rows = par::map_range(opts.n_theta, |i| {
        let theta = i as f64 * dt;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for j in 0..opts.n_phi {
            let v = f(theta, j as f64 * dp);
            if v > best.0 {
                best = (v, j);
            }
        }
        best
    });
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, &(v, j)) in rows.iter().enumerate() {
        if v > best.0 {
            best = (v, i, j);
        }
    }
    let start = [best.1 as f64 * dt, best.2 as f64 * dp];
    let (x, neg) = nelder_mead(|x| -f(x[0], x[1]), start, [dt, dp], opts.refine_tol);
    if -neg > best.0 {
        (-neg, MeasurementBasis::canonical(x[0], x[1]))
    } else {
        (
            best.0,
            MeasurementBasis {
                theta: start[0],
                phi: start[1],
            },
        )
    }
}

/// Minimal 2-D Nelder–Mead. Stops when the simplex shrinks below `tol` in
/// both extent and value spread.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2], tol: f64) -> ([f64; 2], f64) {
    const MAX_ITER: usize = 2000;
    let mut pts = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut vals = pts.map(&f);
    for _ in 0..MAX_ITER {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let [b, m, w] = idx;
        let extent = pts
            .iter()
            .map(|p| (p[0] - pts[b][0]).abs().max((p[1] - pts[b][1]).abs()))
            .fold(0.0, f64::max);
        if extent < tol && vals[w] - vals[b] < tol {
            break;
        }
        let c = [(pts[b][0] + pts[m][0]) / 2.0, (pts[b][1] + pts[m][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[w][0] - c[0]), c[1] + t * (pts[w][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[b] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                (pts[w], vals[w]) = (xe, fe);
            } else {
                (pts[w], vals[w]) = (xr, fr);
            }
        } else if fr < vals[m] {
            (pts[w], vals[w]) = (xr, fr);
        } else {
            let (xc, fc) = if fr < vals[w] {
                let x = along(-0.5);
                (x, f(x))
            } else {
                let x = along(0.5);
                (x, f(x))
            };
            if fc < vals[w].min(fr) {
                (pts[w], vals[w]) = (xc, fc);
            } else {
                for k in [m, w] {
                    pts[k] = [
                        pts[b][0] + 0.5 * (pts[k][0] - pts[b][0]),
                        pts[b][1] + 0.5 * (pts[k][1] - pts[b][1]),
                    ];
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let b = (0..3)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("three points");
    (pts[b], vals[b])
}

/// `max_basis [S(ρ_A) − conditional entropy]` and the maximizing basis.
pub fn classical_correlation(s: &TwoSiteState, opts: &OptimizerOptions) -> Result<(f64, MeasurementBasis)> {
    opts.validate()?;
    let c = XStateCoefficients::from_state(s);
    let s_a = qubit_entropy(c.a_z.abs());
    let (v, basis) = maximize_on_sphere(|t, p| s_a - conditional_entropy_coeffs(&c, t, p), opts);
    Ok((v.max(0.0), basis))
}

pub fn quantum_discord(s: &TwoSiteState, opts: &OptimizerOptions) -> Result<CorrelationMeasures> {
    let mutual_information = mutual_information(s);
    let (mut classical, argmax_basis) = classical_correlation(s, opts)?;
    let mut discord = mutual_information - classical;
    if discord < 0.0 {
        if discord < -DISCORD_FAILURE {
            return Err(Error::Consistency(format!(
                "classical correlation {classical} exceeds mutual information {mutual_information}"
            )));
        }
        if discord < -DISCORD_NOISE {
            log::warn!("clamping negative discord {discord:e}");
        }
        discord = 0.0;
        classical = mutual_information;
    }
    let out = CorrelationMeasures {
        concurrence: concurrence(s),
        mutual_information,
        classical_correlation: classical,
        discord,
        argmax_basis,
    };
    if ![
        out.concurrence,
        out.mutual_information,
        out.classical_correlation,
        out.discord,
    ]
    .iter()
    .all(|v| v.is_finite())
    {
        return Err(Error::Consistency("non-finite correlation measure".into()));
    }
    Ok(out)
}
