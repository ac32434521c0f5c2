//! Two-site reduced density matrix from the correlator block.
//!
//! The state of spins `i` and `i+m` is an X-state in the basis
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (spin up ≡ occupied fermion):
//!
//! ```text
//!        ⎡ X⁺  0   0   f̄* ⎤
//!    ρ = ⎢ 0   Y⁺  Z*  0  ⎥
//!        ⎢ 0   Z   Y⁻  0  ⎥
//!        ⎣ f   0   0   X⁻ ⎦
//! ```
//!
//! with `Z = ⟨a†_i Π_{l=i}^{i+m−1}(1 − 2n_l) a_{i+m}⟩` and `f` the same string
//! closed by `a†_{i+m}`. The string is rewritten with Majorana operators,
//! `1 − 2n_l = −i γˣ_l γʸ_l`, and evaluated as one Pfaffian of the pairwise
//! contractions.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pfaffian::pfaffian;
use crate::quench::CorrelatorBlock;

/// Largest block-eigenvalue negativity that positivity repair absorbs.
pub const REPAIR_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Majorana covariance of the window `i..=i+m`.
///
/// Ordering is `γˣ_0, γʸ_0, γˣ_1, γʸ_1, …` with `γˣ = a + a†` and
/// `γʸ = i(a† − a)`. Entry `(j, k)` is `⟨γ_j γ_k⟩ − δ_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<Complex64>,
}

impl CovarianceMatrix {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || !n.is_multiple_of(2) {
            return Err(Error::invalid("covariance matrix must be square with even dimension"));
        }
        for i in 0..n {
            for j in i..n {
                if (entries[(i, j)] + entries[(j, i)]).norm() > 1e-12 {
                    return Err(Error::invalid("covariance matrix must be antisymmetric"));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Window covariance for sites `0..=m` of a translation-invariant block.
    pub fn window(block: &CorrelatorBlock, m: usize) -> Result<Self> {
        if m > block.m_max() {
            return Err(Error::invalid(format!(
                "block covers distances up to {}, need {m}",
                block.m_max()
            )));
        }
        let dim = 2 * (m + 1);
        let ops: Vec<FermionOp> = (0..=m)
            .flat_map(|l| [FermionOp::majorana_x(l, m), FermionOp::majorana_y(l, m)])
            .collect();
        let mut entries = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in j + 1..dim {
                let v = contraction(block, &ops[j], &ops[k]);
                entries[(j, k)] = v;
                entries[(k, j)] = -v;
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `⟨γ_j γ_k⟩`, including the diagonal.
    fn two_point(&self, j: usize, k: usize) -> Complex64 {
        if j == k {
            ONE
        } else {
            self.entries[(j, k)]
        }
    }
}

/// Linear combination of `a_l` and `a†_l` over a window of sites.
#[derive(Debug, Clone)]
struct FermionOp {
    ann: Vec<Complex64>,
    cre: Vec<Complex64>,
}

impl FermionOp {
    fn zero(m: usize) -> Self {
        Self {
            ann: vec![ZERO; m + 1],
            cre: vec![ZERO; m + 1],
        }
    }

    fn majorana_x(l: usize, m: usize) -> Self {
        let mut op = Self::zero(m);
        op.ann[l] = ONE;
        op.cre[l] = ONE;
        op
    }

    fn majorana_y(l: usize, m: usize) -> Self {
        let mut op = Self::zero(m);
        op.ann[l] = -I;
        op.cre[l] = I;
        op
    }
}

/// `⟨x y⟩` for two linear combinations in a translation-invariant Gaussian state.
fn contraction(block: &CorrelatorBlock, x: &FermionOp, y: &FermionOp) -> Complex64 {
    let mut acc = ZERO;
    let n = x.ann.len();
    for l in 0..n {
        for k in 0..n {
            let d = k as isize - l as isize;
            let t = block.hop_at(d);
            let p = block.pair_at(d);
            // ⟨a†_l a†_k⟩ = P_{k−l}, ⟨a†_l a_k⟩ = T_{k−l},
            // ⟨a_l a†_k⟩ = δ − T_{l−k}, ⟨a_l a_k⟩ = −P*_{k−l}.
            acc += x.cre[l] * y.cre[k] * p;
            acc += x.cre[l] * y.ann[k] * t;
            acc += x.ann[l] * y.cre[k] * (if l == k { ONE } else { ZERO } - t);
            acc += x.ann[l] * y.ann[k] * (-p.conj());
        }
    }
    acc
}

/// Majorana coefficients of `a†_l`, `a_l`: `a† = (γˣ − iγʸ)/2`, `a = (γˣ + iγʸ)/2`.
fn creation_in_majoranas(l: usize, dim: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[2 * l] = Complex64::new(0.5, 0.0);
    v[2 * l + 1] = Complex64::new(0.0, -0.5);
    v
}

fn annihilation_in_majoranas(l: usize, dim: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[2 * l] = Complex64::new(0.5, 0.0);
    v[2 * l + 1] = Complex64::new(0.0, 0.5);
    v
}

fn unit(j: usize, dim: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[j] = ONE;
    v
}

/// Expectation of an ordered product of Majorana linear combinations.
fn ordered_product(cov: &CovarianceMatrix, ops: &[Vec<Complex64>]) -> Result<Complex64> {
    let n = ops.len();
    let dim = cov.dim();
    let mut s = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let mut v = ZERO;
            for j in 0..dim {
                if ops[a][j] == ZERO {
                    continue;
                }
                for k in 0..dim {
                    if ops[b][k] != ZERO {
                        v += ops[a][j] * ops[b][k] * cov.two_point(j, k);
                    }
                }
            }
            s[(a, b)] = v;
            s[(b, a)] = -v;
        }
    }
    pfaffian(&s)
}

/// `(Z, f)` at distance `m` via the Pfaffian of the string contractions.
pub fn string_correlators_pfaffian(block: &CorrelatorBlock, m: usize) -> Result<(Complex64, Complex64)> {
    if m == 0 {
        return Err(Error::invalid("string correlators need m >= 1"));
    }
    let cov = CovarianceMatrix::window(block, m)?;
    let dim = cov.dim();
    let mut ops = Vec::with_capacity(2 * m);
    ops.push(creation_in_majoranas(0, dim));
    for l in 1..m {
        ops.push(unit(2 * l, dim));
        ops.push(unit(2 * l + 1, dim));
    }
    let prefactor = (-I).powu(m as u32 - 1);
    ops.push(annihilation_in_majoranas(m, dim));
    let z = prefactor * ordered_product(&cov, &ops)?;
    *ops.last_mut().expect("non-empty") = creation_in_majoranas(m, dim);
    let f = prefactor * ordered_product(&cov, &ops)?;
    Ok((z, f))
}

/// `(Z, f)` at distance `m`. For `m = 1` the string collapses to `(T_1, P_1)`.
pub fn string_correlators(block: &CorrelatorBlock, m: usize) -> Result<(Complex64, Complex64)> {
    match m {
        0 => Err(Error::invalid("string correlators need m >= 1")),
        _ if m > block.m_max() => Err(Error::invalid(format!(
            "block covers distances up to {}, need {m}",
            block.m_max()
        ))),
        1 => Ok((Complex64::new(block.hop[1], 0.0), block.pair[0])),
        _ => string_correlators_pfaffian(block, m),
    }
}

/// `(X⁺, Y⁺, Y⁻, X⁻)` from `⟨n_i n_{i+m}⟩ = T_0² − T_m² + |P_m|²` and `⟨n⟩ = T_0`.
pub fn occupation_pair(block: &CorrelatorBlock, m: usize) -> Result<(f64, f64, f64, f64)> {
    if m == 0 || m > block.m_max() {
        return Err(Error::invalid(format!(
            "occupation pair needs 1 <= m <= {}, got {m}",
            block.m_max()
        )));
    }
    let n = block.hop[0];
    let t = block.hop[m];
    let p = block.pair[m - 1];
    let x_plus = n * n - t * t + p.norm_sqr();
    let y = n - x_plus;
    let x_minus = 1.0 - 2.0 * n + x_plus;
    Ok((x_plus, y, y, x_minus))
}

/// Raw X-state entries before positivity repair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateEntries {
    pub x_plus: f64,
    pub x_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub z: Complex64,
    pub f: Complex64,
}

impl XStateEntries {
    /// Eigenvalues of the `{↑↑, ↓↓}` block, lower first.
    pub fn outer_block_eigenvalues(&self) -> (f64, f64) {
        block_eigenvalues(self.x_plus, self.x_minus, self.f.norm())
    }

    /// Eigenvalues of the `{↑↓, ↓↑}` block, lower first.
    pub fn inner_block_eigenvalues(&self) -> (f64, f64) {
        block_eigenvalues(self.y_plus, self.y_minus, self.z.norm())
    }

    pub fn trace(&self) -> f64 {
        self.x_plus + self.x_minus + self.y_plus + self.y_minus
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.outer_block_eigenvalues().0.min(self.inner_block_eigenvalues().0)
    }
}

fn block_eigenvalues(d1: f64, d2: f64, off: f64) -> (f64, f64) {
    let mean = 0.5 * (d1 + d2);
    let r = (0.5 * (d1 - d2)).hypot(off);
    (mean - r, mean + r)
}

/// Clamps the lower eigenvalue of `[[d1, c*], [c, d2]]` to zero when it is
/// slightly negative.
fn repair_block(d1: f64, d2: f64, off: Complex64) -> Result<(f64, f64, Complex64)> {
    let (lo, hi) = block_eigenvalues(d1, d2, off.norm());
    if lo < -REPAIR_TOL {
        return Err(Error::Physicality(format!(
            "block eigenvalue {lo:e} below -{REPAIR_TOL:e}"
        )));
    }
    if lo >= 0.0 {
        return Ok((d1, d2, off));
    }
    if hi <= 0.0 {
        return Ok((0.0, 0.0, ZERO));
    }
    // Keep only the upper eigenprojector: hi·(M − lo·1)/(hi − lo).
    let w = hi / (hi - lo);
    Ok(((d1 - lo) * w, (d2 - lo) * w, off * w))
}

/// Two-spin X-state at distance `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteState {
    pub m: usize,
    pub x_plus: f64,
    pub x_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    /// `⟨S⁺_i S⁻_{i+m}⟩`
    pub z: Complex64,
    /// `⟨S⁺_i S⁺_{i+m}⟩`
    pub f: Complex64,
    /// Entries before positivity repair.
    pub raw: XStateEntries,
}

impl TwoSiteState {
    /// Repairs and validates raw entries.
    pub fn from_entries(m: usize, raw: XStateEntries) -> Result<Self> {
        let finite = [
            raw.x_plus,
            raw.x_minus,
            raw.y_plus,
            raw.y_minus,
            raw.z.re,
            raw.z.im,
            raw.f.re,
            raw.f.im,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Physicality("non-finite X-state entry".into()));
        }
        let (xp, xm, f) = repair_block(raw.x_plus, raw.x_minus, raw.f)?;
        let (yp, ym, z) = repair_block(raw.y_plus, raw.y_minus, raw.z)?;
        let tr = xp + xm + yp + ym;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::Physicality(format!("non-positive trace {tr:e}")));
        }
        Ok(Self {
            m,
            x_plus: xp / tr,
            x_minus: xm / tr,
            y_plus: yp / tr,
            y_minus: ym / tr,
            z: z / tr,
            f: f / tr,
            raw,
        })
    }

    /// Builds a state whose entries are already physical (no repair expected).
    pub fn new(
        m: usize,
        x_plus: f64,
        x_minus: f64,
        y_plus: f64,
        y_minus: f64,
        z: Complex64,
        f: Complex64,
    ) -> Result<Self> {
        Self::from_entries(
            m,
            XStateEntries {
                x_plus,
                x_minus,
                y_plus,
                y_minus,
                z,
                f,
            },
        )
    }

    pub fn entries(&self) -> XStateEntries {
        XStateEntries {
            x_plus: self.x_plus,
            x_minus: self.x_minus,
            y_plus: self.y_plus,
            y_minus: self.y_minus,
            z: self.z,
            f: self.f,
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries().trace()
    }

    /// The four eigenvalues: outer block (lower, upper), inner block (lower, upper).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = self.entries();
        let (a, b) = e.outer_block_eigenvalues();
        let (c, d) = e.inner_block_eigenvalues();
        [a, b, c, d]
    }

    /// Local phase rotation making `Z` and `f` real and non-negative.
    pub fn phase_normalized(&self) -> Self {
        let mut s = *self;
        s.z = Complex64::new(self.z.norm(), 0.0);
        s.f = Complex64::new(self.f.norm(), 0.0);
        s
    }

    /// Dense 4×4 matrix in the `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` basis.
    pub fn density_matrix(&self) -> Matrix4<Complex64> {
        let r = |v: f64| Complex64::new(v, 0.0);
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = r(self.x_plus);
        rho[(1, 1)] = r(self.y_plus);
        rho[(2, 2)] = r(self.y_minus);
        rho[(3, 3)] = r(self.x_minus);
        rho[(1, 2)] = self.z.conj();
        rho[(2, 1)] = self.z;
        rho[(0, 3)] = self.f.conj();
        rho[(3, 0)] = self.f;
        rho
    }

    /// Reads the X-state entries of a dense 4×4 matrix. Returns the state and
    /// the largest modulus found outside the X pattern.
    pub fn from_density_matrix(m: usize, rho: &Matrix4<Complex64>) -> Result<(Self, f64)> {
        let mut leakage: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let on_x = i == j || i + j == 3;
                if !on_x {
                    leakage = leakage.max(rho[(i, j)].norm());
                }
            }
        }
        let st = Self::new(
            m,
            rho[(0, 0)].re,
            rho[(3, 3)].re,
            rho[(1, 1)].re,
            rho[(2, 2)].re,
            rho[(2, 1)],
            rho[(3, 0)],
        )?;
        Ok((st, leakage))
    }
}

/// Assembles and repairs the X-state at distance `m`.
pub fn two_site_state(block: &CorrelatorBlock, m: usize) -> Result<TwoSiteState> {
    let (x_plus, y_plus, y_minus, x_minus) = occupation_pair(block, m)?;
    let (z, f) = string_correlators(block, m)?;
    TwoSiteState::from_entries(
        m,
        XStateEntries {
            x_plus,
            x_minus,
            y_plus,
            y_minus,
            z,
            f,
        },
    )
}
