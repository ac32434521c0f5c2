//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use xxz_quench::gaussian::TwoSiteState;
use xxz_quench::measures::{conditional_entropy, qubit_entropy, MeasurementBasis, XStateCoefficients};
use xxz_quench::par;
use xxz_quench::quench::CorrelatorBlock;
use xxz_quench::MeanFieldSolution;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real-space Bogoliubov–de Gennes matrix of the mean-field Hamiltonian in
/// the basis `(a_0 … a_{N−1}, a†_0 … a†_{N−1})`, antiperiodic wrap.
pub fn bdg_matrix(sol: &MeanFieldSolution) -> DMatrix<f64> {
    let p = sol.params;
    let (u1, u2, u3) = (sol.mf.u1, sol.mf.u2, sol.mf.u3);
    let j = p.coupling_j;
    let hop = j * ((p.anisotropy + 1.0) / 4.0 - u2);
    let pair = j * ((p.anisotropy - 1.0) / 4.0 + u3);
    let mu = j * (2.0 * u1 - 1.0) - p.field;
    let n = p.n_sites;
    let mut h = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    for l in 0..n {
        h[(l, l)] = mu;
        let r = (l + 1) % n;
        let sign = if r == 0 { -1.0 } else { 1.0 };
        h[(l, r)] += sign * hop;
        h[(r, l)] += sign * hop;
        d[(l, r)] += sign * pair;
        d[(r, l)] -= sign * pair;
    }
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&h);
    big.view_mut((0, n), (n, n)).copy_from(&d);
    big.view_mut((n, 0), (n, n)).copy_from(&(-&d));
    big.view_mut((n, n), (n, n)).copy_from(&(-&h));
    big
}

/// `⟨Ψ Ψ†⟩` of the BdG ground state of `pre`, evolved for time `t` under `post`.
pub struct BdgEvolution {
    n: usize,
    c0: DMatrix<Complex64>,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl BdgEvolution {
    pub fn new(pre: &MeanFieldSolution, post: &MeanFieldSolution) -> Self {
        let n = pre.params.n_sites;
        let e0 = SymmetricEigen::new(bdg_matrix(pre));
        let mut c0 = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for k in 0..2 * n {
            if e0.eigenvalues[k] > 0.0 {
                let v = e0.eigenvectors.column(k);
                c0 += v * v.transpose();
            }
        }
        let e1 = SymmetricEigen::new(bdg_matrix(post));
        Self {
            n,
            c0: c0.map(|x| Complex64::new(x, 0.0)),
            energies: e1.eigenvalues.iter().copied().collect(),
            vectors: e1.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn covariance(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
        ));
        let u = &self.vectors * phases * self.vectors.adjoint();
        &u * &self.c0 * u.adjoint()
    }

    /// `(⟨a†_l a_{l+m}⟩, ⟨a†_l a†_{l+m}⟩)` for sites without wrap.
    pub fn correlators(&self, t: f64, l: usize, m: usize) -> (Complex64, Complex64) {
        let c = self.covariance(t);
        let n = self.n;
        (c[(n + l, n + l + m)], c[(n + l, l + m)])
    }
}

/// Elementary fermion operator at a site.
#[derive(Debug, Clone, Copy)]
pub enum Op {
    Create(usize),
    Annihilate(usize),
}

fn contract(block: &CorrelatorBlock, x: Op, y: Op) -> Complex64 {
    let d = |l: usize, k: usize| k as isize - l as isize;
    match (x, y) {
        (Op::Create(l), Op::Create(k)) => block.pair_at(d(l, k)),
        (Op::Create(l), Op::Annihilate(k)) => Complex64::new(block.hop_at(d(l, k)), 0.0),
        (Op::Annihilate(l), Op::Create(k)) => {
            Complex64::new(if l == k { 1.0 } else { 0.0 } - block.hop_at(d(l, k)), 0.0)
        }
        (Op::Annihilate(l), Op::Annihilate(k)) => -block.pair_at(d(l, k)).conj(),
    }
}

/// Wick's theorem by exhaustive recursion over all pairings.
pub fn wick(block: &CorrelatorBlock, ops: &[Op]) -> Complex64 {
    if ops.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    if ops.len() % 2 == 1 {
        return ZERO;
    }
    let mut acc = ZERO;
    for k in 1..ops.len() {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let rest: Vec<Op> = ops[1..k].iter().chain(&ops[k + 1..]).copied().collect();
        acc += sign * contract(block, ops[0], ops[k]) * wick(block, &rest);
    }
    acc
}

/// `Z` and `f` by expanding every `1 − 2n_l` of the string.
pub fn string_by_enumeration(block: &CorrelatorBlock, m: usize) -> (Complex64, Complex64) {
    let inner = m - 1;
    let mut z = ZERO;
    let mut f = ZERO;
    for mask in 0..(1usize << inner) {
        let mut ops = vec![Op::Create(0)];
        let mut weight = 1.0;
        for l in 1..m {
            if mask & (1 << (l - 1)) != 0 {
                ops.push(Op::Create(l));
                ops.push(Op::Annihilate(l));
                weight *= -2.0;
            }
        }
        let mut oz = ops.clone();
        oz.push(Op::Annihilate(m));
        ops.push(Op::Create(m));
        z += weight * wick(block, &oz);
        f += weight * wick(block, &ops);
    }
    (z, f)
}

fn random_block<R: Rng>(rng: &mut R) -> [[Complex64; 2]; 2] {
    // w₁|v⟩⟨v| + w₂|v⊥⟩⟨v⊥| with a random unit vector v.
    let a: f64 = rng.random_range(0.0..PI / 2.0);
    let ph: f64 = rng.random_range(0.0..2.0 * PI);
    let w1: f64 = rng.random_range(0.0..1.0);
    let w2 = 1.0 - w1;
    let (s, c) = a.sin_cos();
    let off = Complex64::from_polar(s * c * (w1 - w2), ph);
    [
        [Complex64::new(w1 * c * c + w2 * s * s, 0.0), off.conj()],
        [off, Complex64::new(w1 * s * s + w2 * c * c, 0.0)],
    ]
}

/// Random valid X-state with complex coherences and unequal populations.
pub fn random_x_state<R: Rng>(rng: &mut R, m: usize) -> TwoSiteState {
    let outer_weight: f64 = rng.random_range(0.05..0.95);
    let o = random_block(rng);
    let i = random_block(rng);
    let w = outer_weight;
    let v = 1.0 - outer_weight;
    TwoSiteState::new(
        m,
        w * o[0][0].re,
        w * o[1][1].re,
        v * i[0][0].re,
        v * i[1][1].re,
        v * i[1][0],
        w * o[1][0],
    )
    .expect("constructed state is valid")
}

/// Classical correlation on a dense `(n_theta × n_phi)` grid, using the
/// antipodal symmetry to scan only `θ ≤ π/2`. Requires `n_theta` and
/// `n_phi` odd so that antipodes of grid points are grid points.
pub fn dense_grid_classical(s: &TwoSiteState, n_theta: usize, n_phi: usize) -> f64 {
    assert!(n_theta % 2 == 1 && n_phi % 2 == 1);
    let c = XStateCoefficients::from_state(s);
    let s_a = qubit_entropy(c.a_z.abs());
    let dt = PI / (n_theta - 1) as f64;
    let dp = 2.0 * PI / (n_phi - 1) as f64;
    let rows = par::map_range(n_theta / 2 + 1, |i| {
        let mut best = f64::NEG_INFINITY;
        for j in 0..n_phi {
            let b = MeasurementBasis {
                theta: i as f64 * dt,
                phi: j as f64 * dp,
            };
            best = best.max(s_a - conditional_entropy(s, &b));
        }
        best
    });
    rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_abs_diff(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
