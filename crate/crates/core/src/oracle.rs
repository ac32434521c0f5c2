//! Exact diagonalization of small periodic chains, reduced two-site states
//! and a discord evaluated by explicit projector algebra on arbitrary 4×4
//! density matrices.
//!
//! Basis convention: site `l` is bit `N−1−l` of the basis index, bit clear
//! means spin up. For two sites `(i, j)` the reduced index is `2·bᵢ + bⱼ`,
//! giving the order `↑↑, ↑↓, ↓↑, ↓↓` used elsewhere in the crate.
//!
//! The Hamiltonian conserves the parity of the number of up spins, so it is
//! stored and diagonalized as two real symmetric blocks.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{maximize_on_sphere, shannon_bits, MeasurementBasis, OptimizerOptions};
use crate::model::ModelParams;
use crate::par;

pub const MAX_SITES: usize = 14;
/// Tolerance used when validating dense density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Nearest-neighbour couplings `Σ (jx SˣSˣ + jy SʸSʸ + jz SᶻSᶻ) − h Σ Sᶻ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCouplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub field: f64,
    pub n_sites: usize,
    pub periodic: bool,
}

impl ChainCouplings {
    /// Periodic chain for `J(Δ SˣSˣ + SʸSʸ + SᶻSᶻ) − h Sᶻ`.
    pub fn from_model(p: &ModelParams) -> Self {
        Self {
            jx: p.coupling_j * p.anisotropy,
            jy: p.coupling_j,
            jz: p.coupling_j,
            field: p.field,
            n_sites: p.n_sites,
            periodic: true,
        }
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut b: Vec<(usize, usize)> = (0..n - 1).map(|l| (l, l + 1)).collect();
        if self.periodic {
            b.push((n - 1, 0));
        }
        b
    }

    fn validate(&self) -> Result<()> {
        if self.n_sites > MAX_SITES {
            return Err(Error::Resource(format!(
                "exact diagonalization limited to {MAX_SITES} sites, got {}",
                self.n_sites
            )));
        }
        let min = if self.periodic { 3 } else { 2 };
        if self.n_sites < min {
            return Err(Error::invalid(format!("chain needs at least {min} sites")));
        }
        if ![self.jx, self.jy, self.jz, self.field].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("couplings must be finite"));
        }
        Ok(())
    }

    fn site_bit(&self, l: usize) -> usize {
        1 << (self.n_sites - 1 - l)
    }

    /// Number of up spins modulo 2 for a basis index.
    pub fn parity(&self, idx: usize) -> usize {
        (self.n_sites - idx.count_ones() as usize) % 2
    }

    /// Nonzero matrix elements of column `idx` as `(row, value)` pairs.
    pub fn column(&self, idx: usize) -> Vec<(usize, f64)> {
        let sz = |l: usize| if idx & self.site_bit(l) == 0 { 0.5 } else { -0.5 };
        let mut diag = -self.field * (0..self.n_sites).map(sz).sum::<f64>();
        let mut out = Vec::new();
        for (a, b) in self.bonds() {
            diag += self.jz * sz(a) * sz(b);
            let flipped = idx ^ self.site_bit(a) ^ self.site_bit(b);
            let amp = if sz(a) == sz(b) {
                (self.jx - self.jy) / 4.0
            } else {
                (self.jx + self.jy) / 4.0
            };
            if amp != 0.0 {
                out.push((flipped, amp));
            }
        }
        out.push((idx, diag));
        out
    }
}

/// One parity block of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct Sector {
    pub parity: usize,
    /// Global basis indices, ascending.
    pub basis: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// Many-body Hamiltonian as two real symmetric parity blocks.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub couplings: ChainCouplings,
    pub dim: usize,
    pub sectors: [Sector; 2],
}

pub fn build_hamiltonian(c: &ChainCouplings) -> Result<DenseOperator> {
    c.validate()?;
    let dim = 1usize << c.n_sites;
    let mut position = vec![0usize; dim];
    let mut bases = [Vec::new(), Vec::new()];
    for (idx, slot) in position.iter_mut().enumerate() {
        let p = c.parity(idx);
        *slot = bases[p].len();
        bases[p].push(idx);
    }
    let sectors = [0, 1].map(|p| {
        let basis = std::mem::take(&mut bases[p]);
        let mut matrix = DMatrix::zeros(basis.len(), basis.len());
        for (col, &idx) in basis.iter().enumerate() {
            for (row, v) in c.column(idx) {
                matrix[(position[row], col)] += v;
            }
        }
        Sector {
            parity: p,
            basis,
            matrix,
        }
    });
    Ok(DenseOperator {
        couplings: *c,
        dim,
        sectors,
    })
}

pub fn build_model_hamiltonian(p: &ModelParams) -> Result<DenseOperator> {
    build_hamiltonian(&ChainCouplings::from_model(p))
}

impl DenseOperator {
    /// Full `2^N × 2^N` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for s in &self.sectors {
            for (i, &a) in s.basis.iter().enumerate() {
                for (j, &b) in s.basis.iter().enumerate() {
                    m[(a, b)] = s.matrix[(i, j)];
                }
            }
        }
        m
    }

    pub fn apply(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for s in &self.sectors {
            for (i, &a) in s.basis.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &b) in s.basis.iter().enumerate() {
                    acc += psi[b] * s.matrix[(i, j)];
                }
                out[a] = acc;
            }
        }
        out
    }
}

/// Normalized many-body state.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub amplitudes: DVector<Complex64>,
}

impl DenseState {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 4 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("state dimension {dim} is not 2^N with N >= 2")));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Product state from per-site spins (`true` = up).
    pub fn product(up: &[bool]) -> Result<Self> {
        let n = up.len();
        let idx = up
            .iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .fold(0usize, |acc, (l, _)| acc | 1 << (n - 1 - l));
        let mut v = DVector::zeros(1 << n);
        v[idx] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }
}

#[derive(Debug, Clone)]
struct SectorSpectrum {
    basis: Vec<usize>,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

/// Eigendecomposition of both parity blocks.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    sectors: Vec<SectorSpectrum>,
}

/// Energies closer than this are treated as degenerate when picking a ground state.
const DEGENERACY_TOL: f64 = 1e-10;

impl Spectrum {
    pub fn of(op: &DenseOperator) -> Self {
        let sectors = par::map_slice(&op.sectors, |s| {
            let eig = SymmetricEigen::new(s.matrix.clone());
            SectorSpectrum {
                basis: s.basis.clone(),
                energies: eig.eigenvalues,
                vectors: eig.eigenvectors,
            }
        });
        Self { dim: op.dim, sectors }
    }

    fn sector_ground(&self, p: usize) -> (f64, usize) {
        let e = &self.sectors[p].energies;
        let k = e.imin();
        (e[k], k)
    }

    /// Lowest energy in the given parity sector and its eigenstate.
    pub fn ground_state_in_sector(&self, parity: usize) -> Result<(f64, DenseState)> {
        if parity > 1 {
            return Err(Error::invalid("parity must be 0 or 1"));
        }
        let (e, k) = self.sector_ground(parity);
        let s = &self.sectors[parity];
        let mut v = DVector::zeros(self.dim);
        for (i, &idx) in s.basis.iter().enumerate() {
            v[idx] = Complex64::new(s.vectors[(i, k)], 0.0);
        }
        let norm = v.norm();
        Ok((e, DenseState::new(v / Complex64::new(norm, 0.0))?))
    }

    /// Global ground state; an exact tie between sectors goes to even parity.
    pub fn ground_state(&self) -> Result<(f64, DenseState, usize)> {
        let (e0, _) = self.sector_ground(0);
        let (e1, _) = self.sector_ground(1);
        let parity = if e1 < e0 - DEGENERACY_TOL { 1 } else { 0 };
        if (e0 - e1).abs() <= DEGENERACY_TOL {
            log::debug!("ground state degenerate across parity sectors; using even parity");
        }
        let (e, st) = self.ground_state_in_sector(parity)?;
        Ok((e, st, parity))
    }

    pub fn energy(&self, state: &DenseState) -> f64 {
        let mut acc = 0.0;
        for s in &self.sectors {
            let (re, im) = self.project(s, state);
            for k in 0..s.energies.len() {
                acc += s.energies[k] * (re[k] * re[k] + im[k] * im[k]);
            }
        }
        acc
    }

    fn project(&self, s: &SectorSpectrum, state: &DenseState) -> (DVector<f64>, DVector<f64>) {
        let re = DVector::from_iterator(s.basis.len(), s.basis.iter().map(|&i| state.amplitudes[i].re));
        let im = DVector::from_iterator(s.basis.len(), s.basis.iter().map(|&i| state.amplitudes[i].im));
        (s.vectors.tr_mul(&re), s.vectors.tr_mul(&im))
    }

    /// `e^{−iHt}|ψ⟩` through the eigenbasis.
    pub fn evolve(&self, state: &DenseState, t: f64) -> Result<DenseState> {
        if state.amplitudes.len() != self.dim {
            return Err(Error::invalid("state and Hamiltonian dimensions differ"));
        }
        let mut out = DVector::zeros(self.dim);
        for s in &self.sectors {
            let (re, im) = self.project(s, state);
            let mut cr = DVector::zeros(re.len());
            let mut ci = DVector::zeros(re.len());
            for k in 0..re.len() {
                let (sn, cs) = (s.energies[k] * t).sin_cos();
                // (re + i im)(cos − i sin)
                cr[k] = re[k] * cs + im[k] * sn;
                ci[k] = im[k] * cs - re[k] * sn;
            }
            let vr = &s.vectors * cr;
            let vi = &s.vectors * ci;
            for (i, &idx) in s.basis.iter().enumerate() {
                out[idx] = Complex64::new(vr[i], vi[i]);
            }
        }
        let norm = out.norm();
        DenseState::new(out / Complex64::new(norm, 0.0))
    }
}

/// `e^{−iHt}|ψ⟩`, diagonalizing `ham` on the spot.
pub fn ed_evolve(state: &DenseState, ham: &DenseOperator, t: f64) -> Result<DenseState> {
    Spectrum::of(ham).evolve(state, t)
}

/// Reduced density matrix of sites `i` and `(i + m) mod N`.
pub fn reduced_two_site(state: &DenseState, i: usize, m: usize) -> Result<Matrix4<Complex64>> {
    let n = state.n_sites();
    let j = (i + m) % n;
    if i >= n || m == 0 || j == i {
        return Err(Error::invalid(format!("bad site pair i={i}, m={m} for N={n}")));
    }
    let bi = 1usize << (n - 1 - i);
    let bj = 1usize << (n - 1 - j);
    let local = |a: usize| (if a & 2 != 0 { bi } else { 0 }) | (if a & 1 != 0 { bj } else { 0 });
    let psi = &state.amplitudes;
    let mut rho = Matrix4::zeros();
    for rest in 0..psi.len() {
        if rest & (bi | bj) != 0 {
            continue;
        }
        for a in 0..4 {
            let x = psi[rest | local(a)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..4 {
                rho[(a, b)] += x * psi[rest | local(b)].conj();
            }
        }
    }
    Ok(rho)
}

/// Largest modulus outside the diagonal and anti-diagonal.
pub fn off_x_leakage(rho: &Matrix4<Complex64>) -> f64 {
    let mut m: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if a != b && a + b != 3 {
                m = m.max(rho[(a, b)].norm());
            }
        }
    }
    m
}

/// Mutual information, classical correlation and discord of an arbitrary
/// two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericMeasures {
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub discord: f64,
    pub argmax_basis: MeasurementBasis,
}

fn hermitian_eigenvalues4(rho: &Matrix4<Complex64>) -> [f64; 4] {
    let e = SymmetricEigen::new(*rho).eigenvalues;
    [e[0], e[1], e[2], e[3]]
}

fn entropy2(m: &Matrix2<Complex64>) -> f64 {
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    if tr <= 0.0 {
        return 0.0;
    }
    let mean = 0.5 * tr;
    let r = (0.5 * (m[(0, 0)].re - m[(1, 1)].re)).hypot(m[(0, 1)].norm());
    shannon_bits(&[(mean + r) / tr, (mean - r) / tr])
}

fn partial_trace_b(rho: &Matrix4<Complex64>) -> Matrix2<Complex64> {
    Matrix2::from_fn(|a, c| rho[(2 * a, 2 * c)] + rho[(2 * a + 1, 2 * c + 1)])
}

fn partial_trace_a(rho: &Matrix4<Complex64>) -> Matrix2<Complex64> {
    Matrix2::from_fn(|b, d| rho[(b, d)] + rho[(2 + b, 2 + d)])
}

/// Checks hermiticity, unit trace and positivity.
pub fn validate_density(rho: &Matrix4<Complex64>) -> Result<()> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Physicality("non-finite density matrix".into()));
    }
    if (rho - rho.adjoint()).iter().any(|z| z.norm() > DENSITY_TOL) {
        return Err(Error::Physicality("density matrix is not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::Physicality(format!("density matrix trace {tr}")));
    }
    let min = hermitian_eigenvalues4(rho).into_iter().fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(Error::Physicality(format!("density matrix eigenvalue {min:e}")));
    }
    Ok(())
}

/// `Σ_s p_s S(ρ_A|s)` for the projective measurement of the second qubit
/// along `(θ, φ)`, applying the projectors to the full 4×4 matrix.
pub fn projective_conditional_entropy(rho: &Matrix4<Complex64>, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let one = Matrix2::<Complex64>::identity();
    let n_sigma = Matrix2::new(
        Complex64::new(ct, 0.0),
        Complex64::new(st * cp, -st * sp),
        Complex64::new(st * cp, st * sp),
        Complex64::new(-ct, 0.0),
    );
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let proj = (one + n_sigma * Complex64::new(sign, 0.0)) * Complex64::new(0.5, 0.0);
        let big = one.kronecker(&proj);
        let post = big * rho * big;
        let cond = partial_trace_b(&post);
        let p = (cond[(0, 0)] + cond[(1, 1)]).re;
        if p > 0.0 {
            total += p * entropy2(&cond);
        }
    }
    total
}

/// Discord of an arbitrary two-qubit state, measuring the second qubit.
pub fn generic_discord(rho: &Matrix4<Complex64>, opts: &OptimizerOptions) -> Result<GenericMeasures> {
    validate_density(rho)?;
    opts.validate()?;
    let s_a = entropy2(&partial_trace_b(rho));
    let s_b = entropy2(&partial_trace_a(rho));
    let s_ab = shannon_bits(&hermitian_eigenvalues4(rho));
    let mutual_information = (s_a + s_b - s_ab).max(0.0);
    let (classical, argmax_basis) = maximize_on_sphere(|t, p| s_a - projective_conditional_entropy(rho, t, p), opts);
    let classical = classical.clamp(0.0, mutual_information);
    Ok(GenericMeasures {
        mutual_information,
        classical_correlation: classical,
        discord: mutual_information - classical,
        argmax_basis,
    })
}

/// Reduced states `ρ(0, m)` after evolving the ground state of `pre` under
/// `post`; `out[k][j]` is at `times[k]`, `distances[j]`.
pub fn ed_quench_states(
    pre: &ChainCouplings,
    post: &ChainCouplings,
    times: &[f64],
    distances: &[usize],
) -> Result<Vec<Vec<Matrix4<Complex64>>>> {
    if pre.n_sites != post.n_sites {
        return Err(Error::invalid("pre- and post-quench chains differ in size"));
    }
    let (_, psi0, _) = Spectrum::of(&build_hamiltonian(pre)?).ground_state()?;
    let evo = Spectrum::of(&build_hamiltonian(post)?);
    par::map_slice(times, |&t| {
        let psi = evo.evolve(&psi0, t)?;
        distances.iter().map(|&m| reduced_two_site(&psi, 0, m)).collect()
    })
    .into_iter()
    .collect()
}
