//! Pfaffians of complex antisymmetric matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Antisymmetry tolerance accepted by [`pfaffian`], relative to the largest entry.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Pfaffian by Parlett–Reid style elimination with partial pivoting: each
/// step reduces the leading 2×2 block to `[[0, a], [−a, 0]]` and applies the
/// rank-2 Schur update to the trailing block.
///
/// Odd dimensions give 0.
pub fn pfaffian(mat: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = mat.nrows();
    if mat.ncols() != n {
        return Err(Error::invalid("pfaffian needs a square matrix"));
    }
    let scale = mat.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    for i in 0..n {
        for j in i..n {
            if (mat[(i, j)] + mat[(j, i)]).norm() > ANTISYMMETRY_TOL * scale {
                return Err(Error::invalid(format!("matrix is not antisymmetric at ({i}, {j})")));
            }
        }
    }
    if n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let mut a = mat.clone();
    let mut pf = Complex64::new(1.0, 0.0);
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut pivot = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for r in k + 2..n {
            let v = a[(r, k)].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if pivot != k + 1 {
            a.swap_rows(k + 1, pivot);
            a.swap_columns(k + 1, pivot);
            pf = -pf;
        }
        if best == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let head = a[(k, k + 1)];
        pf *= head;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|c| a[(k, c)] / head).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|r| a[(r, k + 1)]).collect();
            for (ri, r) in (k + 2..n).enumerate() {
                for (ci, c) in (k + 2..n).enumerate() {
                    a[(r, c)] += tau[ri] * col[ci] - col[ri] * tau[ci];
                }
            }
        }
    }
    Ok(pf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = -z;
            }
        }
        m
    }

    #[test]
    fn two_by_two() {
        let a = c(0.3, -1.2);
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), a, -a, c(0.0, 0.0)]);
        assert_eq!(pfaffian(&m).unwrap(), a);
    }

    #[test]
    fn four_by_four_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_antisymmetric(4, &mut rng);
        let expect = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
        assert!((pfaffian(&m).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn odd_dimension_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_antisymmetric(5, &mut rng);
        assert_eq!(pfaffian(&m).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn empty_matrix_is_one() {
        assert_eq!(pfaffian(&DMatrix::zeros(0, 0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn rejects_symmetric_input() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(pfaffian(&m).is_err());
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 6, 8, 10] {
            for _ in 0..10 {
                let m = random_antisymmetric(n, &mut rng);
                let pf = pfaffian(&m).unwrap();
                let det = m.clone().determinant();
                assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1e-300), "n={n}");
            }
        }
    }

    #[test]
    fn singular_matrix_gives_zero() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(-1.0, 0.0);
        assert_eq!(pfaffian(&m).unwrap(), c(0.0, 0.0));
    }
}
