//! Hermitian eigendecomposition via cyclic Jacobi with complex rotations.
//!
//! Matrices here never exceed dimension 2^11, so Jacobi's simplicity wins
//! over a tridiagonalizing solver.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::cmatrix::{czero, CMatrix};

/// Sorted eigenvalues (ascending) with eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// Rebuilds sum_i lambda_i v_i v_i^dagger; used by reconstruction tests.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.values.len();
        CMatrix::from_fn(n, |r, c| {
            let mut acc = czero();
            for (i, lam) in self.values.iter().enumerate() {
                acc += self.vectors[(r, i)]
                    * self.vectors[(c, i)].conj()
                    * Complex::new(*lam, T::zero());
            }
            acc
        })
    }
}

fn offdiag_sq<T: Scalar>(a: &CMatrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for r in 0..n {
        for c in (r + 1)..n {
            s += a[(r, c)].norm_sqr();
        }
    }
    s
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input must be Hermitian up to a defect of 1e-8 relative to its scale;
/// the Hermitian part is diagonalized.
pub fn eigh<T: Scalar>(m: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = m.dim();
    let scale = m.max_abs();
    if m.hermiticity_defect() > T::lit(1e-8) * scale.max(T::one()) {
        return Err(Error::InvalidParam(format!(
            "eigh requires a Hermitian matrix (defect {:e})",
            m.hermiticity_defect()
        )));
    }
    let mut a = m.clone();
    a.hermitize();
    let mut v = CMatrix::identity(n);
    if n == 1 {
        return Ok(EigenDecomposition {
            values: vec![a[(0, 0)].re],
            vectors: v,
        });
    }
    if scale == T::zero() {
        return Ok(EigenDecomposition {
            values: vec![T::zero(); n],
            vectors: v,
        });
    }

    // tolerance relative to the matrix scale, so near-zero matrices (e.g.
    // differences of close states) still resolve their spectrum
    let tol = T::eig_tol() * scale;
    let rot_skip = tol * T::lit(1e-2) / T::of_usize(n);
    let max_sweeps = 64;
    for _sweep in 0..max_sweeps {
        if offdiag_sq(&a).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= rot_skip {
                    continue;
                }
                // Complex rotation zeroing a[(p,q)]: phase removal followed by
                // the classic real Jacobi angle.
                let phase = apq / Complex::new(mag, T::zero());
                let tau = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * mag);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let cth = T::one() / (T::one() + t * t).sqrt();
                let sth = t * cth;
                let cc = Complex::new(cth, T::zero());
                let sp = phase * Complex::new(sth, T::zero()); // s * e^{i phi}
                let spc = sp.conj();

                // A <- U^dagger A U with U = [[c, s e^{i phi}], [-s e^{-i phi}, c]]
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * cc - arq * spc;
                    a[(r, q)] = arp * sp + arq * cc;
                    a[(p, r)] = a[(r, p)].conj();
                    a[(q, r)] = a[(r, q)].conj();
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                a[(p, p)] = Complex::new(app - t * mag, T::zero());
                a[(q, q)] = Complex::new(aqq + t * mag, T::zero());
                a[(p, q)] = czero();
                a[(q, p)] = czero();

                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * cc - vrq * spc;
                    v[(r, q)] = vrp * sp + vrq * cc;
                }
            }
        }
    }
    if offdiag_sq(&a).sqrt() > tol * T::lit(10.0) {
        return Err(Error::NoConvergence(format!(
            "Jacobi eigensolver: residual {:e} after {} sweeps",
            offdiag_sq(&a).sqrt(),
            max_sweeps
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only.
pub fn eigvalsh<T: Scalar>(m: &CMatrix<T>) -> Result<Vec<T>> {
    Ok(eigh(m)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::cmatrix::c;

    #[test]
    fn diagonalizes_pauli_x() {
        let d = eigh(&CMatrix::<f64>::pauli(0)).unwrap();
        assert!((d.values[0] + 1.0).abs() < 1e-12);
        assert!((d.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructs_random_hermitian() {
        // Deterministic pseudo-random Hermitian at the largest dimension the
        // reconstruction guarantee covers.
        let n = 32;
        let mut seed = 0x243f6a88u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::<f64>::zeros(n);
        for r in 0..n {
            for col in r..n {
                let e = if r == col {
                    c(next(), 0.0)
                } else {
                    c(next(), next())
                };
                m[(r, col)] = e;
                m[(col, r)] = e.conj();
            }
        }
        let d = eigh(&m).unwrap();
        assert!(d.reconstruct().max_abs_diff(&m) < 1e-10);
        // eigenvalues sorted
        for w in d.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(eigh(&m).is_err());
    }
}
