use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::cmatrix::{czero, CMatrix};
use super::eigen::eigvalsh;

/// Hermiticity / trace tolerance for density-matrix validation.
fn state_tol<T: Scalar>() -> T {
    T::lit(1e-10)
}

/// Unit-trace positive-semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    mat: CMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(mat: CMatrix<T>) -> Result<Self> {
        let tol = state_tol::<T>();
        let defect = mat.hermiticity_defect();
        if defect > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian: defect {defect:e}"
            )));
        }
        let tr = mat.trace();
        if tr.im.abs() > tol || (tr.re - T::one()).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let evs = eigvalsh(&mat)?;
        if let Some(min) = evs.first() {
            if *min < -tol {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { mat })
    }

    /// Skips validation; for internal paths that construct states exactly.
    pub(crate) fn new_unchecked(mat: CMatrix<T>) -> Self {
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let f = Complex::new(T::one() / T::of_usize(dim), T::zero());
        Self {
            mat: CMatrix::identity(dim).scale(f),
        }
    }

    /// Pure state |psi><psi| from an amplitude vector (normalized here).
    pub fn from_pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm_sq = psi.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
        if norm_sq <= T::zero() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let inv = T::one() / norm_sq;
        let mat = CMatrix::from_fn(psi.len(), |r, c| {
            psi[r] * psi[c].conj() * Complex::new(inv, T::zero())
        });
        Ok(Self { mat })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn mat(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix<T> {
        self.mat
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        eigvalsh(&self.mat)
    }
}

/// Real 3-vector inside (or on) the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T> {
    pub rx: T,
    pub ry: T,
    pub rz: T,
}

impl<T: Scalar> BlochVector<T> {
    pub fn new(rx: T, ry: T, rz: T) -> Result<Self> {
        let v = Self { rx, ry, rz };
        if v.norm_sqr() > T::one() + T::lit(1e-10) {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {} exceeds 1",
                v.norm_sqr().sqrt()
            )));
        }
        Ok(v)
    }

    #[inline]
    pub fn norm_sqr(&self) -> T {
        self.rx * self.rx + self.ry * self.ry + self.rz * self.rz
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.rx, self.ry, self.rz]
    }
}

/// Affine action of a qubit channel on Bloch coordinates: r -> F r + translation.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    pub linear: [[T; 3]; 3],
    pub translation: [T; 3],
}

impl<T: Scalar> AffineMap<T> {
    pub fn apply(&self, r: [T; 3]) -> [T; 3] {
        let mut out = self.translation;
        for (o, row) in out.iter_mut().zip(&self.linear) {
            for (m, rj) in row.iter().zip(&r) {
                *o += *m * *rj;
            }
        }
        out
    }

    pub fn det(&self) -> T {
        let m = &self.linear;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Checks |F n + b| <= 1 + tol on a deterministic sample of boundary points.
    pub fn maps_ball_into_ball(&self, samples: usize, tol: T) -> bool {
        for n in crate::numerics::fibonacci_sphere::<T>(samples) {
            let img = self.apply(n);
            let norm = (img[0] * img[0] + img[1] * img[1] + img[2] * img[2]).sqrt();
            if norm > T::one() + tol {
                return false;
            }
        }
        true
    }
}

/// rho = (I + r . sigma)/2.
pub fn bloch_to_density<T: Scalar>(r: &BlochVector<T>) -> DensityMatrix<T> {
    let half = T::lit(0.5);
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = Complex::new(half * (T::one() + r.rz), T::zero());
    m[(1, 1)] = Complex::new(half * (T::one() - r.rz), T::zero());
    m[(0, 1)] = Complex::new(half * r.rx, -half * r.ry);
    m[(1, 0)] = Complex::new(half * r.rx, half * r.ry);
    DensityMatrix::new_unchecked(m)
}

/// r_j = Tr(rho sigma_j).
pub fn density_to_bloch<T: Scalar>(rho: &DensityMatrix<T>) -> Result<BlochVector<T>> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            actual: rho.dim(),
        });
    }
    let m = rho.mat();
    let two = T::lit(2.0);
    Ok(BlochVector {
        rx: m[(0, 1)].re * two,
        ry: -m[(0, 1)].im * two,
        rz: m[(0, 0)].re - m[(1, 1)].re,
    })
}

/// (1/2) sum |eigenvalues(rho - sigma)|.
pub fn trace_distance<T: Scalar>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let evs = eigvalsh(&a.mat().sub(b.mat()))?;
    Ok(evs.iter().fold(T::zero(), |acc, e| acc + e.abs()) * T::lit(0.5))
}

/// Shannon term with base-2 logs and 0 log 0 := 0.
fn xlog2x<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}

/// -sum lambda log2 lambda, clipping eigenvalues in [-1e-10, 0) to zero.
pub fn von_neumann_entropy<T: Scalar>(rho: &DensityMatrix<T>) -> Result<T> {
    let mut s = T::zero();
    for lam in rho.eigenvalues()? {
        if lam < -T::lit(1e-10) {
            return Err(Error::InvalidState(format!(
                "eigenvalue {lam:e} below -1e-10"
            )));
        }
        s -= xlog2x(lam.max(T::zero()));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of a bipartite state with subsystem dims `(d_a, d_b)`.
pub fn partial_trace<T: Scalar>(
    rho: &DensityMatrix<T>,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityMatrix<T>> {
    let (da, db) = dims;
    if da * db != rho.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            actual: da * db,
        });
    }
    let m = rho.mat();
    let out = match keep {
        Keep::A => CMatrix::from_fn(da, |i, j| {
            (0..db).fold(czero(), |acc, k| acc + m[(i * db + k, j * db + k)])
        }),
        Keep::B => CMatrix::from_fn(db, |i, j| {
            (0..da).fold(czero(), |acc, k| acc + m[(k * db + i, k * db + j)])
        }),
    };
    Ok(DensityMatrix::new_unchecked(out))
}

/// S(A) + S(B) - S(AB) in bits.
pub fn mutual_information<T: Scalar>(rho: &DensityMatrix<T>, dims: (usize, usize)) -> Result<T> {
    let ra = partial_trace(rho, dims, Keep::A)?;
    let rb = partial_trace(rho, dims, Keep::B)?;
    Ok(von_neumann_entropy(&ra)? + von_neumann_entropy(&rb)? - von_neumann_entropy(rho)?)
}

/// Sum of singular values; for Hermitian input this is sum |eigenvalues|.
pub fn trace_norm<T: Scalar>(m: &CMatrix<T>) -> Result<T> {
    let scale = m.max_abs().max(T::one());
    if m.hermiticity_defect() <= T::lit(1e-10) * scale {
        let evs = eigvalsh(m)?;
        return Ok(evs.iter().fold(T::zero(), |acc, e| acc + e.abs()));
    }
    // General case: singular values are sqrt eigenvalues of M^dagger M.
    let gram = m.adjoint().matmul(m);
    let evs = eigvalsh(&gram)?;
    Ok(evs
        .iter()
        .fold(T::zero(), |acc, e| acc + e.max(T::zero()).sqrt()))
}

/// Maximally entangled two-qubit projector (|00> + |11>)/sqrt(2).
pub fn bell_state<T: Scalar>() -> DensityMatrix<T> {
    let h = T::lit(0.5).sqrt();
    let psi = [
        Complex::new(h, T::zero()),
        czero(),
        czero(),
        Complex::new(h, T::zero()),
    ];
    DensityMatrix::from_pure(&psi).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::cmatrix::c;
    use approx::assert_relative_eq;

    type D = DensityMatrix<f64>;

    fn bloch(rx: f64, ry: f64, rz: f64) -> D {
        bloch_to_density(&BlochVector::new(rx, ry, rz).unwrap())
    }

    #[test]
    fn bloch_to_density_examples() {
        // maximally mixed
        let m = bloch(0.0, 0.0, 0.0);
        assert!(m.mat().max_abs_diff(D::maximally_mixed(2).mat()) < 1e-15);
        // pure pole state
        let p = bloch(0.0, 0.0, 1.0);
        assert_relative_eq!(p.mat()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.mat()[(1, 1)].re, 0.0, epsilon = 1e-15);
        // sigma_x eigenstate: all entries 1/2
        let x = bloch(1.0, 0.0, 0.0);
        for r in 0..2 {
            for col in 0..2 {
                assert_relative_eq!(x.mat()[(r, col)].re, 0.5, epsilon = 1e-15);
                assert_relative_eq!(x.mat()[(r, col)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bloch_norm_rejected() {
        assert!(BlochVector::new(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn density_to_bloch_examples() {
        let r = density_to_bloch(&D::maximally_mixed(2)).unwrap();
        assert!(r.norm_sqr() < 1e-24);
        let r = density_to_bloch(&bloch(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(r.rz, 1.0, epsilon = 1e-14);
        // off-diagonal (1/2) e^{i pi/4} on a pure equator state -> (s2/2, -s2/2, 0)
        let s2 = 0.5_f64.sqrt();
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        m[(0, 1)] = c(
            0.5 * (std::f64::consts::FRAC_PI_4).cos(),
            0.5 * (std::f64::consts::FRAC_PI_4).sin(),
        );
        m[(1, 0)] = m[(0, 1)].conj();
        let r = density_to_bloch(&D::new(m).unwrap()).unwrap();
        assert_relative_eq!(r.rx, s2, epsilon = 1e-12);
        assert_relative_eq!(r.ry, -s2, epsilon = 1e-12);
        assert_relative_eq!(r.rz, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bloch_round_trip() {
        let cases: [[f64; 3]; 3] = [[0.3, -0.2, 0.4], [0.0, 0.9, 0.1], [-0.5, 0.5, -0.5]];
        for r in cases {
            let v = BlochVector::new(r[0], r[1], r[2]).unwrap();
            let back = density_to_bloch(&bloch_to_density(&v)).unwrap();
            assert!((back.rx - v.rx).abs() < 1e-12);
            assert!((back.ry - v.ry).abs() < 1e-12);
            assert!((back.rz - v.rz).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let a = bloch(0.3, 0.1, -0.4);
        assert_relative_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
        let up = bloch(0.0, 0.0, 1.0);
        let dn = bloch(0.0, 0.0, -1.0);
        assert_relative_eq!(trace_distance(&up, &dn).unwrap(), 1.0, epsilon = 1e-12);
        // Bloch vectors (0,0,+-a) -> distance a
        for a_val in [0.2, 0.65, 0.9] {
            let p = bloch(0.0, 0.0, a_val);
            let m = bloch(0.0, 0.0, -a_val);
            assert_relative_eq!(trace_distance(&p, &m).unwrap(), a_val, epsilon = 1e-12);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_relative_eq!(
            von_neumann_entropy(&bloch(0.0, 0.0, 1.0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            von_neumann_entropy(&D::maximally_mixed(2)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            von_neumann_entropy(&D::maximally_mixed(4)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn partial_trace_examples() {
        let a = bloch(0.3, 0.0, 0.5);
        let b = bloch(0.0, -0.7, 0.2);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, (2, 2), Keep::A).unwrap();
        assert!(ra.mat().max_abs_diff(a.mat()) < 1e-13);
        let rb = partial_trace(&ab, (2, 2), Keep::B).unwrap();
        assert!(rb.mat().max_abs_diff(b.mat()) < 1e-13);

        let bell = bell_state::<f64>();
        let r = partial_trace(&bell, (2, 2), Keep::A).unwrap();
        assert!(r.mat().max_abs_diff(D::maximally_mixed(2).mat()) < 1e-13);
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        // brute-force double-index contraction on a pseudo-random 4x4 state
        let mut seed = 99u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut g = CMatrix::<f64>::zeros(4);
        for r in 0..4 {
            for col in 0..4 {
                g[(r, col)] = c(next(), next());
            }
        }
        let gram = g.matmul(&g.adjoint());
        let tr = gram.trace().re;
        let rho = D::new(gram.scale(c(1.0 / tr, 0.0))).unwrap();

        let mut oracle = CMatrix::<f64>::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let v = oracle[(i, j)] + rho.mat()[(i * 2 + k, j * 2 + k)];
                    oracle[(i, j)] = v;
                }
            }
        }
        let got = partial_trace(&rho, (2, 2), Keep::A).unwrap();
        assert!(got.mat().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = bloch(0.2, 0.0, 0.3).tensor(&bloch(0.0, 0.4, -0.1));
        assert!(mutual_information(&prod, (2, 2)).unwrap().abs() < 1e-10);
        assert_relative_eq!(
            mutual_information(&bell_state::<f64>(), (2, 2)).unwrap(),
            2.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trace_norm_examples() {
        assert_relative_eq!(
            trace_norm(&CMatrix::<f64>::identity(2)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            trace_norm(&CMatrix::<f64>::pauli(2)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        // random Hermitian vs eigenvalue-sum oracle
        let mut m = CMatrix::<f64>::zeros(3);
        m[(0, 0)] = c(0.4, 0.0);
        m[(1, 1)] = c(-1.2, 0.0);
        m[(2, 2)] = c(0.7, 0.0);
        m[(0, 1)] = c(0.3, -0.8);
        m[(1, 0)] = m[(0, 1)].conj();
        m[(1, 2)] = c(-0.1, 0.2);
        m[(2, 1)] = m[(1, 2)].conj();
        let evs = eigvalsh(&m).unwrap();
        let oracle: f64 = evs.iter().map(|e| e.abs()).sum();
        assert_relative_eq!(trace_norm(&m).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn trace_norm_non_hermitian_uses_singular_values() {
        // [[0, 1], [0, 0]] has singular values {1, 0}
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert_relative_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_is_half_trace_norm() {
        let a = bloch(0.1, 0.5, -0.3);
        let b = bloch(-0.6, 0.0, 0.2);
        let d = trace_distance(&a, &b).unwrap();
        let n = trace_norm(&a.mat().sub(b.mat())).unwrap();
        assert_relative_eq!(d, n / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn validation_rejects_bad_states() {
        let mut m = CMatrix::<f64>::identity(2);
        m[(0, 0)] = c(1.5, 0.0); // trace 2.5
        assert!(D::new(m).is_err());
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0); // negative eigenvalue
        assert!(D::new(m).is_err());
    }
}
