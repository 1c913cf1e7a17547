//! Channel families and the exact reduced dynamical maps of a qubit coupled
//! to a Kossakowski (Lindblad) channel and an Ising spin environment.
//!
//! The environment is a tensor power of one diagonal spin state with
//! magnetization `z`; conditioning on a magnetization sector turns the
//! reduced dynamics into a closed 2x2 linear problem, and the sector average
//! gives the exact map for any number of environment spins.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::det3;
use crate::qstate::{czero, AffineMap, CMatrix, DensityMatrix};
use crate::scalar::Scalar;

/// Coefficient matrix of the Lindblad dissipator, restricted to the
/// [[gx, a+ib, 0], [a-ib, gy, 0], [0, 0, gz]] form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KossakowskiMatrix<T> {
    pub gamma_x: T,
    pub gamma_y: T,
    pub gamma_z: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> KossakowskiMatrix<T> {
    /// Validates positive semidefiniteness: all rates >= 0 and
    /// gx*gy >= alpha^2 + beta^2 (smallest eigenvalue above -1e-12).
    pub fn new(gamma_x: T, gamma_y: T, gamma_z: T, alpha: T, beta: T) -> Result<Self> {
        let m = Self {
            gamma_x,
            gamma_y,
            gamma_z,
            alpha,
            beta,
        };
        let tol = T::lit(1e-12);
        if m.min_eigenvalue() < -tol {
            return Err(Error::InvalidParam(format!(
                "Kossakowski matrix not PSD: min eigenvalue {:e}",
                m.min_eigenvalue()
            )));
        }
        Ok(m)
    }

    /// Smallest eigenvalue of the 3x3 coefficient matrix.
    pub fn min_eigenvalue(&self) -> T {
        let half = T::lit(0.5);
        let mean = (self.gamma_x + self.gamma_y) * half;
        let dev = ((self.gamma_x - self.gamma_y) * half).powi(2)
            + self.alpha * self.alpha
            + self.beta * self.beta;
        (mean - dev.sqrt()).min(self.gamma_z)
    }

    /// The explicit 3x3 Hermitian matrix.
    pub fn matrix(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(3);
        m[(0, 0)] = Complex::new(self.gamma_x, T::zero());
        m[(1, 1)] = Complex::new(self.gamma_y, T::zero());
        m[(2, 2)] = Complex::new(self.gamma_z, T::zero());
        m[(0, 1)] = Complex::new(self.alpha, self.beta);
        m[(1, 0)] = Complex::new(self.alpha, -self.beta);
        m
    }
}

/// Initial environment data: per-spin magnetization `z` (z = 2 B--_0 - 1)
/// and the number of Ising-coupled spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec<T> {
    pub z: T,
    pub n_spins: usize,
}

impl<T: Scalar> EnvironmentSpec<T> {
    pub fn new(z: T, n_spins: usize) -> Result<Self> {
        if z.abs() > T::one() + T::lit(1e-12) {
            return Err(Error::InvalidParam(format!("|z| = {z} exceeds 1")));
        }
        if n_spins == 0 {
            return Err(Error::InvalidParam("n_spins must be >= 1".into()));
        }
        Ok(Self {
            z: z.min(T::one()).max(-T::one()),
            n_spins,
        })
    }

    /// Single-spin state diag((1-z)/2, (1+z)/2) in the {|+>, |->} basis.
    pub fn single_spin_state(&self) -> DensityMatrix<T> {
        let half = T::lit(0.5);
        let mut m = CMatrix::zeros(2);
        m[(0, 0)] = Complex::new(half * (T::one() - self.z), T::zero());
        m[(1, 1)] = Complex::new(half * (T::one() + self.z), T::zero());
        DensityMatrix::new_unchecked(m)
    }

    /// Tensor power of the single-spin state.
    pub fn full_state(&self) -> DensityMatrix<T> {
        let one = self.single_spin_state();
        let mut out = one.clone();
        for _ in 1..self.n_spins {
            out = out.tensor(&one);
        }
        out
    }
}

/// Named channel family; rates are in units of the Ising exchange J = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelFamily<T> {
    /// gx = gy = gz = gamma0/4, alpha = beta = 0.
    IsotropicDepolarizing {
        gamma0: T,
    },
    /// Amplitude damping plus depolarizing: gx = gy = gA + gD, gz = gD,
    /// alpha = 0, beta = gA/2 (the +i gA/2 off-diagonal read literally).
    AmplitudeDepolarizing {
        gamma_a: T,
        gamma_d: T,
    },
    GeneralAnisotropic(KossakowskiMatrix<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Isotropic,
    AmplitudeDepolarizing,
    GeneralAnisotropic,
}

impl FamilyTag {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyTag::Isotropic => "isotropic",
            FamilyTag::AmplitudeDepolarizing => "appendix",
            FamilyTag::GeneralAnisotropic => "anisotropic",
        }
    }
}

/// A channel family together with its environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelScenario<T> {
    pub family: ChannelFamily<T>,
    pub env: EnvironmentSpec<T>,
}

impl<T: Scalar> ChannelScenario<T> {
    pub fn isotropic(gamma0: T, z: T, n_spins: usize) -> Result<Self> {
        if gamma0 < T::zero() {
            return Err(Error::InvalidParam(format!(
                "gamma0 = {gamma0} must be >= 0"
            )));
        }
        Ok(Self {
            family: ChannelFamily::IsotropicDepolarizing { gamma0 },
            env: EnvironmentSpec::new(z, n_spins)?,
        })
    }

    pub fn amplitude_depolarizing(gamma_a: T, gamma_d: T, z: T, n_spins: usize) -> Result<Self> {
        if gamma_a < T::zero() || gamma_d < T::zero() {
            return Err(Error::InvalidParam(
                "amplitude/depolarizing rates must be >= 0".into(),
            ));
        }
        Ok(Self {
            family: ChannelFamily::AmplitudeDepolarizing { gamma_a, gamma_d },
            env: EnvironmentSpec::new(z, n_spins)?,
        })
    }

    pub fn anisotropic(k: KossakowskiMatrix<T>, z: T, n_spins: usize) -> Result<Self> {
        Ok(Self {
            family: ChannelFamily::GeneralAnisotropic(k),
            env: EnvironmentSpec::new(z, n_spins)?,
        })
    }

    pub fn tag(&self) -> FamilyTag {
        match self.family {
            ChannelFamily::IsotropicDepolarizing { .. } => FamilyTag::Isotropic,
            ChannelFamily::AmplitudeDepolarizing { .. } => FamilyTag::AmplitudeDepolarizing,
            ChannelFamily::GeneralAnisotropic(..) => FamilyTag::GeneralAnisotropic,
        }
    }

    /// The Kossakowski matrix realizing this family.
    pub fn kossakowski(&self) -> KossakowskiMatrix<T> {
        match self.family {
            ChannelFamily::IsotropicDepolarizing { gamma0 } => {
                let q = gamma0 * T::lit(0.25);
                KossakowskiMatrix {
                    gamma_x: q,
                    gamma_y: q,
                    gamma_z: q,
                    alpha: T::zero(),
                    beta: T::zero(),
                }
            }
            ChannelFamily::AmplitudeDepolarizing { gamma_a, gamma_d } => KossakowskiMatrix {
                gamma_x: gamma_a + gamma_d,
                gamma_y: gamma_a + gamma_d,
                gamma_z: gamma_d,
                alpha: T::zero(),
                beta: gamma_a * T::lit(0.5),
            },
            ChannelFamily::GeneralAnisotropic(k) => k,
        }
    }

    /// Population relaxation rate Gamma = gx + gy (populations decay as
    /// exp(-2 Gamma t)).
    pub fn pop_rate(&self) -> T {
        let k = self.kossakowski();
        k.gamma_x + k.gamma_y
    }

    /// Coherence decay rate Lambda = gx + gy + 2 gz.
    pub fn coh_rate(&self) -> T {
        let k = self.kossakowski();
        k.gamma_x + k.gamma_y + T::lit(2.0) * k.gamma_z
    }

    /// True when the coherence evolves by a scalar factor (gx = gy, alpha = 0).
    pub fn has_scalar_coherence(&self) -> bool {
        let k = self.kossakowski();
        k.gamma_x == k.gamma_y && k.alpha == T::zero()
    }
}

/// cosh(xi t) and sinh(xi t)/xi continued analytically in xi^2, with the
/// xi -> 0 limit Sh -> t taken by series.
pub(crate) fn ch_sh<T: Scalar>(xi_sq: T, t: T) -> (T, T) {
    let x = xi_sq * t * t;
    if x.abs() < T::lit(1e-8) {
        let ch = T::one() + x * T::lit(0.5) + x * x * T::lit(1.0 / 24.0);
        let sh = t * (T::one() + x * T::lit(1.0 / 6.0) + x * x * T::lit(1.0 / 120.0));
        return (ch, sh);
    }
    if xi_sq > T::zero() {
        let xi = xi_sq.sqrt();
        ((xi * t).cosh(), (xi * t).sinh() / xi)
    } else {
        let w = (-xi_sq).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    }
}

/// Binomial sector weights p_k and magnetizations M_k = 2k - N for k spins
/// in |+> (probability (1-z)/2 each).
fn sector_weights<T: Scalar>(z: T, n: usize) -> Vec<(T, T)> {
    let half = T::lit(0.5);
    let p_up = half * (T::one() - z);
    let p_dn = half * (T::one() + z);
    let mut weights = Vec::with_capacity(n + 1);
    // binomial coefficients by recurrence, probabilities by powers
    let mut binom = T::one();
    for k in 0..=n {
        let pk = binom * p_up.powi(k as i32) * p_dn.powi((n - k) as i32);
        let m = T::of_usize(2 * k) - T::of_usize(n);
        weights.push((pk, m));
        if k < n {
            binom = binom * T::of_usize(n - k) / T::of_usize(k + 1);
        }
    }
    weights
}

/// Sector-averaged coherence kernel: the 2x2 complex matrix acting on
/// (A+-, A-+), without the global exp(-Lambda t) factor.
fn coherence_kernel<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> [[Complex<T>; 2]; 2] {
    let k = sc.kossakowski();
    let skew = k.gamma_x - k.gamma_y;
    let base = skew * skew + T::lit(4.0) * k.alpha * k.alpha;
    let mut p = T::zero();
    let mut q = T::zero();
    let mut r = T::zero();
    for (pk, m) in sector_weights(sc.env.z, sc.env.n_spins) {
        let (ch, sh) = ch_sh(base - m * m, t);
        p += pk * ch;
        q += pk * m * sh;
        r += pk * sh;
    }
    let mix = Complex::new(skew, -T::lit(2.0) * k.alpha);
    [
        [Complex::new(p, -q), mix * Complex::new(r, T::zero())],
        [mix.conj() * Complex::new(r, T::zero()), Complex::new(p, q)],
    ]
}

/// Complex coherence multiplier G_t = exp(-Lambda t) (cos t + i z sin t)^N.
///
/// Defined for families with scalar coherence (gx = gy, alpha = 0); the sign
/// convention is the physical one (the multiplier of A+-), the complex
/// conjugate of the printed single-spin form. |G| agrees in both conventions.
pub fn coherence_factor<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<Complex<T>> {
    if t < T::zero() {
        return Err(Error::Domain(format!("t = {t} must be >= 0")));
    }
    if !sc.has_scalar_coherence() {
        return Err(Error::Unsupported(
            "coherence factor is scalar only for gx = gy, alpha = 0".into(),
        ));
    }
    let z = sc.env.z;
    let n = sc.env.n_spins;
    let modulus = abs_coherence(sc, t);
    let phase = T::of_usize(n) * (z * t.sin()).atan2(t.cos());
    Ok(Complex::from_polar(modulus, phase))
}

/// |G_t| = exp(-Lambda t) u^{N/2} with u = cos^2 t + z^2 sin^2 t.
pub fn abs_coherence<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    let z = sc.env.z;
    let n = sc.env.n_spins;
    let u = t.cos().powi(2) + z * z * t.sin().powi(2);
    (-sc.coh_rate() * t).exp() * u.powf(T::of_usize(n) * T::lit(0.5))
}

/// Dissipative population factors f_t^+- = 1 +- exp(-2(gx+gy) t).
pub fn population_factor<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> (T, T) {
    let e = (-T::lit(2.0) * sc.pop_rate() * t).exp();
    (T::one() + e, T::one() - e)
}

/// Applies the exact reduced map to an arbitrary 2x2 complex matrix
/// (linear extension of the channel; inputs need not be states).
pub fn apply_map<T: Scalar>(sc: &ChannelScenario<T>, t: T, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if a.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            actual: a.dim(),
        });
    }
    if t < T::zero() {
        return Err(Error::Domain(format!("t = {t} must be >= 0")));
    }
    let k = sc.kossakowski();
    let gamma_sum = sc.pop_rate();
    let (f_plus, f_minus) = population_factor(sc, t);
    let half = T::lit(0.5);

    let trace = a[(0, 0)] + a[(1, 1)];
    let mut app = a[(0, 0)] * Complex::new(half * f_plus, T::zero())
        + a[(1, 1)] * Complex::new(half * f_minus, T::zero());
    if k.beta != T::zero() {
        if gamma_sum <= T::zero() {
            return Err(Error::Domain(
                "beta != 0 with gamma_x + gamma_y = 0: population fixed point undefined".into(),
            ));
        }
        app -= trace * Complex::new(k.beta * f_minus / gamma_sum, T::zero());
    }

    let kernel = coherence_kernel(sc, t);
    let decay = Complex::new((-sc.coh_rate() * t).exp(), T::zero());
    let c0 = a[(0, 1)];
    let d0 = a[(1, 0)];
    let c_t = decay * (kernel[0][0] * c0 + kernel[0][1] * d0);
    let d_t = decay * (kernel[1][0] * c0 + kernel[1][1] * d0);

    let mut out = CMatrix::zeros(2);
    out[(0, 0)] = app;
    out[(1, 1)] = trace - app;
    out[(0, 1)] = c_t;
    out[(1, 0)] = d_t;
    Ok(out)
}

/// Exact evolved state of the qubit under the combined channel.
pub fn evolve_analytic<T: Scalar>(
    sc: &ChannelScenario<T>,
    rho0: &DensityMatrix<T>,
    t: T,
) -> Result<DensityMatrix<T>> {
    let out = apply_map(sc, t, rho0.mat())?;
    DensityMatrix::new(out)
}

/// 4x4 map matrix in the {I, sx, sy, sz} coordinate representation:
/// first row (1, 0, 0, 0), first column the translation, lower-right block
/// the linear Bloch action.
pub fn superoperator_matrix<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<[[T; 4]; 4]> {
    let mut s = [[T::zero(); 4]; 4];
    s[0][0] = T::one();
    let bloch_of = |m: &CMatrix<T>| -> [T; 3] {
        let two = T::lit(2.0);
        [
            m[(0, 1)].re * two,
            -m[(0, 1)].im * two,
            m[(0, 0)].re - m[(1, 1)].re,
        ]
    };
    let from_bloch = |r: [T; 3]| -> CMatrix<T> {
        let mut m = CMatrix::identity(2);
        for (j, rj) in r.iter().enumerate() {
            m.axpy(Complex::new(*rj, T::zero()), &CMatrix::pauli(j));
        }
        m.scale(Complex::new(T::lit(0.5), T::zero()))
    };
    let center = from_bloch([T::zero(); 3]);
    let b = bloch_of(&apply_map(sc, t, &center)?);
    for (i, bi) in b.iter().enumerate() {
        s[i + 1][0] = *bi;
    }
    for j in 0..3 {
        let mut e = [T::zero(); 3];
        e[j] = T::one();
        let axis = from_bloch(e);
        let img = bloch_of(&apply_map(sc, t, &axis)?);
        for i in 0..3 {
            s[i + 1][j + 1] = img[i] - b[i];
        }
    }
    Ok(s)
}

/// Affine Bloch action (F, translation) extracted from the superoperator.
pub fn affine_map<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<AffineMap<T>> {
    let s = superoperator_matrix(sc, t)?;
    let mut linear = [[T::zero(); 3]; 3];
    let mut translation = [T::zero(); 3];
    for i in 0..3 {
        translation[i] = s[i + 1][0];
        for j in 0..3 {
            linear[i][j] = s[i + 1][j + 1];
        }
    }
    Ok(AffineMap {
        linear,
        translation,
    })
}

/// Signed determinant of the Bloch block (orientation positive at t = 0).
pub fn det_f<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<T> {
    Ok(det3(&affine_map(sc, t)?.linear))
}

/// |det F|, the Bloch-ball volume contraction factor.
pub fn map_volume<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<T> {
    Ok(det_f(sc, t)?.abs())
}

/// (Phi_t x id) applied to the maximally entangled two-qubit state, ordered
/// system (x) ancilla so the amplitude-depolarizing case reproduces the
/// closed-form sigma matrix entrywise.
pub fn build_lfs_state<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<DensityMatrix<T>> {
    let mut sigma = CMatrix::zeros(4);
    let half = Complex::new(T::lit(0.5), T::zero());
    for a in 0..2 {
        for ap in 0..2 {
            let mut e = CMatrix::zeros(2);
            e[(a, ap)] = Complex::new(T::one(), T::zero());
            let blk = apply_map(sc, t, &e)?;
            for s_row in 0..2 {
                for s_col in 0..2 {
                    sigma[(2 * s_row + a, 2 * s_col + ap)] = half * blk[(s_row, s_col)];
                }
            }
        }
    }
    DensityMatrix::new(sigma)
}

/// Phase-sign convention of the stored coherence factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseConvention {
    /// Multiplier of A+-: (cos t + i z sin t)^N (the N-spin form).
    Physical,
}

/// Sampled map data at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSnapshot<T> {
    pub t: T,
    pub coherence: Complex<T>,
    pub f_plus: T,
    pub f_minus: T,
    pub family: FamilyTag,
    pub convention: PhaseConvention,
}

/// Snapshot of the scalar-coherence map data at time `t`.
pub fn snapshot<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<MapSnapshot<T>> {
    let (f_plus, f_minus) = population_factor(sc, t);
    Ok(MapSnapshot {
        t,
        coherence: coherence_factor(sc, t)?,
        f_plus,
        f_minus,
        family: sc.tag(),
        convention: PhaseConvention::Physical,
    })
}

/// Choi matrix (trace normalized to 1) of a qubit map given in the
/// {I, sx, sy, sz} coordinate representation.
pub fn choi_of_map_matrix<T: Scalar>(v: &[[T; 4]; 4]) -> CMatrix<T> {
    // Pauli coordinates of the four matrix units E_ij.
    let units: [[Complex<T>; 4]; 4] = {
        let h = T::lit(0.5);
        let z = czero::<T>();
        [
            [Complex::new(h, T::zero()), z, z, Complex::new(h, T::zero())], // E00
            [z, Complex::new(h, T::zero()), Complex::new(T::zero(), h), z], // E01
            [
                z,
                Complex::new(h, T::zero()),
                Complex::new(T::zero(), -h),
                z,
            ], // E10
            [
                Complex::new(h, T::zero()),
                z,
                z,
                Complex::new(-h, T::zero()),
            ], // E11
        ]
    };
    let paulis: [CMatrix<T>; 3] = [CMatrix::pauli(0), CMatrix::pauli(1), CMatrix::pauli(2)];
    let mut choi = CMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let coords = units[2 * i + j];
            let mut out = [czero::<T>(); 4];
            for (r, o) in out.iter_mut().enumerate() {
                for (c_idx, coord) in coords.iter().enumerate() {
                    *o += *coord * Complex::new(v[r][c_idx], T::zero());
                }
            }
            let mut m = CMatrix::identity(2).scale(out[0]);
            for (ax, p) in paulis.iter().enumerate() {
                m.axpy(out[ax + 1], p);
            }
            let half = Complex::new(T::lit(0.5), T::zero());
            for s_row in 0..2 {
                for s_col in 0..2 {
                    choi[(2 * i + s_row, 2 * j + s_col)] = half * m[(s_row, s_col)];
                }
            }
        }
    }
    choi
}
