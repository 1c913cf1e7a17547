//! Brute-force integrator of the full system (x) environment master
//! equation. Everything analytic in [`crate::channels`] is validated against
//! this module before it is trusted.
//!
//! The state layout is system-major: index r = a * 2^N + e with `a` the
//! system level and `e` the environment configuration bits (bit n set means
//! spin n in |->). The Ising Hamiltonian is diagonal in this basis and the
//! dissipator acts on the system factor only, so the right-hand side reduces
//! to a fixed 4x4 block action plus elementwise phases.

use num_complex::Complex;

use crate::channels::{ChannelScenario, KossakowskiMatrix};
use crate::error::{Error, Result};
use crate::qstate::{czero, eigvalsh, partial_trace, CMatrix, DensityMatrix, Keep};
use crate::scalar::Scalar;

/// Full Ising model: one qubit uniformly coupled to N environment spins,
/// H = (1/2) sigma_S^z (x) sum_n sigma_n^z with J = 1, plus the Markovian
/// channel of the scenario acting on the system factor.
#[derive(Debug, Clone)]
pub struct FullModel<T> {
    pub scenario: ChannelScenario<T>,
    env_dim: usize,
    /// Magnetization sum_n sigma_n^z per environment configuration.
    env_mag: Vec<T>,
    /// 4x4 system dissipator acting on matrix units, entry [2a+b][2a'+b'].
    dissipator: [[Complex<T>; 4]; 4],
}

fn system_dissipator<T: Scalar>(k: &KossakowskiMatrix<T>) -> [[Complex<T>; 4]; 4] {
    let paulis = [CMatrix::pauli(0), CMatrix::pauli(1), CMatrix::pauli(2)];
    let g = k.matrix();
    let half = Complex::new(T::lit(0.5), T::zero());
    let mut out = [[czero::<T>(); 4]; 4];
    for a_in in 0..2 {
        for b_in in 0..2 {
            let mut e = CMatrix::<T>::zeros(2);
            e[(a_in, b_in)] = Complex::new(T::one(), T::zero());
            let mut img = CMatrix::<T>::zeros(2);
            for kk in 0..3 {
                for jj in 0..3 {
                    let gkj = g[(kk, jj)];
                    if gkj == czero() {
                        continue;
                    }
                    // gkj (sk E sj - 1/2 {sj sk, E})
                    let ske_sj = paulis[kk].matmul(&e).matmul(&paulis[jj]);
                    let sjsk = paulis[jj].matmul(&paulis[kk]);
                    let anti = sjsk.matmul(&e).add(&e.matmul(&sjsk));
                    img.axpy(gkj, &ske_sj.sub(&anti.scale(half)));
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    out[2 * a + b][2 * a_in + b_in] = img[(a, b)];
                }
            }
        }
    }
    out
}

impl<T: Scalar> FullModel<T> {
    pub fn new(scenario: ChannelScenario<T>) -> Self {
        let n = scenario.env.n_spins;
        let env_dim = 1 << n;
        let env_mag = (0..env_dim)
            .map(|e: usize| {
                let down = e.count_ones() as usize;
                T::of_usize(n - down) - T::of_usize(down)
            })
            .collect();
        let dissipator = system_dissipator(&scenario.kossakowski());
        Self {
            scenario,
            env_dim,
            env_mag,
            dissipator,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.env_dim
    }

    /// Sum of channel rates, used for the default step size.
    pub fn total_rate(&self) -> T {
        let k = self.scenario.kossakowski();
        k.gamma_x + k.gamma_y + k.gamma_z + k.alpha.abs() + k.beta.abs()
    }

    /// dt = min(1e-3 / max(1, rate), 0.01 / (1 + rate)).
    pub fn default_dt(&self) -> T {
        let r = self.total_rate();
        (T::lit(1e-3) / r.max(T::one())).min(T::lit(0.01) / (T::one() + r))
    }

    /// Full-dimension initial state rho_S (x) rho_env with the scenario's
    /// product environment.
    pub fn initial_state(&self, rho_s: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho_s.dim() != 2 {
            return Err(Error::DimMismatch {
                expected: 2,
                actual: rho_s.dim(),
            });
        }
        Ok(rho_s.tensor(&self.scenario.env.full_state()))
    }

    /// Writes -i[H, rho] + L_S rho into `out`.
    fn rhs_into(&self, rho: &CMatrix<T>, out: &mut CMatrix<T>) {
        let de = self.env_dim;
        let d = 2 * de;
        debug_assert_eq!(rho.dim(), d);
        let rho_d = rho.data();
        let out_d = out.data_mut();
        let half = T::lit(0.5);
        let sz = [T::one(), -T::one()];
        for a in 0..2 {
            for b in 0..2 {
                let l_row = &self.dissipator[2 * a + b];
                for e in 0..de {
                    let row = (a * de + e) * d;
                    for f in 0..de {
                        let idx = row + b * de + f;
                        let mut acc = czero::<T>();
                        for ap in 0..2 {
                            for bp in 0..2 {
                                let l = l_row[2 * ap + bp];
                                if l != czero() {
                                    acc += l * rho_d[(ap * de + e) * d + bp * de + f];
                                }
                            }
                        }
                        let phase = half * (sz[a] * self.env_mag[e] - sz[b] * self.env_mag[f]);
                        let x = rho_d[idx];
                        // -i * phase * x
                        acc += Complex::new(phase * x.im, -phase * x.re);
                        out_d[idx] = acc;
                    }
                }
            }
        }
    }
}

/// Public right-hand side: -i[H, rho] + sum_kj (gamma_kj/2)([sk rho, sj] + [sk, rho sj]).
pub fn lindblad_rhs<T: Scalar>(model: &FullModel<T>, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
    if rho.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            actual: rho.dim(),
        });
    }
    let mut out = CMatrix::zeros(rho.dim());
    model.rhs_into(rho, &mut out);
    Ok(out)
}

/// Sampled full-dimension trajectory with bookkeeping of the corrections
/// applied at each stored sample.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// (Hermiticity defect, trace deviation) measured before correction.
    pub corrections: Vec<(T, T)>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn max_herm_drift(&self) -> T {
        self.corrections.iter().map(|c| c.0).fold(T::zero(), T::max)
    }

    pub fn max_trace_drift(&self) -> T {
        self.corrections.iter().map(|c| c.1).fold(T::zero(), T::max)
    }
}

fn rk4_step<T: Scalar>(
    model: &FullModel<T>,
    rho: &mut CMatrix<T>,
    h: T,
    buf: &mut [CMatrix<T>; 5],
) {
    let [k1, k2, k3, k4, tmp] = buf;
    let half = Complex::new(h * T::lit(0.5), T::zero());
    let full = Complex::new(h, T::zero());
    model.rhs_into(rho, k1);
    tmp.data_mut().copy_from_slice(rho.data());
    tmp.axpy(half, k1);
    model.rhs_into(tmp, k2);
    tmp.data_mut().copy_from_slice(rho.data());
    tmp.axpy(half, k2);
    model.rhs_into(tmp, k3);
    tmp.data_mut().copy_from_slice(rho.data());
    tmp.axpy(full, k3);
    model.rhs_into(tmp, k4);
    let w1 = Complex::new(h / T::lit(6.0), T::zero());
    let w2 = Complex::new(h / T::lit(3.0), T::zero());
    rho.axpy(w1, k1);
    rho.axpy(w2, k2);
    rho.axpy(w2, k3);
    rho.axpy(w1, k4);
}

/// Fixed-step RK4 integration of the full master equation, sampled at the
/// given strictly increasing times (starting at 0).
///
/// Stored states are re-Hermitized and trace-renormalized; the applied
/// correction magnitudes are logged in the trajectory. A sample whose
/// smallest eigenvalue falls below -1e-6 rejects the run.
pub fn integrate_at<T: Scalar>(
    model: &FullModel<T>,
    rho0_full: &DensityMatrix<T>,
    sample_times: &[T],
    dt: T,
) -> Result<Trajectory<T>> {
    if rho0_full.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            actual: rho0_full.dim(),
        });
    }
    let max_dt = T::lit(1e-3) / model.total_rate().max(T::one());
    if dt <= T::zero() || dt > max_dt * T::lit(1.0 + 1e-9) {
        return Err(Error::InvalidParam(format!(
            "dt = {dt} exceeds the 1e-3/max(1, total rate) = {max_dt} bound"
        )));
    }
    let t_end = *sample_times.last().unwrap_or(&T::zero());
    if t_end > T::lit(50.0) {
        return Err(Error::InvalidParam(format!("t_end = {t_end} exceeds 50")));
    }
    if sample_times.first().is_some_and(|t| *t < T::zero()) {
        return Err(Error::InvalidParam("sample times must be >= 0".into()));
    }
    for w in sample_times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParam(
                "sample times must be strictly increasing".into(),
            ));
        }
    }
    let mut last = T::zero();

    let d = model.dim();
    let mut rho = rho0_full.mat().clone();
    let mut buf = [
        CMatrix::zeros(d),
        CMatrix::zeros(d),
        CMatrix::zeros(d),
        CMatrix::zeros(d),
        CMatrix::zeros(d),
    ];
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        corrections: Vec::new(),
    };
    let store = |t: T, rho: &mut CMatrix<T>, traj: &mut Trajectory<T>| -> Result<()> {
        let herm = rho.hermiticity_defect();
        let tr = rho.trace();
        let tr_dev = ((tr.re - T::one()).powi(2) + tr.im.powi(2)).sqrt();
        rho.hermitize();
        let renorm = Complex::new(T::one() / rho.trace().re, T::zero());
        let fixed = rho.scale(renorm);
        let min_ev = eigvalsh(&fixed)?.first().copied().unwrap_or(T::zero());
        if min_ev < -T::lit(1e-6) {
            return Err(Error::StepRejected(format!(
                "PSD violation {min_ev:e} at t = {t}; reduce dt"
            )));
        }
        traj.times.push(t);
        traj.states.push(DensityMatrix::new_unchecked(fixed));
        traj.corrections.push((herm, tr_dev));
        Ok(())
    };

    for &target in sample_times {
        if target == T::zero() {
            store(T::zero(), &mut rho, &mut traj)?;
            continue;
        }
        let span = target - last;
        let n_steps = (span / dt).ceil().max(T::one());
        let h = span / n_steps;
        let n = <usize as num_traits::NumCast>::from(n_steps).unwrap_or(1);
        for _ in 0..n {
            rk4_step(model, &mut rho, h, &mut buf);
        }
        last = target;
        store(target, &mut rho, &mut traj)?;
    }
    Ok(traj)
}

/// Uniformly sampled integration over [0, t_end] (roughly 10 samples per
/// unit time, always including both endpoints).
pub fn integrate<T: Scalar>(
    model: &FullModel<T>,
    rho0_full: &DensityMatrix<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    let per_unit = T::lit(10.0);
    let n = <usize as num_traits::NumCast>::from((t_end * per_unit).ceil())
        .unwrap_or(1)
        .max(1);
    let times: Vec<T> = (0..=n)
        .map(|i| t_end * T::of_usize(i) / T::of_usize(n))
        .collect();
    integrate_at(model, rho0_full, &times, dt)
}

/// Reduced system state Tr_env of a full state.
pub fn reduced_state<T: Scalar>(
    model: &FullModel<T>,
    full: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    partial_trace(full, (2, model.env_dim), Keep::A)
}

/// Evolves the qubit initial state through the full model and reduces.
pub fn evolve_reduced<T: Scalar>(
    model: &FullModel<T>,
    rho_s: &DensityMatrix<T>,
    t: T,
    dt: T,
) -> Result<DensityMatrix<T>> {
    if t == T::zero() {
        return Ok(rho_s.clone());
    }
    let full0 = model.initial_state(rho_s)?;
    let traj = integrate_at(model, &full0, &[t], dt)?;
    reduced_state(model, traj.states.last().unwrap())
}

/// Extracts the affine Bloch action at time `t` by evolving the four
/// coordinate basis inputs through the full model.
pub fn reduced_map_from_oracle<T: Scalar>(
    model: &FullModel<T>,
    t: T,
    dt: T,
) -> Result<[[T; 4]; 4]> {
    let bloch_state = |r: [T; 3]| {
        let mut m = CMatrix::identity(2);
        for (j, rj) in r.iter().enumerate() {
            m.axpy(Complex::new(*rj, T::zero()), &CMatrix::pauli(j));
        }
        DensityMatrix::new_unchecked(m.scale(Complex::new(T::lit(0.5), T::zero())))
    };
    let bloch_of = |rho: &DensityMatrix<T>| -> [T; 3] {
        let m = rho.mat();
        let two = T::lit(2.0);
        [
            m[(0, 1)].re * two,
            -m[(0, 1)].im * two,
            m[(0, 0)].re - m[(1, 1)].re,
        ]
    };
    let mut s = [[T::zero(); 4]; 4];
    s[0][0] = T::one();
    let b = bloch_of(&evolve_reduced(model, &bloch_state([T::zero(); 3]), t, dt)?);
    for (i, bi) in b.iter().enumerate() {
        s[i + 1][0] = *bi;
    }
    for j in 0..3 {
        let mut e = [T::zero(); 3];
        e[j] = T::one();
        let img = bloch_of(&evolve_reduced(model, &bloch_state(e), t, dt)?);
        for i in 0..3 {
            s[i + 1][j + 1] = img[i] - b[i];
        }
    }
    Ok(s)
}
