//! Non-Markovianity rates X_l(t), their positivity windows, and the
//! integrated measures N_l = integral of the positive part of X_l.
//!
//! Analytic rate expressions cover every family whose coherence evolves by a
//! scalar factor (gx = gy, alpha = 0, i.e. the isotropic and
//! amplitude-depolarizing families at any N); the general anisotropic family
//! goes through numeric routes (finite differences, Choi matrix, pair scan).

use crate::channels::{
    self, abs_coherence, build_lfs_state, choi_of_map_matrix, det_f, population_factor,
    superoperator_matrix, ChannelScenario,
};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, bisect_sign_change, fibonacci_sphere, inverse4, mat4_mul};
use crate::qstate::{mutual_information, trace_norm};
use crate::scalar::Scalar;

/// The four non-Markovianity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Blp,
    Lpp,
    Rhp,
    Lfs,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Blp, Measure::Lpp, Measure::Rhp, Measure::Lfs];

    pub fn label(&self) -> &'static str {
        match self {
            Measure::Blp => "BLP",
            Measure::Lpp => "LPP",
            Measure::Rhp => "RHP",
            Measure::Lfs => "LFS",
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        match s.to_ascii_lowercase().as_str() {
            "blp" => Some(Measure::Blp),
            "lpp" => Some(Measure::Lpp),
            "rhp" => Some(Measure::Rhp),
            "lfs" => Some(Measure::Lfs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    Analytic,
    Numeric,
}

/// Sampled rate X_l(t) on a time grid.
#[derive(Debug, Clone)]
pub struct RateSeries<T> {
    pub measure: Measure,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub method: RateMethod,
}

/// Open interval on which a rate is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityWindow<T> {
    pub t_start: T,
    pub t_end: T,
    pub measure: Measure,
}

impl<T: Scalar> PositivityWindow<T> {
    pub fn width(&self) -> T {
        self.t_end - self.t_start
    }

    /// Interval containment with slack, treating both windows as closed.
    pub fn contained_in(&self, outer: &Self, slack: T) -> bool {
        self.t_start >= outer.t_start - slack && self.t_end <= outer.t_end + slack
    }
}

/// Integrated measure value together with the windows that produced it.
#[derive(Debug, Clone)]
pub struct MeasureResult<T> {
    pub measure: Measure,
    /// Sum of the window integrals up to `truncation_time` (a partial sum
    /// when `divergent` is set).
    pub value: T,
    pub windows: Vec<PositivityWindow<T>>,
    pub truncation_time: T,
    /// Quadrature error estimate plus the decay-envelope bound on the
    /// neglected tail windows.
    pub quadrature_error: T,
    /// Set when the rate has no decaying envelope (e.g. RHP inside the
    /// non-Markovian phase, or any measure at zero channel rates), so the
    /// full integral diverges and `value` is a truncated partial sum.
    pub divergent: bool,
}

impl<T: Scalar> MeasureResult<T> {
    /// Markovian: no positivity window survived detection.
    ///
    /// Detection uses underflow-free sign expressions (plus a noise floor on
    /// numerically differentiated rates), so this stays faithful at extreme
    /// rates where the measure value itself underflows f64 (e.g. BLP at
    /// z = 0, gamma ~ 10^3, where N_BLP ~ 1e-683).
    pub fn is_markovian(&self) -> bool {
        self.windows.is_empty()
    }
}

// --- rate functions ---------------------------------------------------------

/// u = cos^2 t + z^2 sin^2 t and u' for the scalar-coherence kernel.
#[inline]
fn kernel_u<T: Scalar>(z: T, t: T) -> (T, T) {
    let w = T::one() - z * z;
    let s = t.sin();
    let u = T::one() - w * s * s;
    let up = -w * (t + t).sin();
    (u, up)
}

/// X_BLP = d|G_t|/dt (scalar-coherence families).
fn rate_blp_scalar<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    let lam = sc.coh_rate();
    let n = T::of_usize(sc.env.n_spins);
    let (u, up) = kernel_u(sc.env.z, t);
    if u < T::lit(1e-14) {
        // |cos t|^N kink at the isolated zero of u; the value here is a
        // boundary point of measure zero.
        return T::zero();
    }
    let half_n = n * T::lit(0.5);
    (-lam * t).exp() * (half_n * u.powf(half_n - T::one()) * up - lam * u.powf(half_n))
}

/// BLP rate. Scalar-coherence families use the analytic derivative of |G|;
/// the general family uses the antipodal pair-scan envelope.
pub fn rate_blp<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    if sc.has_scalar_coherence() {
        rate_blp_scalar(sc, t)
    } else {
        blp_envelope_at(sc, t, &default_pairs(24)).unwrap_or(T::nan())
    }
}

/// X_LPP = d/dt det F (signed; orientation is positive at t = 0).
pub fn rate_lpp<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    if sc.has_scalar_coherence() {
        let dec = T::lit(2.0) * (sc.pop_rate() + sc.coh_rate());
        let n = sc.env.n_spins as i32;
        let (u, up) = kernel_u(sc.env.z, t);
        let n_t = T::of_usize(sc.env.n_spins);
        (-dec * t).exp() * (n_t * u.powi(n - 1) * up - dec * u.powi(n))
    } else {
        let h = T::lit(1e-6);
        let lo = (t - h).max(T::zero());
        let dlo = det_f(sc, lo).unwrap_or(T::nan());
        let dhi = det_f(sc, t + h).unwrap_or(T::nan());
        (dhi - dlo) / (t + h - lo)
    }
}

/// Analytic RHP rate max(0, d ln|G|/dt + gx + gy) for scalar-coherence
/// families; NaN at the isolated singular points where |G_t| = 0.
pub fn rate_rhp<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    if !sc.has_scalar_coherence() {
        return rhp_general(sc, t, T::lit(1e-5)).unwrap_or(T::nan());
    }
    let k = sc.kossakowski();
    let n = T::of_usize(sc.env.n_spins);
    let (u, up) = kernel_u(sc.env.z, t);
    if u < T::lit(1e-14) {
        return T::nan();
    }
    let val = -T::lit(2.0) * k.gamma_z + n * up / (T::lit(2.0) * u);
    val.max(T::zero())
}

/// The unclipped divisibility expression whose sign defines the RHP windows:
/// d ln|G|/dt + gamma_x + gamma_y.
pub fn rhp_signed<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    let k = sc.kossakowski();
    let n = T::of_usize(sc.env.n_spins);
    let (u, up) = kernel_u(sc.env.z, t);
    if u < T::lit(1e-14) {
        return T::nan();
    }
    -T::lit(2.0) * k.gamma_z + n * up / (T::lit(2.0) * u)
}

/// Finite-difference RHP estimate from (1/2 tau)(g - f_tau + |g - f_tau|)
/// with g(t, tau) = sqrt((beta f^-_tau / 4)^2 + |G_{t+tau}/G_t|^2).
///
/// The signed divisibility rate (g - f_tau)/tau carries an O(tau) bias, so
/// the tau and tau/2 samples are Richardson-extrapolated before clipping;
/// zeros then line up with the analytic rate to O(tau^2).
pub fn rate_rhp_finite<T: Scalar>(sc: &ChannelScenario<T>, t: T, tau: T) -> Result<T> {
    if !sc.has_scalar_coherence() {
        return rhp_general(sc, t, tau);
    }
    let g_t = abs_coherence(sc, t);
    if g_t <= T::lit(1e-12) {
        return Err(Error::Singular(format!("|G_t| = {g_t:e} at t = {t}")));
    }
    let beta = sc.kossakowski().beta;
    let signed = |step: T| -> T {
        let ratio = abs_coherence(sc, t + step) / g_t;
        let (f_plus, f_minus) = population_factor(sc, step);
        let g = ((beta * f_minus * T::lit(0.25)).powi(2) + ratio * ratio).sqrt();
        (g - f_plus * T::lit(0.5)) / step
    };
    let extrapolated = T::lit(2.0) * signed(tau * T::lit(0.5)) - signed(tau);
    Ok(extrapolated.max(T::zero()))
}

/// Choi-matrix RHP route for arbitrary families: builds the intermediate map
/// Phi_{t+tau} o Phi_t^{-1} and returns (||Choi||_1 - 1)/tau.
pub fn rhp_general<T: Scalar>(sc: &ChannelScenario<T>, t: T, tau: T) -> Result<T> {
    let s_t = superoperator_matrix(sc, t)?;
    let inv = inverse4(&s_t, T::lit(1e-12))
        .ok_or_else(|| Error::Singular(format!("map not invertible at t = {t}")))?;
    let s_next = superoperator_matrix(sc, t + tau)?;
    let v = mat4_mul(&s_next, &inv);
    let choi = choi_of_map_matrix(&v);
    Ok((trace_norm(&choi)? - T::one()) / tau)
}

/// Mutual information of the LFS probe state (ancilla maximally entangled at
/// t = 0). Scalar-coherence families use the closed spectrum of sigma.
pub fn lfs_mutual_information<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<T> {
    if !sc.has_scalar_coherence() {
        return mutual_information(&build_lfs_state(sc, t)?, (2, 2));
    }
    let (f_plus, f_minus) = population_factor(sc, t);
    let g = abs_coherence(sc, t);
    let k = sc.kossakowski();
    let upsilon = if k.beta == T::zero() {
        T::zero()
    } else {
        let gs = sc.pop_rate();
        if gs <= T::zero() {
            return Err(Error::Domain(
                "beta != 0 with gamma_x + gamma_y = 0 in the LFS state".into(),
            ));
        }
        T::lit(4.0) * k.beta / gs
    };
    let quarter = T::lit(0.25);
    let dev = ((upsilon * f_minus * T::lit(0.125)).powi(2) + g * g * quarter).sqrt();
    let spectrum = [
        quarter * f_minus * (T::one() - upsilon * T::lit(0.5)),
        quarter * f_minus * (T::one() + upsilon * T::lit(0.5)),
        quarter * f_plus - dev,
        quarter * f_plus + dev,
    ];
    let marg = [
        quarter * (T::lit(2.0) - upsilon * f_minus),
        quarter * (T::lit(2.0) + upsilon * f_minus),
    ];
    Ok(entropy_bits(&marg)? + T::one() - entropy_bits(&spectrum)?)
}

fn entropy_bits<T: Scalar>(probs: &[T]) -> Result<T> {
    let mut s = T::zero();
    for p in probs {
        if *p < -T::lit(1e-10) {
            return Err(Error::InvalidState(format!(
                "probability {p:e} below -1e-10"
            )));
        }
        if *p > T::zero() {
            s -= *p * p.log2();
        }
    }
    Ok(s)
}

/// X_LFS: central finite difference (step 1e-4) of the probe mutual
/// information.
pub fn rate_lfs<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> T {
    let h = T::lit(1e-4);
    let lo = (t - h).max(T::zero());
    let hi = t + h;
    match (
        lfs_mutual_information(sc, hi),
        lfs_mutual_information(sc, lo),
    ) {
        (Ok(a), Ok(b)) => (a - b) / (hi - lo),
        _ => T::nan(),
    }
}

/// Exact X_LFS for unital scalar families (beta = 0): the derivative of
/// 2 + 2h(1-f) + sum_s h(f + s|G|) with h(x) = (x/2) log2(x/2).
pub fn rate_lfs_analytic<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<T> {
    if !sc.has_scalar_coherence() || sc.kossakowski().beta != T::zero() {
        return Err(Error::Unsupported(
            "closed-form LFS rate requires a unital scalar family".into(),
        ));
    }
    let gs = sc.pop_rate();
    let e = (-T::lit(2.0) * gs * t).exp();
    let f = (T::one() + e) * T::lit(0.5);
    let fp = -gs * e;
    let g = abs_coherence(sc, t);
    let gp = rate_blp_scalar(sc, t);
    let h_prime = |x: T| -> T {
        if x <= T::zero() {
            T::zero()
        } else {
            (x * T::lit(0.5)).log2() * T::lit(0.5) + T::lit(0.5) / T::LN_2()
        }
    };
    Ok(-T::lit(2.0) * h_prime(T::one() - f) * fp
        + h_prime(f + g) * (fp + gp)
        + h_prime(f - g) * (fp - gp))
}

/// Dispatches the rate used by the measure pipeline.
pub fn rate<T: Scalar>(sc: &ChannelScenario<T>, measure: Measure, t: T) -> T {
    match measure {
        Measure::Blp => rate_blp(sc, t),
        Measure::Lpp => rate_lpp(sc, t),
        Measure::Rhp => rate_rhp(sc, t),
        Measure::Lfs => rate_lfs(sc, t),
    }
}

/// Samples one measure's rate on a time grid.
pub fn rate_series<T: Scalar>(
    sc: &ChannelScenario<T>,
    measure: Measure,
    times: &[T],
) -> RateSeries<T> {
    let method = if sc.has_scalar_coherence() && measure != Measure::Lfs {
        RateMethod::Analytic
    } else {
        RateMethod::Numeric
    };
    RateSeries {
        measure,
        times: times.to_vec(),
        values: times.iter().map(|t| rate(sc, measure, *t)).collect(),
        method,
    }
}

// --- windows and integration ------------------------------------------------

/// Locates the positivity windows of `rate` on [0, t_max].
///
/// The rate is sampled on a uniform grid (`grid_n` points, at least 1000 per
/// period pi recommended) plus any `seeds`; each sign change is refined by
/// bisection to 1e-9 in t. Non-finite samples count as non-positive, so
/// isolated singular points resolve to window closures.
pub fn positivity_windows<T: Scalar>(
    rate: impl Fn(T) -> T,
    measure: Measure,
    t_max: T,
    grid_n: usize,
    seeds: &[T],
) -> Vec<PositivityWindow<T>> {
    let mut ts: Vec<T> = (0..=grid_n)
        .map(|i| t_max * T::of_usize(i) / T::of_usize(grid_n.max(1)))
        .collect();
    for s in seeds {
        if *s > T::zero() && *s < t_max {
            ts.push(*s);
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();

    let is_pos = |t: T| -> bool {
        let v = rate(t);
        v.is_finite() && v > T::zero()
    };
    let tol = T::lit(1e-9);
    // edges are only refined to `tol`, so anything narrower than this is a
    // rounding sliver at a rate tangency, not a window
    let min_width = T::lit(1e-8);
    let mut windows = Vec::new();
    let mut open: Option<T> = None;
    let mut prev_t = ts[0];
    let mut prev_pos = is_pos(prev_t);
    if prev_pos {
        open = Some(prev_t);
    }
    for &t in &ts[1..] {
        let pos = is_pos(t);
        if pos != prev_pos {
            let edge = bisect_sign_change(&rate, prev_t, t, prev_pos, tol);
            if pos {
                open = Some(edge);
            } else if let Some(start) = open.take() {
                if edge - start > min_width {
                    windows.push(PositivityWindow {
                        t_start: start,
                        t_end: edge,
                        measure,
                    });
                }
            }
            prev_pos = pos;
        }
        prev_t = t;
    }
    if let Some(start) = open {
        if t_max - start > min_width {
            windows.push(PositivityWindow {
                t_start: start,
                t_end: t_max,
                measure,
            });
        }
    }
    windows
}

/// Truncation policy: integrate windows up to `t_star` and bound the tail by
/// the `decay_rate` envelope (zero decay means the integral diverges whenever
/// windows exist).
#[derive(Debug, Clone, Copy)]
pub struct Truncation<T> {
    pub t_star: T,
    pub decay_rate: T,
}

impl<T: Scalar> Truncation<T> {
    /// T* = max(5 periods, -ln(1e-9)/decay).
    pub fn for_decay(decay_rate: T) -> Self {
        let five_periods = T::lit(5.0) * T::PI();
        let t_star = if decay_rate > T::zero() {
            five_periods.max(T::lit(9.0 * std::f64::consts::LN_10) / decay_rate)
        } else {
            five_periods
        };
        Truncation { t_star, decay_rate }
    }

    /// The decaying envelope of the rate of `measure` for this scenario.
    pub fn for_measure(sc: &ChannelScenario<T>, measure: Measure) -> Self {
        let gs = sc.pop_rate();
        let lam = sc.coh_rate();
        let decay = match measure {
            Measure::Blp => lam,
            Measure::Lpp => T::lit(2.0) * (gs + lam),
            // the RHP rate is periodic with no decaying envelope
            Measure::Rhp => T::zero(),
            Measure::Lfs => {
                if gs > T::zero() {
                    (T::lit(2.0) * gs).min(lam)
                } else {
                    lam
                }
            }
        };
        Self::for_decay(decay)
    }
}

/// Integrates the positive rate over its windows with adaptive Simpson
/// quadrature (absolute tolerance 1e-9 per window).
///
/// Each window is pre-split into panels before refinement: at large N the
/// integrand concentrates in a narrow spike near the window end that a
/// single whole-window Simpson pass would sample as identically zero.
pub fn integrate_measure<T: Scalar>(
    rate: impl Fn(T) -> T,
    measure: Measure,
    windows: &[PositivityWindow<T>],
    truncation: Truncation<T>,
) -> MeasureResult<T> {
    let panels = 16usize;
    let tol = T::lit(1e-9) / T::of_usize(panels);
    let mut value = T::zero();
    let mut err = T::zero();
    let mut kept = Vec::new();
    for w in windows {
        if w.t_start >= truncation.t_star {
            continue;
        }
        let hi = w.t_end.min(truncation.t_star);
        let width = hi - w.t_start;
        for p in 0..panels {
            let a = w.t_start + width * T::of_usize(p) / T::of_usize(panels);
            let b = w.t_start + width * T::of_usize(p + 1) / T::of_usize(panels);
            let q = adaptive_simpson(&rate, a, b, tol, 30, 6_000);
            value += q.value.max(T::zero());
            err += q.error_estimate;
        }
        kept.push(*w);
    }
    let divergent = truncation.decay_rate <= T::zero() && !kept.is_empty();
    if truncation.decay_rate > T::zero() {
        // remaining revivals are bounded by the decaying envelope, one
        // window per period
        let per = (-truncation.decay_rate * T::PI()).exp();
        err += (-truncation.decay_rate * truncation.t_star).exp() / (T::one() - per);
    } else if divergent {
        err = T::infinity();
    }
    MeasureResult {
        measure,
        value,
        windows: kept,
        truncation_time: truncation.t_star,
        quadrature_error: err,
        divergent,
    }
}

/// Options for the end-to-end measure evaluation.
#[derive(Debug, Clone, Copy)]
pub struct MeasureOptions<T> {
    /// Grid points per period pi used for window detection.
    pub grid_per_period: usize,
    /// Override for the truncation time.
    pub t_star: Option<T>,
    /// Positivity floor applied to numerically differentiated rates during
    /// window detection, so finite-difference rounding noise cannot open
    /// spurious windows. Analytic sign expressions are exact and use none.
    pub noise_floor: T,
}

impl<T: Scalar> Default for MeasureOptions<T> {
    fn default() -> Self {
        Self {
            grid_per_period: 1200,
            t_star: None,
            noise_floor: T::lit(1e-10),
        }
    }
}

/// Window-midpoint seeds from the tan-window vertex, plus offsets around the
/// |G| = 0 singular points when z = 0. Purely a detection aid for the grid.
fn window_seeds<T: Scalar>(sc: &ChannelScenario<T>, measure: Measure, t_star: T) -> Vec<T> {
    let mut seeds = Vec::new();
    let z = sc.env.z;
    let n = T::of_usize(sc.env.n_spins);
    let w = T::one() - z * z;
    let k = sc.kossakowski();
    let decay = match measure {
        Measure::Rhp => T::lit(4.0) * k.gamma_z,
        Measure::Blp => T::lit(2.0) * sc.coh_rate(),
        Measure::Lpp | Measure::Lfs => T::lit(2.0) * (sc.pop_rate() + sc.coh_rate()),
    };
    let periods = <usize as num_traits::NumCast>::from((t_star / T::PI()).ceil()).unwrap_or(5);
    let base = if z.abs() > T::lit(1e-9) && decay > T::zero() {
        // vertex of the tan-window parabola
        let x_v = -n * w / (decay * z * z);
        T::PI() + x_v.atan()
    } else {
        T::lit(0.75) * T::PI()
    };
    for p in 0..periods {
        let off = T::of_usize(p) * T::PI();
        seeds.push(base + off);
        if z.abs() <= T::lit(1e-9) {
            let half_pi = T::PI() * T::lit(0.5) + off;
            for d in [1e-8, 1e-6, 1e-4, 1e-2] {
                seeds.push(half_pi + T::lit(d));
                seeds.push(half_pi - T::lit(d));
            }
        }
    }
    seeds
}

/// End-to-end evaluation: window detection on [0, T*] via the family's sign
/// expression, then quadrature of the true rate per window.
pub fn evaluate_measure<T: Scalar>(
    sc: &ChannelScenario<T>,
    measure: Measure,
    opts: &MeasureOptions<T>,
) -> Result<MeasureResult<T>> {
    let mut trunc = Truncation::for_measure(sc, measure);
    if let Some(t_star) = opts.t_star {
        trunc.t_star = t_star;
    }
    let grid_n = {
        let per = T::of_usize(opts.grid_per_period.max(1000));
        <usize as num_traits::NumCast>::from((trunc.t_star / T::PI() * per).ceil()).unwrap_or(2000)
    };
    let seeds = window_seeds(sc, measure, trunc.t_star);
    // LFS for unital scalar families goes through the exact derivative; the
    // finite-difference contract is pinned by tests against this path.
    let use_lfs_closed =
        measure == Measure::Lfs && sc.has_scalar_coherence() && sc.kossakowski().beta == T::zero();
    let rate_fn = |t: T| -> T {
        if use_lfs_closed {
            rate_lfs_analytic(sc, t).unwrap_or(T::nan())
        } else {
            rate(sc, measure, t)
        }
    };
    // Sign-equivalent detection expression. The scalar-family rates carry a
    // decaying positive envelope that underflows f64 at extreme rates; the
    // rescaled expressions share its zeros without the envelope.
    let scalar = sc.has_scalar_coherence();
    let k = sc.kossakowski();
    let z = sc.env.z;
    let n = T::of_usize(sc.env.n_spins);
    let pop2 = T::lit(2.0) * (sc.pop_rate() + sc.coh_rate());
    let lam = sc.coh_rate();
    let floor = opts.noise_floor;
    let detect_fn = move |t: T| -> T {
        if scalar {
            let (u, up) = kernel_u(z, t);
            match measure {
                Measure::Blp => n * T::lit(0.5) * up - lam * u,
                Measure::Lpp => n * up - pop2 * u,
                Measure::Rhp => -T::lit(2.0) * k.gamma_z * u + n * up * T::lit(0.5),
                Measure::Lfs => rate_fn(t) - floor,
            }
        } else {
            rate_fn(t) - floor
        }
    };
    let windows = positivity_windows(detect_fn, measure, trunc.t_star, grid_n, &seeds);
    Ok(integrate_measure(rate_fn, measure, &windows, trunc))
}

// --- time-local master equation ---------------------------------------------

/// Time-local rates (Gamma_+, Gamma_-, Gamma_z) of the isotropic family,
/// derived from the exact map: Gamma_+- = gamma0/4 and
/// Gamma_z = (gamma0 + N (1-z^2) sin 2t / u)/8, whose sign goes negative
/// exactly where the RHP rate is positive.
pub fn time_local_rates<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<(T, T, T)> {
    let gamma0 = match sc.family {
        channels::ChannelFamily::IsotropicDepolarizing { gamma0 } => gamma0,
        _ => {
            return Err(Error::Unsupported(
                "time-local rates are implemented for the isotropic family".into(),
            ))
        }
    };
    let z = sc.env.z;
    let n = T::of_usize(sc.env.n_spins);
    let (u, _) = kernel_u(z, t);
    if u < T::lit(1e-12) {
        return Err(Error::Singular(format!("|G_t| = 0 at t = {t}")));
    }
    let w = T::one() - z * z;
    let gamma_pm = gamma0 * T::lit(0.25);
    let gamma_z = (gamma0 + n * w * (t + t).sin() / u) * T::lit(0.125);
    Ok((gamma_pm, gamma_pm, gamma_z))
}

/// Frequency shift lambda(t) of the time-local equation (coefficient of
/// -i [lambda sigma_z, rho]).
pub fn time_local_shift<T: Scalar>(sc: &ChannelScenario<T>, t: T) -> Result<T> {
    if !matches!(
        sc.family,
        channels::ChannelFamily::IsotropicDepolarizing { .. }
    ) {
        return Err(Error::Unsupported(
            "time-local rates are implemented for the isotropic family".into(),
        ));
    }
    let (u, _) = kernel_u(sc.env.z, t);
    if u < T::lit(1e-12) {
        return Err(Error::Singular(format!("|G_t| = 0 at t = {t}")));
    }
    Ok(-T::of_usize(sc.env.n_spins) * sc.env.z / (T::lit(2.0) * u))
}

// --- BLP pair scan ------------------------------------------------------------

fn default_pairs<T: Scalar>(n: usize) -> Vec<[T; 3]> {
    let mut dirs = fibonacci_sphere::<T>(n);
    dirs.push([T::one(), T::zero(), T::zero()]);
    dirs.push([T::zero(), T::one(), T::zero()]);
    dirs.push([T::zero(), T::zero(), T::one()]);
    dirs
}

/// d/dt of the trace distance between the evolved antipodal pair +-n at one
/// time, maximized over the supplied directions.
fn blp_envelope_at<T: Scalar>(sc: &ChannelScenario<T>, t: T, dirs: &[[T; 3]]) -> Result<T> {
    let h = T::lit(1e-6);
    let lo = (t - h).max(T::zero());
    let s_lo = superoperator_matrix(sc, lo)?;
    let s_hi = superoperator_matrix(sc, t + h)?;
    let dist = |s: &[[T; 4]; 4], n: &[T; 3]| -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            let mut fi = T::zero();
            for j in 0..3 {
                fi += s[i + 1][j + 1] * n[j];
            }
            acc += fi * fi;
        }
        acc.sqrt()
    };
    let span = t + h - lo;
    let mut best = T::neg_infinity();
    for n in dirs {
        let rate = (dist(&s_hi, n) - dist(&s_lo, n)) / span;
        if rate > best {
            best = rate;
        }
    }
    Ok(best)
}

/// Envelope of the trace-distance derivative over `n_pairs` antipodal Bloch
/// pairs (golden-angle sphere sample plus the three axes), per grid time.
pub fn blp_pair_scan<T: Scalar>(
    sc: &ChannelScenario<T>,
    t_grid: &[T],
    n_pairs: usize,
) -> Result<RateSeries<T>> {
    if n_pairs < 100 {
        return Err(Error::InvalidParam(
            "blp_pair_scan requires at least 100 pairs".into(),
        ));
    }
    let dirs = default_pairs(n_pairs);
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        values.push(blp_envelope_at(sc, t, &dirs)?);
    }
    Ok(RateSeries {
        measure: Measure::Blp,
        times: t_grid.to_vec(),
        values,
        method: RateMethod::Numeric,
    })
}
