//! Property and invariant tests across the crate: state-space identities,
//! map validity under random parameters, rate-sign invariants, window
//! nesting and measure monotonicity.

use proptest::prelude::*;

use nmch_core::channels::{
    abs_coherence, evolve_analytic, map_volume, population_factor, superoperator_matrix,
    ChannelScenario, KossakowskiMatrix,
};
use nmch_core::measures::{
    evaluate_measure, rate, rate_rhp_finite, rhp_signed, Measure, MeasureOptions,
};
use nmch_core::qstate::{
    bloch_to_density, eigh, mutual_information, trace_distance, trace_norm, BlochVector, CMatrix,
    DensityMatrix,
};

type Sc = ChannelScenario<f64>;

fn bloch_strategy() -> impl Strategy<Value = BlochVector<f64>> {
    (
        0.0..0.999f64,
        0.0..std::f64::consts::PI,
        0.0..std::f64::consts::TAU,
    )
        .prop_map(|(r, theta, phi)| {
            BlochVector::new(
                r * theta.sin() * phi.cos(),
                r * theta.sin() * phi.sin(),
                r * theta.cos(),
            )
            .unwrap()
        })
}

/// Any of the three families with PSD-valid random parameters.
fn scenario_strategy() -> impl Strategy<Value = Sc> {
    let iso = (0.0..2.0f64, -1.0..1.0f64, 1usize..4)
        .prop_map(|(g, z, n)| Sc::isotropic(g, z, n).unwrap());
    let app = (0.0..1.0f64, 0.0..1.0f64, -1.0..1.0f64, 1usize..3)
        .prop_map(|(ga, gd, z, n)| Sc::amplitude_depolarizing(ga, gd, z, n).unwrap());
    let gen = (
        0.05..1.0f64,
        0.05..1.0f64,
        0.0..1.0f64,
        0.0..0.95f64,
        0.0..std::f64::consts::TAU,
        -1.0..1.0f64,
    )
        .prop_map(|(gx, gy, gz, frac, th, z)| {
            let r = frac * (gx * gy).sqrt();
            let k = KossakowskiMatrix::new(gx, gy, gz, r * th.cos(), r * th.sin()).unwrap();
            Sc::anisotropic(k, z, 1).unwrap()
        });
    prop_oneof![iso, app, gen]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_distance_is_half_trace_norm(a in bloch_strategy(), b in bloch_strategy()) {
        let ra = bloch_to_density(&a);
        let rb = bloch_to_density(&b);
        let d = trace_distance(&ra, &rb).unwrap();
        let n = trace_norm(&ra.mat().sub(rb.mat())).unwrap();
        prop_assert!((d - 0.5 * n).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_symmetric_and_triangle(
        a in bloch_strategy(),
        b in bloch_strategy(),
        c in bloch_strategy(),
    ) {
        let (ra, rb, rc) = (bloch_to_density(&a), bloch_to_density(&b), bloch_to_density(&c));
        let dab = trace_distance(&ra, &rb).unwrap();
        let dba = trace_distance(&rb, &ra).unwrap();
        prop_assert!((dab - dba).abs() < 1e-12);
        let dac = trace_distance(&ra, &rc).unwrap();
        let dcb = trace_distance(&rc, &rb).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dab));
    }

    #[test]
    fn product_states_have_zero_mutual_information(a in bloch_strategy(), b in bloch_strategy()) {
        let ab = bloch_to_density(&a).tensor(&bloch_to_density(&b));
        prop_assert!(mutual_information(&ab, (2, 2)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn eigh_reconstructs_small_hermitian(seed in 0u64..u64::MAX, dim in 2usize..7) {
        let mut s = seed | 1;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::<f64>::zeros(dim);
        for r in 0..dim {
            for c in r..dim {
                let e = if r == c {
                    nmch_core::qstate::c(next(), 0.0)
                } else {
                    nmch_core::qstate::c(next(), next())
                };
                m[(r, c)] = e;
                m[(c, r)] = e.conj();
            }
        }
        let d = eigh(&m).unwrap();
        prop_assert!(d.reconstruct().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn evolved_states_are_valid(sc in scenario_strategy(), r0 in bloch_strategy(), t in 0.0..8.0f64) {
        // DensityMatrix::new inside evolve_analytic enforces Hermiticity,
        // unit trace and positivity
        let rho0 = bloch_to_density(&r0);
        prop_assert!(evolve_analytic(&sc, &rho0, t).is_ok());
    }

    #[test]
    fn coherence_modulus_even_in_z(sc in scenario_strategy(), r0 in bloch_strategy(), t in 0.0..8.0f64) {
        let mut flipped = sc;
        flipped.env.z = -sc.env.z;
        let rho0 = bloch_to_density(&r0);
        let a = evolve_analytic(&sc, &rho0, t).unwrap();
        if sc.has_scalar_coherence() {
            // scalar families: |A+-| is even in z for any initial state
            let b = evolve_analytic(&flipped, &rho0, t).unwrap();
            prop_assert!((a.mat()[(0, 1)].norm() - b.mat()[(0, 1)].norm()).abs() < 1e-12);
        } else {
            // with coherence mixing (alpha != 0) the exchange z -> -z is the
            // complex conjugation of the whole problem: it pairs with
            // alpha -> -alpha and the transposed initial state
            if let nmch_core::channels::ChannelFamily::GeneralAnisotropic(k) = flipped.family {
                let conj_k =
                    KossakowskiMatrix::new(k.gamma_x, k.gamma_y, k.gamma_z, -k.alpha, k.beta)
                        .unwrap();
                flipped.family = nmch_core::channels::ChannelFamily::GeneralAnisotropic(conj_k);
            }
            let conj = BlochVector::new(r0.rx, -r0.ry, r0.rz).unwrap();
            let b = evolve_analytic(&flipped, &bloch_to_density(&conj), t).unwrap();
            prop_assert!((a.mat()[(0, 1)].norm() - b.mat()[(0, 1)].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn populations_ignore_environment(sc in scenario_strategy(), r0 in bloch_strategy(), t in 0.0..8.0f64) {
        let rho0 = bloch_to_density(&r0);
        let evolved = evolve_analytic(&sc, &rho0, t).unwrap();
        // same channel, different environment
        let mut other = sc;
        other.env.z = (sc.env.z * -0.5).clamp(-1.0, 1.0);
        other.env.n_spins = sc.env.n_spins % 3 + 1;
        let alt = evolve_analytic(&other, &rho0, t).unwrap();
        prop_assert!((evolved.mat()[(0, 0)].re - alt.mat()[(0, 0)].re).abs() < 1e-12);
        // and the analytic population factors reproduce them
        let (fp, fm) = population_factor(&sc, t);
        let k = sc.kossakowski();
        let mut expect = rho0.mat()[(0, 0)].re * fp / 2.0 + rho0.mat()[(1, 1)].re * fm / 2.0;
        if k.beta != 0.0 {
            expect -= k.beta * fm / (k.gamma_x + k.gamma_y);
        }
        prop_assert!((evolved.mat()[(0, 0)].re - expect).abs() < 1e-12);
    }

    #[test]
    fn superoperator_preserves_trace_row(sc in scenario_strategy(), t in 0.0..8.0f64) {
        let s = superoperator_matrix(&sc, t).unwrap();
        prop_assert_eq!(s[0], [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn window_interiors_are_positive(g in 0.05..1.2f64, z in 0.05..0.95f64) {
        let sc = Sc::isotropic(g, z, 1).unwrap();
        for m in [Measure::Rhp, Measure::Blp, Measure::Lpp] {
            let res = evaluate_measure(&sc, m, &MeasureOptions::default()).unwrap();
            for w in res.windows.iter().take(2) {
                // spot-check 5 interior points
                for i in 1..=5 {
                    let t = w.t_start + (w.t_end - w.t_start) * i as f64 / 6.0;
                    let v = rate(&sc, m, t);
                    prop_assert!(!v.is_finite() || v >= 0.0, "{} at t={t}: {v}", m.label());
                }
            }
            prop_assert!(res.value >= 0.0);
        }
    }
}

#[test]
fn all_rates_nonpositive_at_z_one() {
    let scenarios = [
        Sc::isotropic(0.4, 1.0, 1).unwrap(),
        Sc::isotropic(1.7, 1.0, 3).unwrap(),
        Sc::amplitude_depolarizing(0.3, 0.2, 1.0, 1).unwrap(),
        Sc::amplitude_depolarizing(0.0, 0.6, 1.0, 2).unwrap(),
    ];
    for sc in scenarios {
        for m in Measure::ALL {
            for i in 1..200 {
                let t = 0.05 * i as f64;
                let v = rate(&sc, m, t);
                assert!(v <= 1e-9, "{} rate {v} at t={t}", m.label());
            }
            let res = evaluate_measure(&sc, m, &MeasureOptions::default()).unwrap();
            assert!(res.is_markovian(), "{}", m.label());
            assert!(res.value < 1e-10);
        }
    }
}

#[test]
fn window_nesting_on_spec_grid() {
    // gamma in {0.2, 0.5, 1.0} x z in {0.2, 0.5, 0.8}: every positivity
    // window of an inner measure lies inside some window of the outer one
    // (LFS in LPP in BLP in RHP). Near the LFS threshold the first LFS
    // window can sit a period later than the first LPP window, so the
    // containment is per-window rather than first-vs-first.
    let slack = 1e-6;
    let horizon = 4.0 * std::f64::consts::PI;
    let opts = MeasureOptions {
        t_star: Some(horizon),
        ..Default::default()
    };
    for g in [0.2, 0.5, 1.0] {
        for z in [0.2, 0.5, 0.8] {
            let sc = Sc::isotropic(g, z, 1).unwrap();
            let windows_of = |m: Measure| -> Vec<(f64, f64)> {
                evaluate_measure(&sc, m, &opts)
                    .unwrap()
                    .windows
                    .iter()
                    .map(|w| (w.t_start, w.t_end))
                    .collect()
            };
            let chain = [
                windows_of(Measure::Lfs),
                windows_of(Measure::Lpp),
                windows_of(Measure::Blp),
                windows_of(Measure::Rhp),
            ];
            for pair in chain.windows(2) {
                let (inner_list, outer_list) = (&pair[0], &pair[1]);
                for inner in inner_list {
                    // ignore windows clipped by the common horizon
                    if inner.1 >= horizon - 1e-6 {
                        continue;
                    }
                    let contained = outer_list
                        .iter()
                        .any(|o| inner.0 >= o.0 - slack && inner.1 <= o.1 + slack);
                    assert!(
                        contained,
                        "nesting violated at gamma={g} z={z}: {inner:?} not in any of {outer_list:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn analytic_rates_match_finite_differences() {
    // |analytic - central difference| <= 1e-5 away from kinks
    let scenarios = [
        Sc::isotropic(0.35, 0.45, 1).unwrap(),
        Sc::isotropic(0.8, 0.2, 2).unwrap(),
        Sc::amplitude_depolarizing(0.25, 0.1, 0.6, 1).unwrap(),
    ];
    let h = 1e-6;
    for sc in scenarios {
        for i in 1..60 {
            let t = 0.1 * i as f64;
            let blp_num = (abs_coherence(&sc, t + h) - abs_coherence(&sc, t - h)) / (2.0 * h);
            assert!(
                (rate(&sc, Measure::Blp, t) - blp_num).abs() < 1e-5,
                "BLP t={t}"
            );
            let lpp_num =
                (map_volume(&sc, t + h).unwrap() - map_volume(&sc, t - h).unwrap()) / (2.0 * h);
            // map_volume is |det|; the signed rate matches where det > 0
            assert!(
                (rate(&sc, Measure::Lpp, t) - lpp_num).abs() < 1e-5,
                "LPP t={t}"
            );
        }
    }
}

#[test]
fn finite_tau_rhp_tracks_analytic_sign() {
    let sc = Sc::isotropic(0.7, 0.45, 1).unwrap();
    for i in 1..120 {
        let t = 0.05 * i as f64;
        let signed = rhp_signed(&sc, t);
        let finite = rate_rhp_finite(&sc, t, 1e-5).unwrap();
        if signed.abs() > 1e-4 {
            assert_eq!(signed > 0.0, finite > 0.0, "t = {t}: {signed} vs {finite}");
        }
    }
}

#[test]
fn measures_monotone_in_mixedness() {
    // more environment mixedness (smaller |z|) never decreases a measure
    let opts = MeasureOptions {
        t_star: Some(5.0 * std::f64::consts::PI),
        ..Default::default()
    };
    for g in [0.2, 0.5, 1.0] {
        for m in Measure::ALL {
            let mut prev = f64::INFINITY;
            for z in [0.2, 0.5, 0.8] {
                let sc = Sc::isotropic(g, z, 1).unwrap();
                let v = evaluate_measure(&sc, m, &opts).unwrap().value;
                assert!(
                    v <= prev + 1e-9,
                    "{} gamma={g}: value {v} at z={z} exceeds {prev} at smaller z",
                    m.label()
                );
                prev = v;
            }
        }
    }
}

#[test]
fn density_matrix_invariants_on_constructors() {
    for dim in [2usize, 4, 8] {
        let m = DensityMatrix::<f64>::maximally_mixed(dim);
        assert_eq!(m.dim(), dim);
        assert!(m.eigenvalues().unwrap().iter().all(|l| *l >= -1e-10));
    }
    let psi = [
        nmch_core::qstate::c::<f64>(0.6, 0.0),
        nmch_core::qstate::c::<f64>(0.0, 0.8),
    ];
    let pure = DensityMatrix::from_pure(&psi).unwrap();
    let evs: Vec<f64> = pure.eigenvalues().unwrap();
    assert!((evs[1] - 1.0).abs() < 1e-12 && evs[0].abs() < 1e-12);
}
