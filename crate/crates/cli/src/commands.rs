//! Subcommand implementations.

use std::path::Path;

use nmch_core::channels::{evolve_analytic, FamilyTag};
use nmch_core::measures::{evaluate_measure, rate, Measure, MeasureOptions, MeasureResult};
use nmch_core::oracle::{integrate_at, reduced_state, FullModel};
use nmch_core::qstate::{bloch_to_density, density_to_bloch, trace_distance, BlochVector};
use nmch_core::scan::{boundary_trace as trace_boundary, run_scan, BaseParams, ScanSpec};
use nmch_core::thresholds::{
    appendix_threshold_lines, gamma_star_analytic, gamma_star_bisection, BisectionOptions,
    LineVariant, Threshold, ThresholdAxis,
};
use nmch_core::{ChannelScenario64, KossakowskiMatrix64};

use crate::config::{parse_config, parse_measures, RunConfig};
use crate::output::{num, write_header, write_row, Sink};
use crate::{AppError, CommonArgs};

pub(crate) fn load_config(args: &CommonArgs) -> Result<RunConfig, AppError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| AppError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(m) = &args.measures {
        cfg.measures = parse_measures(0, m)?;
    }
    if let Some(t) = args.tmax {
        if t <= 0.0 {
            return Err(AppError::Config(format!("--tmax {t} must be positive")));
        }
        cfg.t_max = t;
    }
    if let Some(s) = args.samples {
        if s < 2 {
            return Err(AppError::Config("--samples must be >= 2".into()));
        }
        cfg.samples = s;
    }
    Ok(cfg)
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    (0..=cfg.samples)
        .map(|i| cfg.t_max * i as f64 / cfg.samples as f64)
        .collect()
}

fn measure_opts(cfg: &RunConfig) -> MeasureOptions<f64> {
    MeasureOptions {
        t_star: cfg.t_star,
        ..MeasureOptions::default()
    }
}

pub fn evolve(args: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let sc = cfg.scenario()?;
    let rho0 = bloch_to_density(
        &BlochVector::new(cfg.rx, cfg.ry, cfg.rz).map_err(|e| AppError::Config(e.to_string()))?,
    );
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(w, "evolve", &cfg, &["t", "rx", "ry", "rz"])?;
    for t in time_grid(&cfg) {
        let state = evolve_analytic(&sc, &rho0, t)?;
        let r = density_to_bloch(&state)?;
        write_row(w, &[num(t), num(r.rx), num(r.ry), num(r.rz)])?;
    }
    sink.finish()
}

pub fn rates(args: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let sc = cfg.scenario()?;
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(w, "rates", &cfg, &["t", "X_BLP", "X_LPP", "X_RHP", "X_LFS"])?;
    for t in time_grid(&cfg) {
        let row: Vec<String> = std::iter::once(num(t))
            .chain(Measure::ALL.iter().map(|m| num(rate(&sc, *m, t))))
            .collect();
        write_row(w, &row)?;
    }
    sink.finish()
}

fn measure_row(res: &MeasureResult<f64>) -> Vec<String> {
    vec![
        res.measure.label().to_string(),
        num(res.value),
        (res.is_markovian() as u8).to_string(),
        (res.divergent as u8).to_string(),
        res.windows.len().to_string(),
        num(res.truncation_time),
        num(res.quadrature_error),
    ]
}

pub fn measure(args: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let sc = cfg.scenario()?;
    let opts = measure_opts(&cfg);
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(
        w,
        "measure",
        &cfg,
        &[
            "measure",
            "N_value",
            "markovian_flag",
            "divergent",
            "windows",
            "truncation_time",
            "quadrature_error",
        ],
    )?;
    for m in &cfg.measures {
        let res = evaluate_measure(&sc, *m, &opts)?;
        write_row(w, &measure_row(&res))?;
    }
    sink.finish()
}

pub fn windows(args: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let sc = cfg.scenario()?;
    // the windows listing is clipped to the configured time horizon
    let opts = MeasureOptions {
        t_star: Some(cfg.t_max),
        ..MeasureOptions::default()
    };
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(
        w,
        "windows",
        &cfg,
        &["measure", "window_index", "t_start", "t_end"],
    )?;
    for m in &cfg.measures {
        let res = evaluate_measure(&sc, *m, &opts)?;
        for (i, win) in res.windows.iter().enumerate() {
            write_row(
                w,
                &[
                    m.label().to_string(),
                    i.to_string(),
                    num(win.t_start),
                    num(win.t_end),
                ],
            )?;
        }
    }
    sink.finish()
}

fn threshold_to_fields(measure: Measure, z: f64, method: &str, th: &Threshold<f64>) -> Vec<String> {
    let (value, unbounded) = match th {
        Threshold::Finite(v) => (num(*v), "0"),
        Threshold::Unbounded => ("inf".to_string(), "1"),
    };
    vec![
        measure.label().to_string(),
        num(z),
        method.to_string(),
        value,
        unbounded.to_string(),
    ]
}

pub fn threshold(args: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let bis_opts = BisectionOptions::default();
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(
        w,
        "threshold",
        &cfg,
        &["measure", "z", "method", "gamma_star", "unbounded"],
    )?;
    match cfg.family {
        FamilyTag::Isotropic => {
            for m in &cfg.measures {
                if let Ok(th) = gamma_star_analytic(*m, cfg.z, FamilyTag::Isotropic, cfg.n_spins) {
                    match &th {
                        Threshold::Finite(v) => {
                            eprintln!("{} z={}: analytic gamma* = {v}", m.label(), cfg.z)
                        }
                        Threshold::Unbounded => {
                            eprintln!("{} z={}: analytic gamma* = unbounded", m.label(), cfg.z)
                        }
                    }
                    write_row(w, &threshold_to_fields(*m, cfg.z, "analytic", &th))?;
                }
                let axis = ThresholdAxis::IsotropicGamma {
                    z: cfg.z,
                    n_spins: cfg.n_spins,
                };
                let res = gamma_star_bisection(*m, axis, &bis_opts)?;
                match &res.gamma_star {
                    Threshold::Finite(v) => {
                        eprintln!("{} z={}: bisection gamma* = {v}", m.label(), cfg.z)
                    }
                    Threshold::Unbounded => eprintln!(
                        "{} z={}: bisection gamma* = unbounded (cap {})",
                        m.label(),
                        cfg.z,
                        bis_opts.cap
                    ),
                }
                write_row(
                    w,
                    &threshold_to_fields(*m, cfg.z, "bisection", &res.gamma_star),
                )?;
            }
        }
        FamilyTag::AmplitudeDepolarizing => {
            for m in &cfg.measures {
                if let Ok(lines) = appendix_threshold_lines::<f64>(*m, cfg.z) {
                    for line in lines {
                        let tag = match line.variant {
                            LineVariant::Prose => "prose",
                            LineVariant::RateMaximization => "rate-maximization",
                        };
                        match line.value {
                            Threshold::Finite(c) => eprintln!(
                                "{} z={}: {tag} line {}*gamma_A + {}*gamma_D = {c}",
                                m.label(),
                                cfg.z,
                                line.coef_gamma_a,
                                line.coef_gamma_d
                            ),
                            Threshold::Unbounded => {
                                eprintln!("{} z={}: {tag} line unbounded (z = 0)", m.label(), cfg.z)
                            }
                        }
                    }
                }
                // gamma_D* by bisection at the configured gamma_A
                let axis = ThresholdAxis::AppendixGammaD {
                    gamma_a: cfg.gamma_a,
                    z: cfg.z,
                    n_spins: cfg.n_spins,
                };
                let res = gamma_star_bisection(*m, axis, &bis_opts)?;
                match &res.gamma_star {
                    Threshold::Finite(v) => eprintln!(
                        "{} z={}: bisection gamma_D* = {v} at gamma_A = {}",
                        m.label(),
                        cfg.z,
                        cfg.gamma_a
                    ),
                    Threshold::Unbounded => {
                        eprintln!("{} z={}: bisection gamma_D* = unbounded", m.label(), cfg.z)
                    }
                }
                write_row(
                    w,
                    &threshold_to_fields(*m, cfg.z, "bisection", &res.gamma_star),
                )?;
            }
        }
        FamilyTag::GeneralAnisotropic => {
            return Err(AppError::Config(
                "threshold needs the isotropic or appendix family (one rate axis)".into(),
            ));
        }
    }
    sink.finish()
}

pub fn scan(args: &CommonArgs, boundary_out: Option<&Path>) -> Result<(), AppError> {
    let cfg = load_config(args)?;
    let (Some(a1), Some(a2)) = (&cfg.axis1, &cfg.axis2) else {
        return Err(AppError::Config(
            "scan needs `axis1` and `axis2` in the config".into(),
        ));
    };
    let spec = ScanSpec {
        family: cfg.family,
        axis1: a1.to_axis(),
        axis2: a2.to_axis(),
        base: BaseParams {
            gamma0: cfg.gamma0,
            gamma_a: cfg.gamma_a,
            gamma_d: cfg.gamma_d,
            z: cfg.z,
            n_spins: cfg.n_spins,
        },
        measures: cfg.measures.clone(),
        opts: measure_opts(&cfg),
    };
    let result = run_scan(&spec)?;
    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(
        w,
        "scan",
        &cfg,
        &["axis1", "axis2", "measure", "N_value", "markovian_flag"],
    )?;
    for cell in &result.cells {
        if let Some(err) = &cell.error {
            write_row(
                w,
                &[
                    num(cell.axis1),
                    num(cell.axis2),
                    "error".into(),
                    err.replace(',', ";"),
                    "0".into(),
                ],
            )?;
            continue;
        }
        for m in &cell.measures {
            write_row(
                w,
                &[
                    num(cell.axis1),
                    num(cell.axis2),
                    m.measure.label().to_string(),
                    num(m.value),
                    (m.markovian as u8).to_string(),
                ],
            )?;
        }
    }
    sink.finish()?;

    if let Some(path) = boundary_out {
        let mut sink = Sink::create(Some(path))?;
        let w = sink.writer();
        write_header(
            w,
            "scan-boundary",
            &cfg,
            &["measure", "axis1", "axis2_boundary"],
        )?;
        for m in &cfg.measures {
            for (v1, v2) in trace_boundary(&spec, *m)? {
                write_row(w, &[m.label().to_string(), num(v1), num(v2)])?;
            }
        }
        sink.finish()?;
    }
    Ok(())
}

struct VerifyCase {
    label: String,
    scenario: ChannelScenario64,
}

fn default_verify_suite() -> Result<Vec<VerifyCase>, AppError> {
    let mut cases = Vec::new();
    let aniso = KossakowskiMatrix64::new(0.3, 0.2, 0.15, 0.1, -0.1)?;
    for n in 1..=4usize {
        for &z in &[0.0, 0.6] {
            cases.push(VerifyCase {
                label: format!("isotropic gamma0=0.4 z={z} N={n}"),
                scenario: ChannelScenario64::isotropic(0.4, z, n)?,
            });
            cases.push(VerifyCase {
                label: format!("appendix gamma_A=0.25 gamma_D=0.15 z={z} N={n}"),
                scenario: ChannelScenario64::amplitude_depolarizing(0.25, 0.15, z, n)?,
            });
            cases.push(VerifyCase {
                label: format!("anisotropic z={z} N={n}"),
                scenario: ChannelScenario64::anisotropic(aniso, z, n)?,
            });
        }
    }
    Ok(cases)
}

/// Max trace distance between the analytic map and the brute-force reduction
/// over the given grid.
fn verify_case(
    sc: &ChannelScenario64,
    rho0: &nmch_core::DensityMatrix64,
    grid: &[f64],
) -> Result<f64, AppError> {
    let model = FullModel::new(*sc);
    let full0 = model.initial_state(rho0)?;
    let positive: Vec<f64> = grid.iter().copied().filter(|t| *t > 0.0).collect();
    let traj = integrate_at(&model, &full0, &positive, model.default_dt())?;
    let mut worst = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let red = reduced_state(&model, state)?;
        let ana = evolve_analytic(sc, rho0, *t)?;
        worst = worst.max(trace_distance(&red, &ana)?);
    }
    Ok(worst)
}

pub fn verify(args: &CommonArgs, tolerance: f64) -> Result<(), AppError> {
    let (cases, cfg, grid, rho0) = if args.config.is_some() {
        let cfg = load_config(args)?;
        let sc = cfg.scenario()?;
        let t_end = cfg.t_max.min(10.0);
        let grid: Vec<f64> = (0..=20).map(|i| t_end * i as f64 / 20.0).collect();
        let rho0 = bloch_to_density(
            &BlochVector::new(cfg.rx, cfg.ry, cfg.rz)
                .map_err(|e| AppError::Config(e.to_string()))?,
        );
        (
            vec![VerifyCase {
                label: "configured scenario".into(),
                scenario: sc,
            }],
            cfg,
            grid,
            rho0,
        )
    } else {
        let cfg = RunConfig::default();
        let grid: Vec<f64> = (0..=12).map(|i| 0.5 * i as f64).collect();
        let rho0 = bloch_to_density(&BlochVector::new(0.6, 0.3, 0.5).unwrap());
        (default_verify_suite()?, cfg, grid, rho0)
    };

    let mut sink = Sink::create(args.out.as_deref())?;
    let w = sink.writer();
    write_header(
        w,
        "verify",
        &cfg,
        &[
            "case",
            "family",
            "n_spins",
            "z",
            "max_trace_distance",
            "pass",
        ],
    )?;
    let mut worst_overall = 0.0f64;
    let mut failures = Vec::new();
    for case in &cases {
        let worst = verify_case(&case.scenario, &rho0, &grid)?;
        let pass = worst <= tolerance;
        eprintln!(
            "verify {}: max trace distance {worst:.3e} -> {}",
            case.label,
            if pass { "ok" } else { "MISMATCH" }
        );
        write_row(
            w,
            &[
                case.label.replace(',', ";"),
                case.scenario.tag().label().to_string(),
                case.scenario.env.n_spins.to_string(),
                num(case.scenario.env.z),
                num(worst),
                (pass as u8).to_string(),
            ],
        )?;
        worst_overall = worst_overall.max(worst);
        if !pass {
            failures.push(case.label.clone());
        }
    }
    sink.finish()?;
    eprintln!("verify: worst case {worst_overall:.3e} (tolerance {tolerance:.1e})");
    if !failures.is_empty() {
        return Err(AppError::VerifyMismatch(format!(
            "{} case(s) above tolerance {tolerance:.1e}: {}",
            failures.len(),
            failures.join("; ")
        )));
    }
    Ok(())
}
