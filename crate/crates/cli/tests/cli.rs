//! End-to-end tests of the nmch binary: exit codes, CSV schemas,
//! determinism and the config round-trip through output headers.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn nmch(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nmch"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn data_rows(csv: &str) -> Vec<String> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1) // column header row
        .map(str::to_string)
        .collect()
}

#[test]
fn config_errors_exit_1_with_line_numbers() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "family=isotropic\nz=1.5\n");
    let out = nmch(&["rates", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains('z'), "{err}");

    let cfg = write_cfg(dir.path(), "unknown.cfg", "family=isotropic\nbogus=3\n");
    let out = nmch(&["rates", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    // missing --config entirely
    let out = nmch(&["rates"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rates_schema_and_values() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "iso.cfg", "family=isotropic\ngamma0=0.5\nz=1\n");
    let out = nmch(
        &["rates", "--config", &cfg, "--tmax", "2.0", "--samples", "4"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# units: J = 1"));
    assert!(text.lines().any(|l| l == "t,X_BLP,X_LPP,X_RHP,X_LFS"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        // z = 1 is Markovian: all rates non-positive
        for f in &fields[1..] {
            let v: f64 = f.parse().unwrap();
            assert!(v <= 1e-12, "{row}");
        }
    }
}

#[test]
fn evolve_initial_state_row() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "ev.cfg",
        "family=isotropic\ngamma0=0.3\nz=0.5\nrx=0.6\nry=0\nrz=0.8\n",
    );
    let out = nmch(
        &[
            "evolve",
            "--config",
            &cfg,
            "--tmax",
            "1.0",
            "--samples",
            "2",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    let first: Vec<f64> = rows[0].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.6).abs() < 1e-12);
    assert!((first[3] - 0.8).abs() < 1e-12);
}

#[test]
fn windows_schema_matches_analytic_endpoints() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "w.cfg", "family=isotropic\ngamma0=0.5\nz=0.5\n");
    let out = nmch(
        &[
            "windows",
            "--config",
            &cfg,
            "--measures",
            "blp",
            "--tmax",
            "3.141592653589793",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(fields[0], "BLP");
    assert_eq!(fields[1], "0");
    let t_start: f64 = fields[2].parse().unwrap();
    let t_end: f64 = fields[3].parse().unwrap();
    assert!((t_start - 1.7595068575784585).abs() < 1e-6);
    assert!((t_end - 2.489234513805425).abs() < 1e-6);
}

#[test]
fn measure_flags_markovian_at_z_one() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "m.cfg", "family=isotropic\ngamma0=0.7\nz=1\n");
    let out = nmch(&["measure", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let value: f64 = fields[1].parse().unwrap();
        assert!(value.abs() < 1e-10, "{row}");
        assert_eq!(fields[2], "1", "markovian flag in {row}");
    }
}

#[test]
fn threshold_prints_analytic_and_bisection() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "t.cfg", "family=isotropic\ngamma0=0.1\nz=0.5\n");
    let out = nmch(&["threshold", "--config", &cfg, "--measures", "rhp"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("analytic gamma* = 1.5"), "{err}");
    assert!(err.contains("bisection gamma* = 1.49"), "{err}");
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("RHP") && rows[0].contains("analytic"));
    assert!(rows[1].contains("bisection"));

    // z = 0: unbounded flag set, no float sentinel
    let cfg = write_cfg(dir.path(), "t0.cfg", "family=isotropic\ngamma0=0.1\nz=0\n");
    let out = nmch(&["threshold", "--config", &cfg, "--measures", "blp"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[3], "inf");
        assert_eq!(fields[4], "1");
    }
}

#[test]
fn scan_requires_axes_and_is_deterministic() {
    let dir = tempdir().unwrap();
    let no_axes = write_cfg(
        dir.path(),
        "s0.cfg",
        "family=isotropic\ngamma0=0.1\nz=0.5\n",
    );
    let out = nmch(&["scan", "--config", &no_axes], &[]);
    assert_eq!(out.status.code(), Some(1));

    let cfg = write_cfg(
        dir.path(),
        "s.cfg",
        "family=isotropic\nmeasures=rhp,blp\naxis1=z,0.3,0.8,3\naxis2=gamma,0.1,3.0,4\n",
    );
    let a = nmch(&["scan", "--config", &cfg], &[("NMCH_THREADS", "2")]);
    assert_eq!(a.status.code(), Some(0));
    let b = nmch(&["scan", "--config", &cfg], &[("NMCH_THREADS", "2")]);
    let single = nmch(&["scan", "--config", &cfg], &[("NMCH_THREADS", "1")]);
    assert_eq!(
        stdout(&a),
        stdout(&b),
        "scan must be byte-identical across runs"
    );
    assert_eq!(
        stdout(&a),
        stdout(&single),
        "scan must not depend on thread count"
    );
    let rows = data_rows(&stdout(&a));
    assert_eq!(rows.len(), 3 * 4 * 2);
    // schema: axis1, axis2, measure, N_value, markovian_flag
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(fields.len(), 5);
    assert!(fields[2] == "RHP" || fields[2] == "BLP");
}

#[test]
fn scan_boundary_polyline() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "sb.cfg",
        "family=isotropic\nmeasures=rhp\naxis1=z,0.4,0.6,2\naxis2=gamma,0.5,4.0,8\n",
    );
    let boundary = dir.path().join("boundary.csv");
    let out = nmch(
        &[
            "scan",
            "--config",
            &cfg,
            "--out",
            dir.path().join("scan.csv").to_str().unwrap(),
            "--boundary-out",
            boundary.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&boundary).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let z: f64 = fields[1].parse().unwrap();
        let g: f64 = fields[2].parse().unwrap();
        let expect = (1.0 - z * z) / z;
        assert!((g - expect).abs() < 0.05, "{row} vs {expect}");
    }
}

#[test]
fn header_round_trips_through_config() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "rt.cfg",
        "family=appendix\ngamma_A=0.2\ngamma_D=0.1\nz=0.5\nn_spins=2\nmeasures=blp,rhp\n",
    );
    let first = nmch(
        &["rates", "--config", &cfg, "--tmax", "2.5", "--samples", "3"],
        &[],
    );
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    // turn the `# key: value` header back into a config file
    let mut round = String::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            break;
        };
        let Some((key, value)) = rest.split_once(':') else {
            continue;
        };
        if matches!(key.trim(), "version" | "command" | "units" | "columns") {
            continue;
        }
        round.push_str(&format!("{} = {}\n", key.trim(), value.trim()));
    }
    let cfg2 = write_cfg(dir.path(), "rt2.cfg", &round);
    // t_max and samples are echoed in the header, so no flags this time
    let second = nmch(&["rates", "--config", &cfg2], &[]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(
        text,
        stdout(&second),
        "echoed config must reproduce the run"
    );
}

#[test]
fn verify_exit_codes() {
    let dir = tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "v.cfg",
        "family=isotropic\ngamma0=0.4\nz=0.5\nt_max=3\n",
    );
    let ok = nmch(&["verify", "--config", &cfg], &[]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    // an unattainable tolerance must report a mismatch via exit code 3
    let bad = nmch(&["verify", "--config", &cfg, "--tolerance", "1e-18"], &[]);
    assert_eq!(bad.status.code(), Some(3));
}
