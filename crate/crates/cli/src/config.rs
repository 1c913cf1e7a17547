//! Plain `key = value` run configuration with `#` comments.
//!
//! Defaults: J = 1 (all rates in units of J, times in 1/J), N = 1, z = 0,
//! t_max = 10 pi, samples = 2000, all four measures. Unknown keys are
//! rejected with their line number.

use std::fmt::Write as _;

use nmch_core::channels::FamilyTag;
use nmch_core::measures::Measure;
use nmch_core::scan::{Axis, AxisParam};
use nmch_core::{ChannelScenario64, KossakowskiMatrix64};

use crate::AppError;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn to_axis(&self) -> Axis<f64> {
        Axis {
            param: self.param,
            min: self.min,
            max: self.max,
            steps: self.steps,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: FamilyTag,
    pub gamma0: f64,
    pub gamma_a: f64,
    pub gamma_d: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
    pub n_spins: usize,
    pub t_max: f64,
    pub samples: usize,
    pub measures: Vec<Measure>,
    /// Evolve initial Bloch vector.
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
    /// Optional truncation-time override for measure integrals.
    pub t_star: Option<f64>,
    pub axis1: Option<AxisSpec>,
    pub axis2: Option<AxisSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            family: FamilyTag::Isotropic,
            gamma0: 0.0,
            gamma_a: 0.0,
            gamma_d: 0.0,
            gamma_x: 0.0,
            gamma_y: 0.0,
            gamma_z: 0.0,
            alpha: 0.0,
            beta: 0.0,
            z: 0.0,
            n_spins: 1,
            t_max: 10.0 * std::f64::consts::PI,
            samples: 2000,
            measures: Measure::ALL.to_vec(),
            rx: 1.0,
            ry: 0.0,
            rz: 0.0,
            t_star: None,
            axis1: None,
            axis2: None,
        }
    }
}

fn config_err(line: usize, msg: impl Into<String>) -> AppError {
    AppError::Config(format!("line {line}: {}", msg.into()))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, AppError> {
    v.parse::<f64>()
        .map_err(|_| config_err(line, format!("{key} = {v} is not a number")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, AppError> {
    v.parse::<usize>()
        .map_err(|_| config_err(line, format!("{key} = {v} is not a non-negative integer")))
}

fn parse_axis(line: usize, key: &str, v: &str) -> Result<AxisSpec, AppError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(config_err(
            line,
            format!("{key} must be `name,min,max,steps`, got `{v}`"),
        ));
    }
    let param = AxisParam::parse(parts[0])
        .ok_or_else(|| config_err(line, format!("unknown axis parameter `{}`", parts[0])))?;
    let min = parse_f64(line, key, parts[1])?;
    let max = parse_f64(line, key, parts[2])?;
    let steps = parse_usize(line, key, parts[3])?;
    Ok(AxisSpec {
        param,
        min,
        max,
        steps,
    })
}

pub fn parse_measures(line: usize, v: &str) -> Result<Vec<Measure>, AppError> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m = Measure::parse(part)
            .ok_or_else(|| config_err(line, format!("unknown measure `{part}`")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(config_err(line, "measures list is empty"));
    }
    Ok(out)
}

/// Parses `key = value` text into a resolved configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, AppError> {
    let mut cfg = RunConfig::default();
    let mut family_set = false;
    let mut rate_keys: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{stripped}`")))?;
        if value.is_empty() {
            return Err(config_err(line, format!("key `{key}` has no value")));
        }
        match key {
            "family" => {
                cfg.family = match value.to_ascii_lowercase().as_str() {
                    "isotropic" => FamilyTag::Isotropic,
                    "appendix" | "amplitude_depolarizing" => FamilyTag::AmplitudeDepolarizing,
                    "anisotropic" | "general" => FamilyTag::GeneralAnisotropic,
                    other => {
                        return Err(config_err(
                            line,
                            format!(
                                "unknown family `{other}` (isotropic | appendix | anisotropic)"
                            ),
                        ))
                    }
                };
                family_set = true;
            }
            "gamma0" => {
                cfg.gamma0 = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "gamma_A" | "gamma_a" => {
                cfg.gamma_a = parse_f64(line, key, value)?;
                rate_keys.push((line, "gamma_A".into()));
            }
            "gamma_D" | "gamma_d" => {
                cfg.gamma_d = parse_f64(line, key, value)?;
                rate_keys.push((line, "gamma_D".into()));
            }
            "gamma_x" => {
                cfg.gamma_x = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "gamma_y" => {
                cfg.gamma_y = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "gamma_z" => {
                cfg.gamma_z = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "alpha" => {
                cfg.alpha = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "beta" => {
                cfg.beta = parse_f64(line, key, value)?;
                rate_keys.push((line, key.into()));
            }
            "z" => {
                let z = parse_f64(line, key, value)?;
                if !(-1.0..=1.0).contains(&z) {
                    return Err(config_err(line, format!("z = {z} out of range [-1, 1]")));
                }
                cfg.z = z;
            }
            "n_spins" => {
                let n = parse_usize(line, key, value)?;
                if n == 0 {
                    return Err(config_err(line, "n_spins must be >= 1"));
                }
                cfg.n_spins = n;
            }
            "t_max" => {
                let t = parse_f64(line, key, value)?;
                if t <= 0.0 {
                    return Err(config_err(line, format!("t_max = {t} must be positive")));
                }
                cfg.t_max = t;
            }
            "samples" => {
                let s = parse_usize(line, key, value)?;
                if s < 2 {
                    return Err(config_err(line, "samples must be >= 2"));
                }
                cfg.samples = s;
            }
            "measures" => cfg.measures = parse_measures(line, value)?,
            "rx" => cfg.rx = parse_f64(line, key, value)?,
            "ry" => cfg.ry = parse_f64(line, key, value)?,
            "rz" => cfg.rz = parse_f64(line, key, value)?,
            "t_star" => {
                let t = parse_f64(line, key, value)?;
                if t <= 0.0 {
                    return Err(config_err(line, format!("t_star = {t} must be positive")));
                }
                cfg.t_star = Some(t);
            }
            "axis1" => cfg.axis1 = Some(parse_axis(line, key, value)?),
            "axis2" => cfg.axis2 = Some(parse_axis(line, key, value)?),
            other => return Err(config_err(line, format!("unknown key `{other}`"))),
        }
    }
    if !family_set {
        return Err(AppError::Config("missing required key `family`".into()));
    }
    // rate keys must belong to the selected family
    for (line, key) in &rate_keys {
        let ok = match cfg.family {
            FamilyTag::Isotropic => key == "gamma0",
            FamilyTag::AmplitudeDepolarizing => key == "gamma_A" || key == "gamma_D",
            FamilyTag::GeneralAnisotropic => {
                matches!(
                    key.as_str(),
                    "gamma_x" | "gamma_y" | "gamma_z" | "alpha" | "beta"
                )
            }
        };
        if !ok {
            return Err(config_err(
                *line,
                format!(
                    "key `{key}` does not belong to the {} family",
                    cfg.family.label()
                ),
            ));
        }
    }
    let norm = cfg.rx * cfg.rx + cfg.ry * cfg.ry + cfg.rz * cfg.rz;
    if norm > 1.0 + 1e-10 {
        return Err(AppError::Config(format!(
            "initial Bloch vector norm {} exceeds 1",
            norm.sqrt()
        )));
    }
    // constructing the scenario validates rate signs and PSD
    cfg.scenario()
        .map_err(|e| AppError::Config(e.to_string()))?;
    Ok(cfg)
}

impl RunConfig {
    pub fn scenario(&self) -> nmch_core::Result<ChannelScenario64> {
        match self.family {
            FamilyTag::Isotropic => ChannelScenario64::isotropic(self.gamma0, self.z, self.n_spins),
            FamilyTag::AmplitudeDepolarizing => ChannelScenario64::amplitude_depolarizing(
                self.gamma_a,
                self.gamma_d,
                self.z,
                self.n_spins,
            ),
            FamilyTag::GeneralAnisotropic => ChannelScenario64::anisotropic(
                KossakowskiMatrix64::new(
                    self.gamma_x,
                    self.gamma_y,
                    self.gamma_z,
                    self.alpha,
                    self.beta,
                )?,
                self.z,
                self.n_spins,
            ),
        }
    }

    /// Resolved key/value pairs, echoed into output headers. Numbers carry
    /// 17 significant digits so the echo re-parses bit-identically.
    pub fn echo_entries(&self) -> Vec<(String, String)> {
        let f = |v: f64| format!("{v:.16e}");
        let mut out = vec![(
            "family".to_string(),
            match self.family {
                FamilyTag::Isotropic => "isotropic",
                FamilyTag::AmplitudeDepolarizing => "appendix",
                FamilyTag::GeneralAnisotropic => "anisotropic",
            }
            .to_string(),
        )];
        match self.family {
            FamilyTag::Isotropic => out.push(("gamma0".into(), f(self.gamma0))),
            FamilyTag::AmplitudeDepolarizing => {
                out.push(("gamma_A".into(), f(self.gamma_a)));
                out.push(("gamma_D".into(), f(self.gamma_d)));
            }
            FamilyTag::GeneralAnisotropic => {
                out.push(("gamma_x".into(), f(self.gamma_x)));
                out.push(("gamma_y".into(), f(self.gamma_y)));
                out.push(("gamma_z".into(), f(self.gamma_z)));
                out.push(("alpha".into(), f(self.alpha)));
                out.push(("beta".into(), f(self.beta)));
            }
        }
        out.push(("z".into(), f(self.z)));
        out.push(("n_spins".into(), self.n_spins.to_string()));
        out.push(("t_max".into(), f(self.t_max)));
        out.push(("samples".into(), self.samples.to_string()));
        out.push((
            "measures".into(),
            self.measures
                .iter()
                .map(|m| m.label().to_ascii_lowercase())
                .collect::<Vec<_>>()
                .join(","),
        ));
        out.push(("rx".into(), f(self.rx)));
        out.push(("ry".into(), f(self.ry)));
        out.push(("rz".into(), f(self.rz)));
        if let Some(ts) = self.t_star {
            out.push(("t_star".into(), f(ts)));
        }
        for (key, axis) in [("axis1", &self.axis1), ("axis2", &self.axis2)] {
            if let Some(a) = axis {
                out.push((
                    key.into(),
                    format!(
                        "{},{},{},{}",
                        a.param.label(),
                        fmt17(a.min),
                        fmt17(a.max),
                        a.steps
                    ),
                ));
            }
        }
        out
    }

    /// The echo as config-file text.
    pub fn echo_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.echo_entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Re-parses the `# key: value` header block of an output file into the
/// configuration it echoes (meta keys `version`, `command`, `units`,
/// `columns` are skipped).
pub fn parse_header(text: &str) -> Result<RunConfig, AppError> {
    let mut cfg_text = String::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            break;
        };
        let Some((key, value)) = rest.split_once(':') else {
            continue;
        };
        let key = key.trim();
        if matches!(key, "version" | "command" | "units" | "columns") {
            continue;
        }
        let _ = writeln!(cfg_text, "{} = {}", key, value.trim());
    }
    parse_config(&cfg_text)
}
