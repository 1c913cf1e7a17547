//! Parameter-sweep engine for the Markovianity phase diagrams and the
//! window-hierarchy datasets.
//!
//! Cells are evaluated in parallel (rayon) and gathered in index order, so a
//! scan is deterministic and independent of the evaluation schedule.

use rayon::prelude::*;

use crate::channels::{ChannelScenario, FamilyTag};
use crate::error::{Error, Result};
use crate::measures::{evaluate_measure, Measure, MeasureOptions};
use crate::scalar::Scalar;

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    Gamma,
    GammaA,
    GammaD,
    Z,
    NSpins,
}

impl AxisParam {
    pub fn label(&self) -> &'static str {
        match self {
            AxisParam::Gamma => "gamma",
            AxisParam::GammaA => "gamma_A",
            AxisParam::GammaD => "gamma_D",
            AxisParam::Z => "z",
            AxisParam::NSpins => "N",
        }
    }

    pub fn parse(s: &str) -> Option<AxisParam> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" | "gamma0" => Some(AxisParam::Gamma),
            "gamma_a" => Some(AxisParam::GammaA),
            "gamma_d" => Some(AxisParam::GammaD),
            "z" => Some(AxisParam::Z),
            "n" | "n_spins" => Some(AxisParam::NSpins),
            _ => None,
        }
    }
}

/// One scan axis: `steps` evenly spaced values on [min, max].
#[derive(Debug, Clone, Copy)]
pub struct Axis<T> {
    pub param: AxisParam,
    pub min: T,
    pub max: T,
    pub steps: usize,
}

impl<T: Scalar> Axis<T> {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidParam(format!(
                "axis {} needs at least 2 steps",
                self.param.label()
            )));
        }
        if self.min >= self.max {
            return Err(Error::InvalidParam(format!(
                "axis {}: min {} must be below max {}",
                self.param.label(),
                self.min,
                self.max
            )));
        }
        let domain_ok = match self.param {
            AxisParam::Gamma | AxisParam::GammaA | AxisParam::GammaD => self.min >= T::zero(),
            AxisParam::Z => self.min >= -T::one() && self.max <= T::one(),
            AxisParam::NSpins => self.min >= T::one(),
        };
        if !domain_ok {
            return Err(Error::InvalidParam(format!(
                "axis {} range [{}, {}] leaves the physical domain",
                self.param.label(),
                self.min,
                self.max
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> T {
        let f = T::of_usize(i) / T::of_usize(self.steps - 1);
        self.min + (self.max - self.min) * f
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

/// Fixed parameters for everything the axes do not sweep.
#[derive(Debug, Clone, Copy)]
pub struct BaseParams<T> {
    pub gamma0: T,
    pub gamma_a: T,
    pub gamma_d: T,
    pub z: T,
    pub n_spins: usize,
}

impl<T: Scalar> Default for BaseParams<T> {
    fn default() -> Self {
        Self {
            gamma0: T::zero(),
            gamma_a: T::zero(),
            gamma_d: T::zero(),
            z: T::zero(),
            n_spins: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanSpec<T> {
    pub family: FamilyTag,
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    pub base: BaseParams<T>,
    pub measures: Vec<Measure>,
    pub opts: MeasureOptions<T>,
}

impl<T: Scalar> ScanSpec<T> {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.measures.is_empty() {
            return Err(Error::InvalidParam(
                "scan needs at least one measure".into(),
            ));
        }
        for axis in [&self.axis1, &self.axis2] {
            let compatible = match axis.param {
                AxisParam::Gamma => self.family == FamilyTag::Isotropic,
                AxisParam::GammaA | AxisParam::GammaD => {
                    self.family == FamilyTag::AmplitudeDepolarizing
                }
                AxisParam::Z | AxisParam::NSpins => true,
            };
            if !compatible {
                return Err(Error::InvalidParam(format!(
                    "axis {} is incompatible with the {} family",
                    axis.param.label(),
                    self.family.label()
                )));
            }
        }
        Ok(())
    }

    /// Scenario at the given axis values.
    pub fn scenario(&self, v1: T, v2: T) -> Result<ChannelScenario<T>> {
        let mut p = self.base;
        for (axis, v) in [(&self.axis1, v1), (&self.axis2, v2)] {
            match axis.param {
                AxisParam::Gamma => p.gamma0 = v,
                AxisParam::GammaA => p.gamma_a = v,
                AxisParam::GammaD => p.gamma_d = v,
                AxisParam::Z => p.z = v,
                AxisParam::NSpins => {
                    let n = <usize as num_traits::NumCast>::from(v.round()).unwrap_or(0);
                    if n == 0 {
                        return Err(Error::InvalidParam(format!("N = {v} below 1")));
                    }
                    p.n_spins = n;
                }
            }
        }
        match self.family {
            FamilyTag::Isotropic => ChannelScenario::isotropic(p.gamma0, p.z, p.n_spins),
            FamilyTag::AmplitudeDepolarizing => {
                ChannelScenario::amplitude_depolarizing(p.gamma_a, p.gamma_d, p.z, p.n_spins)
            }
            FamilyTag::GeneralAnisotropic => Err(Error::Unsupported(
                "scans sweep the isotropic or amplitude-depolarizing families".into(),
            )),
        }
    }
}

/// Per-measure cell payload.
#[derive(Debug, Clone)]
pub struct CellMeasure<T> {
    pub measure: Measure,
    pub value: T,
    pub divergent: bool,
    pub markovian: bool,
    pub first_window: Option<(T, T)>,
}

#[derive(Debug, Clone)]
pub struct ScanCell<T> {
    pub axis1: T,
    pub axis2: T,
    pub measures: Vec<CellMeasure<T>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScanResult<T> {
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    pub cells: Vec<ScanCell<T>>,
}

/// Runs the sweep. Cell failures are recorded in the cell and do not abort
/// the scan; cells are gathered in row-major (axis1-major) order.
pub fn run_scan<T: Scalar>(spec: &ScanSpec<T>) -> Result<ScanResult<T>> {
    spec.validate()?;
    let n1 = spec.axis1.steps;
    let n2 = spec.axis2.steps;
    let cells: Vec<ScanCell<T>> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let i = idx / n2;
            let j = idx % n2;
            let v1 = spec.axis1.value(i);
            let v2 = spec.axis2.value(j);
            match evaluate_cell(spec, v1, v2) {
                Ok(measures) => ScanCell {
                    axis1: v1,
                    axis2: v2,
                    measures,
                    error: None,
                },
                Err(e) => ScanCell {
                    axis1: v1,
                    axis2: v2,
                    measures: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ScanResult {
        axis1: spec.axis1,
        axis2: spec.axis2,
        cells,
    })
}

fn evaluate_cell<T: Scalar>(spec: &ScanSpec<T>, v1: T, v2: T) -> Result<Vec<CellMeasure<T>>> {
    let sc = spec.scenario(v1, v2)?;
    let mut out = Vec::with_capacity(spec.measures.len());
    for &m in &spec.measures {
        let res = evaluate_measure(&sc, m, &spec.opts)?;
        out.push(CellMeasure {
            measure: m,
            value: res.value,
            divergent: res.divergent,
            markovian: res.is_markovian(),
            first_window: res.windows.first().map(|w| (w.t_start, w.t_end)),
        });
    }
    Ok(out)
}

/// Traces the Markovian/non-Markovian boundary of one measure: per axis1
/// column, the first flag flip along axis2 is refined by bisection to 1e-3.
/// Columns without a flip are omitted.
pub fn boundary_trace<T: Scalar>(spec: &ScanSpec<T>, measure: Measure) -> Result<Vec<(T, T)>> {
    spec.validate()?;
    let markovian = |v1: T, v2: T| -> Result<bool> {
        let sc = spec.scenario(v1, v2)?;
        let res = evaluate_measure(&sc, measure, &spec.opts)?;
        Ok(res.is_markovian())
    };
    let columns: Vec<Option<(T, T)>> = spec
        .axis1
        .values()
        .into_par_iter()
        .map(|v1| {
            let vals = spec.axis2.values();
            let mut prev = match markovian(v1, vals[0]) {
                Ok(f) => f,
                Err(_) => return None,
            };
            for w in vals.windows(2) {
                let cur = match markovian(v1, w[1]) {
                    Ok(f) => f,
                    Err(_) => return None,
                };
                if cur != prev {
                    let (mut lo, mut hi) = (w[0], w[1]);
                    while hi - lo > T::lit(1e-3) {
                        let mid = (lo + hi) * T::lit(0.5);
                        match markovian(v1, mid) {
                            Ok(f) if f == prev => lo = mid,
                            Ok(_) => hi = mid,
                            Err(_) => return None,
                        }
                    }
                    return Some((v1, (lo + hi) * T::lit(0.5)));
                }
                prev = cur;
            }
            None
        })
        .collect();
    Ok(columns.into_iter().flatten().collect())
}

/// First positivity window of each measure (RHP, BLP, LPP, LFS order) as a
/// function of gamma at fixed z.
///
/// `nested` checks the containment chain LFS in LPP in BLP in RHP over the
/// full window lists on a common horizon: every inner window must lie inside
/// some outer window (near its threshold the first LFS window can sit a
/// period later than the first LPP window), with empty lists trivially
/// contained.
#[derive(Debug, Clone)]
pub struct WindowHierarchyRow<T> {
    pub gamma: T,
    pub windows: [Option<(T, T)>; 4],
    pub nested: bool,
}

pub fn window_hierarchy_dataset<T: Scalar>(
    gammas: &[T],
    z: T,
    n_spins: usize,
    opts: &MeasureOptions<T>,
) -> Result<Vec<WindowHierarchyRow<T>>> {
    if z <= T::zero() || z >= T::one() {
        return Err(Error::InvalidParam(format!(
            "window hierarchy needs z in (0, 1): {z}"
        )));
    }
    let horizon = opts.t_star.unwrap_or_else(|| T::lit(4.0) * T::PI());
    let common = MeasureOptions {
        t_star: Some(horizon),
        ..*opts
    };
    let order = [Measure::Rhp, Measure::Blp, Measure::Lpp, Measure::Lfs];
    let slack = T::lit(1e-6);
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let sc = ChannelScenario::isotropic(gamma, z, n_spins)?;
        let mut lists: [Vec<(T, T)>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (slot, m) in order.iter().enumerate() {
            let res = evaluate_measure(&sc, *m, &common)?;
            lists[slot] = res.windows.iter().map(|w| (w.t_start, w.t_end)).collect();
        }
        let mut nested = true;
        // inner -> outer pairs: LFS in LPP, LPP in BLP, BLP in RHP
        for (inner, outer) in [(3usize, 2usize), (2, 1), (1, 0)] {
            for w in &lists[inner] {
                if w.1 >= horizon - slack {
                    continue; // clipped by the horizon
                }
                if !lists[outer]
                    .iter()
                    .any(|o| w.0 >= o.0 - slack && w.1 <= o.1 + slack)
                {
                    nested = false;
                }
            }
        }
        let windows = [
            lists[0].first().copied(),
            lists[1].first().copied(),
            lists[2].first().copied(),
            lists[3].first().copied(),
        ];
        rows.push(WindowHierarchyRow {
            gamma,
            windows,
            nested,
        });
    }
    Ok(rows)
}
