use super::FlexError;
use crate::grid::FlexibleLoad;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How far charging may move away from the requested hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FlexMode {
    NoFlex,
    /// Charging may be postponed by up to this many hours, never advanced.
    DelayOnly(usize),
    Window { advance: usize, delay: usize },
}

impl FlexMode {
    pub fn of_load(load: &FlexibleLoad) -> Self {
        match (load.max_advance_hours, load.max_delay_hours) {
            (0, 0) => FlexMode::NoFlex,
            (0, d) => FlexMode::DelayOnly(d),
            (a, d) => FlexMode::Window { advance: a, delay: d },
        }
    }

    pub fn advance_delay(self) -> (usize, usize) {
        match self {
            FlexMode::NoFlex => (0, 0),
            FlexMode::DelayOnly(d) => (0, d),
            FlexMode::Window { advance, delay } => (advance, delay),
        }
    }
}

impl fmt::Display for FlexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FlexMode::NoFlex => f.write_str("none"),
            FlexMode::DelayOnly(8) => f.write_str("delay8"),
            FlexMode::DelayOnly(d) => write!(f, "delay{d}"),
            FlexMode::Window { advance: 12, delay: 12 } => f.write_str("window24"),
            FlexMode::Window { advance, delay } => write!(f, "window{advance}_{delay}"),
        }
    }
}

impl FromStr for FlexMode {
    type Err = String;

    /// Accepts `none`, `delay<D>`, `window24` (12 h each way) and
    /// `window<A>_<D>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown flexibility mode `{s}` (expected none, delay8, window24, delay<D> or window<A>_<D>)");
        if s == "none" {
            return Ok(FlexMode::NoFlex);
        }
        if s == "window24" {
            return Ok(FlexMode::Window { advance: 12, delay: 12 });
        }
        if let Some(d) = s.strip_prefix("delay") {
            return d.parse().map(FlexMode::DelayOnly).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("window") {
            let (a, d) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(FlexMode::Window { advance: a.parse().map_err(|_| bad())?, delay: d.parse().map_err(|_| bad())? });
        }
        Err(bad())
    }
}

impl TryFrom<String> for FlexMode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FlexMode> for String {
    fn from(m: FlexMode) -> String {
        m.to_string()
    }
}

/// Bounds that express one flexible load inside a dispatch LP.
///
/// With `pinned` set, served charging equals the pinned profile. Otherwise
/// served charging is in `[0, rate_cap]` each hour and the running total
/// through hour `t` is in `[cumulative_lower[t], cumulative_upper[t]]`, the
/// final entry of both being the total requested energy.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexConstraintSet {
    pub rate_cap: f64,
    pub pinned: Option<Vec<f64>>,
    pub cumulative_lower: Vec<f64>,
    pub cumulative_upper: Vec<f64>,
    pub total_energy: f64,
}

/// Cumulative requested energy through hour `t`, clamped at the horizon
/// edges (no wrap-around).
fn cumulative_through(prefix: &[f64], t: isize) -> f64 {
    if t < 0 {
        0.0
    } else {
        prefix[(t as usize).min(prefix.len() - 1)]
    }
}

pub fn build_flex_constraints(load: &FlexibleLoad, mode: FlexMode) -> Result<FlexConstraintSet, FlexError> {
    let baseline = load.effective_baseline();
    let h = baseline.len();
    let rate = load.charge_rate_cap();
    let mut prefix = Vec::with_capacity(h);
    let mut acc = 0.0;
    for &b in &baseline {
        acc += b;
        prefix.push(acc);
    }
    let total = acc;
    if h == 0 {
        return Ok(FlexConstraintSet {
            rate_cap: rate,
            pinned: Some(Vec::new()),
            cumulative_lower: Vec::new(),
            cumulative_upper: Vec::new(),
            total_energy: 0.0,
        });
    }
    if mode == FlexMode::NoFlex {
        if let Some(t) = baseline.iter().position(|&b| b > rate * (1.0 + 1e-12)) {
            return Err(FlexError::InfeasibleWindow { load: load.id.clone(), hour: t });
        }
        return Ok(FlexConstraintSet {
            rate_cap: rate,
            cumulative_lower: prefix.clone(),
            cumulative_upper: prefix,
            pinned: Some(baseline),
            total_energy: total,
        });
    }
    let (advance, delay) = mode.advance_delay();
    let mut lower = Vec::with_capacity(h);
    let mut upper = Vec::with_capacity(h);
    for t in 0..h {
        let ti = t as isize;
        lower.push(cumulative_through(&prefix, ti - delay as isize));
        upper.push(cumulative_through(&prefix, ti + advance as isize));
    }
    lower[h - 1] = total;
    upper[h - 1] = total;

    // Charging as early as allowed gives the largest reachable running
    // total; the window is feasible iff that envelope meets every floor.
    let tol = 1e-9 * (1.0 + total);
    let mut reach = 0.0f64;
    for t in 0..h {
        reach = upper[t].min(reach + rate);
        if reach < lower[t] - tol {
            return Err(FlexError::InfeasibleWindow { load: load.id.clone(), hour: t });
        }
    }
    Ok(FlexConstraintSet { rate_cap: rate, pinned: None, cumulative_lower: lower, cumulative_upper: upper, total_energy: total })
}
