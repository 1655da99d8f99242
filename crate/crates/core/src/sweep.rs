//! Deterministic one- and two-axis parameter sweeps.
//!
//! Grid points are evaluated independently and assembled by grid index, so
//! the table is the same whichever [`Execution`] mode runs it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{DEFAULT_ETA, DEFAULT_GAIN_KHZ, DEFAULT_KAPPA_KHZ, DEFAULT_SQUEEZE_R};
use crate::error::{Error, Result};
use crate::model::{LaserParams, ReservoirParams};
use crate::steady_state::ETA_MIN;
use crate::steering::{steering_report_with, MomentSource, Regime};

/// A parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Eta,
    SqueezeR,
    GainKhz,
    KappaKhz,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::Eta => "eta",
            Param::SqueezeR => "squeeze_r",
            Param::GainKhz => "gain_khz",
            Param::KappaKhz => "kappa_khz",
        }
    }
}

/// A quantity recorded at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    GAb,
    GBa,
    Asymmetry,
    /// `g_ab - g_ba`, signed.
    GDiff,
    Regime,
    IntensityDiff,
    NuMinus,
    N1,
    N2,
    M12,
}

impl Output {
    pub fn name(&self) -> &'static str {
        match self {
            Output::GAb => "g_ab",
            Output::GBa => "g_ba",
            Output::Asymmetry => "asymmetry",
            Output::GDiff => "g_diff",
            Output::Regime => "regime",
            Output::IntensityDiff => "intensity_diff",
            Output::NuMinus => "nu_minus",
            Output::N1 => "n1",
            Output::N2 => "n2",
            Output::M12 => "m12",
        }
    }
}

/// Linearly spaced samples of one parameter, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.min;
        }
        let t = i as f64 / (self.count - 1) as f64;
        self.min * (1.0 - t) + self.max * t
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Values of the parameters that are not swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    #[serde(default = "default_kappa")]
    pub kappa_khz: f64,
    #[serde(default = "default_gain")]
    pub gain_khz: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_r")]
    pub squeeze_r: f64,
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA_KHZ
}
fn default_gain() -> f64 {
    DEFAULT_GAIN_KHZ
}
fn default_eta() -> f64 {
    DEFAULT_ETA
}
fn default_r() -> f64 {
    DEFAULT_SQUEEZE_R
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            kappa_khz: DEFAULT_KAPPA_KHZ,
            gain_khz: DEFAULT_GAIN_KHZ,
            eta: DEFAULT_ETA,
            squeeze_r: DEFAULT_SQUEEZE_R,
        }
    }
}

impl FixedParams {
    fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Eta => self.eta = v,
            Param::SqueezeR => self.squeeze_r = v,
            Param::GainKhz => self.gain_khz = v,
            Param::KappaKhz => self.kappa_khz = v,
        }
    }

    fn build(&self) -> Result<(LaserParams, ReservoirParams)> {
        Ok((
            LaserParams::new(self.kappa_khz, self.gain_khz, self.eta)?,
            ReservoirParams::from_r(self.squeeze_r)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// One or two axes; the first is outermost in the output.
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: FixedParams,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub source: MomentSource,
    /// Free-form provenance note carried into JSON output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("sweep spec: {msg}")));
        if self.axes.is_empty() || self.axes.len() > 2 {
            return bad(format!("expected 1 or 2 axes, got {}", self.axes.len()));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return bad(format!("axis `{}` repeated", self.axes[0].param.name()));
        }
        if self.outputs.is_empty() {
            return bad("no outputs requested".into());
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if self.outputs[..i].contains(o) {
                return bad(format!("output `{}` repeated", o.name()));
            }
        }
        for ax in &self.axes {
            if ax.count == 0 {
                return bad(format!("axis `{}` has zero points", ax.param.name()));
            }
            if !(ax.min.is_finite() && ax.max.is_finite()) || ax.min > ax.max {
                return bad(format!(
                    "axis `{}` needs finite min <= max, got [{}, {}]",
                    ax.param.name(),
                    ax.min,
                    ax.max
                ));
            }
        }
        // Every admissible set is an interval, so checking the corners suffices.
        for corner in 0..(1usize << self.axes.len()) {
            let mut p = self.fixed;
            for (k, ax) in self.axes.iter().enumerate() {
                p.set(ax.param, if corner >> k & 1 == 0 { ax.min } else { ax.max });
            }
            p.build()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of grid point `idx` in row-major order.
    pub fn coordinates(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut out = vec![0.0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = ax.value(rem % ax.count);
            rem /= ax.count;
        }
        out
    }

    fn params_at(&self, coords: &[f64]) -> FixedParams {
        let mut p = self.fixed;
        for (ax, &v) in self.axes.iter().zip(coords) {
            p.set(ax.param, v);
        }
        p
    }
}

/// A single output value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Regime(Regime),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Regime(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coordinates: Vec<f64>,
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Runs on the rayon pool; identical to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

fn eval_point(spec: &SweepSpec, idx: usize) -> Result<SweepRow> {
    let coordinates = spec.coordinates(idx);
    let wrap = |e: Error| {
        let at = spec
            .axes
            .iter()
            .zip(&coordinates)
            .map(|(a, v)| format!("{} = {v}", a.param.name()))
            .collect::<Vec<_>>()
            .join(", ");
        Error::SweepPoint {
            coordinates: at,
            source: Box::new(e),
        }
    };
    let (laser, reservoir) = spec.params_at(&coordinates).build().map_err(wrap)?;
    let (rep, m) = steering_report_with(&laser, &reservoir, spec.source).map_err(wrap)?;
    let values = spec
        .outputs
        .iter()
        .map(|o| match o {
            Output::GAb => Cell::Num(rep.g_ab),
            Output::GBa => Cell::Num(rep.g_ba),
            Output::Asymmetry => Cell::Num(rep.asymmetry),
            Output::GDiff => Cell::Num(rep.g_ab - rep.g_ba),
            Output::Regime => Cell::Regime(rep.regime),
            Output::IntensityDiff => Cell::Num(rep.intensity_diff),
            Output::NuMinus => Cell::Num(rep.nu_minus),
            Output::N1 => Cell::Num(m.n1),
            Output::N2 => Cell::Num(m.n2),
            Output::M12 => Cell::Num(m.m12),
        })
        .collect();
    Ok(SweepRow {
        coordinates,
        values,
    })
}

#[cfg(feature = "parallel")]
fn eval_all(spec: &SweepSpec, exec: Execution) -> Vec<Result<SweepRow>> {
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => (0..spec.len())
            .into_par_iter()
            .map(|i| eval_point(spec, i))
            .collect(),
        Execution::Sequential => (0..spec.len()).map(|i| eval_point(spec, i)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn eval_all(spec: &SweepSpec, _exec: Execution) -> Vec<Result<SweepRow>> {
    (0..spec.len()).map(|i| eval_point(spec, i)).collect()
}

/// Evaluates every grid point. The first failing point in grid order aborts the sweep.
pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let rows = eval_all(spec, exec).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub const FIGURES: [&str; 6] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b"];

pub const LINE_POINTS: usize = 401;
pub const GRID_POINTS: usize = 201;
pub const PRESET_KAPPA_KHZ: f64 = 3.85;

pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    let curves = vec![Output::GAb, Output::GBa, Output::Asymmetry];
    let fixed = |gain_khz: f64, eta: f64, squeeze_r: f64, kappa_khz: f64| FixedParams {
        kappa_khz,
        gain_khz,
        eta,
        squeeze_r,
    };
    let eta_axis = |n| Axis::new(Param::Eta, ETA_MIN, 1.0, n);
    let r_axis = |n| Axis::new(Param::SqueezeR, 0.0, 4.0, n);
    let k = PRESET_KAPPA_KHZ;
    let (axes, fixed, outputs, note) = match name {
        "fig2a" => (vec![eta_axis(LINE_POINTS)], fixed(200.0, 0.0, 1.75, k), curves, None),
        "fig2b" => (vec![eta_axis(LINE_POINTS)], fixed(1000.0, 0.0, 1.75, k), curves, None),
        "fig3a" => (vec![r_axis(LINE_POINTS)], fixed(200.0, 0.75, 0.0, k), curves, None),
        "fig3b" => (vec![r_axis(LINE_POINTS)], fixed(1000.0, 0.75, 0.0, k), curves, None),
        "fig4a" => (
            vec![
                Axis::new(Param::KappaKhz, 0.1, 20.0, GRID_POINTS),
                Axis::new(Param::GainKhz, 10.0, 2000.0, GRID_POINTS),
            ],
            fixed(0.0, 0.5, 2.75, k),
            vec![Output::GDiff],
            Some("kappa and gain ranges bracket the default operating point".to_string()),
        ),
        "fig4b" => (
            vec![r_axis(GRID_POINTS), eta_axis(GRID_POINTS)],
            fixed(500.0, 0.0, 0.0, k),
            vec![Output::GDiff],
            None,
        ),
        _ => {
            return Err(Error::Usage(format!(
                "unknown figure `{name}`; available: {}",
                FIGURES.join(", ")
            )))
        }
    };
    Ok(SweepSpec {
        axes,
        fixed,
        outputs,
        source: MomentSource::ClosedForm,
        note,
    })
}

fn fmt_num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

impl SweepResult {
    pub fn header(&self) -> Vec<&'static str> {
        self.spec
            .axes
            .iter()
            .map(|a| a.param.name())
            .chain(self.spec.outputs.iter().map(|o| o.name()))
            .collect()
    }

    /// Comma-separated table with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, &c) in row.coordinates.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                fmt_num(&mut out, c);
            }
            for v in &row.values {
                out.push(',');
                match v {
                    Cell::Num(x) => fmt_num(&mut out, *x),
                    Cell::Regime(r) => out.push_str(r.as_str()),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let names = self.header();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let cells = row
                    .coordinates
                    .iter()
                    .map(|&c| serde_json::json!(c))
                    .chain(row.values.iter().map(|v| serde_json::json!(v)));
                serde_json::Value::Object(names.iter().map(|n| n.to_string()).zip(cells).collect())
            })
            .collect::<Vec<_>>();
        serde_json::json!({ "spec": self.spec, "rows": rows })
    }

    /// Values of one numeric output in row order.
    pub fn column(&self, output: Output) -> Option<Vec<f64>> {
        let k = self.spec.outputs.iter().position(|&o| o == output)?;
        self.rows.iter().map(|r| r.values[k].as_f64()).collect()
    }

    pub fn regimes(&self) -> Option<Vec<Regime>> {
        let k = self.spec.outputs.iter().position(|&o| o == Output::Regime)?;
        self.rows
            .iter()
            .map(|r| match r.values[k] {
                Cell::Regime(g) => Some(g),
                Cell::Num(_) => None,
            })
            .collect()
    }
}
