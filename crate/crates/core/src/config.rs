//! Flat `key = value` parameter files and their merge with command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InjectionParams, LaserParams, ReservoirParams};

pub const DEFAULT_KAPPA_KHZ: f64 = 3.85;
pub const DEFAULT_GAIN_KHZ: f64 = 200.0;
pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_SQUEEZE_R: f64 = 1.75;

pub const KEYS: [&str; 7] = [
    "kappa_khz",
    "gain_khz",
    "eta",
    "squeeze_r",
    "r0_khz",
    "g_khz",
    "gamma_khz",
];

/// Partially specified parameters; unset fields fall back to defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub kappa_khz: Option<f64>,
    pub gain_khz: Option<f64>,
    pub eta: Option<f64>,
    pub squeeze_r: Option<f64>,
    pub r0_khz: Option<f64>,
    pub g_khz: Option<f64>,
    pub gamma_khz: Option<f64>,
}

impl ParamOverrides {
    fn field(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "kappa_khz" => &mut self.kappa_khz,
            "gain_khz" => &mut self.gain_khz,
            "eta" => &mut self.eta,
            "squeeze_r" => &mut self.squeeze_r,
            "r0_khz" => &mut self.r0_khz,
            "g_khz" => &mut self.g_khz,
            "gamma_khz" => &mut self.gamma_khz,
            _ => return None,
        })
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim();
            let value = value.trim();
            let slot = out.field(key).ok_or_else(|| {
                Error::Config(format!(
                    "line {lineno}: unknown key `{key}` (expected one of {})",
                    KEYS.join(", ")
                ))
            })?;
            if slot.is_some() {
                return Err(Error::Config(format!("line {lineno}: `{key}` given twice")));
            }
            let v: f64 = value
                .parse()
                .map_err(|_| Error::Config(format!("line {lineno}: `{value}` is not a number")))?;
            *slot = Some(v);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Field-wise merge in which `over` wins.
    pub fn overridden_by(self, over: &Self) -> Self {
        Self {
            kappa_khz: over.kappa_khz.or(self.kappa_khz),
            gain_khz: over.gain_khz.or(self.gain_khz),
            eta: over.eta.or(self.eta),
            squeeze_r: over.squeeze_r.or(self.squeeze_r),
            r0_khz: over.r0_khz.or(self.r0_khz),
            g_khz: over.g_khz.or(self.g_khz),
            gamma_khz: over.gamma_khz.or(self.gamma_khz),
        }
    }

    fn injection(&self) -> Result<Option<InjectionParams>> {
        match (self.r0_khz, self.g_khz, self.gamma_khz) {
            (None, None, None) => Ok(None),
            (Some(r0), Some(g), Some(gamma)) => Ok(Some(InjectionParams {
                injection_rate_khz: r0,
                coupling_khz: g,
                atomic_decay_khz: gamma,
            })),
            _ => Err(Error::Config(
                "r0_khz, g_khz and gamma_khz must be given together".into(),
            )),
        }
    }

    pub fn resolve(&self) -> Result<(LaserParams, ReservoirParams)> {
        let raw = self.injection()?;
        let gain = match (self.gain_khz, raw) {
            (None, None) => Some(DEFAULT_GAIN_KHZ),
            (g, _) => g,
        };
        let laser = LaserParams::resolve(
            self.kappa_khz.unwrap_or(DEFAULT_KAPPA_KHZ),
            gain,
            raw,
            self.eta.unwrap_or(DEFAULT_ETA),
        )?;
        let reservoir = ReservoirParams::from_r(self.squeeze_r.unwrap_or(DEFAULT_SQUEEZE_R))?;
        Ok((laser, reservoir))
    }
}

/// The parameter set a run actually used, for echoing in its output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub kappa_khz: f64,
    pub gain_khz: f64,
    pub eta: f64,
    pub squeeze_r: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r0_khz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_khz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma_khz: Option<f64>,
}

impl EffectiveParams {
    pub fn new(laser: &LaserParams, reservoir: &ReservoirParams) -> Self {
        let raw = laser.raw();
        Self {
            kappa_khz: laser.kappa(),
            gain_khz: laser.gain(),
            eta: laser.eta(),
            squeeze_r: reservoir.r(),
            r0_khz: raw.map(|r| r.injection_rate_khz),
            g_khz: raw.map(|r| r.coupling_khz),
            gamma_khz: raw.map(|r| r.atomic_decay_khz),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_comments_and_blanks() {
        let p = ParamOverrides::parse("# experiment\n\nkappa_khz = 3.85\neta=0.25 # inline\n").unwrap();
        assert_eq!(p.kappa_khz, Some(3.85));
        assert_eq!(p.eta, Some(0.25));
        assert_eq!(p.gain_khz, None);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = ParamOverrides::parse("kapa_khz = 3").unwrap_err();
        assert!(err.to_string().contains("unknown key `kapa_khz`"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ParamOverrides::parse("eta 0.5").is_err());
        assert!(ParamOverrides::parse("eta = half").is_err());
        assert!(ParamOverrides::parse("eta = 0.1\neta = 0.2").is_err());
    }

    #[test]
    fn flags_win() {
        let file = ParamOverrides::parse("eta = 0.1\ngain_khz = 500").unwrap();
        let flags = ParamOverrides {
            eta: Some(0.9),
            ..Default::default()
        };
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.eta, Some(0.9));
        assert_eq!(merged.gain_khz, Some(500.0));
    }

    #[test]
    fn defaults_fill_gaps() {
        let (l, r) = ParamOverrides::default().resolve().unwrap();
        assert_eq!(
            (l.kappa(), l.gain(), l.eta(), r.r()),
            (DEFAULT_KAPPA_KHZ, DEFAULT_GAIN_KHZ, DEFAULT_ETA, DEFAULT_SQUEEZE_R)
        );
    }

    #[test]
    fn raw_triple_sets_gain() {
        let p = ParamOverrides::parse("r0_khz = 22\ng_khz = 43\ngamma_khz = 20").unwrap();
        let (l, _) = p.resolve().unwrap();
        assert_relative_eq!(l.gain(), 203.39, max_relative = 1e-12);
        let echo = EffectiveParams::new(&l, &ReservoirParams::vacuum());
        assert_eq!(echo.r0_khz, Some(22.0));
    }

    #[test]
    fn incomplete_or_conflicting_raw_triple() {
        assert!(matches!(
            ParamOverrides::parse("r0_khz = 22").unwrap().resolve(),
            Err(Error::Config(_))
        ));
        let p = ParamOverrides::parse("gain_khz = 200\nr0_khz = 22\ng_khz = 43\ngamma_khz = 20").unwrap();
        assert!(matches!(p.resolve(), Err(Error::Inconsistent(_))));
    }
}
