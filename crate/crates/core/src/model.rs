//! Physical parameters of the cascade laser and its squeezed-vacuum reservoir.
//!
//! All rates are in kHz, so times elsewhere in the crate are in ms. The
//! squeezing phase is fixed at zero, which makes the two-mode correlation
//! `M` real and nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for agreement between a user-supplied gain and the gain
/// implied by `(r0, g, gamma)`.
pub const GAIN_AGREEMENT_TOL: f64 = 1e-9;

/// The injection rate, coupling constant and atomic decay rate from which the
/// linear gain coefficient is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionParams {
    pub injection_rate_khz: f64,
    pub coupling_khz: f64,
    pub atomic_decay_khz: f64,
}

impl InjectionParams {
    pub fn gain(&self) -> Result<f64> {
        gain_from_injection(
            self.injection_rate_khz,
            self.coupling_khz,
            self.atomic_decay_khz,
        )
    }
}

/// Cavity and atomic parameters of the laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    kappa: f64,
    gain: f64,
    eta: f64,
    raw: Option<InjectionParams>,
}

impl LaserParams {
    /// `kappa` and `gain` in kHz, `eta` the population inversion.
    pub fn new(kappa: f64, gain: f64, eta: f64) -> Result<Self> {
        check_positive("kappa_khz", kappa)?;
        if !(gain.is_finite() && gain >= 0.0) {
            return Err(Error::Domain {
                name: "gain_khz",
                value: gain,
                bound: "gain >= 0",
            });
        }
        check_eta(eta)?;
        Ok(Self {
            kappa,
            gain,
            eta,
            raw: None,
        })
    }

    /// Derives the gain as `2 r0 g^2 / gamma^2`.
    pub fn from_injection(kappa: f64, raw: InjectionParams, eta: f64) -> Result<Self> {
        let gain = raw.gain()?;
        let mut params = Self::new(kappa, gain, eta)?;
        params.raw = Some(raw);
        Ok(params)
    }

    /// Accepts a direct gain, a raw triple, or both. When both are present they
    /// must agree to [`GAIN_AGREEMENT_TOL`]; the raw-derived value is kept.
    pub fn resolve(
        kappa: f64,
        gain: Option<f64>,
        raw: Option<InjectionParams>,
        eta: f64,
    ) -> Result<Self> {
        match (gain, raw) {
            (Some(gain), None) => Self::new(kappa, gain, eta),
            (None, Some(raw)) => Self::from_injection(kappa, raw, eta),
            (Some(gain), Some(raw)) => {
                let derived = raw.gain()?;
                let scale = gain.abs().max(derived.abs());
                if (gain - derived).abs() > GAIN_AGREEMENT_TOL * scale {
                    return Err(Error::Inconsistent(format!(
                        "gain_khz = {gain} but 2 r0 g^2 / gamma^2 = {derived}"
                    )));
                }
                Self::from_injection(kappa, raw, eta)
            }
            (None, None) => Err(Error::Config(
                "either gain_khz or all of r0_khz, g_khz, gamma_khz is required".into(),
            )),
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn raw(&self) -> Option<InjectionParams> {
        self.raw
    }

    pub fn atomic_init(&self) -> AtomicInit {
        AtomicInit::from_valid_eta(self.eta)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, ..*self })
    }

    /// Replaces the gain and drops any raw triple it came from.
    pub fn with_gain(&self, gain: f64) -> Result<Self> {
        Self::new(self.kappa, gain, self.eta)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        check_positive("kappa_khz", kappa)?;
        Ok(Self { kappa, ..*self })
    }
}

/// Initial populations and two-photon coherence of an injected atom prepared
/// in a pure superposition of the top and bottom levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicInit {
    pub p_aa: f64,
    pub p_cc: f64,
    pub p_ac: f64,
}

impl AtomicInit {
    pub fn from_eta(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self::from_valid_eta(eta))
    }

    fn from_valid_eta(eta: f64) -> Self {
        Self {
            p_aa: 0.5 * (1.0 - eta),
            p_cc: 0.5 * (1.0 + eta),
            p_ac: 0.5 * ((1.0 - eta) * (1.0 + eta)).sqrt(),
        }
    }
}

/// `atomic_init_from_eta` under its free-function name.
pub fn atomic_init_from_eta(eta: f64) -> Result<AtomicInit> {
    AtomicInit::from_eta(eta)
}

/// Two-mode squeezed vacuum reservoir with zero squeezing phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    r: f64,
    n_th: f64,
    m_sq: f64,
}

impl ReservoirParams {
    pub fn from_r(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain {
                name: "squeeze_r",
                value: r,
                bound: "r >= 0",
            });
        }
        let (sh, ch) = (r.sinh(), r.cosh());
        Ok(Self {
            r,
            n_th: sh * sh,
            m_sq: sh * ch,
        })
    }

    pub fn vacuum() -> Self {
        Self {
            r: 0.0,
            n_th: 0.0,
            m_sq: 0.0,
        }
    }

    /// Squeezing parameter r.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// N = sinh^2 r.
    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// M = sinh r cosh r.
    pub fn m_sq(&self) -> f64 {
        self.m_sq
    }

    /// N - M, evaluated as -sinh(r) e^{-r} without cancellation.
    pub fn n_minus_m(&self) -> f64 {
        -self.r.sinh() * (-self.r).exp()
    }
}

pub fn reservoir_from_r(r: f64) -> Result<ReservoirParams> {
    ReservoirParams::from_r(r)
}

/// Linear gain coefficient `A = 2 r0 g^2 / gamma^2` (all in kHz).
pub fn gain_from_injection(r0: f64, g: f64, gamma: f64) -> Result<f64> {
    check_positive("r0_khz", r0)?;
    check_positive("g_khz", g)?;
    check_positive("gamma_khz", gamma)?;
    Ok(2.0 * r0 * g * g / (gamma * gamma))
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            bound: "must be finite and > 0",
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            bound: "eta >= 0",
        });
    }
    if eta > 1.0 {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            bound: "eta <= 1",
        });
    }
    Ok(())
}
