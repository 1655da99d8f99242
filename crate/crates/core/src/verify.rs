//! Seeded cross-checks between the closed forms, the moment equations and
//! the steering measures.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    build_drift_system, default_step, integrate_moments, stability_report,
    steady_state_linear_solve, steady_state_vector, MomentState,
};
use crate::error::Result;
use crate::model::{LaserParams, ReservoirParams};
use crate::steady_state::{
    covariance_from_moments, intensity_difference, steady_moments_closed_form, SecondMoments,
    TwoModeCovariance,
};
use crate::steering::{
    steer_schur, steer_simple, steerable_condition, steering_report, Direction, Regime,
    PHYSICALITY_TOL, TOL_STEER,
};
use crate::sweep::{figure_preset, run_sweep, Output};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Multiplies every tolerance; 1 in normal use.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerance_scale: 1.0,
        }
    }
}

/// Outcome of one check. `worst` is compared against `limit` in the stated sense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub limit: f64,
    /// True when `worst` must be at least `limit` rather than at most.
    pub lower_bound: bool,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, worst: f64, limit: f64) -> Self {
        Self {
            name,
            worst,
            limit,
            lower_bound: false,
            passed: worst <= limit,
        }
    }

    fn at_least(name: &'static str, worst: f64, limit: f64) -> Self {
        Self {
            name,
            worst,
            limit,
            lower_bound: true,
            passed: worst >= limit,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} worst {:>12.4e}  {} {:.4e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            if self.lower_bound { ">=" } else { "<=" },
            self.limit
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Uniform draw over the parameter box used by the random checks.
#[derive(Debug, Clone, Copy)]
pub struct ParamBox {
    pub eta: (f64, f64),
    pub gain: (f64, f64),
    pub kappa: (f64, f64),
    pub r: (f64, f64),
}

impl ParamBox {
    /// Ranges for the closed-form versus linear-solve comparison.
    pub const ORACLE: ParamBox = ParamBox {
        eta: (1e-4, 1.0),
        gain: (1.0, 2000.0),
        kappa: (0.5, 20.0),
        r: (0.0, 4.0),
    };

    /// The widest valid box: `kappa` is drawn from `(0, 20]`.
    pub const FULL: ParamBox = ParamBox {
        eta: (0.0, 1.0),
        gain: (0.0, 2000.0),
        kappa: (0.0, 20.0),
        r: (0.0, 4.0),
    };

    pub fn sample(&self, rng: &mut impl Rng) -> (LaserParams, ReservoirParams) {
        let u: [f64; 4] = rng.random();
        let draw = |(lo, hi): (f64, f64), u: f64| lo + (hi - lo) * u;
        let eta = draw(self.eta, u[0]).min(self.eta.1);
        let gain = draw(self.gain, u[1]);
        // Drawn downward from the top so that kappa stays strictly positive.
        let kappa = self.kappa.1 - (self.kappa.1 - self.kappa.0) * u[2];
        let r = draw(self.r, u[3]);
        (
            LaserParams::new(kappa, gain, eta).expect("box lies in the valid domain"),
            ReservoirParams::from_r(r).expect("box lies in the valid domain"),
        )
    }
}

/// Random standard-form covariance with `1 <= s11, s22 <= 30` on or inside
/// the physical boundary `s12^2 <= s11 s22 - 1 - |s11 - s22|`.
pub fn random_physical_cm(rng: &mut impl Rng) -> TwoModeCovariance {
    let a = 1.0 + 29.0 * rng.random::<f64>();
    let b = 1.0 + 29.0 * rng.random::<f64>();
    let bound = (a * b - 1.0 - (a - b).abs()).max(0.0);
    TwoModeCovariance::new(a, b, rng.random::<f64>() * bound.sqrt())
}

/// Largest relative disagreement between two sets of moments, scaled by the
/// larger photon number.
pub fn moment_discrepancy(x: &SecondMoments, y: &SecondMoments) -> f64 {
    let pairs = [(x.n1, y.n1), (x.n2, y.n2), (x.m12, y.m12)];
    pairs
        .iter()
        .map(|&(u, v)| {
            let scale = u.abs().max(v.abs());
            if scale == 0.0 { 0.0 } else { (u - v).abs() / scale }
        })
        .fold(0.0, f64::max)
}

/// Distance from the stationary state after `20 / |max Re lambda|`, starting from vacuum.
pub fn integrator_settling_error(laser: &LaserParams, reservoir: &ReservoirParams) -> Result<f64> {
    let sys = build_drift_system(laser, reservoir);
    let t = 20.0 / stability_report(&sys).max_real_eig.abs();
    let traj = integrate_moments(&sys, &MomentState::zeros(), t, default_step(&sys, t))?;
    Ok((traj.final_state() - steady_state_vector(&sys)?).amax())
}

/// Error ratio `e(h) / e(h/2)` at `t` against a reference of step `h/16`,
/// with `h` about half the inverse spectral radius.
pub fn convergence_ratio(laser: &LaserParams, reservoir: &ReservoirParams, t: f64) -> Result<f64> {
    let sys = build_drift_system(laser, reservoir);
    let rho = stability_report(&sys).spectral_radius;
    let n = (t * rho / 0.5).ceil().max(1.0);
    let h = t / n;
    let end = |step: f64| -> Result<MomentState> {
        Ok(*integrate_moments(&sys, &MomentState::zeros(), t, step)?.final_state())
    };
    let reference = end(h / 16.0)?;
    let coarse = (end(h)? - reference).amax();
    let fine = (end(h / 2.0)? - reference).amax();
    Ok(coarse / fine)
}

fn reference_point() -> (LaserParams, ReservoirParams) {
    (
        LaserParams::new(3.85, 200.0, 0.5).expect("valid"),
        ReservoirParams::from_r(1.0).expect("valid"),
    )
}

pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let tol = |t: f64| t * opts.tolerance_scale;
    let n = opts.samples;
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k));
    let mut checks = Vec::new();

    // Closed form against the linear solve, with physicality of both.
    let mut r = rng(1);
    let (mut worst, mut nu_min) = (0.0f64, f64::INFINITY);
    let mut worst_intensity = 0.0f64;
    for _ in 0..n {
        let (laser, res) = ParamBox::ORACLE.sample(&mut r);
        let closed = steady_moments_closed_form(&laser, &res);
        let solved = steady_state_linear_solve(&build_drift_system(&laser, &res))?;
        worst = worst.max(moment_discrepancy(&closed, &solved));
        let i = intensity_difference(&laser, &res);
        let d = solved.n1 - solved.n2;
        let scale = solved.n1.abs().max(solved.n2.abs()).max(i.abs());
        if scale > 0.0 {
            worst_intensity = worst_intensity.max((i - d).abs() / scale);
        }
        nu_min = nu_min.min(steering_report(&laser, &res)?.nu_minus);
    }
    checks.push(Check::at_most("closed form vs linear solve", worst, tol(1e-9)));
    checks.push(Check::at_most("intensity difference vs n1 - n2", worst_intensity, tol(1e-9)));

    // Integrator.
    let (laser, res) = reference_point();
    checks.push(Check::at_most(
        "integrator settles to linear solve",
        integrator_settling_error(&laser, &res)?,
        tol(1e-6),
    ));
    checks.push(Check::at_least(
        "integrator step-halving ratio",
        convergence_ratio(&laser, &res, 1.0 / laser.kappa())?,
        8.0 / opts.tolerance_scale.max(f64::MIN_POSITIVE),
    ));

    // Wide random scan: intensity sign, direction of steering, physicality.
    let mut r = rng(2);
    let (mut min_intensity, mut min_gap) = (f64::INFINITY, f64::INFINITY);
    let mut one_way_ba = 0usize;
    for _ in 0..10 * n {
        let (laser, res) = ParamBox::FULL.sample(&mut r);
        let rep = steering_report(&laser, &res)?;
        min_intensity = min_intensity.min(rep.intensity_diff);
        min_gap = min_gap.min(rep.g_ab - rep.g_ba);
        nu_min = nu_min.min(rep.nu_minus);
        one_way_ba += usize::from(rep.regime == Regime::OneWayBA);
    }
    checks.push(Check::at_least("intensity difference nonnegative", min_intensity, -tol(1e-12)));
    checks.push(Check::at_least("g_ab - g_ba nonnegative", min_gap, -tol(1e-12)));
    checks.push(Check::at_most("OneWayBA occurrences", one_way_ba as f64, 0.0));

    // Measures on random physical covariances.
    let mut r = rng(3);
    let (mut worst_schur, mut mismatches) = (0.0f64, 0usize);
    for _ in 0..n {
        let cm = random_physical_cm(&mut r);
        for d in [Direction::AtoB, Direction::BtoA] {
            let g = steer_simple(&cm, d)?;
            worst_schur = worst_schur.max((steer_schur(&cm, d)? - g).abs());
            mismatches += usize::from(steerable_condition(&cm, d)? != (g > TOL_STEER));
        }
    }
    checks.push(Check::at_most("Schur route vs simple form", worst_schur, tol(1e-12)));
    checks.push(Check::at_most("steerable condition mismatches", mismatches as f64, 0.0));

    // Asymmetry ceiling on the one-axis presets.
    let mut worst_asym = 0.0f64;
    for name in ["fig2a", "fig2b", "fig3a", "fig3b"] {
        let res = run_sweep(&figure_preset(name)?)?;
        let col = res.column(Output::Asymmetry).expect("presets record asymmetry");
        worst_asym = col.into_iter().fold(worst_asym, f64::max);
    }
    checks.push(Check::at_most(
        "asymmetry ceiling (ln 2)",
        worst_asym,
        std::f64::consts::LN_2 + tol(1e-9),
    ));

    // Physicality over every model state above, plus the reference covariance.
    let (laser, res) = reference_point();
    covariance_from_moments(&steady_moments_closed_form(&laser, &res))?;
    checks.push(Check::at_least("smallest symplectic eigenvalue", nu_min, 1.0 - tol(PHYSICALITY_TOL)));

    Ok(VerifyReport {
        samples: n,
        seed: opts.seed,
        checks,
    })
}
