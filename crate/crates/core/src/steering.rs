//! Gaussian steerability of the two-mode state in both directions.

use std::fmt;

use nalgebra::{Matrix2, SMatrix};
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_drift_system, steady_state_linear_solve};
use crate::error::{Error, Result};
use crate::model::{LaserParams, ReservoirParams};
use crate::steady_state::{
    covariance_from_moments, intensity_difference, steady_moments_closed_form, SecondMoments,
    TwoModeCovariance,
};

/// Steerabilities at or below this (nats) count as zero.
pub const TOL_STEER: f64 = 1e-10;

/// Allowed shortfall of the smaller symplectic eigenvalue below 1.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Most negative EPR variance still read as roundoff.
const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance for a zero eigenvalue in the steerability test.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    TwoWay,
    OneWayAB,
    OneWayBA,
    NoWay,
}

impl Regime {
    pub fn classify(g_ab: f64, g_ba: f64) -> Self {
        match (g_ab > TOL_STEER, g_ba > TOL_STEER) {
            (true, true) => Regime::TwoWay,
            (true, false) => Regime::OneWayAB,
            (false, true) => Regime::OneWayBA,
            (false, false) => Regime::NoWay,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::TwoWay => "TwoWay",
            Regime::OneWayAB => "OneWayAB",
            Regime::OneWayBA => "OneWayBA",
            Regime::NoWay => "NoWay",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the steady-state moments come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    #[default]
    ClosedForm,
    LinearSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub g_ab: f64,
    pub g_ba: f64,
    pub asymmetry: f64,
    pub regime: Regime,
    pub intensity_diff: f64,
    pub nu_minus: f64,
}

/// Symplectic spectrum `(nu_minus, nu_plus)` of a standard-form covariance.
///
/// With `p` the EPR variance and `q = s11 + s22 + 2|s12|`,
/// `nu_-+ = (sqrt(p q) -+ |s11 - s22|) / 2`.
pub fn symplectic_eigenvalues(cm: &TwoModeCovariance) -> Result<(f64, f64)> {
    let p = cm.epr_variance();
    let q = cm.s11 + cm.s22 + 2.0 * cm.s12.abs();
    if !(p.is_finite() && q.is_finite()) || p < -DEGENERACY_TOL || q < 0.0 {
        return Err(Error::Degenerate(format!(
            "symplectic spectrum undefined: epr variance {p:e}, sum {q:e}"
        )));
    }
    let root = (p.max(0.0) * q).sqrt();
    let diff = (cm.s11 - cm.s22).abs();
    Ok((0.5 * (root - diff), 0.5 * (root + diff)))
}

/// Smaller symplectic eigenvalue, rejecting states below the uncertainty bound.
pub fn check_physical(cm: &TwoModeCovariance) -> Result<f64> {
    let (nu_minus, _) = symplectic_eigenvalues(cm)?;
    if nu_minus < 1.0 - PHYSICALITY_TOL {
        return Err(Error::Unphysical { nu_minus });
    }
    Ok(nu_minus)
}

fn diagonal(cm: &TwoModeCovariance, direction: Direction) -> f64 {
    match direction {
        Direction::AtoB => cm.s11,
        Direction::BtoA => cm.s22,
    }
}

/// `max(0, ln(s_steering / (s11 s22 - s12^2)))`.
pub fn steer_simple(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    check_physical(cm)?;
    let d = cm.sqrt_det();
    if d <= 0.0 {
        return Err(Error::Degenerate(format!("det sigma = {d:e}")));
    }
    Ok((diagonal(cm, direction) / d).ln().max(0.0))
}

/// Steerability from the Schur complement of the steering party's block:
/// `max(0, -ln sqrt(det(beta - delta^T alpha^-1 delta)))` for A to B.
pub fn steer_schur(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    check_physical(cm)?;
    let full = cm.materialize();
    let block = |r: usize, c: usize| -> Matrix2<f64> { full.fixed_view::<2, 2>(r, c).into_owned() };
    let (steering, steered, cross) = match direction {
        Direction::AtoB => (block(0, 0), block(2, 2), block(0, 2)),
        Direction::BtoA => (block(2, 2), block(0, 0), block(2, 0)),
    };
    let inv = steering
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("steering block is singular".into()))?;
    let schur = steered - cross.transpose() * inv * cross;
    let det = schur.determinant();
    if det <= 0.0 {
        return Err(Error::Degenerate(format!("Schur complement determinant {det:e}")));
    }
    Ok((-0.5 * det.ln()).max(0.0))
}

/// True when `sigma + i (0 + Omega)` is not positive semidefinite, with the
/// symplectic form `Omega` placed on the steered mode.
pub fn steerable_condition(cm: &TwoModeCovariance, direction: Direction) -> Result<bool> {
    check_physical(cm)?;
    let sigma = cm.materialize();
    let offset = match direction {
        Direction::AtoB => 2,
        Direction::BtoA => 0,
    };
    // Hermitian H = S + iK as the real symmetric [[S, -K], [K, S]].
    let mut h = SMatrix::<f64, 8, 8>::zeros();
    h.fixed_view_mut::<4, 4>(0, 0).copy_from(&sigma);
    h.fixed_view_mut::<4, 4>(4, 4).copy_from(&sigma);
    let (i, j) = (offset, offset + 1);
    h[(4 + i, j)] = 1.0;
    h[(4 + j, i)] = -1.0;
    h[(i, 4 + j)] = -1.0;
    h[(j, 4 + i)] = 1.0;

    let min_eig = h.symmetric_eigenvalues().min();
    let tol = TIE_TOL * cm.scale().max(1.0);
    Ok(min_eig < -tol)
}

/// Report for a given covariance; the intensity difference is `(s11 - s22) / 2`.
pub fn report_from_covariance(cm: &TwoModeCovariance) -> Result<SteeringReport> {
    finish(cm, 0.5 * (cm.s11 - cm.s22))
}

fn finish(cm: &TwoModeCovariance, intensity_diff: f64) -> Result<SteeringReport> {
    let nu_minus = check_physical(cm)?;
    let g_ab = steer_simple(cm, Direction::AtoB)?;
    let g_ba = steer_simple(cm, Direction::BtoA)?;
    Ok(SteeringReport {
        g_ab,
        g_ba,
        asymmetry: (g_ab - g_ba).abs(),
        regime: Regime::classify(g_ab, g_ba),
        intensity_diff,
        nu_minus,
    })
}

/// Steady-state moments from the chosen source.
pub fn steady_moments(
    laser: &LaserParams,
    reservoir: &ReservoirParams,
    source: MomentSource,
) -> Result<SecondMoments> {
    match source {
        MomentSource::ClosedForm => Ok(steady_moments_closed_form(laser, reservoir)),
        MomentSource::LinearSolve => {
            steady_state_linear_solve(&build_drift_system(laser, reservoir))
        }
    }
}

/// Full pipeline from parameters to the steering report, with the moments it used.
pub fn steering_report_with(
    laser: &LaserParams,
    reservoir: &ReservoirParams,
    source: MomentSource,
) -> Result<(SteeringReport, SecondMoments)> {
    let m = steady_moments(laser, reservoir, source)?;
    let cm = covariance_from_moments(&m)?;
    let intensity = match source {
        MomentSource::ClosedForm => intensity_difference(laser, reservoir),
        MomentSource::LinearSolve => m.n1 - m.n2,
    };
    Ok((finish(&cm, intensity)?, m))
}

pub fn steering_report(laser: &LaserParams, reservoir: &ReservoirParams) -> Result<SteeringReport> {
    steering_report_with(laser, reservoir, MomentSource::ClosedForm).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(k: f64, a: f64, e: f64, r: f64) -> (LaserParams, ReservoirParams) {
        (LaserParams::new(k, a, e).unwrap(), ReservoirParams::from_r(r).unwrap())
    }

    /// Random physical standard-form covariance: `s12^2 <= s11 s22 - 1 - |s11 - s22|`.
    fn physical_cm() -> impl Strategy<Value = TwoModeCovariance> {
        (1.0..30.0f64, 1.0..30.0f64, 0.0..=1.0f64).prop_map(|(a, b, u)| {
            let bound = (a * b - 1.0 - (a - b).abs()).max(0.0);
            TwoModeCovariance::new(a, b, u * bound.sqrt())
        })
    }

    #[test]
    fn vacuum_is_not_steerable() {
        let cm = TwoModeCovariance::identity();
        for d in [Direction::AtoB, Direction::BtoA] {
            assert_eq!(steer_simple(&cm, d).unwrap(), 0.0);
            assert_eq!(steer_schur(&cm, d).unwrap(), 0.0);
            assert!(!steerable_condition(&cm, d).unwrap());
        }
        assert_eq!(symplectic_eigenvalues(&cm).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        let s = 0.5;
        let cm = TwoModeCovariance::two_mode_squeezed(s);
        let expected = (2.0 * s).cosh().ln();
        for d in [Direction::AtoB, Direction::BtoA] {
            assert_abs_diff_eq!(steer_simple(&cm, d).unwrap(), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(steer_schur(&cm, d).unwrap(), expected, epsilon = 1e-12);
            assert!(steerable_condition(&cm, d).unwrap());
        }
        let (lo, hi) = symplectic_eigenvalues(&cm).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);

        let rep = report_from_covariance(&cm).unwrap();
        assert_eq!(rep.regime, Regime::TwoWay);
        assert_eq!(rep.asymmetry, 0.0);
    }

    #[test]
    fn unphysical_state_is_rejected() {
        let cm = TwoModeCovariance::new(1.0, 1.0, 0.5);
        assert!(matches!(steer_simple(&cm, Direction::AtoB), Err(Error::Unphysical { .. })));
        assert_eq!(steer_simple(&cm, Direction::AtoB).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn regime_table() {
        assert_eq!(Regime::classify(0.1, 0.2), Regime::TwoWay);
        assert_eq!(Regime::classify(0.1, TOL_STEER), Regime::OneWayAB);
        assert_eq!(Regime::classify(0.0, 0.3), Regime::OneWayBA);
        assert_eq!(Regime::classify(TOL_STEER, 0.0), Regime::NoWay);
    }

    #[test]
    fn nearly_full_inversion_is_not_steerable() {
        for a in [200.0, 1000.0] {
            let (l, r) = params(3.85, a, 0.999, 1.75);
            let rep = steering_report(&l, &r).unwrap();
            assert!(rep.g_ab < 1e-3 && rep.g_ba < 1e-3);
        }
    }

    #[test]
    fn reference_point_both_sources() {
        let (l, r) = params(3.85, 200.0, 0.5, 1.75);
        let (x, _) = steering_report_with(&l, &r, MomentSource::ClosedForm).unwrap();
        let (y, _) = steering_report_with(&l, &r, MomentSource::LinearSolve).unwrap();
        assert!(x.g_ab >= x.g_ba);
        assert!(x.nu_minus >= 1.0 - PHYSICALITY_TOL);
        assert_abs_diff_eq!(x.g_ab, y.g_ab, epsilon = 1e-9);
        assert_abs_diff_eq!(x.g_ba, y.g_ba, epsilon = 1e-9);
    }

    #[test]
    fn one_way_point_condition() {
        let (l, r) = params(3.85, 1000.0, 0.75, 1.5);
        let m = steady_moments_closed_form(&l, &r);
        let cm = covariance_from_moments(&m).unwrap();
        let rep = steering_report(&l, &r).unwrap();
        assert_eq!(rep.regime, Regime::OneWayAB);
        assert!(steerable_condition(&cm, Direction::AtoB).unwrap());
        assert!(!steerable_condition(&cm, Direction::BtoA).unwrap());
    }

    #[test]
    fn report_round_trips_through_json() {
        let (l, r) = params(3.85, 200.0, 0.5, 1.75);
        let rep = steering_report(&l, &r).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"regime\":\"OneWayAB\""));
        assert_eq!(serde_json::from_str::<SteeringReport>(&text).unwrap(), rep);
    }

    proptest! {
        #[test]
        fn schur_route_agrees(cm in physical_cm()) {
            for d in [Direction::AtoB, Direction::BtoA] {
                let x = steer_simple(&cm, d).unwrap();
                let y = steer_schur(&cm, d).unwrap();
                prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
            }
        }

        #[test]
        fn condition_matches_measure(cm in physical_cm()) {
            for d in [Direction::AtoB, Direction::BtoA] {
                prop_assert_eq!(
                    steerable_condition(&cm, d).unwrap(),
                    steer_simple(&cm, d).unwrap() > TOL_STEER
                );
            }
        }

        #[test]
        fn model_states_steer_from_a(
            e in 0.0..=1.0f64, a in 0.0..2000.0f64, k in 0.01..20.0f64, r in 0.0..4.0f64,
        ) {
            let (l, res) = params(k, a, e, r);
            let rep = steering_report(&l, &res).unwrap();
            prop_assert!(rep.g_ab - rep.g_ba >= -1e-12);
            prop_assert!(rep.regime != Regime::OneWayBA);
            prop_assert!(rep.intensity_diff >= -1e-12);
            prop_assert!(rep.nu_minus >= 1.0 - PHYSICALITY_TOL);
        }
    }
}
