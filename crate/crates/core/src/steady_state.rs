//! Closed-form steady-state moments and the two-mode covariance matrix.
//!
//! The published expressions for the photon numbers and the intermode
//! correlation carry `1/eta^2` factors whose leading parts cancel exactly.
//! [`steady_moments_closed_form`] evaluates an algebraically identical
//! rearrangement with the poles divided out, over the common denominator
//! `4 (kappa + A eta)(2 kappa + A eta)`. Every reservoir dependence enters
//! through `N`, `M` and the deficit `d = N - M sqrt(1 - eta^2)`, and `d` is
//! formed without cancellation. [`steady_moments_verbatim`] keeps the
//! published grouping for cross-checking at moderate `eta`.

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};
use crate::model::{LaserParams, ReservoirParams};

/// Below this inversion the verbatim closed form is refused.
pub const ETA_MIN: f64 = 1e-6;

/// Absolute tolerance on the transient moments for a state to count as stationary.
pub const TRANSIENT_TOL: f64 = 1e-10;

/// Second-order field moments of the two laser modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoments {
    /// Mean photon number of mode A.
    pub n1: f64,
    /// Mean photon number of mode B.
    pub n2: f64,
    /// Intermode correlation `<a1 a2>`; real for a zero squeezing phase.
    pub m12: f64,
    pub sq1: Complex<f64>,
    pub sq2: Complex<f64>,
    /// `<a1 a2^dag>`.
    pub x12: Complex<f64>,
    /// Var(q1 - q2) = s11 + s22 - 2 s12. Carried separately because it is
    /// O(1) for strongly correlated states while the moments are large.
    pub epr_variance: f64,
}

impl SecondMoments {
    /// A stationary state from its three non-vanishing moments.
    pub fn stationary(n1: f64, n2: f64, m12: f64) -> Self {
        Self {
            n1,
            n2,
            m12,
            sq1: Complex::new(0.0, 0.0),
            sq2: Complex::new(0.0, 0.0),
            x12: Complex::new(0.0, 0.0),
            epr_variance: 2.0 * (n1 + n2 - 2.0 * m12) + 2.0,
        }
    }

    pub fn vacuum() -> Self {
        Self::stationary(0.0, 0.0, 0.0)
    }

    pub fn is_stationary(&self) -> bool {
        [self.sq1, self.sq2, self.x12]
            .iter()
            .all(|z| z.norm() <= TRANSIENT_TOL)
    }
}

/// Quantities shared by the closed forms.
struct Terms {
    a: f64,
    k: f64,
    e: f64,
    /// sqrt(1 - eta^2)
    w: f64,
    n: f64,
    m: f64,
    /// N - M w
    d: f64,
}

impl Terms {
    fn new(laser: &LaserParams, reservoir: &ReservoirParams) -> Self {
        let e = laser.eta();
        let w = ((1.0 - e) * (1.0 + e)).sqrt();
        let r = reservoir.r();
        // sinh r - w cosh r = -e^{-r} + cosh r (1 - w), with 1 - w = eta^2 / (1 + w).
        let d = r.sinh() * (r.cosh() * e * e / (1.0 + w) - (-r).exp());
        Self {
            a: laser.gain(),
            k: laser.kappa(),
            e,
            w,
            n: reservoir.n_th(),
            m: reservoir.m_sq(),
            d,
        }
    }
}

/// Steady-state moments from the closed-form solution of the moment equations.
///
/// Valid on the whole range `0 <= eta <= 1`.
pub fn steady_moments_closed_form(
    laser: &LaserParams,
    reservoir: &ReservoirParams,
) -> SecondMoments {
    let Terms { a, k, e, w, n, m, d } = Terms::new(laser, reservoir);
    let den = 4.0 * (k + a * e) * (2.0 * k + a * e);
    let thermal = 8.0 * k * n * (k + a * e);

    let n1 = (2.0 * a * (a * (1.0 + e) + 2.0 * k) * d
        + a * (1.0 - e) * (a * (1.0 + 3.0 * e) + 4.0 * k)
        + thermal)
        / den;
    let n2 = (2.0 * a * (a * (1.0 - e) - 2.0 * k) * d + a * a * (1.0 - e) * (1.0 + e) + thermal)
        / den;
    let m12 = (2.0 * a * a * w * d + a * w * (a * (1.0 + e) + 2.0 * k) + 8.0 * k * m * (k + a * e))
        / den;

    // n1 + n2 - 2 m12, every bracket reduced so that no O(1) terms cancel.
    let g = 1.0 / (1.0 + w);
    let pair = (4.0 * a * a * d * e * e * g + 2.0 * a * a * e * e * ((1.0 + e) * g - 2.0)
        - 4.0 * a * k * e * (1.0 - e * g)
        + 16.0 * k * (k + a * e) * reservoir.n_minus_m())
        / den;

    SecondMoments {
        epr_variance: 2.0 * pair + 2.0,
        ..SecondMoments::stationary(n1, n2, m12)
    }
}

/// The closed form in its published grouping, with explicit `1/eta^2` factors.
///
/// Loses relative accuracy roughly like `eps / eta^2`; refuses `eta < ETA_MIN`.
pub fn steady_moments_verbatim(
    laser: &LaserParams,
    reservoir: &ReservoirParams,
) -> Result<SecondMoments> {
    let e = laser.eta();
    if e < ETA_MIN {
        return Err(Error::SingularForm {
            eta: e,
            eta_min: ETA_MIN,
        });
    }
    let (a, k) = (laser.gain(), laser.kappa());
    let (n, m) = (reservoir.n_th(), reservoir.m_sq());
    let s = (1.0 - e * e).sqrt();
    let e2 = e * e;
    let p = a * e * (1.0 - e) - 2.0 * k * (n - m * s);
    let first = -p / (4.0 * e2 * (k + a * e));
    let second = ((1.0 - e2) * (a * e - 4.0 * k * n) + 4.0 * k * m * s) / (2.0 * e2 * (2.0 * k + a * e));
    let third = (n - m * s) / (2.0 * e2);

    let n1 = first * (1.0 - e) + second + third * (1.0 + e);
    let n2 = first * (1.0 + e) + second + third * (1.0 - e);
    let m12 = first * s
        + (s * (a * e - 4.0 * k * n) + 4.0 * k * m) / (2.0 * e2 * (2.0 * k + a * e))
        + third * s;
    Ok(SecondMoments::stationary(n1, n2, m12))
}

/// Intensity difference `<a1^dag a1> - <a2^dag a2>` in closed form.
pub fn intensity_difference(laser: &LaserParams, reservoir: &ReservoirParams) -> f64 {
    let Terms { a, k, e, d, .. } = Terms::new(laser, reservoir);
    a * (1.0 - e + 2.0 * d) / (2.0 * (k + a * e))
}

/// Covariance matrix of a two-mode Gaussian state in the standard form
/// `[[s11 I, s12 Z], [s12 Z, s22 I]]` with `Z = diag(1, -1)`.
///
/// Vacuum has unit covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
    /// s11 + s22 - 2|s12|
    epr: f64,
}

impl TwoModeCovariance {
    pub fn new(s11: f64, s22: f64, s12: f64) -> Self {
        Self {
            s11,
            s22,
            s12,
            epr: s11 + s22 - 2.0 * s12.abs(),
        }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 0.0)
    }

    /// Pure two-mode squeezed vacuum with squeezing `s`.
    pub fn two_mode_squeezed(s: f64) -> Self {
        let (ch, sh) = ((2.0 * s).cosh(), (2.0 * s).sinh());
        // s11 + s22 - 2 s12 = 2 e^{-2s}
        Self {
            epr: 2.0 * (-2.0 * s).exp(),
            ..Self::new(ch, ch, sh)
        }
    }

    /// s11 + s22 - 2|s12|; small for strongly correlated states.
    pub fn epr_variance(&self) -> f64 {
        self.epr
    }

    pub fn det_alpha(&self) -> f64 {
        self.s11 * self.s11
    }

    pub fn det_beta(&self) -> f64 {
        self.s22 * self.s22
    }

    pub fn det_delta(&self) -> f64 {
        -self.s12 * self.s12
    }

    /// `sqrt(det sigma) = s11 s22 - s12^2`.
    ///
    /// Evaluated as `(sqrt(p q) - |s11 - s22|)(sqrt(p q) + |s11 - s22|) / 4`
    /// with `p` the EPR variance and `q = s11 + s22 + 2|s12|`, which keeps
    /// full relative accuracy when the entries are large.
    pub fn sqrt_det(&self) -> f64 {
        let q = self.s11 + self.s22 + 2.0 * self.s12.abs();
        if self.epr >= 0.0 && q >= 0.0 {
            let root = (self.epr * q).sqrt();
            let diff = (self.s11 - self.s22).abs();
            0.25 * (root - diff) * (root + diff)
        } else {
            self.s11 * self.s22 - self.s12 * self.s12
        }
    }

    pub fn det_sigma(&self) -> f64 {
        let s = self.sqrt_det();
        s * s
    }

    /// The full symmetric 4x4 matrix in quadrature order (q1, p1, q2, p2).
    pub fn materialize(&self) -> Matrix4<f64> {
        let (a, b, c) = (self.s11, self.s22, self.s12);
        Matrix4::new(
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, b, 0.0, //
            0.0, -c, 0.0, b,
        )
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.s11.abs().max(self.s22.abs()).max(self.s12.abs())
    }
}

/// Builds the covariance of a stationary state: `s_jj = 2 n_j + 1`, `s12 = 2 m12`.
pub fn covariance_from_moments(m: &SecondMoments) -> Result<TwoModeCovariance> {
    if !m.is_stationary() {
        return Err(Error::Precondition(format!(
            "standard-form covariance needs a stationary state; got <a1^2> = {}, <a2^2> = {}, <a1 a2^dag> = {}",
            m.sq1, m.sq2, m.x12
        )));
    }
    let (s11, s22, s12) = (2.0 * m.n1 + 1.0, 2.0 * m.n2 + 1.0, 2.0 * m.m12);
    let epr = if s12 >= 0.0 {
        m.epr_variance
    } else {
        s11 + s22 + 2.0 * s12
    };
    Ok(TwoModeCovariance { s11, s22, s12, epr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laser(k: f64, a: f64, e: f64) -> LaserParams {
        LaserParams::new(k, a, e).unwrap()
    }

    fn res(r: f64) -> ReservoirParams {
        ReservoirParams::from_r(r).unwrap()
    }

    #[test]
    fn fully_inverted_vacuum_is_empty() {
        let m = steady_moments_closed_form(&laser(3.85, 200.0, 1.0), &res(0.0));
        assert_eq!((m.n1, m.n2, m.m12), (0.0, 0.0, 0.0));
        assert_eq!(m.epr_variance, 2.0);
    }

    #[test]
    fn fully_inverted_with_squeezing() {
        let (k, a, r) = (3.85, 200.0, 1.3);
        let s = res(r);
        let m = steady_moments_closed_form(&laser(k, a, 1.0), &s);
        let n = s.n_th();
        assert_relative_eq!(m.n1, n, max_relative = 1e-14);
        assert_relative_eq!(m.n2, k * n / (k + a), max_relative = 1e-14);
        assert_relative_eq!(m.m12, 2.0 * k * s.m_sq() / (2.0 * k + a), max_relative = 1e-14);

        let cm = covariance_from_moments(&m).unwrap();
        assert_relative_eq!(cm.s11, 2.0 * n + 1.0, max_relative = 1e-14);
        assert_relative_eq!(cm.s22, 2.0 * k * n / (k + a) + 1.0, max_relative = 1e-14);
        assert_relative_eq!(cm.s12, 4.0 * k * s.m_sq() / (2.0 * k + a), max_relative = 1e-14);
    }

    #[test]
    fn verbatim_and_rearranged_forms_agree() {
        for &(k, a, e, r) in &[
            (3.85, 200.0, 0.5, 1.0),
            (3.85, 1000.0, 0.75, 2.0),
            (0.7, 1500.0, 0.2, 3.0),
            (12.0, 50.0, 0.95, 0.3),
        ] {
            let (l, s) = (laser(k, a, e), res(r));
            let x = steady_moments_closed_form(&l, &s);
            let y = steady_moments_verbatim(&l, &s).unwrap();
            assert_relative_eq!(x.n1, y.n1, max_relative = 1e-11);
            assert_relative_eq!(x.n2, y.n2, max_relative = 1e-11);
            assert_relative_eq!(x.m12, y.m12, max_relative = 1e-11);
        }
    }

    #[test]
    fn verbatim_refuses_small_eta() {
        let err = steady_moments_verbatim(&laser(3.85, 200.0, 1e-7), &res(1.0)).unwrap_err();
        assert!(matches!(err, Error::SingularForm { .. }));
        assert!(err.to_string().contains("linear-solve"));
    }

    #[test]
    fn closed_form_is_regular_at_zero_inversion() {
        let m = steady_moments_closed_form(&laser(3.85, 500.0, 0.0), &res(1.0));
        assert!(m.n1.is_finite() && m.n2.is_finite() && m.m12.is_finite());
        assert!(m.n1 >= m.n2);
    }

    #[test]
    fn epr_variance_matches_naive_for_small_moments() {
        let m = steady_moments_closed_form(&laser(3.85, 200.0, 0.5), &res(0.4));
        let naive = 2.0 * (m.n1 + m.n2 - 2.0 * m.m12) + 2.0;
        assert_relative_eq!(m.epr_variance, naive, max_relative = 1e-10);
    }

    #[test]
    fn intensity_difference_special_cases() {
        let s = res(1.75);
        assert_eq!(intensity_difference(&laser(3.85, 0.0, 0.3), &s), 0.0);

        let (k, a) = (3.85, 200.0);
        assert_relative_eq!(
            intensity_difference(&laser(k, a, 1.0), &s),
            a * s.n_th() / (k + a),
            max_relative = 1e-13
        );
        let e = 0.4;
        assert_relative_eq!(
            intensity_difference(&laser(k, a, e), &res(0.0)),
            a * (1.0 - e) / (2.0 * (k + a * e)),
            max_relative = 1e-14
        );
    }

    #[test]
    fn intensity_difference_is_photon_number_difference() {
        let (l, s) = (laser(3.85, 200.0, 0.5), res(1.0));
        let m = steady_moments_closed_form(&l, &s);
        assert_relative_eq!(intensity_difference(&l, &s), m.n1 - m.n2, max_relative = 1e-10);
    }

    #[test]
    fn vacuum_covariance_is_identity() {
        let cm = covariance_from_moments(&SecondMoments::vacuum()).unwrap();
        assert_eq!(cm.materialize(), Matrix4::identity());
        assert_eq!(cm.sqrt_det(), 1.0);
    }

    #[test]
    fn transient_state_is_rejected() {
        let mut m = SecondMoments::vacuum();
        m.x12 = Complex::new(0.0, 1e-3);
        assert!(matches!(covariance_from_moments(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn materialized_matrix_determinant() {
        let cm = TwoModeCovariance::new(3.0, 2.5, 1.7);
        let full = cm.materialize();
        assert_eq!(full, full.transpose());
        let expected = (3.0f64 * 2.5 - 1.7 * 1.7).powi(2);
        assert_relative_eq!(full.determinant(), expected, max_relative = 1e-12);
        assert_relative_eq!(cm.det_sigma(), expected, max_relative = 1e-12);
    }
}
