//! Linear moment equations of the cascade laser, their time integration and
//! their stationary solution.
//!
//! The state is a real vector of [`STATE_DIM`] slots. Complex moments occupy
//! a (real, imaginary) pair; the photon numbers are real by construction and
//! take one slot each.
//!
//! | slots  | moment            |
//! |--------|-------------------|
//! | 0, 1   | `<a1>`            |
//! | 2, 3   | `<a2>`            |
//! | 4, 5   | `<a1^2>`          |
//! | 6, 7   | `<a2^2>`          |
//! | 8      | `<a1^dag a1>`     |
//! | 9      | `<a2^dag a2>`     |
//! | 10, 11 | `<a1 a2>`         |
//! | 12, 13 | `<a1 a2^dag>`     |

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{LaserParams, ReservoirParams};
use crate::steady_state::SecondMoments;

pub const STATE_DIM: usize = 14;

pub type MomentState = SVector<f64, STATE_DIM>;
pub type DriftMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;

/// Slot indices of the state vector.
pub mod slot {
    pub const A1: usize = 0;
    pub const A2: usize = 2;
    pub const SQ1: usize = 4;
    pub const SQ2: usize = 6;
    pub const N1: usize = 8;
    pub const N2: usize = 9;
    pub const M12: usize = 10;
    pub const X12: usize = 12;
}

/// Stability threshold on the largest real part of the drift spectrum.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// `dx/dt = drift x + drive`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSystem {
    pub drift: DriftMatrix,
    pub drive: MomentState,
    /// Effective loss of mode A, `kappa - A p_aa`. May be negative.
    pub xi1: f64,
    /// Effective loss of mode B, `kappa + A p_cc`.
    pub xi2: f64,
}

pub fn build_drift_system(laser: &LaserParams, reservoir: &ReservoirParams) -> DriftSystem {
    use slot::*;
    let (k, a) = (laser.kappa(), laser.gain());
    let at = laser.atomic_init();
    let xi1 = k - a * at.p_aa;
    let xi2 = k + a * at.p_cc;
    let c = 0.5 * a * at.p_ac;
    let s = 0.5 * (xi1 + xi2);

    let mut m = DriftMatrix::zeros();
    let mut set = |i: usize, j: usize, v: f64| m[(i, j)] = v;

    // <a1>' = -xi1/2 <a1> - c <a2>*,  <a2>' = -xi2/2 <a2> + c <a1>*
    set(A1, A1, -0.5 * xi1);
    set(A1, A2, -c);
    set(A1 + 1, A1 + 1, -0.5 * xi1);
    set(A1 + 1, A2 + 1, c);
    set(A2, A2, -0.5 * xi2);
    set(A2, A1, c);
    set(A2 + 1, A2 + 1, -0.5 * xi2);
    set(A2 + 1, A1 + 1, -c);

    // <a1^2>' = -xi1 <a1^2> - 2c <a1 a2^dag>,  <a2^2>' = -xi2 <a2^2> + 2c <a1 a2^dag>*
    for p in 0..2 {
        set(SQ1 + p, SQ1 + p, -xi1);
        set(SQ1 + p, X12 + p, -2.0 * c);
        set(SQ2 + p, SQ2 + p, -xi2);
    }
    set(SQ2, X12, 2.0 * c);
    set(SQ2 + 1, X12 + 1, -2.0 * c);

    // photon numbers
    set(N1, N1, -xi1);
    set(N1, M12, -2.0 * c);
    set(N2, N2, -xi2);
    set(N2, M12, 2.0 * c);

    // <a1 a2>' = -s <a1 a2> + c (n1 - n2 + 1) + kappa M
    set(M12, M12, -s);
    set(M12, N1, c);
    set(M12, N2, -c);
    set(M12 + 1, M12 + 1, -s);

    // <a1 a2^dag>' = -s <a1 a2^dag> + c (<a1^2> - <a2^2>*)
    set(X12, X12, -s);
    set(X12, SQ1, c);
    set(X12, SQ2, -c);
    set(X12 + 1, X12 + 1, -s);
    set(X12 + 1, SQ1 + 1, c);
    set(X12 + 1, SQ2 + 1, c);

    let mut drive = MomentState::zeros();
    drive[N1] = a * at.p_aa + k * reservoir.n_th();
    drive[N2] = k * reservoir.n_th();
    drive[M12] = c + k * reservoir.m_sq();

    DriftSystem {
        drift: m,
        drive,
        xi1,
        xi2,
    }
}

impl SecondMoments {
    /// Reads the second moments out of a state vector. `m12` is the real part
    /// of `<a1 a2>`.
    pub fn from_state(x: &MomentState) -> Self {
        use slot::*;
        let z = |i: usize| Complex::new(x[i], x[i + 1]);
        Self {
            sq1: z(SQ1),
            sq2: z(SQ2),
            x12: z(X12),
            ..Self::stationary(x[N1], x[N2], x[M12])
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentTrajectory {
    /// Sample instants in ms, starting at 0.
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    pub final_moments: SecondMoments,
}

impl MomentTrajectory {
    pub fn final_state(&self) -> &MomentState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Step for [`integrate_moments`]: 0.05 over the spectral radius of the
/// drift, capped at `t_final / 100`.
pub fn default_step(sys: &DriftSystem, t_final: f64) -> f64 {
    let rho = stability_report(sys).spectral_radius;
    let h = if rho > 0.0 { 0.05 / rho } else { f64::INFINITY };
    h.min(t_final / 100.0)
}

/// Classical fixed-step RK4 from `t = 0` to `t_final`.
///
/// The step actually used is `t_final / n` with `n` the smallest step count
/// for which it does not exceed `step`.
pub fn integrate_moments(
    sys: &DriftSystem,
    initial: &MomentState,
    t_final: f64,
    step: f64,
) -> Result<MomentTrajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!("integration step must be positive, got {step}")));
    }
    if !(t_final >= step && t_final.is_finite()) {
        return Err(Error::Precondition(format!(
            "final time {t_final} must be finite and at least the step {step}"
        )));
    }
    let n = ((t_final / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_final / n as f64;
    let f = |x: &MomentState| sys.drift * x + sys.drive;

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut x = *initial;
    times.push(0.0);
    states.push(x);
    for i in 1..=n {
        let k1 = f(&x);
        let k2 = f(&(x + k1 * (0.5 * h)));
        let k3 = f(&(x + k2 * (0.5 * h)));
        let k4 = f(&(x + k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t = i as f64 * h;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged { time: t });
        }
        times.push(t);
        states.push(x);
    }
    Ok(MomentTrajectory {
        times,
        states,
        final_moments: SecondMoments::from_state(&x),
    })
}

/// Stationary state vector, `drift x = -drive`.
pub fn steady_state_vector(sys: &DriftSystem) -> Result<MomentState> {
    linalg::solve(&sys.drift, &(-sys.drive))
}

/// Stationary moments by a direct solve of the moment equations.
pub fn steady_state_linear_solve(sys: &DriftSystem) -> Result<SecondMoments> {
    let x = steady_state_vector(sys)?;
    let m = SecondMoments::from_state(&x);
    if !m.is_stationary() {
        return Err(Error::Degenerate(format!(
            "linear solve left transient moments nonzero: {:?} {:?} {:?}",
            m.sq1, m.sq2, m.x12
        )));
    }
    Ok(SecondMoments::stationary(m.n1, m.n2, m.m12))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Largest real part of the drift spectrum, 1/ms.
    pub max_real_eig: f64,
    /// Largest eigenvalue modulus, 1/ms.
    pub spectral_radius: f64,
    pub stable: bool,
}

/// Eigenvalues of the drift, computed per decoupled block.
///
/// Slots are grouped into the connected components of the drift's sparsity
/// pattern and each (at most 3x3) block goes through a bounded Schur
/// iteration. `None` if an iteration fails to converge.
pub fn drift_eigenvalues(drift: &DriftMatrix) -> Option<Vec<Complex<f64>>> {
    let mut component = [usize::MAX; STATE_DIM];
    let mut out = Vec::with_capacity(STATE_DIM);
    for start in 0..STATE_DIM {
        if component[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        component[start] = start;
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for j in 0..STATE_DIM {
                if component[j] == usize::MAX && (drift[(i, j)] != 0.0 || drift[(j, i)] != 0.0) {
                    component[j] = start;
                    members.push(j);
                }
            }
            k += 1;
        }
        let block = DMatrix::from_fn(members.len(), members.len(), |a, b| {
            drift[(members[a], members[b])]
        });
        let schur = Schur::try_new(block, f64::EPSILON, 10_000)?;
        out.extend(schur.complex_eigenvalues().iter().copied());
    }
    Some(out)
}

pub fn stability_report(sys: &DriftSystem) -> StabilityReport {
    let Some(eig) = drift_eigenvalues(&sys.drift) else {
        return StabilityReport {
            max_real_eig: f64::NAN,
            spectral_radius: f64::NAN,
            stable: false,
        };
    };
    let max_real_eig = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    StabilityReport {
        max_real_eig,
        spectral_radius,
        stable: max_real_eig < -STABILITY_MARGIN,
    }
}
