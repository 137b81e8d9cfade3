//! Dispersion analysis of the linearised road-field system.
//!
//! Plane-wave solutions `exp(-(alpha, beta) . ((x, y) - c t xi))` of the
//! linearisation around zero reduce to an algebraic system in the decay
//! rates `(alpha, beta)`:
//!
//! ```text
//! c xi1 alpha + c xi2 beta - D alpha^2 - q alpha + rho = -chi(d beta)
//! c xi1 alpha + c xi2 beta - d (alpha^2 + beta^2)      = f'(0)
//! ```
//!
//! with `chi(s) = mu s / (nu + s)`. In the `(beta, alpha)` plane the first
//! equation bounds a region between two road branches, the second is a
//! circle of field decay rates. The directional spreading speed `w_*` is
//! the least wave speed `c` at which the two sets meet; the meeting point
//! `(beta_*, alpha_*)` is the tangential contact this module solves for.

mod branches;
mod complex;
mod contact;

pub use branches::{alpha_branch, beta_min, field_circle, intersects, BetaFloor, Branch, FieldCircle};
pub use complex::{complex_roots, ComplexWaveRoots};
pub use contact::{
    algebraic_residuals, normal_speed, tangent_bound, w_star, w_star_derivative, SpectralContact,
};

use crate::model::{ModelError, ModelParams};
use thiserror::Error;

/// Default tolerance for the `w_star` bisection and contact residuals.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("angle {0} outside [-pi/2, pi/2]")]
    InvalidAngle(f64),
    #[error("speed c = {c} below the field minimum c_K = {c_k}: no real field decay")]
    BelowKpp { c: f64, c_k: f64 },
    #[error("cutoff argument {0} outside {1}")]
    PhiDomain(f64, &'static str),
    #[error("no intersection found below c = {0}; upper bound search failed")]
    NoUpperBound(f64),
    #[error("tangency refinement did not converge; bisection bracket was [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("complex root Newton iteration diverged (c = {c}, eps = {eps})")]
    NewtonDiverged { c: f64, eps: f64 },
    #[error("complex roots collapsed to the real axis (c = {c} too far below w_* = {w_star})")]
    RootsCollapsed { c: f64, w_star: f64 },
    #[error("speed must be below w_* = {w_star} for complex roots, got c = {c}")]
    NotBelowContact { c: f64, w_star: f64 },
    #[error("cosine degenerate in tangent bound at shifted angle {0}")]
    DegenerateCosine(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A spreading direction `(sin theta, cos theta)`, with `theta` measured
/// from the vertical axis (the road normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    xi1: f64,
    xi2: f64,
}

impl Direction {
    pub fn new(theta: f64) -> Result<Self, DispersionError> {
        if !theta.is_finite() || theta.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return Err(DispersionError::InvalidAngle(theta));
        }
        let th = theta.clamp(
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
        );
        Ok(Self {
            theta: th,
            xi1: th.sin(),
            xi2: th.cos().max(0.0),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Horizontal component `sin theta` (along the road).
    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    /// Vertical component `cos theta` (into the field).
    pub fn xi2(&self) -> f64 {
        self.xi2
    }
}

/// Critical angles bounding the cone in which the road has no effect:
/// `w_*(theta) = c_K` exactly for `theta in [theta_minus, theta_plus]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAngles {
    pub theta_minus: f64,
    pub theta_plus: f64,
}

/// Side of the road for the directional enhancement criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Cutoff function for the basic system, as a function of `s = xi2`:
///
/// `Phi(s) = 2d + D (s^2 - 1) + 4 d^2 mu s / (2 nu c_K + c_K^2 s)`.
///
/// Increasing on [0, inf); its sign at `xi2` decides whether the road
/// leaves the speed at `c_K` in that direction.
pub fn phi_cutoff_classic(params: &ModelParams, s: f64) -> Result<f64, DispersionError> {
    if !(s >= 0.0) {
        return Err(DispersionError::PhiDomain(s, "[0, +inf)"));
    }
    let c_k = params.kpp_speed();
    Ok(2.0 * params.d + params.road_d * (s * s - 1.0)
        + 4.0 * params.d * params.d * params.mu * s / (2.0 * params.nu * c_k + c_k * c_k * s))
}

/// Cutoff function for the transport/mortality variant, as a function of
/// `s = xi1`:
///
/// `Phi(s) = 2 - (D/d) s^2 - (2q/c_K) s + 4 d rho / c_K^2
///           + 4 d mu sqrt(1-s^2) / (2 nu c_K + c_K^2 sqrt(1-s^2))`.
///
/// Every term is concave in `s` and `Phi(0) > 0`, so the sign changes at
/// most twice. For `q = rho = 0` this equals the classic cutoff divided
/// by `d` (with `s` the conjugate coordinate).
pub fn phi_cutoff_transport(params: &ModelParams, s: f64) -> Result<f64, DispersionError> {
    if !(s.abs() <= 1.0) {
        return Err(DispersionError::PhiDomain(s, "[-1, 1]"));
    }
    let c_k = params.kpp_speed();
    let xi2 = (1.0 - s * s).max(0.0).sqrt();
    let exch = if xi2 > 0.0 {
        4.0 * params.d * params.mu * xi2 / (2.0 * params.nu * c_k + c_k * c_k * xi2)
    } else {
        0.0
    };
    Ok(2.0 - params.road_d / params.d * s * s - 2.0 * params.q / c_k * s
        + 4.0 * params.d * params.rho / (c_k * c_k)
        + exch)
}

/// True when the speed along the road in the given direction strictly
/// exceeds `c_K`, i.e. `D/d > 2 + rho/f'(0) -/+ q/sqrt(d f'(0))`
/// (minus for [`Side::Plus`]).
pub fn enhancement_holds(params: &ModelParams, side: Side) -> bool {
    let sign = match side {
        Side::Plus => -1.0,
        Side::Minus => 1.0,
    };
    params.road_d / params.d
        > 2.0 + params.rho / params.f0p + sign * params.q / (params.d * params.f0p).sqrt()
}

/// Whether `w_* = c_K` holds in the direction `dir`, decided by the sign
/// of the cutoff function at `xi1`.
pub(crate) fn speed_is_kpp(params: &ModelParams, dir: Direction) -> bool {
    // xi2 >= 0 always holds here, so the transport cutoff covers both variants.
    phi_cutoff_transport(params, dir.xi1())
        .expect("|xi1| <= 1 by construction")
        >= 0.0
}

/// Critical angles of the enhancement cone.
///
/// Basic case: `theta_plus = -theta_minus = arccos(root of classic Phi)`,
/// or `pi/2` when `D <= 2d`. General case: the two sign changes of the
/// transport cutoff, clamped to `+-pi/2` when the enhancement condition
/// fails on that side.
pub fn critical_angles(params: &ModelParams) -> CriticalAngles {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if params.is_classic() {
        if params.road_d <= 2.0 * params.d {
            return CriticalAngles {
                theta_minus: -half_pi,
                theta_plus: half_pi,
            };
        }
        // Phi is increasing with Phi(0) = 2d - D < 0 and Phi(1) > 0.
        let root = bisect_root(
            |s| phi_cutoff_classic(params, s).expect("s in [0,1]"),
            0.0,
            1.0,
            1e-14,
        );
        let theta0 = root.acos();
        return CriticalAngles {
            theta_minus: -theta0,
            theta_plus: theta0,
        };
    }
    let phi = |s: f64| phi_cutoff_transport(params, s).expect("s in [-1,1]");
    let theta_plus = if phi(1.0) >= 0.0 {
        half_pi
    } else {
        bisect_root(&phi, 0.0, 1.0, 1e-14).asin()
    };
    let theta_minus = if phi(-1.0) >= 0.0 {
        -half_pi
    } else {
        // Map to an increasing function of s on [0, 1].
        -bisect_root(|s| phi(-s), 0.0, 1.0, 1e-14).asin()
    };
    CriticalAngles {
        theta_minus,
        theta_plus,
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, assuming
/// `f(lo) > 0 > f(hi)` or `f(lo) < 0 < f(hi)`.
fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= 0.0);
    let rising = f_lo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
