//! Complex wave roots of the penalised dispersion system.
//!
//! Just below the contact speed the two dispersion equations have no real
//! solution; they do have complex ones, with imaginary parts of order
//! `sqrt(w_* - c)`. These roots build oscillating compactly-supported
//! subsolutions, and their slope inequalities are what make the
//! truncation argument work, so they are validated here explicitly.

use num_complex::Complex64;

use super::contact::w_star;
use super::{Direction, DispersionError};
use crate::model::ModelParams;

/// A complex root pair of the penalised system at speed `c < w_*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWaveRoots {
    pub c: f64,
    pub eps: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Amplitude ratio `(mu - eps) / (nu + eps + d beta)`.
    pub gamma: Complex64,
}

impl ComplexWaveRoots {
    /// Strict slope chain `0 < Im a / Im b < Re a / Re b < xi1 / xi2`
    /// together with positivity of all four parts and
    /// `Arg(1/gamma) in (0, pi/2)`.
    pub fn slope_chain_holds(&self, dir: Direction) -> bool {
        let (ar, ai) = (self.alpha.re, self.alpha.im);
        let (br, bi) = (self.beta.re, self.beta.im);
        if !(ar > 0.0 && ai > 0.0 && br > 0.0 && bi > 0.0) {
            return false;
        }
        // Compare as cross products to stay finite at xi2 = 0.
        let imag_below_real = ai * br < ar * bi;
        let real_below_ray = ar * dir.xi2() < dir.xi1() * br;
        let arg = self.gamma.inv().arg();
        imag_below_real && real_below_ray && arg > 0.0 && arg < std::f64::consts::FRAC_PI_2
    }
}

/// Penalised system evaluated at complex `(alpha, beta)`; returns both
/// equation residuals.
fn penalised_system(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    eps: f64,
    alpha: Complex64,
    beta: Complex64,
) -> [Complex64; 2] {
    let lin = alpha * (c * dir.xi1()) + beta * (c * dir.xi2());
    let exch = (Complex64::from(params.nu + eps) + beta * params.d).inv()
        * ((params.mu - eps) * (params.nu - eps));
    let road = lin - alpha * alpha * params.road_d - alpha * params.q
        + (params.mu + params.rho + eps)
        - exch;
    let field = lin - (alpha * alpha + beta * beta) * params.d - (params.f0p - eps);
    [road, field]
}

fn jacobian(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    eps: f64,
    alpha: Complex64,
    beta: Complex64,
) -> [[Complex64; 2]; 2] {
    let denom = Complex64::from(params.nu + eps) + beta * params.d;
    let d_exch =
        (denom * denom).inv() * (params.d * (params.mu - eps) * (params.nu - eps));
    [
        [
            Complex64::from(c * dir.xi1() - params.q) - alpha * (2.0 * params.road_d),
            Complex64::from(c * dir.xi2()) + d_exch,
        ],
        [
            Complex64::from(c * dir.xi1()) - alpha * (2.0 * params.d),
            Complex64::from(c * dir.xi2()) - beta * (2.0 * params.d),
        ],
    ]
}

fn newton(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    eps: f64,
    mut alpha: Complex64,
    mut beta: Complex64,
    ftol: f64,
) -> Option<(Complex64, Complex64)> {
    let norm = |f: &[Complex64; 2]| (f[0].norm_sqr() + f[1].norm_sqr()).sqrt();
    let mut f = penalised_system(params, dir, c, eps, alpha, beta);
    for _ in 0..100 {
        if norm(&f) < ftol {
            return Some((alpha, beta));
        }
        let j = jacobian(params, dir, c, eps, alpha, beta);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() < 1e-300 {
            return None;
        }
        let da = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let a_next = alpha - da * lambda;
            let b_next = beta - db * lambda;
            let f_next = penalised_system(params, dir, c, eps, a_next, b_next);
            if norm(&f_next) < norm(&f) {
                alpha = a_next;
                beta = b_next;
                f = f_next;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (norm(&f) < ftol).then_some((alpha, beta))
}

/// Solve the penalised system for complex decay rates at `c` slightly
/// below `w_*`, seeding Newton at the real contact plus an imaginary
/// offset proportional to `sqrt(w_* - c)`.
pub fn complex_roots(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    eps: f64,
) -> Result<ComplexWaveRoots, DispersionError> {
    assert!(eps >= 0.0, "penalisation must be nonnegative");
    let contact = w_star(params, dir, super::DEFAULT_TOL)?;
    if c >= contact.w_star {
        return Err(DispersionError::NotBelowContact {
            c,
            w_star: contact.w_star,
        });
    }
    let off = (contact.w_star - c).sqrt();
    let scale = 1.0 + c * c + params.mu + params.nu;
    let ftol = 1e-13 * scale;

    let mut found: Option<(Complex64, Complex64)> = None;
    for kappa in [0.5, 0.2, 1.0, 0.05, 2.0] {
        let seed_a = Complex64::new(contact.alpha_star, kappa * off);
        let seed_b = Complex64::new(contact.beta_star, kappa * off);
        if let Some((a, b)) = newton(params, dir, c, eps, seed_a, seed_b, ftol) {
            if b.im.abs() > 1e-10 * b.norm().max(1.0) {
                found = Some((a, b));
                break;
            }
            // Keep a real root only as evidence of collapse.
            found.get_or_insert((a, b));
        }
    }
    let (mut alpha, mut beta) = found.ok_or(DispersionError::NewtonDiverged { c, eps })?;
    if beta.im.abs() <= 1e-10 * beta.norm().max(1.0) {
        return Err(DispersionError::RootsCollapsed {
            c,
            w_star: contact.w_star,
        });
    }
    // Conjugate pairs are interchangeable; normalise Im beta > 0.
    if beta.im < 0.0 {
        alpha = alpha.conj();
        beta = beta.conj();
    }
    let gamma = (Complex64::from(params.nu + eps) + beta * params.d)
        .inv()
        .scale(params.mu - eps);
    Ok(ComplexWaveRoots {
        c,
        eps,
        alpha,
        beta,
        gamma,
    })
}
