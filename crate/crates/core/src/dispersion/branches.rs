//! Road dispersion branches, the field circle, and their intersection test.

use super::{Direction, DispersionError};
use crate::model::{ModelError, ModelParams};

/// Which root of the road quadratic to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Road quadratic coefficients at `(c, beta)`: the branch values are the
/// roots of `D a^2 - A a - B = 0` with
/// `A = c xi1 - q` and `B = c xi2 beta + chi(d beta) + rho`.
fn road_coeffs(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    beta: f64,
) -> Result<(f64, f64), ModelError> {
    let a = c * dir.xi1() - params.q;
    let b = c * dir.xi2() * beta + params.chi(params.d * beta)? + params.rho;
    Ok((a, b))
}

/// Discriminant of the road quadratic, `A^2 + 4 D B`.
///
/// Strictly increasing in `beta` (for `c >= 0`) and tending to `-inf` at
/// the exchange pole `beta -> -nu/d`.
pub(crate) fn discriminant(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    beta: f64,
) -> Result<f64, ModelError> {
    let (a, b) = road_coeffs(params, dir, c, beta)?;
    Ok(a * a + 4.0 * params.road_d * b)
}

/// Both roots `(minus, plus)` of the road quadratic, or `None` when the
/// discriminant is negative. Evaluated in the cancellation-free form
/// (larger-magnitude root from the formula, the other from the product).
pub(crate) fn branch_pair(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    beta: f64,
) -> Result<Option<(f64, f64)>, ModelError> {
    let (a, b) = road_coeffs(params, dir, c, beta)?;
    let disc = a * a + 4.0 * params.road_d * b;
    if disc < 0.0 {
        return Ok(None);
    }
    let sq = disc.sqrt();
    let dd = params.road_d;
    let (lo, hi) = if a >= 0.0 {
        let hi = (a + sq) / (2.0 * dd);
        let lo = if hi != 0.0 { -b / (dd * hi) } else { 0.0 };
        (lo, hi)
    } else {
        let lo = (a - sq) / (2.0 * dd);
        let hi = if lo != 0.0 { -b / (dd * lo) } else { 0.0 };
        (lo, hi)
    };
    Ok(Some((lo, hi)))
}

/// Road decay rate `alpha_D^(+-)(c, beta)`:
///
/// `(1/2D) [ (c xi1 - q) +- sqrt((c xi1 - q)^2 + 4D(c xi2 beta + chi(d beta) + rho)) ]`
///
/// `None` when the discriminant is negative; an error at or beyond the
/// exchange pole `d beta <= -nu`.
pub fn alpha_branch(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    beta: f64,
    branch: Branch,
) -> Result<Option<f64>, DispersionError> {
    let pair = branch_pair(params, dir, c, beta)?;
    Ok(pair.map(|(lo, hi)| match branch {
        Branch::Minus => lo,
        Branch::Plus => hi,
    }))
}

/// Leftmost admissible field-side decay rate for the road equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFloor {
    /// The infimum of `beta` with nonnegative discriminant; in `(-nu/d, 0]`.
    pub beta: f64,
    /// Set when no sign change was found before the exchange pole and the
    /// returned value is the pole offset itself.
    pub pole_clamped: bool,
}

/// Infimum `beta_floor(c)` of `beta` for which the road branches are real,
/// located by bisection between the exchange pole and 0.
///
/// The discriminant is increasing in `beta` with value
/// `(c xi1 - q)^2 + 4 D rho >= 0` at `beta = 0`, so the infimum lies in
/// `(-nu/d, 0]`.
pub fn beta_min(params: &ModelParams, dir: Direction, c: f64) -> BetaFloor {
    let pole = -params.nu / params.d;
    let disc = |beta: f64| discriminant(params, dir, c, beta).expect("right of pole");

    if disc(0.0) <= 0.0 {
        // Already the infimum: negative beta only decreases the discriminant.
        return BetaFloor {
            beta: 0.0,
            pole_clamped: false,
        };
    }
    // Find a strictly negative bracket end approaching the pole.
    let mut offset = 0.5 * params.nu / params.d;
    let mut lo = pole + offset;
    let mut found = false;
    for _ in 0..60 {
        if disc(lo) < 0.0 {
            found = true;
            break;
        }
        offset *= 0.25;
        lo = pole + offset;
    }
    if !found {
        return BetaFloor {
            beta: lo,
            pole_clamped: true,
        };
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if disc(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BetaFloor {
        beta: hi,
        pole_clamped: false,
    }
}

/// Circle of field decay rates in the `(beta, alpha)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCircle {
    /// Centre `(c/2d) (xi2, xi1)` as `(beta, alpha)` coordinates.
    pub center_beta: f64,
    pub center_alpha: f64,
    /// Radius `sqrt(c^2 - c_K^2) / 2d`.
    pub radius: f64,
}

/// Field dispersion circle at speed `c >= c_K`.
pub fn field_circle(
    params: &ModelParams,
    dir: Direction,
    c: f64,
) -> Result<FieldCircle, DispersionError> {
    let c_k = params.kpp_speed();
    if c < c_k {
        return Err(DispersionError::BelowKpp { c, c_k });
    }
    let two_d = 2.0 * params.d;
    Ok(FieldCircle {
        center_beta: c / two_d * dir.xi2(),
        center_alpha: c / two_d * dir.xi1(),
        radius: ((c - c_k).max(0.0) * (c + c_k)).sqrt() / two_d,
    })
}

/// Which separating inequality is active at a scanned point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gap {
    /// Disc chord entirely above the upper road branch.
    DiscAboveUpper,
    /// Disc chord entirely below the lower road branch.
    DiscBelowLower,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Separation {
    /// Minimum over scanned `beta` of the interval separation; overlap
    /// somewhere iff this is <= 0.
    pub min: f64,
    pub beta_at_min: f64,
    pub gap: Gap,
}

/// Vertical separation between the road interval `[alpha_-, alpha_+]` and
/// the disc chord at a fixed `beta`. Negative numbers mean overlap.
fn separation_at(
    params: &ModelParams,
    dir: Direction,
    c: f64,
    circle: &FieldCircle,
    beta: f64,
) -> Option<(f64, Gap)> {
    let (lo, hi) = match branch_pair(params, dir, c, beta) {
        Ok(Some(pair)) => pair,
        // Float dust just left of the floor: treat as the double root.
        Ok(None) => {
            let disc = discriminant(params, dir, c, beta).ok()?;
            if disc > -1e-12 * (1.0 + c * c) {
                let a = c * dir.xi1() - params.q;
                let root = a / (2.0 * params.road_d);
                (root, root)
            } else {
                return None;
            }
        }
        Err(_) => return None,
    };
    let db = beta - circle.center_beta;
    let half = (circle.radius * circle.radius - db * db).max(0.0).sqrt();
    let chord_lo = circle.center_alpha - half;
    let chord_hi = circle.center_alpha + half;
    // Only one of the two can be positive.
    let above = chord_lo - hi;
    let below = lo - chord_hi;
    if above >= below {
        Some((above, Gap::DiscAboveUpper))
    } else {
        Some((below, Gap::DiscBelowLower))
    }
}

const SCAN_BASE: usize = 512;
const SCAN_REFINEMENTS: usize = 3;

/// Scan the feasible `beta` window for the smallest separation between
/// the road region and the disc, refining around the running minimum.
pub(crate) fn separation_scan(
    params: &ModelParams,
    dir: Direction,
    c: f64,
) -> Result<Option<Separation>, DispersionError> {
    let circle = field_circle(params, dir, c)?;
    let floor = beta_min(params, dir, c).beta;
    let left = floor.max(circle.center_beta - circle.radius);
    let right = circle.center_beta + circle.radius;
    if right < left {
        return Ok(None); // disc entirely left of the admissible window
    }

    let scan = |lo: f64, hi: f64, n: usize| -> Option<(f64, f64, Gap)> {
        let mut best: Option<(f64, f64, Gap)> = None;
        for k in 0..=n {
            let beta = lo + (hi - lo) * k as f64 / n as f64;
            if let Some((sep, gap)) = separation_at(params, dir, c, &circle, beta) {
                if best.map_or(true, |(s, _, _)| sep < s) {
                    best = Some((sep, beta, gap));
                }
            }
        }
        best
    };

    let span = (right - left).max(f64::MIN_POSITIVE);
    let mut window = (left, right);
    let mut step = span / SCAN_BASE as f64;
    let mut best = match scan(window.0, window.1, SCAN_BASE) {
        Some(b) => b,
        None => return Ok(None),
    };
    for _ in 0..SCAN_REFINEMENTS {
        if best.0 <= 0.0 {
            break; // overlap already established
        }
        let lo = (best.1 - 3.0 * step).max(left);
        let hi = (best.1 + 3.0 * step).min(right);
        window = (lo, hi);
        step = (hi - lo) / SCAN_BASE as f64;
        if let Some(b) = scan(window.0, window.1, SCAN_BASE) {
            if b.0 < best.0 {
                best = b;
            }
        }
    }
    Ok(Some(Separation {
        min: best.0,
        beta_at_min: best.1,
        gap: best.2,
    }))
}

/// Whether the road region and the field disc meet at speed `c >= c_K`.
pub fn intersects(params: &ModelParams, dir: Direction, c: f64) -> Result<bool, DispersionError> {
    Ok(separation_scan(params, dir, c)?.map_or(false, |s| s.min <= 0.0))
}
