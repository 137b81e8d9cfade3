//! Expansion shapes in the half-plane: the true shape traced by
//! `w_*(theta)`, the Huygens lower shape, and the fast-road strip
//! envelope, all stored as polar radial profiles over a shared angle
//! grid.

use crate::dispersion::{self, Direction, DispersionError, SpectralContact};
use crate::model::ModelParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("shape sampling needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("theta grids do not match ({0} vs {1} nodes or differing values)")]
    GridMismatch(usize, usize),
    #[error("shape carries no contact data at theta = pi/2")]
    MissingContactData,
    #[error("boundary degenerate: fewer than 3 distinct polygon vertices")]
    DegenerateBoundary,
    #[error("road contact angle {phi_star} does not exceed the hull angle {theta1}")]
    ContactAngleBelowHull { phi_star: f64, theta1: f64 },
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// Which expansion shape a sample describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeLabel {
    /// The true asymptotic shape with radius `w_*(theta)`.
    W,
    /// Convex hull of the `c_K` half-disc and the road segment.
    WLower,
    /// The strip limit `c_K / cos(theta)` reached as the road diffusivity
    /// grows without bound.
    StripEnvelope,
}

impl std::fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShapeLabel::W => "W",
            ShapeLabel::WLower => "W_lower",
            ShapeLabel::StripEnvelope => "strip_envelope",
        })
    }
}

/// Polar sampling of a planar expansion shape over `[-pi/2, pi/2]`.
///
/// Failed solver nodes carry NaN radii; radii of the strip envelope are
/// infinite at the endpoints.
#[derive(Debug, Clone)]
pub struct ShapeSample {
    pub thetas: Vec<f64>,
    pub radii: Vec<f64>,
    /// Unit outward normals `(n_x, n_y)` per node, when the shape
    /// construction defines them.
    pub normals: Option<Vec<[f64; 2]>>,
    pub label: ShapeLabel,
    /// Full contact data per node; present on shapes built from the
    /// dispersion solver.
    pub contacts: Option<Vec<Option<SpectralContact>>>,
}

impl ShapeSample {
    /// Indices of nodes whose solve failed.
    pub fn flagged(&self) -> Vec<usize> {
        self.radii
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_nan())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Uniform grid of `n` angles spanning `[-pi/2, pi/2]` inclusive.
pub fn theta_grid(n: usize) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    (0..n)
        .map(|k| -half_pi + std::f64::consts::PI * k as f64 / (n - 1) as f64)
        .collect()
}

/// Default node count for shape grids (quarter-degree resolution).
pub const DEFAULT_SHAPE_NODES: usize = 721;

/// Sample the true expansion shape on `n` nodes, attaching outward
/// normals parallel to the contact decay rates `(alpha_*, beta_*)`.
///
/// Solver failures flag individual nodes instead of aborting the sweep.
pub fn expansion_shape(params: &ModelParams, n: usize) -> Result<ShapeSample, GeometryError> {
    if n < 16 {
        return Err(GeometryError::TooFewNodes(n));
    }
    let thetas = theta_grid(n);
    let mut radii = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut contacts = Vec::with_capacity(n);
    for &theta in &thetas {
        let dir = Direction::new(theta)?;
        match dispersion::w_star(params, dir, dispersion::DEFAULT_TOL) {
            Ok(c) => {
                let norm = c.decay_norm();
                radii.push(c.w_star);
                normals.push([c.alpha_star / norm, c.beta_star / norm]);
                contacts.push(Some(c));
            }
            Err(_) => {
                radii.push(f64::NAN);
                normals.push([f64::NAN, f64::NAN]);
                contacts.push(None);
            }
        }
    }
    Ok(ShapeSample {
        thetas,
        radii,
        normals: Some(normals),
        label: ShapeLabel::W,
        contacts: Some(contacts),
    })
}

/// Radial profile of the Huygens lower shape: the convex hull of the
/// `c_K` half-disc and the road segment of half-length `c_*`.
///
/// `r = c_K` inside `|theta| <= theta_1 = arcsin(c_K / c_*)`, and the
/// tangent-segment formula
/// `r = c_K c_* / (c_K sin|theta| + sqrt(c_*^2 - c_K^2) cos theta)`
/// beyond.
pub fn lower_shape(params: &ModelParams, n: usize) -> Result<ShapeSample, GeometryError> {
    if n < 16 {
        return Err(GeometryError::TooFewNodes(n));
    }
    let c_k = params.kpp_speed();
    let c_star = dispersion::w_star(
        params,
        Direction::new(std::f64::consts::FRAC_PI_2)?,
        dispersion::DEFAULT_TOL,
    )?
    .w_star;
    let theta1 = (c_k / c_star).asin();
    let spread = (c_star * c_star - c_k * c_k).max(0.0).sqrt();
    let thetas = theta_grid(n);
    let mut radii = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for &theta in &thetas {
        let at = theta.abs();
        if at <= theta1 {
            radii.push(c_k);
            normals.push([theta.sin(), theta.cos()]);
        } else {
            radii.push(c_k * c_star / (c_k * at.sin() + spread * at.cos()));
            normals.push([theta.signum() * theta1.sin(), theta1.cos()]);
        }
    }
    Ok(ShapeSample {
        thetas,
        radii,
        normals: Some(normals),
        label: ShapeLabel::WLower,
        contacts: None,
    })
}

/// Pointwise strip-envelope radius `c_K / cos theta`; infinite (flagged
/// by the caller) at `|theta| = pi/2`.
pub fn strip_envelope(params: &ModelParams, theta: f64) -> f64 {
    let c = theta.cos();
    if c <= 0.0 {
        f64::INFINITY
    } else {
        params.kpp_speed() / c
    }
}

/// Sample the strip envelope on the shared grid.
pub fn strip_envelope_shape(params: &ModelParams, n: usize) -> Result<ShapeSample, GeometryError> {
    if n < 16 {
        return Err(GeometryError::TooFewNodes(n));
    }
    let thetas = theta_grid(n);
    let radii = thetas
        .iter()
        .map(|&t| strip_envelope(params, t))
        .collect();
    Ok(ShapeSample {
        thetas,
        radii,
        normals: None,
        label: ShapeLabel::StripEnvelope,
        contacts: None,
    })
}

/// Strict convexity of the closed region bounded by the polar profile and
/// its mirror image below the road.
///
/// The boundary polygon is the sampled curve plus its reflection across
/// the x-axis; the test requires every consecutive cross product to turn
/// the same way, with a small relative slack for discretisation.
pub fn is_convex(shape: &ShapeSample) -> Result<bool, GeometryError> {
    if shape.thetas.len() < 16 {
        return Err(GeometryError::TooFewNodes(shape.thetas.len()));
    }
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(2 * shape.thetas.len());
    for (&theta, &r) in shape.thetas.iter().zip(&shape.radii) {
        if r.is_finite() {
            pts.push([r * theta.sin(), r * theta.cos()]);
        }
    }
    let upper = pts.clone();
    for p in upper.iter().rev() {
        if p[1].abs() > 1e-14 * (1.0 + p[0].abs()) {
            pts.push([p[0], -p[1]]);
        }
    }
    // Drop consecutive duplicates (grid endpoints touch the axis).
    pts.dedup_by(|a, b| {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        (dx * dx + dy * dy).sqrt() < 1e-12
    });
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateBoundary);
    }
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let c = pts[(i + 2) % n];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - b[0], c[1] - b[1]];
        let cross = u[0] * v[1] - u[1] * v[0];
        let scale = (u[0].hypot(u[1])) * (v[0].hypot(v[1]));
        // Counterclockwise ordering makes interior turns positive; the
        // profile runs clockwise (from -pi/2 to pi/2), so require <= 0.
        if cross > 1e-9 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-angle radial gaps `r_outer - r_inner` on a shared grid.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub gaps: Vec<f64>,
    pub min: f64,
    /// Largest finite gap and the angle attaining it.
    pub max: f64,
    pub theta_at_max: f64,
}

/// Radial containment gap between two shapes sampled on the same grid.
pub fn containment_gap(outer: &ShapeSample, inner: &ShapeSample) -> Result<GapReport, GeometryError> {
    if outer.thetas.len() != inner.thetas.len()
        || outer
            .thetas
            .iter()
            .zip(&inner.thetas)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(GeometryError::GridMismatch(
            outer.thetas.len(),
            inner.thetas.len(),
        ));
    }
    let gaps: Vec<f64> = outer
        .radii
        .iter()
        .zip(&inner.radii)
        .map(|(o, i)| o - i)
        .collect();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut theta_at_max = f64::NAN;
    for (k, &g) in gaps.iter().enumerate() {
        if g.is_nan() {
            continue;
        }
        min = min.min(g);
        if g.is_finite() && g > max {
            max = g;
            theta_at_max = outer.thetas[k];
        }
    }
    Ok(GapReport {
        gaps,
        min,
        max,
        theta_at_max,
    })
}

/// Acute angle the true shape forms with the road, read off the stored
/// normal at `theta = pi/2`; checks that it exceeds the hull angle
/// `theta_1 = arcsin(c_K / c_*)`.
pub fn angle_with_road(params: &ModelParams, shape: &ShapeSample) -> Result<f64, GeometryError> {
    let normals = shape
        .normals
        .as_ref()
        .ok_or(GeometryError::MissingContactData)?;
    let last = shape.thetas.len() - 1;
    if (shape.thetas[last] - std::f64::consts::FRAC_PI_2).abs() > 1e-9 {
        return Err(GeometryError::MissingContactData);
    }
    let n = normals[last];
    if !n[0].is_finite() || !n[1].is_finite() {
        return Err(GeometryError::MissingContactData);
    }
    let phi_star = n[0].atan2(n[1]);
    let c_star = shape.radii[last];
    let theta1 = (params.kpp_speed() / c_star).asin();
    if phi_star <= theta1 {
        return Err(GeometryError::ContactAngleBelowHull { phi_star, theta1 });
    }
    Ok(phi_star)
}
