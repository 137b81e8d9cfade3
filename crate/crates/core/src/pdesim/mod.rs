//! Explicit finite-difference simulation of the coupled road-field
//! system on a truncated half-plane, with front tracking along rays.
//!
//! The field is a 5-point stencil with homogeneous Neumann outer walls;
//! the exchange condition `-d dv/dy = mu u - nu v` enters through a
//! second-order ghost row under the road. Road and field advance together
//! in one explicit Euler step, which keeps the scheme deterministic and
//! cheap enough for desk-scale domains.

mod front;
mod stationary;
mod stepper;

pub use front::{front_radius, measure_speed, SpeedFit};
pub use stationary::{stationary_state, StationaryState};
pub use stepper::{FrontTrace, RunOptions, RunOutput, Simulator, Snapshot, SnapshotPolicy, StepStats};

use crate::model::ModelParams;
use thiserror::Error;

/// Fraction of the domain half-width inside which front measurements are
/// trusted; beyond it the Neumann truncation pollutes the solution.
pub const TRUSTED_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("initial support radius {r0} does not fit the domain (limit {limit})")]
    SupportExceedsDomain { r0: f64, limit: f64 },
    #[error("initial amplitude {0} outside (0, 1]")]
    BadAmplitude(f64),
    #[error("time step {dt} exceeds the stability bound {bound}")]
    DtTooLarge { dt: f64, bound: f64 },
    #[error("numerical instability at t = {t}: max u = {max_u}, max v = {max_v}")]
    Instability { t: f64, max_u: f64, max_v: f64 },
    #[error("discrete bound violated at t = {t}: {detail}")]
    BoundViolation { t: f64, detail: String },
    #[error("speed fit needs at least {need} samples, got {have}")]
    InsufficientSamples { have: usize, need: usize },
    #[error("stationary-profile shooting failed to bracket the exchange condition")]
    ShootingBracket,
}

/// Truncated half-plane grid: `x` spans `[-Lx, Lx]` on `nx` nodes (odd,
/// so the origin sits on a node), `y` spans `[0, Ly]` on `ny` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self, SimError> {
        if !(lx > 0.0 && ly > 0.0) {
            return Err(SimError::BadGrid(format!("domain {lx} x {ly} not positive")));
        }
        if nx < 3 || ny < 3 {
            return Err(SimError::BadGrid(format!("grid {nx} x {ny} too small")));
        }
        if nx % 2 == 0 {
            return Err(SimError::BadGrid(format!(
                "nx = {nx} must be odd so the origin lies on a node"
            )));
        }
        Ok(Self {
            lx,
            ly,
            nx,
            ny,
            dx: 2.0 * lx / (nx - 1) as f64,
            dy: ly / (ny - 1) as f64,
        })
    }

    /// Build a grid from target spacings, rounding the node counts (and
    /// keeping `nx` odd).
    pub fn with_spacing(lx: f64, ly: f64, dx: f64, dy: f64) -> Result<Self, SimError> {
        if !(dx > 0.0 && dy > 0.0) {
            return Err(SimError::BadGrid(format!("spacing {dx} x {dy} not positive")));
        }
        let mut steps_x = (2.0 * lx / dx).round().max(2.0) as usize;
        if steps_x % 2 == 1 {
            steps_x += 1;
        }
        let steps_y = (ly / dy).round().max(2.0) as usize;
        Self::new(lx, ly, steps_x + 1, steps_y + 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.lx + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Radius beyond which measurements are no longer trusted.
    pub fn trusted_radius(&self) -> f64 {
        TRUSTED_FRACTION * self.lx.min(self.ly)
    }
}

/// Discrete road and field densities at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Road density over the `nx` x-nodes.
    pub u: Vec<f64>,
    /// Field density over `ny * nx` nodes, row-major in `y`.
    pub v: Vec<f64>,
    pub t: f64,
}

impl SimState {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: vec![0.0; grid.nx],
            v: vec![0.0; grid.nx * grid.ny],
            t: 0.0,
        }
    }
}

/// Compactly supported initial datum: a parabolic field bump of radius
/// `r0` and height `amp` at the origin, with an empty road.
pub fn init_compact(grid: &Grid, r0: f64, amp: f64) -> Result<SimState, SimError> {
    let limit = grid.lx.min(grid.ly);
    if !(r0 > 0.0) || r0 >= limit {
        return Err(SimError::SupportExceedsDomain { r0, limit });
    }
    if !(amp > 0.0 && amp <= 1.0) {
        return Err(SimError::BadAmplitude(amp));
    }
    let mut state = SimState::zeros(grid);
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            let x = grid.x(i);
            let bump = 1.0 - (x * x + y * y) / (r0 * r0);
            if bump > 0.0 {
                state.v[grid.idx(i, j)] = amp * bump;
            }
        }
    }
    Ok(state)
}

/// Largest stable explicit time step:
///
/// `dt = safety * min( dx^2 dy^2 / (2 d (dx^2 + dy^2)),  dx^2 / 2D,
///                     dx / |q|,  1 / (f'(0) + mu + nu + rho) )`.
pub fn stable_dt(params: &ModelParams, grid: &Grid, safety: f64) -> f64 {
    assert!(safety > 0.0 && safety <= 1.0, "safety factor in (0, 1]");
    let dx2 = grid.dx * grid.dx;
    let dy2 = grid.dy * grid.dy;
    let field = dx2 * dy2 / (2.0 * params.d * (dx2 + dy2));
    let road = dx2 / (2.0 * params.road_d);
    let advect = grid.dx / (params.q.abs() + f64::MIN_POSITIVE);
    let sources = 1.0 / (params.f0p + params.mu + params.nu + params.rho);
    safety * field.min(road).min(advect).min(sources)
}
