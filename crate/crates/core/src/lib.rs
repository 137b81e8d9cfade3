//! Spreading analysis for KPP invasion in a half-plane bordered by a
//! fast-diffusion line.
//!
//! A reaction-diffusion field occupying the upper half-plane exchanges
//! mass with a line ("road") that diffuses faster and may carry transport
//! and mortality. The road can drag invasion fronts along with it: past a
//! critical angle the directional spreading speed exceeds the open-field
//! value `c_K = 2 sqrt(d f'(0))`.
//!
//! - [`model`]: parameters and the KPP nonlinearity.
//! - [`dispersion`]: the algebraic dispersion system, directional speeds
//!   `w_*(theta)`, contact points, critical angles, complex roots.
//! - [`geometry`]: expansion shapes built from the speeds, convexity and
//!   containment checks.
//! - [`pdesim`]: explicit finite-difference simulation of the coupled
//!   system with front tracking, for cross-validating the semi-analytic
//!   speeds.

pub mod dispersion;
pub mod geometry;
pub mod model;
pub mod pdesim;
