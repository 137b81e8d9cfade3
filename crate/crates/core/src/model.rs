//! Physical parameters and the KPP nonlinearity.
//!
//! The model couples a 1-D "road" with diffusivity `D` and optional
//! transport/mortality to a 2-D half-plane "field" with diffusivity `d`
//! and a KPP reaction. Road and field exchange mass at rates `mu`
//! (road to field) and `nu` (field to road). Everything downstream is
//! expressed in terms of these constants and the linearisation slope
//! `f0p = f'(0)`.

use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter `{0}` must be strictly positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("parameter `{0}` must be finite, got {1}")]
    NonFinite(&'static str, f64),
    #[error("road mortality must be nonnegative, got {0}")]
    NegativeMortality(f64),
    #[error("exchange ratio chi undefined at s = {s} (pole at s = -nu = {pole})")]
    ChiPole { s: f64, pole: f64 },
    #[error("reaction violates the KPP assumptions: {0}")]
    ReactionInvariant(String),
}

/// Physical constants of the road-field system.
///
/// `q` and `rho` extend the basic model with transport and mortality on
/// the road; both default to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Field diffusivity d.
    pub d: f64,
    /// Road diffusivity D.
    pub road_d: f64,
    /// Road-to-field exchange rate mu.
    pub mu: f64,
    /// Field-to-road exchange rate nu.
    pub nu: f64,
    /// Reaction slope f'(0).
    pub f0p: f64,
    /// Road transport speed q (any sign).
    pub q: f64,
    /// Road mortality rate rho (>= 0).
    pub rho: f64,
}

impl ModelParams {
    /// Basic road-field system without transport or mortality.
    pub fn new(d: f64, road_d: f64, mu: f64, nu: f64, f0p: f64) -> Result<Self, ModelError> {
        Self::with_transport(d, road_d, mu, nu, f0p, 0.0, 0.0)
    }

    /// Full parameter set including road transport `q` and mortality `rho`.
    pub fn with_transport(
        d: f64,
        road_d: f64,
        mu: f64,
        nu: f64,
        f0p: f64,
        q: f64,
        rho: f64,
    ) -> Result<Self, ModelError> {
        for (name, v) in [
            ("d", d),
            ("D", road_d),
            ("mu", mu),
            ("nu", nu),
            ("f0p", f0p),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name, v));
            }
            if v <= 0.0 {
                return Err(ModelError::NonPositive(name, v));
            }
        }
        for (name, v) in [("q", q), ("rho", rho)] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name, v));
            }
        }
        if rho < 0.0 {
            return Err(ModelError::NegativeMortality(rho));
        }
        Ok(Self {
            d,
            road_d,
            mu,
            nu,
            f0p,
            q,
            rho,
        })
    }

    /// Open-field invasion speed `c_K = 2 sqrt(d f'(0))`.
    pub fn kpp_speed(&self) -> f64 {
        2.0 * (self.d * self.f0p).sqrt()
    }

    /// Exchange ratio `chi(s) = mu s / (nu + s)`, defined for `s > -nu`.
    ///
    /// Strictly increasing and concave on its domain; `chi(0) = 0`.
    pub fn chi(&self, s: f64) -> Result<f64, ModelError> {
        if s <= -self.nu {
            return Err(ModelError::ChiPole { s, pole: -self.nu });
        }
        Ok(self.chi_unchecked(s))
    }

    /// `chi` without the pole check; callers must guarantee `s > -nu`.
    pub(crate) fn chi_unchecked(&self, s: f64) -> f64 {
        self.mu * s / (self.nu + s)
    }

    /// True when the system has no transport and no mortality on the road.
    pub fn is_classic(&self) -> bool {
        self.q == 0.0 && self.rho == 0.0
    }

    /// Logistic reaction `f(s) = f0p * s * (1 - s)` matching these parameters.
    pub fn default_reaction(&self) -> Reaction {
        Reaction::logistic(self.f0p)
    }
}

/// A KPP reaction term: `f(0) = f(1) = 0`, `f > 0` on (0,1), `f < 0`
/// beyond 1, and `f(s) <= f'(0) s`.
///
/// The nonlinearity is a black box, so the assumptions are checked by
/// dense sampling on (0, 2] at construction. The logistic default is a
/// dedicated variant so the stencil loops evaluate it without an
/// indirect call.
#[derive(Clone)]
pub struct Reaction {
    kind: ReactionKind,
    f0p: f64,
}

#[derive(Clone)]
enum ReactionKind {
    Logistic,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Reaction {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Reaction").field("f0p", &self.f0p).finish()
    }
}

/// Number of sample points used to audit a user-supplied reaction.
pub const REACTION_SAMPLES: usize = 1000;

impl Reaction {
    /// Wrap an arbitrary map after checking the KPP assumptions on
    /// `n_samples` points of (0, 2].
    pub fn new<F>(f: F, f0p: f64, n_samples: usize) -> Result<Self, ModelError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(f0p.is_finite() && f0p > 0.0) {
            return Err(ModelError::NonPositive("f0p", f0p));
        }
        let tol = 1e-9 * f0p;
        if f(0.0).abs() > tol {
            return Err(ModelError::ReactionInvariant(format!(
                "f(0) = {} != 0",
                f(0.0)
            )));
        }
        if f(1.0).abs() > tol {
            return Err(ModelError::ReactionInvariant(format!(
                "f(1) = {} != 0",
                f(1.0)
            )));
        }
        let n = n_samples.max(16);
        for k in 1..=n {
            let s = 2.0 * k as f64 / n as f64;
            let fs = f(s);
            if s < 1.0 && fs <= 0.0 {
                return Err(ModelError::ReactionInvariant(format!(
                    "f({s}) = {fs} is not positive on (0,1)"
                )));
            }
            if s > 1.0 && fs >= 0.0 {
                return Err(ModelError::ReactionInvariant(format!(
                    "f({s}) = {fs} is not negative on (1,2]"
                )));
            }
            if fs > f0p * s + tol {
                return Err(ModelError::ReactionInvariant(format!(
                    "f({s}) = {fs} exceeds the linear bound f'(0) s = {}",
                    f0p * s
                )));
            }
        }
        Ok(Self {
            kind: ReactionKind::Custom(Arc::new(f)),
            f0p,
        })
    }

    /// The canonical logistic instance `f(s) = f0p * s * (1 - s)`.
    pub fn logistic(f0p: f64) -> Self {
        Self {
            kind: ReactionKind::Logistic,
            f0p,
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            ReactionKind::Logistic => self.f0p * s * (1.0 - s),
            ReactionKind::Custom(f) => f(s),
        }
    }

    pub fn f0p(&self) -> f64 {
        self.f0p
    }
}
