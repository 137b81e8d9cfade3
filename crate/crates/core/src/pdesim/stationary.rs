//! Stationary profile of the system with road mortality.
//!
//! With mortality `rho > 0` the saturated state is no longer constant:
//! the road drains the field near `y = 0`. The stationary pair has a
//! constant road density `U_S = nu V_S(0) / (mu + rho)` and a field
//! profile solving `d V'' + f(V) = 0` with `V -> 1` upward and the
//! exchange condition `-d V'(0) = mu U_S - nu V(0)` at the road.

use super::SimError;
use crate::model::{ModelParams, Reaction};

/// Stationary road density and field profile over a `y` grid.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub u_s: f64,
    pub y: Vec<f64>,
    pub v_s: Vec<f64>,
}

/// RK4 step of the system `(V, W)' = (W, -f(V)/d)`.
fn rk4_step(params: &ModelParams, reaction: &Reaction, v: f64, w: f64, h: f64) -> (f64, f64) {
    let acc = |v: f64| -reaction.eval(v) / params.d;
    let (k1v, k1w) = (w, acc(v));
    let (k2v, k2w) = (w + 0.5 * h * k1w, acc(v + 0.5 * h * k1v));
    let (k3v, k3w) = (w + 0.5 * h * k2w, acc(v + 0.5 * h * k2v));
    let (k4v, k4w) = (w + h * k3w, acc(v + h * k3v));
    (
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// Integrate backward from `y_max` starting a tail distance `delta`
/// below saturation, on the decaying branch `V' = kappa (1 - V)`.
/// Returns `(V(0), V'(0))` and optionally fills the profile at the
/// output nodes.
fn integrate_down(
    params: &ModelParams,
    reaction: &Reaction,
    delta: f64,
    y_max: f64,
    ny: usize,
    substeps: usize,
    profile: Option<&mut Vec<f64>>,
) -> (f64, f64) {
    let kappa = (params.f0p / params.d).sqrt();
    let mut v = 1.0 - delta;
    let mut w = kappa * delta;
    let dy = y_max / (ny - 1) as f64;
    let h = -dy / substeps as f64;
    let mut stored = profile;
    if let Some(p) = stored.as_deref_mut() {
        p.clear();
        p.resize(ny, 0.0);
        p[ny - 1] = v;
    }
    for node in (0..ny - 1).rev() {
        for _ in 0..substeps {
            let (nv, nw) = rk4_step(params, reaction, v, w, h);
            v = nv;
            w = nw;
        }
        if let Some(p) = stored.as_deref_mut() {
            p[node] = v;
        }
    }
    (v, w)
}

/// Stationary state by a backward shooting method.
///
/// The tail offset `delta = 1 - V(y_max)` parametrises the unique orbit
/// decaying to saturation; bisection on `delta` enforces the exchange
/// condition at the road. `rho = 0` short-circuits to the constant state
/// `(nu/mu, 1)`.
pub fn stationary_state(
    params: &ModelParams,
    reaction: &Reaction,
    y_max: f64,
    ny: usize,
) -> Result<StationaryState, SimError> {
    assert!(y_max > 0.0 && ny >= 2);
    let y: Vec<f64> = (0..ny)
        .map(|j| y_max * j as f64 / (ny - 1) as f64)
        .collect();
    if params.rho == 0.0 {
        return Ok(StationaryState {
            u_s: params.nu / params.mu,
            v_s: vec![1.0; ny],
            y,
        });
    }

    // Robin residual: d V'(0) - rho nu V(0) / (mu + rho), increasing in
    // the tail offset.
    let drain = params.rho * params.nu / (params.mu + params.rho);
    let substeps = ((y_max / (ny - 1) as f64) / (0.02 * (params.d / params.f0p).sqrt()))
        .ceil()
        .max(4.0) as usize;
    let residual = |delta: f64| -> f64 {
        let (v0, w0) = integrate_down(params, reaction, delta, y_max, ny, substeps, None);
        params.d * w0 - drain * v0
    };

    let (mut lo, mut hi) = (1e-14, 0.999_999);
    if residual(lo) > 0.0 || residual(hi) < 0.0 {
        return Err(SimError::ShootingBracket);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    let mut v_s = Vec::new();
    let (v0, _) = integrate_down(
        params,
        reaction,
        delta,
        y_max,
        ny,
        substeps,
        Some(&mut v_s),
    );
    Ok(StationaryState {
        u_s: params.nu * v0 / (params.mu + params.rho),
        y,
        v_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_mortality_gives_constant_state() {
        let p = ModelParams::new(1.0, 10.0, 2.0, 3.0, 1.0).unwrap();
        let r = p.default_reaction();
        let s = stationary_state(&p, &r, 10.0, 101).unwrap();
        assert_eq!(s.u_s, 1.5);
        assert!(s.v_s.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mortality_depresses_the_road_edge() {
        let p = ModelParams::with_transport(1.0, 10.0, 1.0, 1.0, 1.0, 0.0, 2.0).unwrap();
        let r = p.default_reaction();
        let s = stationary_state(&p, &r, 20.0, 201).unwrap();
        assert!(s.v_s[0] < 1.0);
        assert!(s.v_s[0] > 0.0);
        // Monotone toward saturation.
        for w in s.v_s.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        let last = *s.v_s.last().unwrap();
        assert!((last - 1.0).abs() < 1e-6, "V({}) = {last}", s.y.last().unwrap());
        // Road density consistent with the field edge.
        assert!((s.u_s - p.nu * s.v_s[0] / (p.mu + p.rho)).abs() < 1e-12);
    }

    #[test]
    fn profile_satisfies_the_field_ode() {
        let p = ModelParams::with_transport(1.0, 10.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let r = p.default_reaction();
        let ny = 401;
        let s = stationary_state(&p, &r, 20.0, ny).unwrap();
        let dy = s.y[1] - s.y[0];
        let mut worst: f64 = 0.0;
        for j in 1..ny - 1 {
            let second = (s.v_s[j - 1] - 2.0 * s.v_s[j] + s.v_s[j + 1]) / (dy * dy);
            let res = p.d * second + r.eval(s.v_s[j]);
            worst = worst.max(res.abs());
        }
        // Second-difference truncation is O(dy^2).
        assert!(worst < 5.0 * dy * dy, "worst interior residual {worst}");
    }

    #[test]
    fn robin_condition_holds_at_the_road() {
        // Independent check of the exchange condition via one-sided
        // differences on the stored profile.
        let p = ModelParams::with_transport(1.0, 10.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let r = p.default_reaction();
        let s = stationary_state(&p, &r, 20.0, 801).unwrap();
        let dy = s.y[1] - s.y[0];
        let slope = (-3.0 * s.v_s[0] + 4.0 * s.v_s[1] - s.v_s[2]) / (2.0 * dy);
        let lhs = -p.d * slope;
        let rhs = p.mu * s.u_s - p.nu * s.v_s[0];
        assert!((lhs - rhs).abs() < 1e-3, "Robin residual {}", lhs - rhs);
    }
}
