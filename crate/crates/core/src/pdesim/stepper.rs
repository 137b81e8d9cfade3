//! Explicit Euler stepping of the coupled system and the run driver.

use rayon::prelude::*;

use super::front::front_radius;
use super::{stable_dt, Grid, SimError, SimState};
use crate::model::{ModelParams, Reaction};

/// Per-step extrema, gathered in the same pass as the update.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    pub max_u: f64,
    pub min_u: f64,
    pub max_v: f64,
    pub min_v: f64,
    pub finite: bool,
}

/// Time series of the front radius along one ray.
#[derive(Debug, Clone)]
pub struct FrontTrace {
    pub theta: f64,
    /// `(t, r)` samples in increasing time.
    pub samples: Vec<(f64, f64)>,
    /// Index of the first sample taken after the front reached the
    /// trusted-region boundary, if any.
    pub untrusted_from: Option<usize>,
}

impl FrontTrace {
    /// Samples still inside the trusted region whose radius has cleared
    /// the burn-in threshold `min_radius`.
    pub fn trusted_samples(&self, min_radius: f64) -> Vec<(f64, f64)> {
        let end = self.untrusted_from.unwrap_or(self.samples.len());
        self.samples[..end]
            .iter()
            .copied()
            .filter(|&(_, r)| r >= min_radius)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotPolicy {
    None,
    Final,
    Interval(f64),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub t_final: f64,
    /// Safety factor applied to the stability bound.
    pub safety: f64,
    /// Time between front measurements.
    pub cadence: f64,
    /// Level-set threshold for the front radius.
    pub level: f64,
    /// Ray angles to track.
    pub rays: Vec<f64>,
    pub snapshots: SnapshotPolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            safety: 0.9,
            cadence: 0.25,
            level: 0.5,
            rays: vec![0.0],
            snapshots: SnapshotPolicy::None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub traces: Vec<FrontTrace>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
    pub dt: f64,
}

/// One coupled system bound to a grid; stateless apart from references,
/// so it can be shared freely.
pub struct Simulator<'a> {
    params: &'a ModelParams,
    reaction: &'a Reaction,
    grid: &'a Grid,
}

const PARALLEL_THRESHOLD: usize = 50_000;

impl<'a> Simulator<'a> {
    pub fn new(params: &'a ModelParams, reaction: &'a Reaction, grid: &'a Grid) -> Self {
        Self {
            params,
            reaction,
            grid,
        }
    }

    pub fn stable_dt(&self, safety: f64) -> f64 {
        stable_dt(self.params, self.grid, safety)
    }

    /// Advance `cur` by one explicit Euler step into `next`.
    ///
    /// Field: 5-point Laplacian plus reaction, exchange ghost row under
    /// the road, mirror ghosts on the outer walls. Road: second
    /// difference, first-order upwind transport, exchange and mortality.
    pub fn step_into(
        &self,
        cur: &SimState,
        next: &mut SimState,
        dt: f64,
    ) -> Result<StepStats, SimError> {
        let bound = self.stable_dt(1.0);
        if dt > bound * (1.0 + 1e-12) {
            return Err(SimError::DtTooLarge { dt, bound });
        }
        let g = self.grid;
        let p = self.params;
        let (nx, ny) = (g.nx, g.ny);
        let inv_dx2 = 1.0 / (g.dx * g.dx);
        let inv_dy2 = 1.0 / (g.dy * g.dy);
        let inv_dx = 1.0 / g.dx;
        let ghost_coef = 2.0 * g.dy / p.d;
        let (q_pos, q_neg) = (p.q.max(0.0), p.q.min(0.0));
        let u = &cur.u;
        let v = &cur.v;
        let reaction = self.reaction;

        // Road update (serial; one row).
        let mut max_u = f64::NEG_INFINITY;
        let mut min_u = f64::INFINITY;
        let mut u_finite = true;
        for i in 0..nx {
            let il = if i == 0 { 1 } else { i - 1 };
            let ir = if i == nx - 1 { nx - 2 } else { i + 1 };
            let uxx = (u[il] - 2.0 * u[i] + u[ir]) * inv_dx2;
            let advect = q_pos * (u[i] - u[il]) * inv_dx + q_neg * (u[ir] - u[i]) * inv_dx;
            let exchange = p.nu * v[i] - (p.mu + p.rho) * u[i];
            let val = u[i] + dt * (p.road_d * uxx - advect + exchange);
            next.u[i] = val;
            max_u = max_u.max(val);
            min_u = min_u.min(val);
            u_finite &= val.is_finite();
        }

        // Field update, data-parallel across rows. Each row writes its own
        // chunk and reads fixed neighbours, so the result is independent of
        // the worker count.
        let row_kernel = |j: usize, out: &mut [f64]| -> (f64, f64, bool) {
            let row = &v[j * nx..(j + 1) * nx];
            let above: &[f64] = if j == ny - 1 {
                &v[(ny - 2) * nx..(ny - 1) * nx]
            } else {
                &v[(j + 1) * nx..(j + 2) * nx]
            };
            let below: Option<&[f64]> = if j == 0 {
                None
            } else {
                Some(&v[(j - 1) * nx..j * nx])
            };
            let mut mx = f64::NEG_INFINITY;
            let mut mn = f64::INFINITY;
            let mut finite = true;
            for i in 0..nx {
                let il = if i == 0 { 1 } else { i - 1 };
                let ir = if i == nx - 1 { nx - 2 } else { i + 1 };
                let center = row[i];
                let vb = match below {
                    Some(b) => b[i],
                    // Exchange flux condition through the ghost row.
                    None => above[i] + ghost_coef * (p.mu * u[i] - p.nu * center),
                };
                let lap = (row[il] - 2.0 * center + row[ir]) * inv_dx2
                    + (vb - 2.0 * center + above[i]) * inv_dy2;
                let val = center + dt * (p.d * lap + reaction.eval(center));
                out[i] = val;
                mx = mx.max(val);
                mn = mn.min(val);
                finite &= val.is_finite();
            }
            (mx, mn, finite)
        };

        let (max_v, min_v, v_finite) = if nx * ny >= PARALLEL_THRESHOLD {
            next.v
                .par_chunks_mut(nx)
                .enumerate()
                .map(|(j, out)| row_kernel(j, out))
                .reduce(
                    || (f64::NEG_INFINITY, f64::INFINITY, true),
                    |a, b| (a.0.max(b.0), a.1.min(b.1), a.2 && b.2),
                )
        } else {
            let mut acc = (f64::NEG_INFINITY, f64::INFINITY, true);
            for (j, out) in next.v.chunks_mut(nx).enumerate() {
                let r = row_kernel(j, out);
                acc = (acc.0.max(r.0), acc.1.min(r.1), acc.2 && r.2);
            }
            acc
        };

        next.t = cur.t + dt;
        let stats = StepStats {
            max_u,
            min_u,
            max_v,
            min_v,
            finite: u_finite && v_finite,
        };
        let blow_up = 10.0 * (p.nu / p.mu).max(1.0);
        if !stats.finite || stats.max_u > blow_up || stats.max_v > blow_up {
            return Err(SimError::Instability {
                t: next.t,
                max_u: stats.max_u,
                max_v: stats.max_v,
            });
        }
        Ok(stats)
    }

    /// Convenience single step returning a fresh state.
    pub fn step(&self, cur: &SimState, dt: f64) -> Result<SimState, SimError> {
        let mut next = cur.clone();
        self.step_into(cur, &mut next, dt)?;
        Ok(next)
    }

    /// Integrate from `state0` to `t_final`, recording front radii along
    /// the requested rays at the given cadence.
    ///
    /// Discrete maximum-principle bounds are checked at every output
    /// step; samples taken after a front reaches the trusted-region
    /// boundary are flagged, not dropped.
    pub fn run(&self, state0: SimState, opts: &RunOptions) -> Result<RunOutput, SimError> {
        assert!(opts.t_final > 0.0 && opts.cadence > 0.0);
        assert!(opts.level > 0.0 && opts.level < 1.0);
        let g = self.grid;
        let dt = self.stable_dt(opts.safety);
        let sup_v0 = state0.v.iter().cloned().fold(0.0_f64, f64::max);
        let sup_u0 = state0.u.iter().cloned().fold(0.0_f64, f64::max);
        let v_bound = sup_v0.max(1.0);
        let u_bound = (self.params.nu / self.params.mu * v_bound).max(sup_u0);
        let bound_tol = 1e-9 * v_bound.max(u_bound);
        let trusted = g.trusted_radius() - g.dx.max(g.dy);

        let mut traces: Vec<FrontTrace> = opts
            .rays
            .iter()
            .map(|&theta| FrontTrace {
                theta,
                samples: Vec::new(),
                untrusted_from: None,
            })
            .collect();
        let mut snapshots = Vec::new();

        let mut cur = state0;
        let mut next = cur.clone();
        let sample = |state: &SimState,
                          traces: &mut Vec<FrontTrace>,
                          stats: Option<&StepStats>|
         -> Result<(), SimError> {
            if let Some(s) = stats {
                if s.min_u < -bound_tol || s.min_v < -bound_tol {
                    return Err(SimError::BoundViolation {
                        t: state.t,
                        detail: format!("negative density: u {} v {}", s.min_u, s.min_v),
                    });
                }
                if s.max_v > v_bound + bound_tol || s.max_u > u_bound + bound_tol {
                    return Err(SimError::BoundViolation {
                        t: state.t,
                        detail: format!(
                            "upper bound exceeded: u {} (limit {}), v {} (limit {})",
                            s.max_u, u_bound, s.max_v, v_bound
                        ),
                    });
                }
            }
            for trace in traces.iter_mut() {
                let r = front_radius(g, &state.v, trace.theta, opts.level);
                if r >= trusted && trace.untrusted_from.is_none() {
                    trace.untrusted_from = Some(trace.samples.len());
                }
                trace.samples.push((state.t, r));
            }
            Ok(())
        };

        sample(&cur, &mut traces, None)?;
        if let SnapshotPolicy::Interval(_) = opts.snapshots {
            snapshots.push(Snapshot {
                t: cur.t,
                u: cur.u.clone(),
                v: cur.v.clone(),
            });
        }

        let mut next_output = opts.cadence;
        let mut next_snapshot = match opts.snapshots {
            SnapshotPolicy::Interval(dt_snap) => dt_snap,
            _ => f64::INFINITY,
        };
        while cur.t < opts.t_final - 1e-12 {
            let step_dt = dt.min(opts.t_final - cur.t);
            let stats = self.step_into(&cur, &mut next, step_dt)?;
            std::mem::swap(&mut cur, &mut next);
            if cur.t >= next_output - 1e-12 || cur.t >= opts.t_final - 1e-12 {
                sample(&cur, &mut traces, Some(&stats))?;
                next_output += opts.cadence;
            }
            if cur.t >= next_snapshot - 1e-12 {
                snapshots.push(Snapshot {
                    t: cur.t,
                    u: cur.u.clone(),
                    v: cur.v.clone(),
                });
                next_snapshot += match opts.snapshots {
                    SnapshotPolicy::Interval(dt_snap) => dt_snap,
                    _ => f64::INFINITY,
                };
            }
        }
        if matches!(opts.snapshots, SnapshotPolicy::Final) {
            snapshots.push(Snapshot {
                t: cur.t,
                u: cur.u.clone(),
                v: cur.v.clone(),
            });
        }
        Ok(RunOutput {
            traces,
            snapshots,
            final_state: cur,
            dt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdesim::init_compact;

    fn setup(road_d: f64) -> (ModelParams, Reaction, Grid) {
        let p = ModelParams::new(1.0, road_d, 1.0, 1.0, 1.0).unwrap();
        let r = p.default_reaction();
        let g = Grid::with_spacing(8.0, 8.0, 0.25, 0.25).unwrap();
        (p, r, g)
    }

    #[test]
    fn carrying_capacity_is_a_fixed_point() {
        let (p, r, g) = setup(2.0);
        let sim = Simulator::new(&p, &r, &g);
        let mut state = SimState::zeros(&g);
        state.u.fill(p.nu / p.mu);
        state.v.fill(1.0);
        let dt = sim.stable_dt(0.9);
        let next = sim.step(&state, dt).unwrap();
        for (a, b) in state.u.iter().zip(&next.u) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in state.v.iter().zip(&next.v) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn extinction_is_a_fixed_point() {
        let (p, r, g) = setup(2.0);
        let sim = Simulator::new(&p, &r, &g);
        let state = SimState::zeros(&g);
        let next = sim.step(&state, sim.stable_dt(0.9)).unwrap();
        assert!(next.u.iter().all(|&x| x == 0.0));
        assert!(next.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interior_reaction_matches_scalar_ode() {
        // A spatially constant field evolves by the pure reaction ODE at
        // nodes the road-boundary influence has not yet reached (the
        // stencil moves information one row per step).
        let (p, r, g) = setup(2.0);
        let sim = Simulator::new(&p, &r, &g);
        let mut state = SimState::zeros(&g);
        let v0 = 1e-3;
        state.v.fill(v0);
        let dt = sim.stable_dt(0.9);
        let steps = 10;
        let mut ode = v0;
        for _ in 0..steps {
            state = sim.step(&state, dt).unwrap();
            ode += dt * r.eval(ode);
        }
        let mid = g.idx((g.nx - 1) / 2, g.ny / 2);
        assert!(
            (state.v[mid] - ode).abs() < 1e-14,
            "sim {} vs ode {}",
            state.v[mid],
            ode
        );
        // One step grows v by about dt * f'(0) * v at small amplitude.
        let growth = (ode / v0).ln() / (steps as f64 * dt);
        assert!((growth - p.f0p).abs() < 2e-3);
    }

    #[test]
    fn dt_precondition_enforced() {
        let (p, r, g) = setup(2.0);
        let sim = Simulator::new(&p, &r, &g);
        let state = SimState::zeros(&g);
        let too_big = sim.stable_dt(1.0) * 1.5;
        assert!(matches!(
            sim.step(&state, too_big),
            Err(SimError::DtTooLarge { .. })
        ));
    }

    #[test]
    fn mirror_symmetry_without_transport() {
        let (p, r, g) = setup(10.0);
        let sim = Simulator::new(&p, &r, &g);
        let mut state = init_compact(&g, 2.0, 1.0).unwrap();
        let dt = sim.stable_dt(0.9);
        for _ in 0..200 {
            state = sim.step(&state, dt).unwrap();
        }
        let nx = g.nx;
        for j in 0..g.ny {
            for i in 0..nx / 2 {
                let a = state.v[g.idx(i, j)];
                let b = state.v[g.idx(nx - 1 - i, j)];
                assert!((a - b).abs() < 1e-12, "asymmetry at ({i}, {j}): {a} vs {b}");
            }
        }
        for i in 0..nx / 2 {
            assert!((state.u[i] - state.u[nx - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn run_smoke_produces_traces_and_respects_bounds() {
        let (p, r, g) = setup(10.0);
        let sim = Simulator::new(&p, &r, &g);
        let state = init_compact(&g, 1.5, 1.0).unwrap();
        let out = sim
            .run(
                state,
                &RunOptions {
                    t_final: 3.0,
                    cadence: 0.5,
                    rays: vec![0.0, 0.8, std::f64::consts::FRAC_PI_2],
                    snapshots: SnapshotPolicy::Final,
                    ..Default::default()
                },
            )
            .unwrap();
        assert_eq!(out.traces.len(), 3);
        assert_eq!(out.snapshots.len(), 1);
        for trace in &out.traces {
            assert!(trace.samples.len() >= 6);
            // Time strictly increasing, radius eventually nonzero.
            for w in trace.samples.windows(2) {
                assert!(w[1].0 > w[0].0);
            }
            assert!(trace.samples.last().unwrap().1 > 0.0);
        }
        // Mirror rays see the same front.
        let out2 = sim
            .run(
                init_compact(&g, 1.5, 1.0).unwrap(),
                &RunOptions {
                    t_final: 3.0,
                    cadence: 0.5,
                    rays: vec![0.7, -0.7],
                    ..Default::default()
                },
            )
            .unwrap();
        for (a, b) in out2.traces[0].samples.iter().zip(&out2.traces[1].samples) {
            assert!((a.1 - b.1).abs() < 1e-9);
        }
    }
}
