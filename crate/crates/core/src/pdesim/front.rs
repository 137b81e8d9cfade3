//! Front location along rays and empirical speed fitting.

use super::{Grid, SimError};

/// Bilinear interpolation of the field at `(x, y)`, clamped to the grid.
fn interp(grid: &Grid, v: &[f64], x: f64, y: f64) -> f64 {
    let fx = ((x + grid.lx) / grid.dx).clamp(0.0, (grid.nx - 1) as f64);
    let fy = (y / grid.dy).clamp(0.0, (grid.ny - 1) as f64);
    let i0 = (fx as usize).min(grid.nx - 2);
    let j0 = (fy as usize).min(grid.ny - 2);
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    let v00 = v[grid.idx(i0, j0)];
    let v10 = v[grid.idx(i0 + 1, j0)];
    let v01 = v[grid.idx(i0, j0 + 1)];
    let v11 = v[grid.idx(i0 + 1, j0 + 1)];
    (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10
        + (1.0 - tx) * ty * v01
        + tx * ty * v11
}

/// Largest radius along the ray `(sin theta, cos theta)` at which the
/// interpolated field is at least `level`, or 0 when nowhere.
///
/// The scan walks inward from the trusted edge in steps of half the grid
/// spacing, then sharpens the outermost crossing by bisection.
pub fn front_radius(grid: &Grid, v: &[f64], theta: f64, level: f64) -> f64 {
    let s = theta.sin();
    let c = theta.cos();
    let mut r_max = grid.trusted_radius();
    if s.abs() > 1e-12 {
        r_max = r_max.min(grid.lx / s.abs());
    }
    if c > 1e-12 {
        r_max = r_max.min(grid.ly / c);
    }
    r_max *= 1.0 - 1e-12;
    let at = |r: f64| interp(grid, v, r * s, r * c);

    let step = 0.5 * grid.dx.min(grid.dy);
    let mut outside = r_max;
    let mut inside = None;
    let mut r = r_max;
    while r >= 0.0 {
        if at(r) >= level {
            inside = Some(r);
            break;
        }
        outside = r;
        r -= step;
    }
    let mut lo = match inside {
        Some(r) if r >= r_max => return r_max, // level reached at the edge
        Some(r) => r,
        None => {
            // Walk may skip the origin; probe it directly.
            if at(0.0) >= level {
                0.0
            } else {
                return 0.0;
            }
        }
    };
    let mut hi = outside;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if at(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares speed fit over the trailing window of a trace.
#[derive(Debug, Clone, Copy)]
pub struct SpeedFit {
    /// Slope of `r` against `t`.
    pub speed: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
    pub n_samples: usize,
    /// Set when the fit quality falls below 0.99.
    pub flagged: bool,
}

/// Fit `r = speed * t + b` on the last `window_frac` of the samples.
pub fn measure_speed(samples: &[(f64, f64)], window_frac: f64) -> Result<SpeedFit, SimError> {
    assert!(window_frac > 0.0 && window_frac <= 1.0);
    let n_window = ((samples.len() as f64) * window_frac).ceil() as usize;
    let window = &samples[samples.len().saturating_sub(n_window)..];
    if window.len() < 10 {
        return Err(SimError::InsufficientSamples {
            have: window.len(),
            need: 10,
        });
    }
    let n = window.len() as f64;
    let mean_t = window.iter().map(|&(t, _)| t).sum::<f64>() / n;
    let mean_r = window.iter().map(|&(_, r)| r).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut str_ = 0.0;
    for &(t, r) in window {
        stt += (t - mean_t) * (t - mean_t);
        str_ += (t - mean_t) * (r - mean_r);
    }
    let speed = str_ / stt;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(t, r) in window {
        let fit = mean_r + speed * (t - mean_t);
        ss_res += (r - fit) * (r - fit);
        ss_tot += (r - mean_r) * (r - mean_r);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-30 {
        1.0
    } else {
        0.0
    };
    Ok(SpeedFit {
        speed,
        r_squared,
        n_samples: window.len(),
        flagged: r_squared < 0.99,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::with_spacing(10.0, 10.0, 0.25, 0.25).unwrap()
    }

    #[test]
    fn empty_field_has_no_front() {
        let g = grid();
        let v = vec![0.0; g.nx * g.ny];
        assert_eq!(front_radius(&g, &v, 0.5, 0.5), 0.0);
    }

    #[test]
    fn saturated_field_clips_at_trusted_edge() {
        let g = grid();
        let v = vec![1.0; g.nx * g.ny];
        let r = front_radius(&g, &v, 0.3, 0.5);
        assert!((r - g.trusted_radius()).abs() < 1e-6, "got {r}");
    }

    #[test]
    fn radial_plateau_located_within_a_cell() {
        let g = grid();
        let mut v = vec![0.0; g.nx * g.ny];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = (g.x(i), g.y(j));
                if (x * x + y * y).sqrt() < 3.0 {
                    v[g.idx(i, j)] = 1.0;
                }
            }
        }
        for theta in [-1.2, 0.0, 0.6, std::f64::consts::FRAC_PI_2] {
            let r = front_radius(&g, &v, theta, 0.5);
            assert!((r - 3.0).abs() <= g.dx, "theta {theta}: r = {r}");
        }
    }

    #[test]
    fn exact_line_fits_perfectly() {
        let samples: Vec<(f64, f64)> = (0..40).map(|k| {
            let t = k as f64 * 0.5;
            (t, 3.0 * t + 1.0)
        }).collect();
        let fit = measure_speed(&samples, 0.5).unwrap();
        assert!((fit.speed - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(!fit.flagged);
    }

    #[test]
    fn constant_radius_has_zero_speed() {
        let samples: Vec<(f64, f64)> = (0..40).map(|k| (k as f64, 7.0)).collect();
        let fit = measure_speed(&samples, 1.0).unwrap();
        assert_eq!(fit.speed, 0.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples: Vec<(f64, f64)> = (0..8).map(|k| (k as f64, k as f64)).collect();
        assert!(matches!(
            measure_speed(&samples, 1.0),
            Err(SimError::InsufficientSamples { .. })
        ));
    }
}
