//! Exact solutions, special functions and convergence-rate estimators.

pub mod bessel;
pub mod disk;
pub mod piston;
pub mod quadrature;
pub mod ramp;

pub use disk::{decay_parameter, DiskParams, RotatingDiskSolution};
pub use piston::{piston_exact, PistonExact, PistonParams};
pub use ramp::{ramp, ramp_derivative};

use crate::error::{param, Result};
use crate::grid::MappedGrid;

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn least_squares_rate(h: &[f64], errors: &[f64]) -> Result<f64> {
    if h.len() != errors.len() || h.len() < 2 {
        return param("need at least two (h, error) pairs of equal length");
    }
    if h.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return param("spacings and errors must be positive and finite");
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return param("spacings must not all be equal");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Discrete L1 norm (mean absolute value) of a sampled history.
pub fn l1_norm(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
}

/// Self-convergence rate from three histories on grids refined by two,
/// sampled at common times: `log2(|q4 - q2|_1 / |q8 - q4|_1)`.
pub fn richardson_rate(q2: &[f64], q4: &[f64], q8: &[f64]) -> Result<f64> {
    if q2.len() != q4.len() || q4.len() != q8.len() || q2.is_empty() {
        return param("histories must be non-empty and sampled at the same times");
    }
    let d1: Vec<f64> = q4.iter().zip(q2).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = q8.iter().zip(q4).map(|(a, b)| a - b).collect();
    let (n1, n2) = (l1_norm(&d1), l1_norm(&d2));
    if !(n1 > 0.0 && n2 > 0.0) {
        return param("histories do not differ; rate undefined");
    }
    Ok((n1 / n2).log2())
}

/// Linear interpolation of `(times, values)` at `at`; times must increase.
/// Points outside the sampled range take the end values.
pub fn resample(times: &[f64], values: &[f64], at: &[f64]) -> Vec<f64> {
    at.iter()
        .map(|&t| {
            if times.is_empty() {
                return f64::NAN;
            }
            let k = times.partition_point(|&s| s < t);
            if k == 0 {
                values[0]
            } else if k >= times.len() {
                values[times.len() - 1]
            } else {
                let (t0, t1) = (times[k - 1], times[k]);
                let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                values[k - 1] * (1.0 - w) + values[k] * w
            }
        })
        .collect()
}

/// Maximum over grid nodes (ghosts excluded) of `|u - exact(x, y)|`.
pub fn grid_max_error(grid: &MappedGrid, u: &[f64], exact: impl Fn(f64, f64) -> f64) -> f64 {
    grid.nodes()
        .map(|(i, j)| {
            let k = grid.idx(i, j);
            let (x, y) = grid.xy(k);
            (u[k] - exact(x, y)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_interpolates() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.0, 2.0, 6.0];
        assert_eq!(resample(&t, &v, &[0.5, 1.5, 3.0]), vec![1.0, 4.0, 6.0]);
    }
}
