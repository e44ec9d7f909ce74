//! Ghost-layer utilities.

use crate::grid::{AxisPos, MappedGrid};

/// Fills the second ghost layer by third-order extrapolation along grid
/// lines from the first ghost layer and the first two interior lines.
pub fn extrapolate_second_layer(grid: &MappedGrid, f: &mut [f64]) {
    for axis in 0..2 {
        if grid.periodic[axis] {
            continue;
        }
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let (along, other) = if axis == 0 { (i, j) } else { (j, i) };
            let AxisPos::Ghost(high, 2) = grid.axis_pos(axis, along) else {
                continue;
            };
            if axis == 0 && matches!(grid.axis_pos(1, other), AxisPos::Ghost(_, 2)) {
                continue;
            }
            let step = if high { -1 } else { 1 };
            let at = |s: isize| if axis == 0 { grid.idx(i + s * step, j) } else { grid.idx(i, j + s * step) };
            f[k] = 3.0 * f[at(1)] - 3.0 * f[at(2)] + f[at(3)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridProblem};

    #[test]
    fn reproduces_quadratics() {
        let g = build_grid(&GridProblem::PistonChannel { x_i: 0.0, x_i_dot: 0.0, length: 1.0, height: 1.0 }, 1, None).unwrap();
        let q = |x: f64, y: f64| 1.0 + x - 2.0 * y + x * x + 3.0 * x * y - y * y;
        let mut f: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = g.ij(k);
                if g.depth(i, j) <= 1 {
                    let (x, y) = g.xy(k);
                    q(x, y)
                } else {
                    f64::NAN
                }
            })
            .collect();
        extrapolate_second_layer(&g, &mut f);
        for k in 0..g.len() {
            let (x, y) = g.xy(k);
            assert!((f[k] - q(x, y)).abs() < 1e-12);
        }
    }
}
