//! Implicit velocity update.
//!
//! Unknowns are both velocity components at every node of ghost depth at
//! most one. Interior rows carry the momentum equation
//! `rho (v - v^n)/dt + (f* + f^n)/2 = mu [alpha lap v + (1 - alpha) lap v^n]`;
//! boundary and ghost rows carry the wall conditions and the numerical
//! closures (zero divergence on the wall and extrapolation of the
//! tangential component for no-slip and interface sides).

use nalgebra::Vector3;

use super::boundary::extrapolate_second_layer;
use super::layout::{classify, corner_column, ghost_column, tangent, Layout, NodeKind, EXTRAP};
use super::{hash_key, SchemeParams, SolverCache};
use crate::error::{param, Result};
use crate::grid::{BoundaryTag, FieldState, MappedGrid, NodeStencil};
use crate::linalg::{Factorization, SparseBuilder, SparseMatrix};
use crate::rigid_body::RigidBodyState;

/// What the depth-zero rows impose.
#[derive(Clone, Copy)]
enum RowMode {
    /// Momentum and wall conditions for a step of size `dt`.
    Step(f64),
    /// Given values at every depth-zero node; only ghosts are unknown.
    Ghosts,
}

struct Assembler<'a> {
    sb: SparseBuilder,
    slot: &'a [usize],
}

impl Assembler<'_> {
    #[inline]
    fn add(&mut self, row: usize, k: usize, c: usize, v: f64) {
        self.sb.add(row, 2 * self.slot[k] + c, v);
    }

    /// Momentum operator projected on `proj`.
    fn momentum(&mut self, row: usize, k: usize, st: &NodeStencil, proj: [f64; 2], dt: f64, p: &SchemeParams) {
        let lap = st.laplacian();
        for c in 0..2 {
            if proj[c] == 0.0 {
                continue;
            }
            self.add(row, k, c, proj[c] * p.rho / dt);
            for q in 0..9 {
                self.add(row, st.nbr[q], c, -proj[c] * p.mu * p.alpha * lap[q]);
            }
        }
    }

    /// `proj . sum_n w_n v(col_n)`.
    fn combo(&mut self, row: usize, cols: &[usize], w: &[f64], proj: [f64; 2]) {
        for (k, wk) in cols.iter().zip(w) {
            for c in 0..2 {
                if proj[c] != 0.0 && *wk != 0.0 {
                    self.add(row, *k, c, proj[c] * wk);
                }
            }
        }
    }
}

const EX: [f64; 2] = [1.0, 0.0];
const EY: [f64; 2] = [0.0, 1.0];

fn assemble(grid: &MappedGrid, layout: &Layout, params: &SchemeParams, mode: RowMode) -> Result<SparseMatrix> {
    let mut a = Assembler { sb: SparseBuilder::new(2 * layout.len()), slot: &layout.slot };
    for (s, &k) in layout.active.iter().enumerate() {
        let (i, j) = grid.ij(k);
        let r = [2 * s, 2 * s + 1];
        match classify(grid, i, j) {
            NodeKind::Interior | NodeKind::Boundary { .. } if matches!(mode, RowMode::Ghosts) => {
                a.add(r[0], k, 0, 1.0);
                a.add(r[1], k, 1, 1.0);
            }
            NodeKind::Interior => {
                let RowMode::Step(dt) = mode else { unreachable!() };
                let st = grid.stencil(i, j);
                a.momentum(r[0], k, &st, EX, dt, params);
                a.momentum(r[1], k, &st, EY, dt, params);
            }
            NodeKind::Boundary { dominant, .. } => {
                let RowMode::Step(dt) = mode else { unreachable!() };
                let n = grid.fluid_normal(dominant, k);
                let t = tangent(n);
                let st = grid.stencil(i, j);
                match grid.tag(dominant) {
                    BoundaryTag::Interface | BoundaryTag::NoSlip => {
                        a.add(r[0], k, 0, 1.0);
                        a.add(r[1], k, 1, 1.0);
                    }
                    BoundaryTag::Slip => {
                        a.combo(r[0], &[k], &[1.0], n);
                        a.momentum(r[1], k, &st, t, dt, params);
                    }
                    BoundaryTag::PressureInflow => {
                        a.combo(r[0], &[k], &[1.0], t);
                        a.momentum(r[1], k, &st, n, dt, params);
                    }
                    BoundaryTag::Outflow => {
                        a.momentum(r[0], k, &st, EX, dt, params);
                        a.momentum(r[1], k, &st, EY, dt, params);
                    }
                    BoundaryTag::Periodic => return param("periodic side cannot own a boundary node"),
                }
            }
            NodeKind::Ghost { side, t: ti } => {
                let col = ghost_column(grid, side, ti);
                let kb = col[1];
                let n = grid.fluid_normal(side, kb);
                let t = tangent(n);
                match grid.tag(side) {
                    BoundaryTag::Interface | BoundaryTag::NoSlip => {
                        let (bi, bj) = grid.ij(kb);
                        let st = grid.stencil(bi, bj);
                        for q in 0..9 {
                            a.add(r[0], st.nbr[q], 0, st.dx[q]);
                            a.add(r[0], st.nbr[q], 1, st.dy[q]);
                        }
                        a.combo(r[1], &col, &EXTRAP, t);
                    }
                    BoundaryTag::Slip => {
                        a.combo(r[0], &[col[0], col[2]], &[1.0, 1.0], n);
                        a.combo(r[1], &[col[0], col[2]], &[1.0, -1.0], t);
                    }
                    BoundaryTag::PressureInflow => {
                        a.combo(r[0], &col, &EXTRAP, EX);
                        a.combo(r[1], &col, &EXTRAP, EY);
                    }
                    BoundaryTag::Outflow => {
                        a.combo(r[0], &[col[0], col[2]], &[1.0, -1.0], n);
                        a.combo(r[1], &col, &EXTRAP, t);
                    }
                    BoundaryTag::Periodic => return param("periodic side has no ghosts"),
                }
            }
            NodeKind::Corner { dir } => {
                let col = corner_column(grid, i, j, dir);
                a.combo(r[0], &col, &EXTRAP, EX);
                a.combo(r[1], &col, &EXTRAP, EY);
            }
        }
    }
    a.sb.build()
}

/// Matrix of the implicit velocity system for a step of size `dt`.
pub fn velocity_matrix(grid: &MappedGrid, params: &SchemeParams, dt: f64) -> Result<SparseMatrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return param("time step must be positive");
    }
    assemble(grid, &Layout::new(grid), params, RowMode::Step(dt))
}

/// Right-hand side entries of the depth-zero rows; ghost rows are zero.
fn step_rhs(
    grid: &MappedGrid,
    layout: &Layout,
    explicit: &[Vec<f64>; 2],
    body: Option<&RigidBodyState>,
) -> Result<Vec<f64>> {
    let mut b = vec![0.0; 2 * layout.len()];
    for (s, &k) in layout.active.iter().enumerate() {
        let (i, j) = grid.ij(k);
        let e = [explicit[0][k], explicit[1][k]];
        let dot = |p: [f64; 2]| p[0] * e[0] + p[1] * e[1];
        let val = match classify(grid, i, j) {
            NodeKind::Interior => e,
            NodeKind::Boundary { dominant, .. } => {
                let n = grid.fluid_normal(dominant, k);
                match grid.tag(dominant) {
                    BoundaryTag::Interface => {
                        let Some(body) = body else {
                            return param("an interface side needs a body state");
                        };
                        let (x, y) = grid.xy(k);
                        let w = body.surface_point_state(&Vector3::new(x, y, 0.0)).velocity;
                        [w.x, w.y]
                    }
                    BoundaryTag::NoSlip => [0.0, 0.0],
                    BoundaryTag::Slip => [0.0, dot(tangent(n))],
                    BoundaryTag::PressureInflow => [0.0, dot(n)],
                    _ => e,
                }
            }
            _ => [0.0, 0.0],
        };
        b[2 * s] = val[0];
        b[2 * s + 1] = val[1];
    }
    Ok(b)
}

fn scatter(grid: &MappedGrid, layout: &Layout, x: &[f64]) -> [Vec<f64>; 2] {
    let mut out = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for (s, &k) in layout.active.iter().enumerate() {
        out[0][k] = x[2 * s];
        out[1][k] = x[2 * s + 1];
    }
    extrapolate_second_layer(grid, &mut out[0]);
    extrapolate_second_layer(grid, &mut out[1]);
    out
}

/// Advances the velocity from `fields_n` (on `grid_n`) to the new level on
/// `grid`, using `f_star` as the new-level advection-pressure term and the
/// body state for the interface velocity. Returns both components on every
/// stored node.
#[allow(clippy::too_many_arguments)]
pub fn advance_velocity(
    cache: &mut SolverCache,
    grid_n: &MappedGrid,
    fields_n: &FieldState,
    grid: &MappedGrid,
    f_star: &[Vec<f64>; 2],
    body: Option<&RigidBodyState>,
    params: &SchemeParams,
    dt: f64,
) -> Result<[Vec<f64>; 2]> {
    if !(dt > 0.0 && dt.is_finite()) {
        return param("time step must be positive");
    }
    fields_n.check_shape(grid_n)?;
    if grid_n.len() != grid.len() || f_star[0].len() != grid.len() {
        return param("grids and fields must have the same layout");
    }
    let layout = Layout::new(grid);
    let mut explicit = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    let vn = [&fields_n.u, &fields_n.v];
    for (i, j) in grid.nodes() {
        let k = grid.idx(i, j);
        let lap = grid_n.stencil(i, j).laplacian();
        let st = grid_n.stencil(i, j);
        for c in 0..2 {
            let l = NodeStencil::apply(&lap, &st.nbr, vn[c]);
            explicit[c][k] = params.rho / dt * vn[c][k] - 0.5 * (f_star[c][k] + fields_n.f_n[c][k])
                + params.mu * (1.0 - params.alpha) * l;
        }
    }
    let key = hash_key(grid, &[dt, params.rho, params.mu, params.alpha]);
    if cache.velocity.as_ref().map(|(k, _)| *k) != Some(key) {
        let m = assemble(grid, &layout, params, RowMode::Step(dt))?;
        let f = Factorization::with_symbolic(m, &mut cache.symbolic)?;
        cache.factorizations += 1;
        cache.velocity = Some((key, f));
    }
    let rhs = step_rhs(grid, &layout, &explicit, body)?;
    let x = cache.velocity.as_ref().expect("velocity factorization").1.solve(&rhs)?;
    Ok(scatter(grid, &layout, &x))
}

/// Solutions of the homogeneous step problem (zero explicit terms) with
/// interface data given by the rigid motion of each body state.
pub(crate) fn homogeneous_responses(
    grid: &MappedGrid,
    params: &SchemeParams,
    dt: f64,
    bodies: &[RigidBodyState],
) -> Result<Vec<[Vec<f64>; 2]>> {
    let layout = Layout::new(grid);
    let f = Factorization::new(assemble(grid, &layout, params, RowMode::Step(dt))?)?;
    let zero = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    bodies
        .iter()
        .map(|b| {
            let rhs = step_rhs(grid, &layout, &zero, Some(b))?;
            Ok(scatter(grid, &layout, &f.solve(&rhs)?))
        })
        .collect()
}

/// Fills the ghost values of a velocity field from its depth-zero values
/// using the same ghost conditions as the velocity update.
pub fn fill_velocity_ghosts(grid: &MappedGrid, params: &SchemeParams, u: &mut [f64], v: &mut [f64]) -> Result<()> {
    if u.len() != grid.len() || v.len() != grid.len() {
        return param("velocity arrays do not match the grid");
    }
    let layout = Layout::new(grid);
    let m = assemble(grid, &layout, params, RowMode::Ghosts)?;
    let mut b = vec![0.0; 2 * layout.len()];
    for (s, &k) in layout.active.iter().enumerate() {
        let (i, j) = grid.ij(k);
        if grid.depth(i, j) == 0 {
            b[2 * s] = u[k];
            b[2 * s + 1] = v[k];
        }
    }
    let x = Factorization::new(m)?.solve(&b)?;
    let out = scatter(grid, &layout, &x);
    u.copy_from_slice(&out[0]);
    v.copy_from_slice(&out[1]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridProblem};

    #[test]
    fn matrix_is_square_and_nonsingular() {
        let g = build_grid(&GridProblem::PistonChannel { x_i: 0.5, x_i_dot: 0.0, length: 1.5, height: 1.0 }, 1, None).unwrap();
        let m = velocity_matrix(&g, &SchemeParams::default(), 0.1).unwrap();
        let f = Factorization::new(m).unwrap();
        let b: Vec<f64> = (0..f.matrix().dim()).map(|i| (i as f64).sin()).collect();
        f.solve(&b).unwrap();
    }

    #[test]
    fn ghost_fill_enforces_wall_divergence() {
        let g = build_grid(&GridProblem::Annulus { r1: 1.0, r2: 2.0, center: [0.0, 0.0] }, 1, None).unwrap();
        let mut u = vec![0.0; g.len()];
        let mut v = vec![0.0; g.len()];
        for (i, j) in g.nodes() {
            let k = g.idx(i, j);
            let (x, y) = g.xy(k);
            u[k] = -y;
            v[k] = x;
        }
        fill_velocity_ghosts(&g, &SchemeParams::default(), &mut u, &mut v).unwrap();
        for j in g.node_range(1) {
            for i in [0, g.n[0] as isize] {
                let d = crate::fluid_solver::divergence(&g, &u, &v, i, j);
                assert!(d.abs() < 1e-10, "div {d} at {i},{j}");
            }
        }
    }
}
