//! Pointwise discrete operators on grid functions. All of them use the
//! centred stencils of [`MappedGrid::stencil`] and are valid at nodes of
//! ghost depth zero.

use crate::grid::{MappedGrid, NodeStencil};

/// `[d/dx, d/dy]` of a scalar.
pub fn gradient(grid: &MappedGrid, f: &[f64], i: isize, j: isize) -> [f64; 2] {
    let s = grid.stencil(i, j);
    [NodeStencil::apply(&s.dx, &s.nbr, f), NodeStencil::apply(&s.dy, &s.nbr, f)]
}

/// Velocity gradient `g[a][b] = d v_a / d x_b`.
pub fn velocity_gradient(grid: &MappedGrid, u: &[f64], v: &[f64], i: isize, j: isize) -> [[f64; 2]; 2] {
    let s = grid.stencil(i, j);
    velocity_gradient_with(&s, u, v)
}

pub(crate) fn velocity_gradient_with(s: &NodeStencil, u: &[f64], v: &[f64]) -> [[f64; 2]; 2] {
    [
        [NodeStencil::apply(&s.dx, &s.nbr, u), NodeStencil::apply(&s.dy, &s.nbr, u)],
        [NodeStencil::apply(&s.dx, &s.nbr, v), NodeStencil::apply(&s.dy, &s.nbr, v)],
    ]
}

pub fn divergence(grid: &MappedGrid, u: &[f64], v: &[f64], i: isize, j: isize) -> f64 {
    let g = velocity_gradient(grid, u, v, i, j);
    g[0][0] + g[1][1]
}

pub fn laplacian(grid: &MappedGrid, f: &[f64], i: isize, j: isize) -> f64 {
    let s = grid.stencil(i, j);
    NodeStencil::apply(&s.laplacian(), &s.nbr, f)
}

/// `curl curl v = grad(div v) - lap v` for a planar field.
pub fn curl_curl(grid: &MappedGrid, u: &[f64], v: &[f64], i: isize, j: isize) -> [f64; 2] {
    let s = grid.stencil(i, j);
    curl_curl_with(&s, u, v)
}

pub(crate) fn curl_curl_with(s: &NodeStencil, u: &[f64], v: &[f64]) -> [f64; 2] {
    let a = |w: &[f64; 9], f: &[f64]| NodeStencil::apply(w, &s.nbr, f);
    [a(&s.dxy, v) - a(&s.dyy, u), a(&s.dxy, u) - a(&s.dxx, v)]
}

/// Viscous traction `mu (grad v + grad v^T) n`.
pub fn traction(grad: &[[f64; 2]; 2], n: [f64; 2], mu: f64) -> [f64; 2] {
    let mut t = [0.0; 2];
    for a in 0..2 {
        for b in 0..2 {
            t[a] += mu * (grad[a][b] + grad[b][a]) * n[b];
        }
    }
    t
}

/// Advection-pressure term `rho ((v - w) . grad) v + grad p` at every
/// depth-zero node; zero on ghosts.
pub fn advection_pressure_term(grid: &MappedGrid, u: &[f64], v: &[f64], p: &[f64], rho: f64) -> [Vec<f64>; 2] {
    let mut f = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for (i, j) in grid.nodes() {
        let s = grid.stencil(i, j);
        let k = grid.idx(i, j);
        let g = velocity_gradient_with(&s, u, v);
        let w = grid.grid_velocity(k);
        let (cx, cy) = (u[k] - w[0], v[k] - w[1]);
        let gp = [NodeStencil::apply(&s.dx, &s.nbr, p), NodeStencil::apply(&s.dy, &s.nbr, p)];
        f[0][k] = rho * (cx * g[0][0] + cy * g[0][1]) + gp[0];
        f[1][k] = rho * (cx * g[1][0] + cy * g[1][1]) + gp[1];
    }
    f
}

/// Largest `|div v|` over depth-zero nodes.
pub fn max_divergence(grid: &MappedGrid, u: &[f64], v: &[f64]) -> f64 {
    grid.nodes().map(|(i, j)| divergence(grid, u, v, i, j).abs()).fold(0.0, f64::max)
}
