//! Added-damping tensors from the discrete Helmholtz problems satisfied by
//! the sensitivities of the new fluid velocity to the body velocities.

use nalgebra::{Matrix3, Vector3};

use super::{AddedDampingTensor, Provenance};
use crate::error::{param, Error, Result};
use crate::fluid_solver::velocity::homogeneous_responses;
use crate::fluid_solver::SchemeParams;
use crate::grid::MappedGrid;
use crate::rigid_body::{DofMask, RigidBodyState};

#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub tensor: AddedDampingTensor,
    /// Sensitivity fields for unit `v_x`, `v_y` and `omega_z`, each as
    /// `[u, v]` on every stored node.
    pub fields: [[Vec<f64>; 2]; 3],
}

/// Solves `(rho/dt - mu alpha lap_h) W = 0` with `W = I` (translation) or
/// `W = -[r - x_b]x` (rotation) on the interface and homogeneous data
/// elsewhere, then evaluates the tensors from one-sided normal derivatives
/// of `W` on the interface.
pub fn variational_tensors(
    grid: &MappedGrid,
    dt: f64,
    alpha: f64,
    rho: f64,
    mu: f64,
    x_b: &Vector3<f64>,
) -> Result<VariationalResult> {
    if !(dt > 0.0 && alpha > 0.0 && alpha <= 1.0 && rho > 0.0 && mu > 0.0) {
        return param("variational tensors need dt, rho, mu > 0 and 0 < alpha <= 1");
    }
    let side = grid.interface_side().ok_or_else(|| Error::InvalidState("grid has no interface side".into()))?;
    let params = SchemeParams { rho, mu, alpha, ..SchemeParams::default() };
    let unit = |v: [f64; 2], w: f64| {
        let mut b = RigidBodyState::planar(1.0, 1.0, x_b.x, x_b.y);
        b.v = Vector3::new(v[0], v[1], 0.0);
        b.omega = Vector3::new(0.0, 0.0, w);
        b.free = DofMask::ALL;
        b
    };
    let bodies = [unit([1.0, 0.0], 0.0), unit([0.0, 1.0], 0.0), unit([0.0, 0.0], 1.0)];
    let w = homogeneous_responses(grid, &params, dt, &bodies)?;
    let surf = grid.surface_sample(side)?;
    let a = side.axis();
    let ta = 1 - a;
    let hn = grid.dr[a];
    let ht = grid.dr[ta];
    let sgn = side.inward() as f64;
    let mut vv = Matrix3::zeros();
    let mut vw = Matrix3::zeros();
    let mut wv = Matrix3::zeros();
    let mut ww = Matrix3::identity() * (2.0 * mu * surf.enclosed_volume());
    for (t, sp) in grid.side_range(side).zip(&surf.points) {
        let node = |depth: isize, dt_: isize| {
            let (i, j) = grid.side_node(side, t + dt_, depth);
            grid.idx(i, j)
        };
        let kb = node(0, 0);
        let m = &grid.metrics(kb).m;
        let n = sp.normal;
        let d = sp.position - x_b;
        for (l, wl) in w.iter().enumerate() {
            let mut dn = Vector3::zeros();
            for c in 0..2 {
                let f = &wl[c];
                let w_n = sgn * (-3.0 * f[kb] + 4.0 * f[node(1, 0)] - f[node(2, 0)]) / (2.0 * hn);
                let w_t = (f[node(0, 1)] - f[node(0, -1)]) / (2.0 * ht);
                let grad = [w_n * m[a][0] + w_t * m[ta][0], w_n * m[a][1] + w_t * m[ta][1]];
                dn[c] = n.x * grad[0] + n.y * grad[1];
            }
            let g = (dn - n * n.dot(&dn)) * sp.weight;
            let tq = d.cross(&g);
            if l < 2 {
                vv.column_mut(l).axpy(-mu, &g, 1.0);
                wv.column_mut(l).axpy(-mu, &tq, 1.0);
            } else {
                vw.column_mut(2).axpy(-mu, &g, 1.0);
                ww.column_mut(2).axpy(-mu, &tq, 1.0);
            }
        }
    }
    let tensor = AddedDampingTensor::from_blocks(vv, vw, wv, ww, Provenance::Variational).restrict_to_plane();
    let [f0, f1, f2] = <[[Vec<f64>; 2]; 3]>::try_from(w).map_err(|_| Error::Solver("missing sensitivity field".into()))?;
    Ok(VariationalResult { tensor, fields: [f0, f1, f2] })
}
