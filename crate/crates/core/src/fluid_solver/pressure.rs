//! Coupled pressure and body-acceleration solve.
//!
//! The pressure satisfies `lap p = -rho grad v : grad v^T` at interior
//! nodes and at boundary nodes without a given pressure. Ghost rows carry
//! the normal component of the momentum equation with the viscous term in
//! curl-curl form. On the interface the fluid acceleration equals the
//! acceleration of the body point, which couples the pressure to the body
//! accelerations `u = [a_x, a_y, b_z]`. The body rows read
//! `(M + dt beta_d D) u + int p n dS = G(v) + dt beta_d D u_guess`.
//!
//! When no side carries a given pressure, the Poisson rows gain a free
//! constant `lambda` and one row pins the pressure at a wall node.

use nalgebra::{Matrix3, Vector3};

use super::boundary::extrapolate_second_layer;
use super::layout::{classify, corner_column, ghost_column, pin_node, pressure_all_neumann, Layout, NodeKind, EXTRAP};
use super::ops::{curl_curl_with, traction, velocity_gradient_with};
use super::{hash_key, BoundaryData, SchemeMode, SchemeParams, SolverCache};
use crate::error::{param, Error, Result};
use crate::grid::{BoundaryTag, MappedGrid, Side};
use crate::linalg::{Factorization, SparseBuilder};
use crate::rigid_body::RigidBodyState;

/// How the coupled system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureMethod {
    /// Factor the pressure block once per grid and eliminate the three
    /// body unknowns through a 3x3 Schur complement.
    #[default]
    Schur,
    /// Factor the full bordered matrix each time.
    Bordered,
}

impl PressureMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "schur" => Ok(PressureMethod::Schur),
            "bordered" => Ok(PressureMethod::Bordered),
            _ => Err(Error::Parameter(format!("unknown pressure method '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PressureMethod::Schur => "schur",
            PressureMethod::Bordered => "bordered",
        }
    }
}

/// Body data entering the pressure solve.
#[derive(Debug, Clone)]
pub struct BodyCoupling<'a> {
    /// Body state at the new level (position, angle and angular velocity
    /// are used; accelerations are unknown).
    pub body: &'a RigidBodyState,
    /// Planar added-damping tensor on the `(v_x, v_y, omega_z)` entries.
    pub damping: Matrix3<f64>,
    /// Accelerations multiplying the damping term on the right-hand side,
    /// and the predicted accelerations used by the TP scheme.
    pub accel_guess: [f64; 3],
    /// External force and torque `[f_x, f_y, g_z]`.
    pub external: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureBodySolution {
    /// Pressure on every stored node.
    pub p: Vec<f64>,
    /// Body accelerations `[a_x, a_y, b_z]` (zero without a body).
    pub accel: [f64; 3],
    /// Relative residual of the coupled system.
    pub residual: f64,
    /// Compatibility constant of the all-Neumann case.
    pub lambda: f64,
}

/// Residual above which the coupled solve is rejected.
const COUPLED_TOL: f64 = 1e-8;

/// Assembled pieces `A p + C u = r_p`, `B p + E u = r_u`.
struct Coupled {
    layout: Layout,
    /// Size of the pressure block (active nodes plus `lambda`).
    np: usize,
    a: SparseBuilder,
    r_p: Vec<f64>,
    c: Vec<(usize, [f64; 3])>,
    b: [Vec<(usize, f64)>; 3],
    e: Matrix3<f64>,
    r_u: [f64; 3],
    free: [bool; 3],
    neumann_only: bool,
}

fn interface_side(grid: &MappedGrid) -> Result<Side> {
    grid.interface_side().ok_or_else(|| Error::InvalidState("grid has no interface side".into()))
}

/// Viscous force and torque `[F_x, F_y, G_z]` exerted by the fluid on the
/// body, from the velocity at the new level.
pub fn interface_loads(grid: &MappedGrid, u: &[f64], v: &[f64], x_b: &Vector3<f64>, mu: f64) -> Result<[f64; 3]> {
    let side = interface_side(grid)?;
    let surf = grid.surface_sample(side)?;
    let mut out = [0.0; 3];
    for (t, sp) in grid.side_range(side).zip(&surf.points) {
        let (i, j) = grid.side_node(side, t, 0);
        let g = velocity_gradient_with(&grid.stencil(i, j), u, v);
        let tn = traction(&g, [sp.normal.x, sp.normal.y], mu);
        let d = sp.position - x_b;
        out[0] += tn[0] * sp.weight;
        out[1] += tn[1] * sp.weight;
        out[2] += (d.x * tn[1] - d.y * tn[0]) * sp.weight;
    }
    Ok(out)
}

/// Pressure force and torque `-int p n dS` on the body.
pub fn pressure_loads(grid: &MappedGrid, p: &[f64], x_b: &Vector3<f64>) -> Result<[f64; 3]> {
    let side = interface_side(grid)?;
    let surf = grid.surface_sample(side)?;
    let mut out = [0.0; 3];
    for (t, sp) in grid.side_range(side).zip(&surf.points) {
        let (i, j) = grid.side_node(side, t, 0);
        let pk = p[grid.idx(i, j)];
        let d = sp.position - x_b;
        out[0] -= pk * sp.normal.x * sp.weight;
        out[1] -= pk * sp.normal.y * sp.weight;
        out[2] -= pk * (d.x * sp.normal.y - d.y * sp.normal.x) * sp.weight;
    }
    Ok(out)
}

fn assemble(
    grid: &MappedGrid,
    u: &[f64],
    v: &[f64],
    coupling: Option<&BodyCoupling<'_>>,
    params: &SchemeParams,
    dt: f64,
    bdata: &BoundaryData,
) -> Result<Coupled> {
    let layout = Layout::new(grid);
    let neumann_only = pressure_all_neumann(grid);
    let na = layout.len();
    let np = na + usize::from(neumann_only);
    let mut a = SparseBuilder::new(np);
    let mut r_p = vec![0.0; np];
    let mut c = Vec::new();
    let slot = &layout.slot;
    let (rho, mu) = (params.rho, params.mu);
    for (s, &k) in layout.active.iter().enumerate() {
        let (i, j) = grid.ij(k);
        let poisson = |a: &mut SparseBuilder, r_p: &mut [f64]| {
            let st = grid.stencil(i, j);
            let lap = st.laplacian();
            for q in 0..9 {
                a.add(s, slot[st.nbr[q]], lap[q]);
            }
            if neumann_only {
                a.add(s, na, 1.0);
            }
            let g = velocity_gradient_with(&st, u, v);
            r_p[s] = -rho * (g[0][0] * g[0][0] + 2.0 * g[0][1] * g[1][0] + g[1][1] * g[1][1]);
        };
        match classify(grid, i, j) {
            NodeKind::Interior => poisson(&mut a, &mut r_p),
            NodeKind::Boundary { dirichlet: Some(side), .. } => {
                a.add(s, s, 1.0);
                r_p[s] = bdata.pressure[side.index()];
            }
            NodeKind::Boundary { dirichlet: None, .. } => poisson(&mut a, &mut r_p),
            NodeKind::Ghost { side, t } => {
                let col = ghost_column(grid, side, t);
                let tag = grid.tag(side);
                if tag.pressure_dirichlet() {
                    for (kk, w) in col.iter().zip(EXTRAP) {
                        a.add(s, slot[*kk], w);
                    }
                    continue;
                }
                let kb = col[1];
                let (bi, bj) = grid.ij(kb);
                let st = grid.stencil(bi, bj);
                let n = grid.fluid_normal(side, kb);
                for q in 0..9 {
                    a.add(s, slot[st.nbr[q]], n[0] * st.dx[q] + n[1] * st.dy[q]);
                }
                let cc = curl_curl_with(&st, u, v);
                let mut rhs = -mu * (n[0] * cc[0] + n[1] * cc[1]);
                match tag {
                    BoundaryTag::Interface => {
                        let Some(cp) = coupling else {
                            return Err(Error::InvalidState("an interface side needs a body state".into()));
                        };
                        let (x, y) = grid.xy(kb);
                        let d = [x - cp.body.x.x, y - cp.body.x.y];
                        let w = cp.body.omega.z;
                        rhs += rho * w * w * (n[0] * d[0] + n[1] * d[1]);
                        c.push((s, [rho * n[0], rho * n[1], rho * (d[0] * n[1] - d[1] * n[0])]));
                    }
                    BoundaryTag::Slip => {
                        let g = velocity_gradient_with(&st, u, v);
                        let (ub, vb) = (u[kb], v[kb]);
                        let adv = [ub * g[0][0] + vb * g[0][1], ub * g[1][0] + vb * g[1][1]];
                        rhs -= rho * (n[0] * adv[0] + n[1] * adv[1]);
                    }
                    _ => {}
                }
                r_p[s] = rhs;
            }
            NodeKind::Corner { dir } => {
                let col = corner_column(grid, i, j, dir);
                for (kk, w) in col.iter().zip(EXTRAP) {
                    a.add(s, slot[*kk], w);
                }
            }
        }
    }
    if neumann_only {
        a.add(na, slot[pin_node(grid)], 1.0);
    }

    let mut b: [Vec<(usize, f64)>; 3] = Default::default();
    let mut e = Matrix3::identity();
    let mut r_u = [0.0; 3];
    let mut free = [false; 3];
    if let Some(cp) = coupling {
        let body = cp.body;
        free = body.free.as_array();
        let side = interface_side(grid)?;
        let surf = grid.surface_sample(side)?;
        for (t, sp) in grid.side_range(side).zip(&surf.points) {
            let (i, j) = grid.side_node(side, t, 0);
            let d = sp.position - body.x;
            let nb = [sp.normal.x, sp.normal.y, d.x * sp.normal.y - d.y * sp.normal.x];
            for kk in 0..3 {
                if free[kk] {
                    b[kk].push((slot[grid.idx(i, j)], nb[kk] * sp.weight));
                }
            }
        }
        let g = interface_loads(grid, u, v, &body.x, mu)?;
        let mass = Matrix3::from_diagonal(&Vector3::new(body.mass, body.mass, body.inertia_zz()));
        let damp = dt * params.beta_d * cp.damping;
        let (emat, guess_term) = match params.mode {
            SchemeMode::Amp => (mass + damp, damp * Vector3::from(cp.accel_guess)),
            SchemeMode::Tp => (mass, Vector3::zeros()),
        };
        e = emat;
        for kk in 0..3 {
            if free[kk] {
                r_u[kk] = g[kk] + cp.external[kk] + guess_term[kk];
            } else {
                e.row_mut(kk).fill(0.0);
                e[(kk, kk)] = 1.0;
                b[kk].clear();
            }
        }
    }
    Ok(Coupled { layout, np, a, r_p, c, b, e, r_u, free, neumann_only })
}

fn residual(sys: &Coupled, a_mul: &[f64], p: &[f64], u: &[f64; 3]) -> f64 {
    let mut lhs = a_mul.to_vec();
    for (row, cc) in &sys.c {
        for l in 0..3 {
            lhs[*row] += cc[l] * u[l];
        }
    }
    let mut r = 0.0_f64;
    let mut scale = 0.0_f64;
    for (x, y) in lhs.iter().zip(&sys.r_p) {
        r = r.max((x - y).abs());
        scale = scale.max(x.abs()).max(y.abs());
    }
    for k in 0..3 {
        let mut s: f64 = sys.b[k].iter().map(|(col, w)| w * p[*col]).sum();
        for l in 0..3 {
            s += sys.e[(k, l)] * u[l];
        }
        r = r.max((s - sys.r_u[k]).abs());
        scale = scale.max(s.abs()).max(sys.r_u[k].abs());
    }
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

fn b_dot(b: &[(usize, f64)], x: &[f64]) -> f64 {
    b.iter().map(|(c, w)| w * x[*c]).sum()
}

fn finish(grid: &MappedGrid, sys: &Coupled, x: &[f64], accel: [f64; 3], residual: f64) -> PressureBodySolution {
    let mut p = vec![0.0; grid.len()];
    for (s, &k) in sys.layout.active.iter().enumerate() {
        p[k] = x[s];
    }
    extrapolate_second_layer(grid, &mut p);
    let lambda = if sys.neumann_only { x[sys.layout.len()] } else { 0.0 };
    PressureBodySolution { p, accel, residual, lambda }
}

/// Solves for the pressure and, with a body, its accelerations. `u`, `v`
/// hold the velocity at the new level on every stored node.
#[allow(clippy::too_many_arguments)]
pub fn pressure_body_solve(
    cache: &mut SolverCache,
    grid: &MappedGrid,
    u: &[f64],
    v: &[f64],
    coupling: Option<&BodyCoupling<'_>>,
    params: &SchemeParams,
    dt: f64,
    bdata: &BoundaryData,
) -> Result<PressureBodySolution> {
    if u.len() != grid.len() || v.len() != grid.len() {
        return param("velocity arrays do not match the grid");
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return param("time step must be positive");
    }
    if let Some(cp) = coupling {
        cp.body.validate()?;
        if !cp.damping.iter().all(|x| x.is_finite()) {
            return param("added-damping tensor must be finite");
        }
    }
    let sys = assemble(grid, u, v, coupling, params, dt, bdata)?;
    let has_body = coupling.is_some();
    if params.mode == SchemeMode::Tp && has_body {
        return solve_tp(cache, grid, &sys, coupling.unwrap(), params);
    }
    match params.pressure_method {
        PressureMethod::Schur => solve_schur(cache, grid, &sys, has_body),
        PressureMethod::Bordered => solve_bordered(grid, sys, has_body),
    }
}

fn pressure_factorization<'c>(cache: &'c mut SolverCache, grid: &MappedGrid, sys: &Coupled) -> Result<&'c Factorization> {
    let key = hash_key(grid, &[f64::from(u8::from(sys.neumann_only))]);
    if cache.pressure.as_ref().map(|(k, _)| *k) != Some(key) {
        let m = sys.a.build()?;
        let f = Factorization::with_symbolic(m, &mut cache.symbolic)?;
        cache.factorizations += 1;
        cache.pressure = Some((key, f));
    }
    Ok(&cache.pressure.as_ref().expect("pressure factorization").1)
}

fn column(sys: &Coupled, l: usize) -> Vec<f64> {
    let mut col = vec![0.0; sys.np];
    for (row, cc) in &sys.c {
        col[*row] = cc[l];
    }
    col
}

fn solve_schur(cache: &mut SolverCache, grid: &MappedGrid, sys: &Coupled, has_body: bool) -> Result<PressureBodySolution> {
    let fact = pressure_factorization(cache, grid, sys)?;
    let s = fact.solve(&sys.r_p)?;
    if !has_body {
        let r = fact.matrix().relative_residual(&s, &sys.r_p);
        return Ok(finish(grid, sys, &s, [0.0; 3], r));
    }
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(3);
    for l in 0..3 {
        if sys.free[l] && sys.c.iter().any(|(_, cc)| cc[l] != 0.0) {
            xs.push(fact.solve(&column(sys, l))?);
        } else {
            xs.push(vec![0.0; sys.np]);
        }
    }
    let mut schur = sys.e;
    let mut rhs = Vector3::from(sys.r_u);
    for k in 0..3 {
        rhs[k] -= b_dot(&sys.b[k], &s);
        for l in 0..3 {
            schur[(k, l)] -= b_dot(&sys.b[k], &xs[l]);
        }
    }
    let lu = schur.lu();
    let acc = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("singular body block in the coupled pressure solve".into()))?;
    if !acc.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("body accelerations".into()));
    }
    let accel = [acc[0], acc[1], acc[2]];
    let mut p = s;
    for l in 0..3 {
        if accel[l] != 0.0 {
            for (pi, xi) in p.iter_mut().zip(&xs[l]) {
                *pi -= accel[l] * xi;
            }
        }
    }
    let ap = fact.matrix().mul_vec(&p);
    let r = residual(sys, &ap, &p, &accel);
    if !(r <= COUPLED_TOL) {
        return Err(Error::Solver(format!("coupled residual {r:e} exceeds {COUPLED_TOL:e}")));
    }
    Ok(finish(grid, sys, &p, accel, r))
}

fn solve_bordered(grid: &MappedGrid, sys: Coupled, has_body: bool) -> Result<PressureBodySolution> {
    let np = sys.np;
    let nb = if has_body { 3 } else { 0 };
    let mut big = sys.a.with_dim(np + nb);
    let a_only = sys.a.build()?;
    let mut rhs = sys.r_p.clone();
    if has_body {
        for (row, cc) in &sys.c {
            for l in 0..3 {
                big.add(*row, np + l, cc[l]);
            }
        }
        for k in 0..3 {
            for (col, w) in &sys.b[k] {
                big.add(np + k, *col, *w);
            }
            for l in 0..3 {
                big.add(np + k, np + l, sys.e[(k, l)]);
            }
        }
        rhs.extend_from_slice(&sys.r_u);
    }
    let x = Factorization::new(big.build()?)?.solve(&rhs)?;
    let accel = if has_body { [x[np], x[np + 1], x[np + 2]] } else { [0.0; 3] };
    let p = &x[..np];
    let r = residual(&sys, &a_only.mul_vec(p), p, &accel);
    Ok(finish(grid, &sys, p, accel, r))
}

fn solve_tp(
    cache: &mut SolverCache,
    grid: &MappedGrid,
    sys: &Coupled,
    cp: &BodyCoupling<'_>,
    params: &SchemeParams,
) -> Result<PressureBodySolution> {
    let body = cp.body;
    let diag = [body.mass, body.mass, body.inertia_zz()];
    for k in 0..3 {
        if sys.free[k] && !(diag[k] > 0.0) {
            return param("the traditional scheme needs a body with positive mass and inertia");
        }
    }
    let fact = pressure_factorization(cache, grid, sys)?;
    let mut guess = cp.accel_guess;
    let mut out = None;
    for _ in 0..=params.tp_subiterations {
        let mut rhs = sys.r_p.clone();
        for (row, cc) in &sys.c {
            for l in 0..3 {
                rhs[*row] -= cc[l] * guess[l];
            }
        }
        let p = fact.solve(&rhs)?;
        let mut acc = [0.0; 3];
        for k in 0..3 {
            if sys.free[k] {
                acc[k] = (sys.r_u[k] - b_dot(&sys.b[k], &p)) / diag[k];
            }
        }
        let change = (0..3).map(|k| (acc[k] - guess[k]).abs()).fold(0.0, f64::max);
        let r = fact.matrix().relative_residual(&p, &rhs);
        out = Some(finish(grid, sys, &p, acc, r));
        guess = acc;
        if change < 1e-8 {
            break;
        }
    }
    Ok(out.expect("at least one sweep"))
}
