//! Single-component mapped grids with two ghost layers, analytic metrics
//! and second-order finite-difference stencils.
//!
//! Normal convention: [`MappedGrid::fluid_normal`] points out of the fluid
//! domain. On a body interface that is into the body, so surface samples
//! of an interface flip it to obtain the body-outward normal used by all
//! added-damping and force formulas.

pub mod field;
pub mod mapping;
pub mod vtk;

pub use field::FieldState;
pub use mapping::{AnnulusMapping, ChannelMapping, Mapping};

use nalgebra::Vector3;

use crate::added_damping::{BodySurfaceSample, SurfacePoint};
use crate::error::{param, Error, Result};

/// Number of ghost layers on non-periodic sides.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    R1Min,
    R1Max,
    R2Min,
    R2Max,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::R1Min, Side::R1Max, Side::R2Min, Side::R2Max];

    pub fn axis(self) -> usize {
        match self {
            Side::R1Min | Side::R1Max => 0,
            Side::R2Min | Side::R2Max => 1,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, Side::R1Min | Side::R2Min)
    }

    /// Index step pointing into the domain.
    pub fn inward(self) -> isize {
        if self.is_low() {
            1
        } else {
            -1
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::R1Min => 0,
            Side::R1Max => 1,
            Side::R2Min => 2,
            Side::R2Max => 3,
        }
    }

    pub fn parse(s: &str) -> Result<Side> {
        match s {
            "r1min" | "R1Min" => Ok(Side::R1Min),
            "r1max" | "R1Max" => Ok(Side::R1Max),
            "r2min" | "R2Min" => Ok(Side::R2Min),
            "r2max" | "R2Max" => Ok(Side::R2Max),
            _ => param(format!("unknown side '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Fluid-body interface.
    Interface,
    NoSlip,
    Slip,
    /// Given pressure, zero tangential velocity, extrapolated normal velocity.
    PressureInflow,
    /// Zero pressure, zero normal derivative of the normal velocity.
    Outflow,
    Periodic,
}

impl BoundaryTag {
    pub fn parse(s: &str) -> Result<BoundaryTag> {
        Ok(match s {
            "interface" => BoundaryTag::Interface,
            "noslip" | "no-slip" => BoundaryTag::NoSlip,
            "slip" => BoundaryTag::Slip,
            "pressure-inflow" | "inflow" => BoundaryTag::PressureInflow,
            "outflow" => BoundaryTag::Outflow,
            "periodic" => BoundaryTag::Periodic,
            _ => return param(format!("unknown boundary tag '{s}'")),
        })
    }

    /// Whether the pressure is given on this side.
    pub fn pressure_dirichlet(self) -> bool {
        matches!(self, BoundaryTag::PressureInflow | BoundaryTag::Outflow)
    }

    /// Precedence when a node lies on two sides; lower wins.
    pub fn precedence(self) -> u8 {
        match self {
            BoundaryTag::Interface => 0,
            BoundaryTag::NoSlip => 1,
            BoundaryTag::Slip => 2,
            BoundaryTag::PressureInflow => 3,
            BoundaryTag::Outflow => 4,
            BoundaryTag::Periodic => 5,
        }
    }
}

/// Problem geometries supported by [`build_grid`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridProblem {
    /// Annulus `r1 <= r <= r2`; the inner circle is the body interface and
    /// the outer circle a no-slip wall.
    Annulus { r1: f64, r2: f64, center: [f64; 2] },
    /// Channel `x_i <= x <= length`, `0 <= y <= height`; the left edge is
    /// the body face moving with speed `x_i_dot`, top and bottom are slip
    /// walls and the right end has a given pressure.
    PistonChannel { x_i: f64, x_i_dot: f64, length: f64, height: f64 },
}

/// Position of an index along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisPos {
    Interior,
    /// Boundary node on the low (`false`) or high (`true`) end.
    Boundary(bool),
    /// Ghost at depth `d >= 1` past the low or high end.
    Ghost(bool, usize),
}

/// Metric data at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    /// `m[k][j] = dr_k / dx_j`.
    pub m: [[f64; 2]; 2],
    /// `dm[k][j][l] = d^2 r_k / dx_j dx_l`.
    pub dm: [[[f64; 2]; 2]; 2],
    /// `det(dx/dr)`.
    pub jac: f64,
}

/// Finite-difference weights on the 3x3 neighbourhood of a node; entry
/// `a + 3 b` multiplies the value at offset `(a - 1, b - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStencil {
    pub nbr: [usize; 9],
    pub dx: [f64; 9],
    pub dy: [f64; 9],
    pub dxx: [f64; 9],
    pub dxy: [f64; 9],
    pub dyy: [f64; 9],
}

impl NodeStencil {
    #[inline]
    pub fn apply(w: &[f64; 9], nbr: &[usize; 9], u: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..9 {
            s += w[k] * u[nbr[k]];
        }
        s
    }

    pub fn laplacian(&self) -> [f64; 9] {
        let mut l = [0.0; 9];
        for k in 0..9 {
            l[k] = self.dxx[k] + self.dyy[k];
        }
        l
    }
}

#[derive(Debug, Clone)]
pub struct MappedGrid {
    pub mapping: Mapping,
    /// Number of intervals per axis (number of nodes on periodic axes).
    pub n: [usize; 2],
    pub periodic: [bool; 2],
    pub tags: [BoundaryTag; 4],
    /// Reference spacing per axis.
    pub dr: [f64; 2],
    dims: [usize; 2],
    off: [isize; 2],
    coords: Vec<[f64; 2]>,
    metrics: Vec<Metrics>,
    velocity: Vec<[f64; 2]>,
}

impl PartialEq for MappedGrid {
    fn eq(&self, o: &Self) -> bool {
        self.mapping == o.mapping && self.n == o.n && self.tags == o.tags && self.coords == o.coords
    }
}

fn invert(j: &[[f64; 2]; 2]) -> ([[f64; 2]; 2], f64) {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    ([[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]], det)
}

impl MappedGrid {
    /// Builds a grid with `n` intervals per axis. An axis is periodic when
    /// both of its sides are tagged [`BoundaryTag::Periodic`].
    pub fn new(mapping: Mapping, n: [usize; 2], tags: [BoundaryTag; 4]) -> Result<Self> {
        let periodic = [tags[0] == BoundaryTag::Periodic, tags[2] == BoundaryTag::Periodic];
        for a in 0..2 {
            let both = tags[2 * a] == BoundaryTag::Periodic && tags[2 * a + 1] == BoundaryTag::Periodic;
            if periodic[a] != both {
                return param("periodic tags must come in pairs on the same axis");
            }
            if n[a] < if periodic[a] { 4 } else { 2 } {
                return param("too few grid intervals");
            }
        }
        let dr = [1.0 / n[0] as f64, 1.0 / n[1] as f64];
        let mut dims = [0; 2];
        let mut off = [0; 2];
        for a in 0..2 {
            if periodic[a] {
                dims[a] = n[a];
                off[a] = 0;
            } else {
                dims[a] = n[a] + 1 + 2 * GHOSTS;
                off[a] = GHOSTS as isize;
            }
        }
        let total = dims[0] * dims[1];
        let mut g = MappedGrid {
            mapping,
            n,
            periodic,
            tags,
            dr,
            dims,
            off,
            coords: vec![[0.0; 2]; total],
            metrics: vec![Metrics::default(); total],
            velocity: vec![[0.0; 2]; total],
        };
        for jj in 0..dims[1] {
            for ii in 0..dims[0] {
                let i = ii as isize - off[0];
                let j = jj as isize - off[1];
                let r = [i as f64 * dr[0], j as f64 * dr[1]];
                let k = ii + dims[0] * jj;
                g.coords[k] = g.mapping.map(r);
                g.velocity[k] = g.mapping.grid_velocity(r);
                let jac = g.mapping.jacobian(r);
                let (m, det) = invert(&jac);
                if !(det > 0.0) || !det.is_finite() {
                    return Err(Error::Geometry(format!("mapping folds at reference point ({:.4}, {:.4})", r[0], r[1])));
                }
                let h = g.mapping.hessian(r);
                let mut dm = [[[0.0; 2]; 2]; 2];
                for kk in 0..2 {
                    for jx in 0..2 {
                        for lx in 0..2 {
                            let mut s = 0.0;
                            for a in 0..2 {
                                for b in 0..2 {
                                    for c in 0..2 {
                                        s += m[kk][a] * h[a][b][c] * m[c][lx] * m[b][jx];
                                    }
                                }
                            }
                            dm[kk][jx][lx] = -s;
                        }
                    }
                }
                g.metrics[k] = Metrics { m, dm, jac: det };
            }
        }
        g.check_metric_identity()?;
        Ok(g)
    }

    /// Discrete gradient of the coordinate functions must be the identity
    /// to second order.
    fn check_metric_identity(&self) -> Result<()> {
        let xs: Vec<f64> = self.coords.iter().map(|c| c[0]).collect();
        let ys: Vec<f64> = self.coords.iter().map(|c| c[1]).collect();
        let scale = (0..2)
            .map(|a| self.dr[a] * if self.periodic[a] { 2.0 * std::f64::consts::PI } else { 1.0 })
            .fold(0.0, f64::max);
        let tol = 4.0 * scale * scale + 1e-10;
        let mut worst: f64 = 0.0;
        for (i, j) in self.nodes() {
            let s = self.stencil(i, j);
            let e = [
                NodeStencil::apply(&s.dx, &s.nbr, &xs) - 1.0,
                NodeStencil::apply(&s.dy, &s.nbr, &xs),
                NodeStencil::apply(&s.dx, &s.nbr, &ys),
                NodeStencil::apply(&s.dy, &s.nbr, &ys) - 1.0,
            ];
            worst = e.iter().fold(worst, |w, v| w.max(v.abs()));
        }
        if worst > tol {
            return Err(Error::Geometry(format!("metric identity violated by {worst:e} (tolerance {tol:e})")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn geometry_key(&self) -> u64 {
        self.mapping.geometry_key() ^ ((self.n[0] as u64) << 32 | self.n[1] as u64)
    }

    pub fn tag(&self, side: Side) -> BoundaryTag {
        self.tags[side.index()]
    }

    /// Index range along an axis including ghosts.
    pub fn range(&self, axis: usize) -> std::ops::RangeInclusive<isize> {
        if self.periodic[axis] {
            0..=(self.n[axis] as isize - 1)
        } else {
            -(GHOSTS as isize)..=(self.n[axis] + GHOSTS) as isize
        }
    }

    /// Index range of depth-0 nodes (boundary and interior).
    pub fn node_range(&self, axis: usize) -> std::ops::RangeInclusive<isize> {
        if self.periodic[axis] {
            0..=(self.n[axis] as isize - 1)
        } else {
            0..=self.n[axis] as isize
        }
    }

    pub fn contains(&self, i: isize, j: isize) -> bool {
        let ok = |a: usize, v: isize| self.periodic[a] || (v >= -(GHOSTS as isize) && v <= (self.n[a] + GHOSTS) as isize);
        ok(0, i) && ok(1, j)
    }

    /// Storage index; periodic axes wrap.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let ii = if self.periodic[0] { i.rem_euclid(self.n[0] as isize) } else { i + self.off[0] };
        let jj = if self.periodic[1] { j.rem_euclid(self.n[1] as isize) } else { j + self.off[1] };
        debug_assert!(ii >= 0 && (ii as usize) < self.dims[0] && jj >= 0 && (jj as usize) < self.dims[1]);
        ii as usize + self.dims[0] * jj as usize
    }

    /// Inverse of [`Self::idx`].
    pub fn ij(&self, k: usize) -> (isize, isize) {
        ((k % self.dims[0]) as isize - self.off[0], (k / self.dims[0]) as isize - self.off[1])
    }

    pub fn axis_pos(&self, axis: usize, i: isize) -> AxisPos {
        if self.periodic[axis] {
            return AxisPos::Interior;
        }
        let n = self.n[axis] as isize;
        if i < 0 {
            AxisPos::Ghost(false, (-i) as usize)
        } else if i == 0 {
            AxisPos::Boundary(false)
        } else if i < n {
            AxisPos::Interior
        } else if i == n {
            AxisPos::Boundary(true)
        } else {
            AxisPos::Ghost(true, (i - n) as usize)
        }
    }

    /// Ghost depth of a node: the larger ghost depth over both axes.
    pub fn depth(&self, i: isize, j: isize) -> usize {
        let d = |a, v| match self.axis_pos(a, v) {
            AxisPos::Ghost(_, d) => d,
            _ => 0,
        };
        d(0, i).max(d(1, j))
    }

    /// Depth-0 nodes in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (r0, r1) = (self.node_range(0), self.node_range(1));
        r1.flat_map(move |j| r0.clone().map(move |i| (i, j)))
    }

    /// Every stored node with its indices.
    pub fn all_nodes(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        (0..self.len()).map(|k| self.ij(k))
    }

    #[inline]
    pub fn xy(&self, k: usize) -> (f64, f64) {
        (self.coords[k][0], self.coords[k][1])
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    #[inline]
    pub fn metrics(&self, k: usize) -> &Metrics {
        &self.metrics[k]
    }

    #[inline]
    pub fn grid_velocity(&self, k: usize) -> [f64; 2] {
        self.velocity[k]
    }

    /// Chain-rule stencils at a node of depth at most one.
    pub fn stencil(&self, i: isize, j: isize) -> NodeStencil {
        let k0 = self.idx(i, j);
        let mt = &self.metrics[k0];
        let (rx, ry, sx, sy) = (mt.m[0][0], mt.m[0][1], mt.m[1][0], mt.m[1][1]);
        let (rxx, rxy, ryy) = (mt.dm[0][0][0], mt.dm[0][0][1], mt.dm[0][1][1]);
        let (sxx, sxy, syy) = (mt.dm[1][0][0], mt.dm[1][0][1], mt.dm[1][1][1]);
        let (h1, h2) = (self.dr[0], self.dr[1]);
        let mut nbr = [0usize; 9];
        for b in 0..3 {
            for a in 0..3 {
                nbr[a + 3 * b] = self.idx(i + a as isize - 1, j + b as isize - 1);
            }
        }
        let mut dr_ = [0.0; 9];
        let mut ds = [0.0; 9];
        let mut drr = [0.0; 9];
        let mut dss = [0.0; 9];
        let mut drs = [0.0; 9];
        dr_[5] = 0.5 / h1;
        dr_[3] = -0.5 / h1;
        ds[7] = 0.5 / h2;
        ds[1] = -0.5 / h2;
        drr[3] = 1.0 / (h1 * h1);
        drr[5] = drr[3];
        drr[4] = -2.0 * drr[3];
        dss[1] = 1.0 / (h2 * h2);
        dss[7] = dss[1];
        dss[4] = -2.0 * dss[1];
        let c = 0.25 / (h1 * h2);
        drs[8] = c;
        drs[0] = c;
        drs[2] = -c;
        drs[6] = -c;
        let mut s = NodeStencil { nbr, dx: [0.0; 9], dy: [0.0; 9], dxx: [0.0; 9], dxy: [0.0; 9], dyy: [0.0; 9] };
        for q in 0..9 {
            s.dx[q] = rx * dr_[q] + sx * ds[q];
            s.dy[q] = ry * dr_[q] + sy * ds[q];
            s.dxx[q] = rx * rx * drr[q] + 2.0 * rx * sx * drs[q] + sx * sx * dss[q] + rxx * dr_[q] + sxx * ds[q];
            s.dxy[q] = rx * ry * drr[q] + (rx * sy + ry * sx) * drs[q] + sx * sy * dss[q] + rxy * dr_[q] + sxy * ds[q];
            s.dyy[q] = ry * ry * drr[q] + 2.0 * ry * sy * drs[q] + sy * sy * dss[q] + ryy * dr_[q] + syy * ds[q];
        }
        s
    }

    /// Unit normal pointing out of the fluid domain at a node on `side`.
    pub fn fluid_normal(&self, side: Side, k: usize) -> [f64; 2] {
        let m = &self.metrics[k].m;
        let a = side.axis();
        let g = [m[a][0], m[a][1]];
        let norm = g[0].hypot(g[1]);
        let s = if side.is_low() { -1.0 } else { 1.0 };
        [s * g[0] / norm, s * g[1] / norm]
    }

    /// Tangential index range of boundary nodes on `side`.
    pub fn side_range(&self, side: Side) -> std::ops::RangeInclusive<isize> {
        self.node_range(1 - side.axis())
    }

    /// Node on `side` at tangential index `t`, offset `depth` along the
    /// inward direction (negative depth means ghost).
    pub fn side_node(&self, side: Side, t: isize, depth: isize) -> (isize, isize) {
        let a = side.axis();
        let base = if side.is_low() { 0 } else { self.n[a] as isize };
        let normal = base + side.inward() * depth;
        if a == 0 {
            (normal, t)
        } else {
            (t, normal)
        }
    }

    /// Physical length of one reference step along `axis` at node `k`.
    pub fn step_length(&self, axis: usize, k: usize) -> f64 {
        let (i, j) = self.ij(k);
        let r = [i as f64 * self.dr[0], j as f64 * self.dr[1]];
        let jac = self.mapping.jacobian(r);
        jac[0][axis].hypot(jac[1][axis]) * self.dr[axis]
    }

    /// Smallest physical spacing at node `k`.
    pub fn spacing(&self, k: usize) -> f64 {
        self.step_length(0, k).min(self.step_length(1, k))
    }

    /// Quadrature sample of the boundary `side`. Normals point out of the
    /// body on an interface side and out of the fluid otherwise.
    pub fn surface_sample(&self, side: Side) -> Result<BodySurfaceSample> {
        let tag = self.tag(side);
        if tag == BoundaryTag::Periodic {
            return param("a periodic side has no surface");
        }
        let flip = if tag == BoundaryTag::Interface { -1.0 } else { 1.0 };
        let ta = 1 - side.axis();
        let range = self.side_range(side);
        let (lo, hi) = (*range.start(), *range.end());
        let mut points = Vec::new();
        for t in range {
            let (i, j) = self.side_node(side, t, 0);
            let k = self.idx(i, j);
            let nrm = self.fluid_normal(side, k);
            let mut w = self.step_length(ta, k);
            if !self.periodic[ta] && (t == lo || t == hi) {
                w *= 0.5;
            }
            let (i1, j1) = self.side_node(side, t, 1);
            let k1 = self.idx(i1, j1);
            let ds_n = (self.coords[k1][0] - self.coords[k][0]).hypot(self.coords[k1][1] - self.coords[k][1]);
            points.push(SurfacePoint {
                position: Vector3::new(self.coords[k][0], self.coords[k][1], 0.0),
                normal: Vector3::new(flip * nrm[0], flip * nrm[1], 0.0),
                weight: w,
                normal_spacing: ds_n,
            });
        }
        Ok(BodySurfaceSample { points, planar: true })
    }

    /// The side tagged as the body interface, if any.
    pub fn interface_side(&self) -> Option<Side> {
        Side::ALL.into_iter().find(|s| self.tag(*s) == BoundaryTag::Interface)
    }
}

/// Builds the grid for a problem at resolution factor `j` (spacing about
/// `1/(10 j)`). `stretch` clusters annulus lines towards the body.
pub fn build_grid(problem: &GridProblem, j: usize, stretch: Option<f64>) -> Result<MappedGrid> {
    if j == 0 {
        return param("resolution factor must be at least 1");
    }
    let base = 10 * j;
    match *problem {
        GridProblem::Annulus { r1, r2, center } => {
            if !(r1 > 0.0 && r2 > r1) {
                return param("annulus needs 0 < r1 < r2");
            }
            let nr = ((r2 - r1) * base as f64).round().max(2.0) as usize;
            let nt = (2.0 * std::f64::consts::PI * r1 * base as f64).round().max(8.0) as usize;
            let m = Mapping::Annulus(AnnulusMapping { inner: r1, outer: r2, center, stretch: stretch.unwrap_or(0.0) });
            MappedGrid::new(
                m,
                [nr, nt],
                [BoundaryTag::Interface, BoundaryTag::NoSlip, BoundaryTag::Periodic, BoundaryTag::Periodic],
            )
        }
        GridProblem::PistonChannel { x_i, x_i_dot, length, height } => {
            if !(height > 0.0) {
                return param("channel height must be positive");
            }
            if !(length > x_i) {
                return Err(Error::Geometry(format!("piston face x_I = {x_i} has reached the channel end {length}")));
            }
            let m = Mapping::Channel(ChannelMapping { left: x_i, right: length, bottom: 0.0, top: height, left_speed: x_i_dot });
            MappedGrid::new(
                m,
                [base, base],
                [BoundaryTag::Interface, BoundaryTag::PressureInflow, BoundaryTag::Slip, BoundaryTag::Slip],
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn annulus(j: usize) -> MappedGrid {
        build_grid(&GridProblem::Annulus { r1: 1.0, r2: 2.0, center: [0.0, 0.0] }, j, None).unwrap()
    }

    #[test]
    fn annulus_counts_and_normals() {
        let g = annulus(1);
        assert_eq!(g.n[0] + 1, 11);
        let s = g.surface_sample(Side::R1Min).unwrap();
        for p in &s.points {
            let rhat = p.position.normalize();
            assert!((p.normal.dot(&rhat) - 1.0).abs() < 1e-12);
        }
        let g4 = annulus(4);
        let s4 = g4.surface_sample(Side::R1Min).unwrap();
        assert!((s4.measure() - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn piston_endpoints_and_velocity() {
        let g = build_grid(&GridProblem::PistonChannel { x_i: 0.5, x_i_dot: 0.3, length: 1.5, height: 1.0 }, 1, None).unwrap();
        let k0 = g.idx(0, 3);
        let k1 = g.idx(g.n[0] as isize, 3);
        assert!((g.xy(k0).0 - 0.5).abs() < 1e-15 && (g.xy(k1).0 - 1.5).abs() < 1e-15);
        assert!((g.grid_velocity(k0)[0] - 0.3).abs() < 1e-15 && g.grid_velocity(k1)[0].abs() < 1e-15);
        let s = g.surface_sample(Side::R1Min).unwrap();
        assert!((s.measure() - 1.0).abs() < 1e-14);
        assert!(s.points.iter().all(|p| (p.normal.x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn folded_channel_is_rejected() {
        assert!(build_grid(&GridProblem::PistonChannel { x_i: 1.6, x_i_dot: 0.0, length: 1.5, height: 1.0 }, 1, None).is_err());
    }

    #[test]
    fn rebuild_is_bit_identical() {
        assert_eq!(annulus(2), annulus(2));
    }
}
