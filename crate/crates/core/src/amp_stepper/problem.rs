//! Benchmark problems: geometry, initial and boundary data and exact
//! solutions.

use nalgebra::Vector3;

use crate::error::Result;
use crate::fluid_solver::BoundaryData;
use crate::grid::{build_grid, GridProblem, MappedGrid, Side};
use crate::rigid_body::{DofMask, RigidBodyState};
use crate::verification::{piston_exact, DiskParams, PistonParams, RotatingDiskSolution};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Piston driving fluid in a channel; the body moves along x only.
    Piston(PistonParams),
    /// Disk rotating inside a fixed annulus; the body only rotates.
    Disk(DiskParams),
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Piston(_) => "piston",
            ProblemSpec::Disk(_) => "disk",
        }
    }
}

/// Exact body motion `[x, y, theta]` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactBody {
    pub q: [f64; 3],
    pub v: [f64; 3],
    pub a: [f64; 3],
}

/// A problem ready to run: parameters, resolution and cached exact data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub resolution: usize,
    pub stretch: Option<f64>,
    disk: Option<RotatingDiskSolution>,
    /// Radial pressure integrals of the disk solution per radial index.
    disk_integrals: Vec<f64>,
}

impl Problem {
    pub fn new(spec: ProblemSpec, resolution: usize, stretch: Option<f64>) -> Result<Self> {
        let mut disk = None;
        match &spec {
            ProblemSpec::Piston(p) => p.validate()?,
            ProblemSpec::Disk(d) => disk = Some(RotatingDiskSolution::new(*d)?),
        }
        let mut pb = Self { spec, resolution, stretch, disk, disk_integrals: Vec::new() };
        if let Some(sol) = pb.disk {
            let g = pb.grid_for(&pb.initial_body())?;
            let mut ints = Vec::new();
            for i in g.node_range(0) {
                let (x, y) = g.xy(g.idx(i, 0));
                let r = x.hypot(y);
                ints.push(sol.pressure_integral(r)?);
            }
            pb.disk_integrals = ints;
        }
        Ok(pb)
    }

    pub fn rho(&self) -> f64 {
        match &self.spec {
            ProblemSpec::Piston(p) => p.rho,
            ProblemSpec::Disk(d) => d.rho,
        }
    }

    pub fn mu(&self) -> f64 {
        match &self.spec {
            ProblemSpec::Piston(p) => p.mu,
            ProblemSpec::Disk(d) => d.mu,
        }
    }

    /// Velocity scale used by the instability monitor.
    pub fn velocity_scale(&self) -> f64 {
        match &self.spec {
            ProblemSpec::Piston(p) => (2.0 * std::f64::consts::PI * p.amplitude).abs().max(1e-12),
            ProblemSpec::Disk(d) => d.amplitude.abs().max(1e-12),
        }
    }

    /// Reference length for converting angular quantities to speeds.
    pub fn length_scale(&self) -> f64 {
        match &self.spec {
            ProblemSpec::Piston(p) => p.height,
            ProblemSpec::Disk(d) => d.r1,
        }
    }

    /// Whether the grid stays fixed as the body moves.
    pub fn static_grid(&self) -> bool {
        matches!(self.spec, ProblemSpec::Disk(_))
    }

    pub fn exact_body(&self, t: f64) -> Result<ExactBody> {
        Ok(match &self.spec {
            ProblemSpec::Piston(p) => {
                let e = piston_exact(p, t)?;
                ExactBody { q: [e.x_b, 0.0, 0.0], v: [e.v_b, 0.0, 0.0], a: [e.a_b, 0.0, 0.0] }
            }
            ProblemSpec::Disk(_) => {
                let s = self.disk.as_ref().expect("disk solution");
                ExactBody { q: [0.0, 0.0, s.theta(t)], v: [0.0, 0.0, s.omega(t)], a: [0.0, 0.0, s.omega_dot(t)] }
            }
        })
    }

    /// Exact body state at `t = 0`.
    pub fn initial_body(&self) -> RigidBodyState {
        let e = self.exact_body(0.0).expect("validated problem");
        let (mass, iz, free) = match &self.spec {
            ProblemSpec::Piston(p) => (p.body_mass, p.body_mass * p.body_width.powi(2) / 12.0, DofMask { x: true, y: false, theta: false }),
            ProblemSpec::Disk(d) => (d.mass(), d.moment_of_inertia(), DofMask { x: false, y: false, theta: true }),
        };
        let mut b = RigidBodyState::planar(mass, iz, e.q[0], e.q[1]);
        b.free = free;
        b.v = Vector3::new(e.v[0], e.v[1], 0.0);
        b.omega = Vector3::new(0.0, 0.0, e.v[2]);
        b.a = Vector3::new(e.a[0], e.a[1], 0.0);
        b.b = Vector3::new(0.0, 0.0, e.a[2]);
        b.theta = e.q[2];
        b.axes = crate::linalg::rot_z(b.theta);
        b
    }

    /// Grid attached to a body state.
    pub fn grid_for(&self, body: &RigidBodyState) -> Result<MappedGrid> {
        let gp = match &self.spec {
            ProblemSpec::Piston(p) => GridProblem::PistonChannel {
                x_i: body.x.x + 0.5 * p.body_width,
                x_i_dot: body.v.x,
                length: p.length,
                height: p.height,
            },
            ProblemSpec::Disk(d) => GridProblem::Annulus { r1: d.r1, r2: d.r2, center: [0.0, 0.0] },
        };
        build_grid(&gp, self.resolution, self.stretch)
    }

    pub fn boundary_data(&self, t: f64) -> Result<BoundaryData> {
        let mut b = BoundaryData::default();
        if let ProblemSpec::Piston(p) = &self.spec {
            b.pressure[Side::R1Max.index()] = piston_exact(p, t)?.p_end;
        }
        Ok(b)
    }

    /// Exact velocity on every stored node and exact pressure at depth-zero
    /// nodes (zero on ghosts).
    pub fn exact_fields(&self, grid: &MappedGrid, t: f64) -> Result<[Vec<f64>; 3]> {
        let n = grid.len();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        match &self.spec {
            ProblemSpec::Piston(p) => {
                let e = piston_exact(p, t)?;
                out[0].fill(e.v_b);
                for (i, j) in grid.nodes() {
                    let k = grid.idx(i, j);
                    out[2][k] = e.pressure(p, grid.xy(k).0);
                }
            }
            ProblemSpec::Disk(_) => {
                let s = self.disk.as_ref().expect("disk solution");
                for k in 0..n {
                    let (x, y) = grid.xy(k);
                    let v = s.velocity(x, y, t);
                    out[0][k] = v[0];
                    out[1][k] = v[1];
                }
                for (i, j) in grid.nodes() {
                    out[2][grid.idx(i, j)] = s.pressure_from_integral(self.disk_integrals[i as usize], t);
                }
            }
        }
        Ok(out)
    }

    /// Whether the pressure is only determined up to a constant, in which
    /// case errors are measured relative to the pinned node.
    pub fn pressure_pinned(&self) -> bool {
        matches!(self.spec, ProblemSpec::Disk(_))
    }

    pub fn disk_solution(&self) -> Option<&RotatingDiskSolution> {
        self.disk.as_ref()
    }
}
