//! Time stepping: prediction, pressure/body solve, correction and the
//! optional velocity correction, with grids regenerated from the body
//! state.

pub mod problem;
mod run;

pub use problem::{ExactBody, Problem, ProblemSpec};
pub use run::{run, BodyErrors, ErrorSummary, HistoryRow, RunSummary};

use nalgebra::{Matrix3, Vector3};

use crate::added_damping::{approx_tensors, rotate_tensor, variational_tensors, AddedDampingTensor, BodySurfaceSample, Provenance};
use crate::error::{param, Error, Result};
use crate::fluid_solver::pressure::BodyCoupling;
use crate::fluid_solver::{
    advance_velocity, advection_pressure_term, fill_velocity_ghosts, max_divergence, pressure_body_solve, SchemeMode,
    SchemeParams, SolverCache,
};
use crate::grid::{FieldState, MappedGrid};
use crate::rigid_body::{correct_with_acceleration, predict_and_extrapolate_variable, RigidBodyState};

/// Source of the added-damping tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DampingModel {
    /// Surface quadrature with the length scale from the grid spacing.
    #[default]
    Approximate,
    /// Discrete Helmholtz sensitivities on the initial grid.
    Variational,
    /// No added damping.
    Off,
}

impl DampingModel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "approximate" | "approx" => Ok(DampingModel::Approximate),
            "variational" => Ok(DampingModel::Variational),
            "off" | "none" => Ok(DampingModel::Off),
            _ => param(format!("unknown damping model '{s}'")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DampingModel::Approximate => "approximate",
            DampingModel::Variational => "variational",
            DampingModel::Off => "off",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeControl {
    /// Fixed step, or the first step when `adaptive` is set.
    pub dt: f64,
    pub t_final: f64,
    pub adaptive: bool,
    pub cfl: f64,
    pub dt_max: f64,
}

impl Default for TimeControl {
    fn default() -> Self {
        Self { dt: 0.01, t_final: 1.0, adaptive: false, cfl: 0.9, dt_max: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub problem: ProblemSpec,
    pub resolution: usize,
    pub stretch: Option<f64>,
    pub scheme: SchemeParams,
    pub time: TimeControl,
    pub damping: DampingModel,
    /// Instability threshold as a multiple of the problem velocity scale.
    pub instability_factor: f64,
    /// Stop at the first instability instead of recording it and going on.
    pub abort_on_instability: bool,
    /// Keep field snapshots every this many steps (0 disables).
    pub snapshot_every: usize,
    pub ghost_init: GhostInit,
}

/// How initial ghost velocities are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostInit {
    /// From the exact solution extended past the boundary.
    #[default]
    Exact,
    /// From the discrete wall closure applied to the interior values.
    Closure,
}

impl SimulationConfig {
    pub fn new(problem: ProblemSpec, resolution: usize) -> Self {
        let (rho, mu) = match &problem {
            ProblemSpec::Piston(p) => (p.rho, p.mu),
            ProblemSpec::Disk(d) => (d.rho, d.mu),
        };
        Self {
            problem,
            resolution,
            stretch: None,
            scheme: SchemeParams { rho, mu, ..SchemeParams::default() },
            time: TimeControl { dt: 1.0 / (10.0 * resolution as f64), ..TimeControl::default() },
            damping: DampingModel::Approximate,
            instability_factor: 1e3,
            abort_on_instability: true,
            snapshot_every: 0,
            ghost_init: GhostInit::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return param("dt must be positive");
        }
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            return param("t_final must be non-negative");
        }
        if t.adaptive && !(t.cfl > 0.0 && t.dt_max > 0.0) {
            return param("adaptive stepping needs cfl > 0 and dt_max > 0");
        }
        if self.resolution == 0 {
            return param("resolution must be at least 1");
        }
        if !(self.instability_factor > 0.0) {
            return param("instability factor must be positive");
        }
        let (rho, mu) = match &self.problem {
            ProblemSpec::Piston(p) => (p.rho, p.mu),
            ProblemSpec::Disk(d) => (d.rho, d.mu),
        };
        if rho != self.scheme.rho || mu != self.scheme.mu {
            return param("scheme density and viscosity must match the problem");
        }
        Ok(())
    }
}

/// Everything carried from one time level to the next.
#[derive(Debug)]
pub struct SimulationState {
    pub body: RigidBodyState,
    pub body_prev: RigidBodyState,
    pub fields: FieldState,
    pub grid: MappedGrid,
    /// Added-damping tensor at the initial orientation.
    pub d0: AddedDampingTensor,
    /// Tensor transported to the current orientation.
    pub d: AddedDampingTensor,
    pub step: usize,
    pub dt: f64,
    pub dt_prev: f64,
    /// Largest discrete divergence after the last step.
    pub divergence: f64,
    pub cache: SolverCache,
    grid0: MappedGrid,
    surface0: BodySurfaceSample,
    x_b0: Vector3<f64>,
    axes0: Matrix3<f64>,
    d0_dt: f64,
}

fn planar_vec(u: [f64; 3]) -> (Vector3<f64>, Vector3<f64>) {
    (Vector3::new(u[0], u[1], 0.0), Vector3::new(0.0, 0.0, u[2]))
}

impl SimulationState {
    /// Builds the initial state: exact body and fluid data at `t = 0`, a
    /// startup pressure/body solve for consistent pressure and
    /// accelerations, and a backward Taylor step for the previous body
    /// level.
    pub fn initialize(problem: &Problem, cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let mut body = problem.initial_body();
        let grid = problem.grid_for(&body)?;
        let side = grid.interface_side().ok_or_else(|| Error::InvalidState("problem grid has no interface".into()))?;
        let surface0 = grid.surface_sample(side)?;
        let ex = problem.exact_fields(&grid, 0.0)?;
        let mut fields = FieldState::zeros(&grid, 0.0);
        fields.u.copy_from_slice(&ex[0]);
        fields.v.copy_from_slice(&ex[1]);
        if cfg.ghost_init == GhostInit::Closure {
            fill_velocity_ghosts(&grid, &cfg.scheme, &mut fields.u, &mut fields.v)?;
        }
        let dt = cfg.time.dt;
        let mut st = Self {
            body_prev: body.clone(),
            body: body.clone(),
            fields,
            d0: AddedDampingTensor::zero(Provenance::Quadrature),
            d: AddedDampingTensor::zero(Provenance::Quadrature),
            step: 0,
            dt,
            dt_prev: dt,
            divergence: 0.0,
            cache: SolverCache::new(),
            grid0: grid.clone(),
            grid,
            surface0,
            x_b0: body.x,
            axes0: body.axes,
            d0_dt: f64::NAN,
        };
        st.refresh_damping(cfg)?;
        st.d = st.damping_for(&body)?;
        // startup solve with the added-mass scheme; the second pass uses the
        // first accelerations in the damping term
        let startup = SchemeParams { mode: SchemeMode::Amp, ..cfg.scheme.clone() };
        let bdata = problem.boundary_data(0.0)?;
        for _ in 0..2 {
            let cp = BodyCoupling { body: &body, damping: st.d.planar(), accel_guess: body.planar_accel(), external: [0.0; 3] };
            let sol = pressure_body_solve(&mut st.cache, &st.grid, &st.fields.u, &st.fields.v, Some(&cp), &startup, dt, &bdata)?;
            body = body.with_planar_accel(sol.accel);
            body.apply_constraints();
            st.fields.p = sol.p;
        }
        let f0 = advection_pressure_term(&st.grid, &st.fields.u, &st.fields.v, &st.fields.p, cfg.scheme.rho);
        st.fields.f_nm1 = f0.clone();
        st.fields.f_n = f0;
        st.body_prev = backward_taylor(&body, dt);
        st.body = body;
        st.divergence = max_divergence(&st.grid, &st.fields.u, &st.fields.v);
        Ok(st)
    }

    pub fn time(&self) -> f64 {
        self.fields.t
    }

    /// Recomputes the reference tensor when the step size changed.
    fn refresh_damping(&mut self, cfg: &SimulationConfig) -> Result<()> {
        if self.d0_dt == self.dt {
            return Ok(());
        }
        let s = &cfg.scheme;
        self.d0 = match cfg.damping {
            DampingModel::Approximate => {
                let dn = self.surface0.length_scales(s.nu(), self.dt, s.alpha_bar)?;
                approx_tensors(&self.surface0, &self.x_b0, s.mu, &dn)?
            }
            DampingModel::Variational => variational_tensors(&self.grid0, self.dt, s.alpha_bar, s.rho, s.mu, &self.x_b0)?.tensor,
            DampingModel::Off => AddedDampingTensor::zero(Provenance::Analytic),
        };
        self.d0_dt = self.dt;
        Ok(())
    }

    /// Tensor transported to the orientation of `body`.
    fn damping_for(&self, body: &RigidBodyState) -> Result<AddedDampingTensor> {
        let r = body.axes * self.axes0.transpose();
        let mut d = rotate_tensor(&self.d0, &r)?;
        d.t0 = self.time();
        Ok(d)
    }

    fn grid_for(&self, problem: &Problem, body: &RigidBodyState) -> Result<MappedGrid> {
        if problem.static_grid() {
            Ok(self.grid.clone())
        } else {
            problem.grid_for(body)
        }
    }

    /// Advances one step of size `self.dt`.
    pub fn step(&mut self, problem: &Problem, cfg: &SimulationConfig) -> Result<()> {
        self.refresh_damping(cfg)?;
        let sp = &cfg.scheme;
        let (dt, dt_prev) = (self.dt, self.dt_prev);
        let t1 = self.fields.t + dt;
        let bdata = problem.boundary_data(t1)?;
        let q_e = predict_and_extrapolate_variable(&self.body, &self.body_prev, dt, dt_prev);
        let g_e = self.grid_for(problem, &q_e)?;
        let r = dt / dt_prev;
        let f_star = [0, 1].map(|c| {
            let (fa, fb) = (&self.fields.f_n[c], &self.fields.f_nm1[c]);
            fa.iter().zip(fb).map(|(a, b)| a + r * (a - b)).collect::<Vec<_>>()
        });
        let mut vel = advance_velocity(&mut self.cache, &self.grid, &self.fields, &g_e, &f_star, Some(&q_e), sp, dt)?;
        let d_e = self.damping_for(&q_e)?;
        let cp = BodyCoupling { body: &q_e, damping: d_e.planar(), accel_guess: q_e.planar_accel(), external: [0.0; 3] };
        let sol = pressure_body_solve(&mut self.cache, &g_e, &vel[0], &vel[1], Some(&cp), sp, dt, &bdata)?;
        let (a, b) = planar_vec(sol.accel);
        let mut q = correct_with_acceleration(&a, &b, &self.body, dt);
        let mut grid = self.grid_for(problem, &q)?;
        let mut pres = sol.p;
        let mut d_q = d_e;
        for _ in 0..sp.n_corrections {
            let f_p = advection_pressure_term(&grid, &vel[0], &vel[1], &pres, sp.rho);
            vel = advance_velocity(&mut self.cache, &self.grid, &self.fields, &grid, &f_p, Some(&q), sp, dt)?;
            d_q = self.damping_for(&q)?;
            let cp = BodyCoupling { body: &q, damping: d_q.planar(), accel_guess: q.planar_accel(), external: [0.0; 3] };
            let sol = pressure_body_solve(&mut self.cache, &grid, &vel[0], &vel[1], Some(&cp), sp, dt, &bdata)?;
            let (a, b) = planar_vec(sol.accel);
            q = correct_with_acceleration(&a, &b, &self.body, dt);
            grid = self.grid_for(problem, &q)?;
            pres = sol.p;
        }
        if sp.velocity_correction {
            let f1 = advection_pressure_term(&grid, &vel[0], &vel[1], &pres, sp.rho);
            vel = advance_velocity(&mut self.cache, &self.grid, &self.fields, &grid, &f1, Some(&q), sp, dt)?;
        }
        let [u, v] = vel;
        let f_new = advection_pressure_term(&grid, &u, &v, &pres, sp.rho);
        let f_old = std::mem::replace(&mut self.fields.f_n, f_new);
        self.fields.f_nm1 = f_old;
        self.fields.u = u;
        self.fields.v = v;
        self.fields.p = pres;
        self.fields.t = t1;
        self.divergence = max_divergence(&grid, &self.fields.u, &self.fields.v);
        self.grid = grid;
        self.body_prev = std::mem::replace(&mut self.body, q);
        self.d = d_q;
        self.dt_prev = dt;
        self.step += 1;
        Ok(())
    }

    /// Whether the state has blown up relative to the velocity scale.
    pub fn is_unstable(&self, problem: &Problem, factor: f64) -> bool {
        if !self.fields.is_finite() {
            return true;
        }
        let lim = factor * problem.velocity_scale();
        let l = problem.length_scale();
        let b = &self.body;
        let body_vals = [b.v.norm(), b.a.norm(), b.omega.z.abs() * l, b.b.z.abs() * l];
        if body_vals.iter().any(|x| !x.is_finite() || *x > lim) {
            return true;
        }
        self.fields.max_speed(&self.grid) > lim
    }
}

/// Previous body level from a backward Taylor step of size `dt`.
fn backward_taylor(b: &RigidBodyState, dt: f64) -> RigidBodyState {
    let mut q = b.clone();
    q.x = b.x - dt * b.v + 0.5 * dt * dt * b.a;
    q.v = b.v - dt * b.a;
    q.omega = b.omega - dt * b.b;
    q.theta = b.theta - dt * b.omega.z + 0.5 * dt * dt * b.b.z;
    q.axes = crate::linalg::rot_z(q.theta);
    q.apply_constraints();
    q
}

/// Step size from the advective limit `cfl * min h / |v - w|`, capped by
/// `dt_max` and limited to a 5% change from `dt_prev`.
pub fn compute_dt(grid: &MappedGrid, fields: &FieldState, cfl: f64, dt_max: f64, dt_prev: f64) -> f64 {
    let mut target = dt_max;
    for (i, j) in grid.nodes() {
        let k = grid.idx(i, j);
        let w = grid.grid_velocity(k);
        let s = (fields.u[k] - w[0]).hypot(fields.v[k] - w[1]);
        if s > 0.0 {
            target = target.min(cfl * grid.spacing(k) / s);
        }
    }
    target_with_growth_limit(target, dt_prev)
}

pub(crate) fn target_with_growth_limit(target: f64, dt_prev: f64) -> f64 {
    if !(dt_prev > 0.0) {
        return target;
    }
    target.clamp(0.95 * dt_prev, 1.05 * dt_prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_limit() {
        assert!((target_with_growth_limit(0.05, 0.01) - 0.0105).abs() < 1e-15);
        assert_eq!(target_with_growth_limit(0.05, 0.05), 0.05);
        assert!((target_with_growth_limit(0.001, 0.01) - 0.0095).abs() < 1e-15);
    }
}
