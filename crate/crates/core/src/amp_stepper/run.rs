//! Driver loop, time histories and error bookkeeping.

use super::{compute_dt, Problem, SimulationConfig, SimulationState};
use crate::error::{Error, Result};
use crate::grid::FieldState;

/// Absolute errors of the body state against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyErrors {
    pub x_b: f64,
    pub v_b: f64,
    pub a_b: f64,
    pub theta: f64,
    pub omega: f64,
    pub bdot: f64,
}

impl BodyErrors {
    fn max(self, o: BodyErrors) -> BodyErrors {
        BodyErrors {
            x_b: self.x_b.max(o.x_b),
            v_b: self.v_b.max(o.v_b),
            a_b: self.a_b.max(o.a_b),
            theta: self.theta.max(o.theta),
            omega: self.omega.max(o.omega),
            bdot: self.bdot.max(o.bdot),
        }
    }
}

/// Body and field errors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorSummary {
    pub body: BodyErrors,
    /// Max-norm velocity error over depth-zero nodes.
    pub velocity: f64,
    /// Max-norm pressure error over depth-zero nodes.
    pub pressure: f64,
}

/// One row of the time history.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub t: f64,
    pub x_b: [f64; 2],
    pub theta: f64,
    pub v_b: [f64; 2],
    pub omega: f64,
    pub a_b: [f64; 2],
    pub bdot: f64,
    pub dt: f64,
    pub unstable: bool,
    pub errors: BodyErrors,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub history: Vec<HistoryRow>,
    /// Time of the first step flagged unstable.
    pub unstable_at: Option<f64>,
    /// Errors maximised over all recorded levels.
    pub max_errors: ErrorSummary,
    /// Errors at the final level.
    pub final_errors: ErrorSummary,
    pub steps: usize,
    pub factorizations: usize,
    pub max_divergence: f64,
    /// Field snapshots `(t, fields, grid)` when requested.
    pub snapshots: Vec<(f64, FieldState, crate::grid::MappedGrid)>,
    pub final_time: f64,
}

impl RunSummary {
    pub fn stable(&self) -> bool {
        self.unstable_at.is_none()
    }
}

fn measure(problem: &Problem, st: &SimulationState) -> Result<ErrorSummary> {
    let t = st.time();
    let e = problem.exact_body(t)?;
    let b = &st.body;
    let body = BodyErrors {
        x_b: (b.x.x - e.q[0]).hypot(b.x.y - e.q[1]),
        v_b: (b.v.x - e.v[0]).hypot(b.v.y - e.v[1]),
        a_b: (b.a.x - e.a[0]).hypot(b.a.y - e.a[1]),
        theta: (b.theta - e.q[2]).abs(),
        omega: (b.omega.z - e.v[2]).abs(),
        bdot: (b.b.z - e.a[2]).abs(),
    };
    let g = &st.grid;
    let ex = problem.exact_fields(g, t)?;
    let (mut shift_num, mut shift_ex) = (0.0, 0.0);
    if problem.pressure_pinned() {
        let k = crate::fluid_solver::layout::pin_node(g);
        shift_num = st.fields.p[k];
        shift_ex = ex[2][k];
    }
    let mut velocity = 0.0_f64;
    let mut pressure = 0.0_f64;
    for (i, j) in g.nodes() {
        let k = g.idx(i, j);
        velocity = velocity.max((st.fields.u[k] - ex[0][k]).abs()).max((st.fields.v[k] - ex[1][k]).abs());
        pressure = pressure.max(((st.fields.p[k] - shift_num) - (ex[2][k] - shift_ex)).abs());
    }
    Ok(ErrorSummary { body, velocity, pressure })
}

fn row(st: &SimulationState, errors: BodyErrors, unstable: bool) -> HistoryRow {
    let b = &st.body;
    HistoryRow {
        t: st.time(),
        x_b: [b.x.x, b.x.y],
        theta: b.theta,
        v_b: [b.v.x, b.v.y],
        omega: b.omega.z,
        a_b: [b.a.x, b.a.y],
        bdot: b.b.z,
        dt: st.dt_prev,
        unstable,
        errors,
    }
}

fn max_summary(a: ErrorSummary, b: ErrorSummary) -> ErrorSummary {
    ErrorSummary { body: a.body.max(b.body), velocity: a.velocity.max(b.velocity), pressure: a.pressure.max(b.pressure) }
}

/// Errors that indicate a blown-up computation rather than a defect.
fn is_blowup(e: &Error) -> bool {
    matches!(e, Error::Geometry(_) | Error::NonFinite(_))
}

/// Runs a simulation to `t_final`, recording the body history and errors
/// against the exact solution at every level.
pub fn run(cfg: &SimulationConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let problem = Problem::new(cfg.problem.clone(), cfg.resolution, cfg.stretch)?;
    let mut st = SimulationState::initialize(&problem, cfg)?;
    let e0 = measure(&problem, &st)?;
    let mut summary = RunSummary {
        history: vec![row(&st, e0.body, false)],
        unstable_at: None,
        max_errors: e0,
        final_errors: e0,
        steps: 0,
        factorizations: 0,
        max_divergence: st.divergence,
        snapshots: Vec::new(),
        final_time: 0.0,
    };
    if cfg.snapshot_every > 0 {
        summary.snapshots.push((0.0, st.fields.clone(), st.grid.clone()));
    }
    let t_final = cfg.time.t_final;
    let eps = 1e-10 * cfg.time.dt;
    while st.time() < t_final - eps {
        let mut dt = if cfg.time.adaptive && st.step > 0 {
            compute_dt(&st.grid, &st.fields, cfg.time.cfl, cfg.time.dt_max, st.dt_prev)
        } else {
            st.dt
        };
        let remaining = t_final - st.time();
        if remaining < dt * (1.0 + 1e-9) {
            dt = remaining;
        } else if remaining < 2.0 * dt && cfg.time.adaptive {
            dt = 0.5 * remaining;
        }
        st.dt = dt;
        let t_attempt = st.time() + dt;
        let (blew_up, can_continue) = match st.step(&problem, cfg) {
            Ok(()) => (st.is_unstable(&problem, cfg.instability_factor), st.fields.is_finite()),
            Err(e) if is_blowup(&e) => (true, false),
            Err(e) => return Err(e),
        };
        if blew_up {
            summary.unstable_at.get_or_insert(t_attempt);
            if let Some(last) = summary.history.last() {
                let mut r = last.clone();
                r.unstable = true;
                r.t = t_attempt;
                summary.history.push(r);
            }
            if cfg.abort_on_instability || !can_continue {
                break;
            }
            continue;
        }
        let e = measure(&problem, &st)?;
        summary.max_errors = max_summary(summary.max_errors, e);
        summary.final_errors = e;
        summary.max_divergence = summary.max_divergence.max(st.divergence);
        summary.history.push(row(&st, e.body, false));
        if cfg.snapshot_every > 0 && st.step % cfg.snapshot_every == 0 {
            summary.snapshots.push((st.time(), st.fields.clone(), st.grid.clone()));
        }
    }
    summary.steps = st.step;
    summary.factorizations = st.cache.factorizations;
    summary.final_time = st.time();
    Ok(summary)
}
