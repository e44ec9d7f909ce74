//! Text reports for the `tensors`, `converge` and `compare` commands.

use std::fmt::Write as _;

use nalgebra::Matrix3;

use crate::added_damping::{approx_tensors_uniform, AddedDampingTensor, ShapeSpec};
use crate::amp_stepper::{run, ErrorSummary, ProblemSpec, RunSummary, SimulationConfig};
use crate::error::{Error, Result};
use crate::fluid_solver::SchemeMode;
use crate::verification::{least_squares_rate, resample, richardson_rate};

fn write_matrix(s: &mut String, name: &str, m: &Matrix3<f64>) {
    let _ = writeln!(s, "  {name}:");
    for r in 0..3 {
        let _ = writeln!(s, "    [{:>12.6} {:>12.6} {:>12.6}]", m[(r, 0)], m[(r, 1)], m[(r, 2)]);
    }
}

fn write_tensor(s: &mut String, title: &str, d: &AddedDampingTensor) {
    let _ = writeln!(s, "{title}");
    write_matrix(s, "D_vv", &d.vv());
    write_matrix(s, "D_vw", &d.vw());
    write_matrix(s, "D_wv", &d.wv());
    write_matrix(s, "D_ww", &d.ww());
}

/// Closed-form and surface-quadrature tensors for a shape, in units of
/// `mu / dn`, with the eigenvalues of the symmetric part.
pub fn tensor_report(shape: &ShapeSpec, samples: usize) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "shape: {shape:?}");
    let _ = writeln!(s, "units: mu/dn");
    let centre = shape.centroid();
    let quad = approx_tensors_uniform(&shape.sample(samples)?, &centre, 1.0, 1.0)?;
    let analytic = match shape.analytic_tensor(1.0, 1.0) {
        Ok(a) => {
            write_tensor(&mut s, "analytic", &a);
            Some(a)
        }
        Err(_) => {
            let _ = writeln!(s, "analytic: none for this shape");
            None
        }
    };
    write_tensor(&mut s, &format!("quadrature ({} points)", samples), &quad);
    if let Some(a) = &analytic {
        let diff = (a.composite - quad.composite).abs().max();
        let _ = writeln!(s, "max |analytic - quadrature|: {diff:.3e}");
    }
    let d = analytic.as_ref().unwrap_or(&quad);
    let sym = if shape.is_planar() {
        let p = d.planar();
        let e = (0.5 * (p + p.transpose())).symmetric_eigenvalues();
        e.iter().copied().collect::<Vec<_>>()
    } else {
        let e = (0.5 * (d.composite + d.composite.transpose())).symmetric_eigenvalues();
        e.iter().copied().collect()
    };
    let mut sym = sym;
    sym.sort_by(f64::total_cmp);
    let list: Vec<String> = sym.iter().map(|e| format!("{e:.6}")).collect();
    let _ = writeln!(s, "eigenvalues (symmetric part): {}", list.join(" "));
    let spd = sym.first().is_some_and(|&e| e > 0.0);
    let _ = writeln!(s, "positive definite: {}", if spd { "yes" } else { "no" });
    let _ = writeln!(s, "relative asymmetry: {:.3e}", d.asymmetry());
    Ok(s)
}

/// One level of a convergence study.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub j: usize,
    pub dt: f64,
    pub summary: RunSummary,
}

/// Errors at the final time over a sequence of grids.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub problem: &'static str,
    pub levels: Vec<LevelResult>,
}

/// Error quantities reported for each problem.
pub fn quantities(problem: &ProblemSpec) -> &'static [&'static str] {
    match problem {
        ProblemSpec::Piston(_) => &["v", "p", "x_b", "v_b", "a_b"],
        ProblemSpec::Disk(_) => &["v", "p", "omega_b", "theta_b", "bdot_b"],
    }
}

/// Picks the named error out of a summary.
pub fn error_value(e: &ErrorSummary, name: &str) -> f64 {
    match name {
        "v" => e.velocity,
        "p" => e.pressure,
        "x_b" => e.body.x_b,
        "v_b" => e.body.v_b,
        "a_b" => e.body.a_b,
        "theta_b" => e.body.theta,
        "omega_b" => e.body.omega,
        "bdot_b" => e.body.bdot,
        _ => f64::NAN,
    }
}

/// Configuration of level `j`; the time step scales like the grid spacing.
pub fn level_config(base: &SimulationConfig, j: usize) -> SimulationConfig {
    let mut c = base.clone();
    c.resolution = j;
    c.time.dt = base.time.dt * base.resolution as f64 / j as f64;
    c
}

/// Runs every level on its own thread.
pub fn converge(base: &SimulationConfig, levels: &[usize]) -> Result<ConvergenceStudy> {
    if levels.len() < 2 || levels.contains(&0) {
        return Err(Error::Parameter("a convergence study needs at least two positive levels".into()));
    }
    let results: Vec<Result<LevelResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&j| {
                let cfg = level_config(base, j);
                scope.spawn(move || run(&cfg).map(|summary| LevelResult { j, dt: cfg.time.dt, summary }))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy { problem: base.problem.name(), levels })
}

impl ConvergenceStudy {
    /// Least-squares rate of the final-time error of `name`, or `None` when
    /// a level is unstable or an error vanishes.
    pub fn rate(&self, name: &str) -> Option<f64> {
        if self.levels.iter().any(|l| !l.summary.stable()) {
            return None;
        }
        let h: Vec<f64> = self.levels.iter().map(|l| 1.0 / l.j as f64).collect();
        let e: Vec<f64> = self.levels.iter().map(|l| error_value(&l.summary.final_errors, name)).collect();
        least_squares_rate(&h, &e).ok()
    }

    /// Self-convergence rate of a body history from the first three levels
    /// when they refine by two.
    pub fn richardson(&self, name: &str) -> Option<f64> {
        let [a, b, c] = self.levels.get(..3)? else { return None };
        if b.j != 2 * a.j || c.j != 2 * b.j {
            return None;
        }
        let t_end = a.summary.final_time.min(b.summary.final_time).min(c.summary.final_time);
        let at: Vec<f64> = (0..=100).map(|k| t_end * k as f64 / 100.0).collect();
        let series = |l: &LevelResult| {
            let t: Vec<f64> = l.summary.history.iter().map(|r| r.t).collect();
            let v: Vec<f64> = l
                .summary
                .history
                .iter()
                .map(|r| match name {
                    "x_b" => r.x_b[0],
                    "v_b" => r.v_b[0],
                    "theta_b" => r.theta,
                    "omega_b" => r.omega,
                    _ => f64::NAN,
                })
                .collect();
            resample(&t, &v, &at)
        };
        richardson_rate(&series(a), &series(b), &series(c)).ok().filter(|r| r.is_finite())
    }

    pub fn render(&self, quantities: &[&str]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem: {}", self.problem);
        let _ = write!(s, "{:>4} {:>10}", "j", "dt");
        for q in quantities {
            let _ = write!(s, " {q:>11}");
        }
        let _ = writeln!(s, " {:>7}", "stable");
        for l in &self.levels {
            let _ = write!(s, "{:>4} {:>10.3e}", l.j, l.dt);
            for q in quantities {
                let _ = write!(s, " {:>11.3e}", error_value(&l.summary.final_errors, q));
            }
            let _ = writeln!(s, " {:>7}", if l.summary.stable() { "yes" } else { "no" });
        }
        let fmt = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.2}"));
        let _ = write!(s, "{:>15}", "rate (LS)");
        for q in quantities {
            let _ = write!(s, " {:>11}", fmt(self.rate(q)));
        }
        s.push('\n');
        let tracked = ["x_b", "v_b", "theta_b", "omega_b"];
        let mut rich = Vec::new();
        for q in quantities.iter().filter(|q| tracked.contains(q)) {
            if let Some(r) = self.richardson(q) {
                rich.push(format!("{q} {r:.2}"));
            }
        }
        if !rich.is_empty() {
            let _ = writeln!(s, "self-convergence rate: {}", rich.join(", "));
        }
        s
    }
}

/// AMP and TP runs at identical parameters.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub amp: RunSummary,
    pub tp: RunSummary,
}

pub fn compare(base: &SimulationConfig) -> Result<Comparison> {
    let mut amp = base.clone();
    amp.scheme.mode = SchemeMode::Amp;
    let mut tp = base.clone();
    tp.scheme.mode = SchemeMode::Tp;
    tp.scheme.tp_subiterations = 0;
    let (a, t) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| run(&amp));
        let ht = scope.spawn(|| run(&tp));
        (ha.join().expect("run thread panicked"), ht.join().expect("run thread panicked"))
    });
    Ok(Comparison { amp: a?, tp: t? })
}

fn verdict(r: &RunSummary) -> String {
    match r.unstable_at {
        None => "stable".into(),
        Some(t) => format!("unstable (t = {t:.4})"),
    }
}

impl Comparison {
    pub fn render(&self) -> String {
        format!("AMP: {}\nTP: {}\n", verdict(&self.amp), verdict(&self.tp))
    }
}
