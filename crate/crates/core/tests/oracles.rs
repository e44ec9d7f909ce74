//! Checks against independent references: tabulated high-precision
//! values, a second special-function library, and small standalone
//! solvers written here rather than shared with the crate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use amprb::linalg::rot_z;
use amprb::rigid_body::{correct_with_acceleration, predict_and_extrapolate, rotation_matrix, RigidBodyState};
use amprb::verification::bessel::{j0, j1, y0, y1};
use amprb::verification::quadrature::integrate;
use amprb::verification::{piston_exact, DiskParams, PistonParams, RotatingDiskSolution};

/// 20-digit values `(x, J0, J1, Y0, Y1)` computed with mpmath.
const BESSEL_TABLE: [(f64, f64, f64, f64, f64); 10] = [
    (0.5, 0.93846980724081290423, 0.24226845767487388638, -0.44451873350670655715, -1.4714723926702430692),
    (1.0, 0.76519768655796655145, 0.44005058574493351596, 0.088256964215676957983, -0.78121282130028871655),
    (2.5, -0.048383776468197996327, 0.49709410246427403801, 0.49807035961523188783, 0.14591813796678579888),
    (7.3, 0.28821694763501438437, 0.08257043049325788024, 0.062773886374037648286, -0.28459437186807209037),
    (15.0, -0.014224472826780773234, 0.20510403861352276115, 0.20546429603891826479, 0.02107362803687351194),
    (19.9, 0.17287775639261839113, 0.050117424807379983018, 0.045762094159385722832, -0.17178303121049248727),
    (20.0, 0.16702466434058315473, 0.066833124175850045579, 0.062640596809383831162, -0.16551161436252129586),
    (25.0, 0.096266783275958116174, -0.12535024958028990465, -0.12724943226800613783, -0.098829964783237410053),
    (40.0, 0.0073668905842372895535, 0.12603831803758499921, 0.12593641705826092925, -0.0057935058215496329412),
    (0.001, 0.999999750000015625, 0.00049999993750000260417, -4.471416611375923269, -636.62216723113942807),
];

#[test]
fn bessel_matches_high_precision_table() {
    for &(x, rj0, rj1, ry0, ry1) in &BESSEL_TABLE {
        for (name, got, want) in [("J0", j0(x), rj0), ("J1", j1(x), rj1), ("Y0", y0(x), ry0), ("Y1", y1(x), ry1)] {
            let err = (got - want).abs() / want.abs().max(1e-3);
            assert!(err < 1e-13, "{name}({x}) = {got:e}, want {want:e}, rel err {err:e}");
        }
    }
}

#[test]
fn bessel_agrees_with_libm() {
    for k in 1..=600 {
        let x = 0.1 * k as f64;
        for (got, want) in [(j0(x), libm::j0(x)), (j1(x), libm::j1(x)), (y0(x), libm::y0(x)), (y1(x), libm::y1(x))] {
            assert!((got - want).abs() < 5e-14 * want.abs().max(1.0), "x = {x}: {got:e} vs {want:e}");
        }
    }
}

#[test]
fn bessel_wronskian() {
    for k in 1..=400 {
        let x = 0.15 * k as f64;
        let w = j1(x) * y0(x) - j0(x) * y1(x);
        let exact = 2.0 / (PI * x);
        assert!((w - exact).abs() < 1e-14 * exact.max(1.0), "x = {x}: {w:e} vs {exact:e}");
    }
}

/// Crank-Nicolson on the radial equation `v_t = nu (v_rr + v_r/r - v/r^2)`
/// with `v(r2) = 0`, `v(r1) = r1 omega` and
/// `I omega' = 2 pi r1^2 mu (v_r - v/r)(r1)`, started from the exact
/// profile. Returns `omega(t_end) / omega(0)`.
fn radial_decay(p: &DiskParams, profile: impl Fn(f64) -> f64, n: usize, steps: usize, t_end: f64) -> f64 {
    let h = (p.r2 - p.r1) / n as f64;
    let nu = p.nu();
    let inertia = p.moment_of_inertia();
    // unknowns: v_1 .. v_{n-1}, omega
    let m = n;
    let r = |i: usize| p.r1 + h * i as f64;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut mass = DMatrix::<f64>::zeros(m, m);
    let col = |i: usize| -> Option<(usize, f64)> {
        if i == 0 {
            Some((m - 1, p.r1))
        } else if i == n {
            None
        } else {
            Some((i - 1, 1.0))
        }
    };
    for i in 1..n {
        let ri = r(i);
        let row = i - 1;
        mass[(row, row)] = 1.0;
        let cm = nu * (1.0 / (h * h) - 1.0 / (2.0 * h * ri));
        let c0 = nu * (-2.0 / (h * h) - 1.0 / (ri * ri));
        let cp = nu * (1.0 / (h * h) + 1.0 / (2.0 * h * ri));
        for (k, c) in [(i - 1, cm), (i, c0), (i + 1, cp)] {
            if let Some((j, s)) = col(k) {
                a[(row, j)] += c * s;
            }
        }
    }
    mass[(m - 1, m - 1)] = inertia;
    let s = 2.0 * PI * p.r1 * p.r1 * p.mu;
    for (k, c) in [(0, -3.0 / (2.0 * h) - 1.0 / p.r1), (1, 4.0 / (2.0 * h)), (2, -1.0 / (2.0 * h))] {
        if let Some((j, sc)) = col(k) {
            a[(m - 1, j)] += s * c * sc;
        }
    }
    let dt = t_end / steps as f64;
    let lhs = (&mass - &a * (0.5 * dt)).lu();
    let rhs_op = &mass + &a * (0.5 * dt);
    let mut u = DVector::<f64>::zeros(m);
    for i in 1..n {
        u[i - 1] = profile(r(i));
    }
    u[m - 1] = profile(p.r1) / p.r1;
    let w0 = u[m - 1];
    for _ in 0..steps {
        u = lhs.solve(&(&rhs_op * &u)).expect("nonsingular");
    }
    u[m - 1] / w0
}

#[test]
fn disk_decay_matches_radial_solver() {
    for rho_b in [10.0, 1.0, 0.0] {
        let p = DiskParams { rho_b, ..Default::default() };
        let sol = RotatingDiskSolution::new(p).unwrap();
        let ratio = radial_decay(&p, |r| sol.profile(r), 400, 400, 1.0);
        let exact = sol.omega(1.0) / sol.omega(0.0);
        assert!((ratio - exact).abs() < 2e-5, "rho_b = {rho_b}: {ratio} vs {exact}");
    }
}

#[test]
fn disk_pressure_balances_centripetal_acceleration() {
    let sol = RotatingDiskSolution::new(DiskParams::default()).unwrap();
    for r in [1.1, 1.4, 1.9] {
        let h = 1e-4;
        let dp = (sol.pressure(r + h, 0.3).unwrap() - sol.pressure(r - h, 0.3).unwrap()) / (2.0 * h);
        let v = sol.v_theta(r, 0.3);
        assert!((dp - v * v / r).abs() < 1e-8);
    }
}

#[test]
fn piston_velocity_integrates_applied_pressure() {
    let p = PistonParams { body_mass: 0.7, ..Default::default() };
    let t_end = 0.63;
    let accel = |t: f64| {
        let e = piston_exact(&p, t).unwrap();
        -p.height * e.p_end / (p.body_mass + e.added_mass)
    };
    let dv = integrate(accel, 0.0, t_end, 1e-12).unwrap();
    let e0 = piston_exact(&p, 0.0).unwrap();
    let e1 = piston_exact(&p, t_end).unwrap();
    assert!((e0.v_b + dv - e1.v_b).abs() < 1e-10);
    // fluid momentum: p_x = -rho a_b; body: m_b a_b = -H p(x_I)
    let (xa, xb) = (e1.x_interface + 0.1, p.length - 0.1);
    let slope = (e1.pressure(&p, xb) - e1.pressure(&p, xa)) / (xb - xa);
    assert!((slope + p.rho * e1.a_b).abs() < 1e-12 * e1.a_b.abs().max(1.0));
    let p_i = e1.pressure(&p, e1.x_interface);
    assert!((p.body_mass * e1.a_b + p.height * p_i).abs() < 1e-12 * e1.a_b.abs().max(1.0));
}

#[test]
fn rotation_matrix_examples() {
    let e0 = rot_z(0.3);
    assert!((rotation_matrix(&e0, &e0).unwrap() - Matrix3::identity()).norm() < 1e-15);
    let r = rotation_matrix(&rot_z(PI / 2.0), &Matrix3::identity()).unwrap();
    let want = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    assert!((r - want).norm() < 1e-15);
    assert!(rotation_matrix(&(2.0 * e0), &e0).is_err());
}

fn body_on_path(t: f64) -> RigidBodyState {
    let mut b = RigidBodyState::planar(1.0, 1.0, t.sin(), 0.0);
    b.v = Vector3::new(t.cos(), 0.0, 0.0);
    b.a = Vector3::new(-t.sin(), 0.0, 0.0);
    b.omega = Vector3::new(0.0, 0.0, 1.0);
    b.theta = t;
    b.axes = rot_z(t);
    b
}

#[test]
fn surface_point_acceleration_matches_finite_differences() {
    let axes0 = Matrix3::identity();
    let x0 = Vector3::zeros();
    let r0 = Vector3::new(0.4, -0.3, 0.0);
    let pos = |t: f64| body_on_path(t).track_surface_point(&axes0, &r0, &x0).unwrap().position;
    let (t, h) = (0.7, 1e-4);
    let k = body_on_path(t).track_surface_point(&axes0, &r0, &x0).unwrap();
    let vel = (pos(t + h) - pos(t - h)) / (2.0 * h);
    let acc = (pos(t + h) - 2.0 * pos(t) + pos(t - h)) / (h * h);
    assert!((vel - k.velocity).norm() < 1e-8);
    assert!((acc - k.acceleration).norm() < 1e-6);
}

#[test]
fn predictor_error_is_third_order() {
    let err = |dt: f64| {
        let state = |t: f64| {
            let mut b = RigidBodyState::planar(1.0, 1.0, t.sin(), 0.0);
            b.v = Vector3::new(t.cos(), 0.0, 0.0);
            b.a = Vector3::new(-t.sin(), 0.0, 0.0);
            b
        };
        let q = predict_and_extrapolate(&state(0.1 + dt), &state(0.1), dt);
        (q.x.x - (0.1 + 2.0 * dt).sin()).abs()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((ratio - 8.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn corrector_is_exact_for_constant_acceleration() {
    let mut b = RigidBodyState::planar(1.0, 1.0, 0.5, 0.0);
    b.v = Vector3::new(0.3, 0.0, 0.0);
    b.a = Vector3::new(2.0, 0.0, 0.0);
    let dt = 0.37;
    let q = correct_with_acceleration(&b.a.clone(), &Vector3::zeros(), &b, dt);
    assert!((q.v.x - (0.3 + 2.0 * dt)).abs() < 1e-15);
    assert!((q.x.x - (0.5 + 0.3 * dt + dt * dt)).abs() < 1e-15);
}

#[test]
fn corrector_error_is_third_order_per_step() {
    let err = |dt: f64| {
        let mut b = RigidBodyState::planar(1.0, 1.0, 0.0, 0.0);
        b.free.y = false;
        b.free.theta = false;
        b.v = Vector3::new(0.0, 0.0, 0.0);
        b.a = Vector3::new(1.0, 0.0, 0.0);
        let q = correct_with_acceleration(&Vector3::new(dt.cos(), 0.0, 0.0), &Vector3::zeros(), &b, dt);
        // a = cos t from rest: v = sin t
        (q.v.x - dt.sin()).abs()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((ratio - 8.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn schur_and_bordered_pressure_solves_agree() {
    use amprb::amp_stepper::{run, ProblemSpec, SimulationConfig};
    use amprb::fluid_solver::PressureMethod;

    for rho_b in [0.0, 1.0] {
        let mut cfg = SimulationConfig::new(ProblemSpec::Disk(DiskParams { rho_b, ..Default::default() }), 1);
        cfg.time.t_final = 0.3;
        let a = run(&cfg).unwrap();
        cfg.scheme.pressure_method = PressureMethod::Bordered;
        let b = run(&cfg).unwrap();
        assert_eq!(a.history.len(), b.history.len());
        for (ra, rb) in a.history.iter().zip(&b.history) {
            assert!((ra.omega - rb.omega).abs() < 1e-10, "rho_b = {rho_b}: {} vs {}", ra.omega, rb.omega);
            assert!((ra.bdot - rb.bdot).abs() < 1e-8);
        }
    }
}
