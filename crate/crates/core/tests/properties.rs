use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

use amprb::added_damping::{approx_tensors_uniform, length_scale, rotate_tensor, AddedDampingTensor, Provenance, ShapeSpec};
use amprb::amp_stepper::{BodyErrors, HistoryRow};
use amprb::cli_io::{history_csv, parse_config, render_config, ERROR_COLUMNS, HISTORY_COLUMNS};
use amprb::fluid_solver::ops::{divergence, gradient, laplacian};
use amprb::grid::{build_grid, GridProblem};
use amprb::linalg::rot_z;
use amprb::rigid_body::RigidBodyState;
use amprb::verification::least_squares_rate;

fn sorted_eigs(m: &Matrix3<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = (0.5 * (m + m.transpose())).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn random_tensor(vals: &[f64]) -> AddedDampingTensor {
    let block = |o: usize| Matrix3::from_iterator(vals[o..o + 9].iter().copied());
    let vv = block(0);
    let ww = block(9);
    let vw = block(18);
    // D_wv = D_vw^T keeps the composite symmetric
    AddedDampingTensor::from_blocks(vv + vv.transpose(), vw, vw.transpose(), ww + ww.transpose(), Provenance::Quadrature)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn config_round_trips(
        disk in any::<bool>(),
        res in 1usize..12,
        t_final in 0.0f64..5.0,
        rho in 0.1f64..10.0,
        mu in 0.001f64..1.0,
        mass in 0.0f64..20.0,
        beta_d in 0.0f64..3.0,
        alpha in 0.05f64..1.0,
        dt in 1e-4f64..0.5,
        vc in any::<bool>(),
        tp in any::<bool>(),
    ) {
        let body = if disk { format!("rho_b = {mass:?}") } else { format!("mass = {mass:?}") };
        let text = format!(
            "problem = \"{}\"\nresolution = {res}\nt_final = {t_final:?}\n[fluid]\nrho = {rho:?}\nmu = {mu:?}\n[body]\n{body}\n\
             [scheme]\nmode = \"{}\"\nbeta_d = {beta_d:?}\nalpha = {alpha:?}\nvelocity_correction = {vc}\n[time]\ndt = {dt:?}\n",
            if disk { "rotating_disk" } else { "piston" },
            if tp { "tp" } else { "amp" },
        );
        let a = parse_config(&text).unwrap();
        let b = parse_config(&render_config(&a)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.sim.resolution, res);
        prop_assert_eq!(a.sim.time.dt, dt);
        prop_assert_eq!(a.sim.scheme.beta_d, beta_d);
    }

    #[test]
    fn planar_rotations_are_proper(theta in -10.0f64..10.0) {
        let r = rot_z(theta);
        prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-14);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotated_tensor_keeps_symmetry_and_spectrum(
        vals in prop::collection::vec(-1.0f64..1.0, 27),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.0f64..3.0,
    ) {
        let d = random_tensor(&vals);
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 1e-3);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner();
        let dr = rotate_tensor(&d, &r).unwrap();
        prop_assert!(dr.asymmetry() < 1e-12);
        let (e0, e1) = (sorted_eigs(&d.vv()), sorted_eigs(&dr.vv()));
        for (a, b) in e0.iter().zip(&e1) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let (e0, e1) = (sorted_eigs(&d.ww()), sorted_eigs(&dr.ww()));
        for (a, b) in e0.iter().zip(&e1) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convex_polygon_tensors_are_symmetric_psd(
        mut angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3..9),
        radius in prop::collection::vec(0.5f64..2.0, 1),
    ) {
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        prop_assume!(angles.len() >= 3);
        prop_assume!(angles.first().unwrap() + std::f64::consts::TAU - angles.last().unwrap() > 0.05);
        let vertices: Vec<[f64; 2]> = angles.iter().map(|t| [radius[0] * t.cos(), radius[0] * t.sin()]).collect();
        let shape = ShapeSpec::Polygon { vertices };
        let d = approx_tensors_uniform(&shape.sample(400).unwrap(), &shape.centroid(), 1.0, 1.0).unwrap();
        prop_assert!(d.asymmetry() < 1e-12);
        let p = d.planar();
        let e = sorted_eigs(&p);
        prop_assert!(e[0] >= -1e-12 * p.norm());
    }

    #[test]
    fn length_scale_is_bounded_and_monotone(
        ds in 1e-4f64..1.0,
        nu in 1e-4f64..1.0,
        dt in 1e-4f64..0.5,
        alpha in 0.01f64..1.0,
        grow in 1.0f64..3.0,
    ) {
        let (dn, delta) = length_scale(ds, nu, dt, alpha).unwrap();
        let ell = (alpha * nu * dt).sqrt();
        prop_assert!((delta - ds / ell).abs() < 1e-12 * delta);
        prop_assert!(dn >= ds.max(ell) * (1.0 - 1e-12));
        prop_assert!(dn <= (ds + ell) * (1.0 + 1e-12));
        let (dn2, _) = length_scale(ds * grow, nu, dt, alpha).unwrap();
        prop_assert!(dn2 >= dn * (1.0 - 1e-12));
    }

    #[test]
    fn channel_operators_are_exact_on_linear_fields(
        j in 1usize..4,
        x_i in -0.3f64..0.5,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in -2.0f64..2.0,
    ) {
        let g = build_grid(&GridProblem::PistonChannel { x_i, x_i_dot: 0.0, length: 1.5, height: 1.0 }, j, None).unwrap();
        let f: Vec<f64> = g.coords().iter().map(|p| a * p[0] + b * p[1] + c).collect();
        let u: Vec<f64> = g.coords().iter().map(|p| c * p[0] + b * p[1]).collect();
        let v: Vec<f64> = g.coords().iter().map(|p| a * p[0] - c * p[1]).collect();
        for (i, jj) in g.nodes() {
            let gr = gradient(&g, &f, i, jj);
            prop_assert!((gr[0] - a).abs() < 1e-11 && (gr[1] - b).abs() < 1e-11);
            prop_assert!(laplacian(&g, &f, i, jj).abs() < 1e-9);
            prop_assert!(divergence(&g, &u, &v, i, jj).abs() < 1e-11);
        }
    }

    #[test]
    fn annulus_operators_preserve_constants(
        j in 1usize..3,
        stretch in prop::option::of(0.5f64..3.0),
        c in -5.0f64..5.0,
        d in -5.0f64..5.0,
    ) {
        let g = build_grid(&GridProblem::Annulus { r1: 1.0, r2: 2.0, center: [0.0, 0.0] }, j, stretch).unwrap();
        let f = vec![c; g.len()];
        let w = vec![d; g.len()];
        for (i, jj) in g.nodes() {
            let gr = gradient(&g, &f, i, jj);
            prop_assert!(gr[0].abs() < 1e-9 && gr[1].abs() < 1e-9);
            prop_assert!(laplacian(&g, &f, i, jj).abs() < 1e-7);
            prop_assert!(divergence(&g, &f, &w, i, jj).abs() < 1e-9);
        }
    }

    #[test]
    fn rate_is_recovered_from_power_laws(
        p in 0.5f64..4.0,
        c in 1e-6f64..1e3,
        levels in prop::collection::btree_set(1usize..64, 2..6),
    ) {
        let h: Vec<f64> = levels.iter().map(|&j| 1.0 / j as f64).collect();
        let e: Vec<f64> = h.iter().map(|h| c * h.powf(p)).collect();
        prop_assert!((least_squares_rate(&h, &e).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn history_rows_have_fixed_width(
        vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 17),
        rows in 0usize..5,
        with_errors in any::<bool>(),
    ) {
        let row = HistoryRow {
            t: vals[0],
            x_b: [vals[1], vals[2]],
            theta: vals[3],
            v_b: [vals[4], vals[5]],
            omega: vals[6],
            a_b: [vals[7], vals[8]],
            bdot: vals[9],
            dt: vals[10],
            unstable: vals[0] > 0.0,
            errors: BodyErrors { x_b: vals[11], v_b: vals[12], a_b: vals[13], theta: vals[14], omega: vals[15], bdot: vals[16] },
        };
        let csv = history_csv(&vec![row; rows], with_errors);
        let width = HISTORY_COLUMNS.len() + if with_errors { ERROR_COLUMNS.len() } else { 0 };
        let lines: Vec<&str> = csv.lines().collect();
        prop_assert_eq!(lines.len(), rows + 1);
        for l in &lines {
            prop_assert_eq!(l.split(',').count(), width);
        }
        for l in &lines[1..] {
            let parsed: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            prop_assert_eq!(parsed[3], vals[3]);
        }
    }

    #[test]
    fn surface_velocity_is_v_plus_omega_cross_r(
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
        vx in -2.0f64..2.0,
        vy in -2.0f64..2.0,
        w in -3.0f64..3.0,
        px in -1.0f64..1.0,
        py in -1.0f64..1.0,
    ) {
        let mut b = RigidBodyState::planar(1.0, 1.0, x, y);
        b.v = Vector3::new(vx, vy, 0.0);
        b.omega = Vector3::new(0.0, 0.0, w);
        let k = b.surface_point_state(&Vector3::new(px, py, 0.0));
        let want = Vector3::new(vx - w * (py - y), vy + w * (px - x), 0.0);
        prop_assert!((k.velocity - want).norm() < 1e-13);
    }
}
