//! Added-damping tensors: the linear response of the viscous surface force
//! and torque to a change in body velocity.
//!
//! Tensors are stored as a 6x6 composite acting on `[v; omega]`. Planar
//! problems use the same 3D kernels with surface points in the `z = 0`
//! plane and unit depth; the out-of-plane rows and columns (`v_z`,
//! `omega_x`, `omega_y`) are then zeroed, so only the `(v_x, v_y, omega_z)`
//! entries survive.

pub mod shapes;
pub mod variational;

pub use shapes::ShapeSpec;
pub use variational::{variational_tensors, VariationalResult};

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::error::{param, Error, Result};
use crate::linalg::skew;

/// Where a tensor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Quadrature,
    Variational,
}

/// Composite added-damping tensor `[[D_vv, D_vw], [D_wv, D_ww]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AddedDampingTensor {
    pub composite: Matrix6<f64>,
    pub provenance: Provenance,
    /// Time at which the tensor was evaluated.
    pub t0: f64,
}

/// Indices of the planar degrees of freedom `(v_x, v_y, omega_z)` in the
/// composite tensor.
pub const PLANAR_DOFS: [usize; 3] = [0, 1, 5];

impl AddedDampingTensor {
    pub fn from_blocks(
        vv: Matrix3<f64>,
        vw: Matrix3<f64>,
        wv: Matrix3<f64>,
        ww: Matrix3<f64>,
        provenance: Provenance,
    ) -> Self {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&vv);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&vw);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&wv);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&ww);
        Self { composite: m, provenance, t0: 0.0 }
    }

    pub fn zero(provenance: Provenance) -> Self {
        Self { composite: Matrix6::zeros(), provenance, t0: 0.0 }
    }

    fn block(&self, r: usize, c: usize) -> Matrix3<f64> {
        self.composite.fixed_view::<3, 3>(r, c).into_owned()
    }

    pub fn vv(&self) -> Matrix3<f64> {
        self.block(0, 0)
    }

    pub fn vw(&self) -> Matrix3<f64> {
        self.block(0, 3)
    }

    pub fn wv(&self) -> Matrix3<f64> {
        self.block(3, 0)
    }

    pub fn ww(&self) -> Matrix3<f64> {
        self.block(3, 3)
    }

    /// The 3x3 restriction to `(v_x, v_y, omega_z)`.
    pub fn planar(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.composite[(PLANAR_DOFS[r], PLANAR_DOFS[c])])
    }

    /// Zeroes the out-of-plane rows and columns.
    pub fn restrict_to_plane(mut self) -> Self {
        for k in [2, 3, 4] {
            self.composite.row_mut(k).fill(0.0);
            self.composite.column_mut(k).fill(0.0);
        }
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.composite *= s;
        self
    }

    /// Largest asymmetry relative to the tensor norm.
    pub fn asymmetry(&self) -> f64 {
        let n = self.composite.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.composite - self.composite.transpose()).norm() / n
    }

    /// Smallest eigenvalue of the symmetric part, relative to the norm.
    pub fn min_relative_eigenvalue(&self) -> f64 {
        let n = self.composite.norm();
        if n == 0.0 {
            return 0.0;
        }
        let s = 0.5 * (self.composite + self.composite.transpose());
        s.symmetric_eigenvalues().min() / n
    }
}

/// One quadrature point on the body surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    /// Unit normal pointing out of the body, into the fluid.
    pub normal: Vector3<f64>,
    /// Surface weight (area, or length times unit depth in planar mode).
    pub weight: f64,
    /// Distance to the first grid line off the surface; zero when the
    /// sample does not come from a grid.
    pub normal_spacing: f64,
}

/// Quadrature sample of a closed body surface.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BodySurfaceSample {
    pub points: Vec<SurfacePoint>,
    pub planar: bool,
}

impl BodySurfaceSample {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return param("empty surface sample");
        }
        for (i, p) in self.points.iter().enumerate() {
            if (p.normal.norm() - 1.0).abs() > 1e-10 {
                return param(format!("surface normal {i} is not a unit vector"));
            }
            if !(p.weight >= 0.0) {
                return param(format!("surface weight {i} is negative"));
            }
        }
        Ok(())
    }

    /// Total surface measure.
    pub fn measure(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// Enclosed volume (area in planar mode) from the divergence theorem.
    pub fn enclosed_volume(&self) -> f64 {
        let dim = if self.planar { 2.0 } else { 3.0 };
        self.points.iter().map(|p| p.position.dot(&p.normal) * p.weight).sum::<f64>() / dim
    }

    /// Per-point length scales from the stored normal spacings.
    pub fn length_scales(&self, nu: f64, dt: f64, alpha: f64) -> Result<Vec<f64>> {
        self.points.iter().map(|p| length_scale(p.normal_spacing, nu, dt, alpha).map(|(dn, _)| dn)).collect()
    }
}

/// Length scale `dn = ds_n / (1 - exp(-delta))` with
/// `delta = ds_n / sqrt(alpha nu dt)`. Returns `(dn, delta)`.
///
/// `dn` tends to `ds_n` when the grid does not resolve the viscous layer
/// and to `sqrt(alpha nu dt)` when it does.
pub fn length_scale(ds_n: f64, nu: f64, dt: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(ds_n > 0.0 && nu > 0.0 && dt > 0.0 && alpha > 0.0 && alpha <= 1.0) {
        return param(format!("length_scale needs ds_n, nu, dt > 0 and 0 < alpha <= 1 (got {ds_n}, {nu}, {dt}, {alpha})"));
    }
    let ell = (alpha * nu * dt).sqrt();
    let delta = ds_n / ell;
    // -expm1(-delta) keeps precision for small delta
    let dn = ds_n / (-(-delta).exp_m1());
    Ok((dn, delta))
}

/// Viscous traction on a rigid surface from the normal derivative of the
/// velocity and the body spin: `mu ((I - n n^T) dv/dn + n x omega)`.
pub fn shear_stress_on_body(dv_dn: &Vector3<f64>, n: &Vector3<f64>, omega_b: &Vector3<f64>, mu: f64) -> Vector3<f64> {
    let tangential = dv_dn - n * n.dot(dv_dn);
    mu * (tangential + n.cross(omega_b))
}

/// Viscous traction of an incompressible fluid from the normal and
/// tangential derivatives of the velocity in the orthonormal frame
/// `(n, t1, t2)`.
pub fn shear_stress_incompressible(
    v_n: &Vector3<f64>,
    v_t: [&Vector3<f64>; 2],
    n: &Vector3<f64>,
    t: [&Vector3<f64>; 2],
    mu: f64,
) -> Result<Vector3<f64>> {
    let frame = [n, t[0], t[1]];
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            if (frame[i].dot(frame[j]) - target).abs() > 1e-10 {
                return param("frame (n, t1, t2) is not orthonormal");
            }
        }
    }
    let mut s = Vector3::zeros();
    for m in 0..2 {
        let tm = t[m];
        s += tm * tm.dot(v_n) + tm * n.dot(v_t[m]) - 2.0 * n * tm.dot(v_t[m]);
    }
    Ok(mu * s)
}

/// Quadrature approximation of the added-damping tensors with per-point
/// length scales `dn`.
pub fn approx_tensors(
    surface: &BodySurfaceSample,
    x_b: &Vector3<f64>,
    mu: f64,
    dn: &[f64],
) -> Result<AddedDampingTensor> {
    surface.validate()?;
    if dn.len() != surface.points.len() {
        return param("one length scale per surface point is required");
    }
    let mut vv = Matrix3::zeros();
    let mut vw = Matrix3::zeros();
    let mut wv = Matrix3::zeros();
    let mut ww = Matrix3::zeros();
    for (p, &h) in surface.points.iter().zip(dn) {
        if !(h > 0.0) {
            return Err(Error::Parameter("length scales must be positive".into()));
        }
        let c = mu * p.weight / h;
        let t = Matrix3::identity() - p.normal * p.normal.transpose();
        let d = skew(&(p.position - x_b));
        vv += c * t;
        vw += c * t * d.transpose();
        wv += c * d * t;
        ww += c * d * t * d.transpose();
    }
    let tensor = AddedDampingTensor::from_blocks(vv, vw, wv, ww, Provenance::Quadrature);
    Ok(if surface.planar { tensor.restrict_to_plane() } else { tensor })
}

/// [`approx_tensors`] with a single length scale.
pub fn approx_tensors_uniform(
    surface: &BodySurfaceSample,
    x_b: &Vector3<f64>,
    mu: f64,
    dn: f64,
) -> Result<AddedDampingTensor> {
    approx_tensors(surface, x_b, mu, &vec![dn; surface.points.len()])
}

/// Transports a tensor with the body rotation: each block becomes
/// `R D R^T`.
pub fn rotate_tensor(d0: &AddedDampingTensor, r: &Matrix3<f64>) -> Result<AddedDampingTensor> {
    if (r.transpose() * r - Matrix3::identity()).abs().max() > 1e-10 {
        return param("rotation matrix is not orthogonal");
    }
    let rot = |b: Matrix3<f64>| r * b * r.transpose();
    let mut out = AddedDampingTensor::from_blocks(rot(d0.vv()), rot(d0.vw()), rot(d0.wv()), rot(d0.ww()), d0.provenance);
    out.t0 = d0.t0;
    Ok(out)
}

/// Pressure and viscous surface loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLoads {
    /// `F(p) = -[int p n dS; int d x p n dS]`.
    pub pressure: [Vector3<f64>; 2],
    /// `G(v) = [int tau n dS + f_e; int d x tau n dS + g_e]`.
    pub viscous: [Vector3<f64>; 2],
}

/// Integrates surface pressure and traction samples into the force and
/// torque terms of the body equations.
pub fn force_torque(
    pressure: &[f64],
    traction: &[Vector3<f64>],
    surface: &BodySurfaceSample,
    x_b: &Vector3<f64>,
    f_e: &Vector3<f64>,
    g_e: &Vector3<f64>,
) -> Result<SurfaceLoads> {
    if pressure.len() != surface.points.len() || traction.len() != surface.points.len() {
        return param("pressure and traction samples must match the surface points");
    }
    let mut fp = Vector3::zeros();
    let mut gp = Vector3::zeros();
    let mut fv = *f_e;
    let mut gv = *g_e;
    for ((p, s), tn) in surface.points.iter().zip(pressure).zip(traction) {
        let d = p.position - x_b;
        let pn = *s * p.normal * p.weight;
        fp -= pn;
        gp -= d.cross(&pn);
        fv += tn * p.weight;
        gv += d.cross(tn) * p.weight;
    }
    Ok(SurfaceLoads { pressure: [fp, gp], viscous: [fv, gv] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize, a: f64) -> BodySurfaceSample {
        let pts = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                let nrm = Vector3::new(th.cos(), th.sin(), 0.0);
                SurfacePoint { position: a * nrm, normal: nrm, weight: 2.0 * PI * a / n as f64, normal_spacing: 0.1 }
            })
            .collect();
        BodySurfaceSample { points: pts, planar: true }
    }

    #[test]
    fn length_scale_at_delta_one() {
        let (dn, delta) = length_scale(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((delta - 1.0).abs() < 1e-15);
        assert!((dn - 1.0 / (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert!(length_scale(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(length_scale(1.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn rigid_rotation_is_stress_free() {
        let w = Vector3::new(0.2, -0.3, 0.9);
        let n = Vector3::new(0.6, 0.8, 0.0);
        let t = shear_stress_on_body(&w.cross(&n), &n, &w, 1.3);
        assert!(t.norm() < 1e-15);
    }

    #[test]
    fn lemma_example() {
        let n = Vector3::new(0.0, 1.0, 0.0);
        let t1 = Vector3::new(1.0, 0.0, 0.0);
        let t2 = Vector3::new(0.0, 0.0, 1.0);
        let vn = Vector3::new(0.0, -1.0, 0.0);
        let vt1 = Vector3::new(1.0, 0.0, 0.0);
        let s = shear_stress_incompressible(&vn, [&vt1, &Vector3::zeros()], &n, [&t1, &t2], 1.0).unwrap();
        assert!((s - Vector3::new(0.0, -2.0, 0.0)).norm() < 1e-15);
        let bad = Vector3::new(1.0, 1.0, 0.0);
        assert!(shear_stress_incompressible(&vn, [&vt1, &vt1], &n, [&bad, &t2], 1.0).is_err());
    }

    #[test]
    fn constant_pressure_has_no_net_load() {
        let s = circle(256, 1.3);
        let p = vec![2.5; 256];
        let tr = vec![Vector3::zeros(); 256];
        let l = force_torque(&p, &tr, &s, &Vector3::zeros(), &Vector3::zeros(), &Vector3::zeros()).unwrap();
        assert!(l.pressure[0].norm() < 1e-10 && l.pressure[1].norm() < 1e-10);
        assert!(force_torque(&p[..3], &tr, &s, &Vector3::zeros(), &Vector3::zeros(), &Vector3::zeros()).is_err());
    }

    #[test]
    fn hydrostatic_force_on_circle() {
        let (a, rho, g) = (0.7, 1.2, 9.0);
        let s = circle(1024, a);
        let p: Vec<f64> = s.points.iter().map(|q| rho * g * q.position.y).collect();
        let tr = vec![Vector3::zeros(); 1024];
        let l = force_torque(&p, &tr, &s, &Vector3::zeros(), &Vector3::zeros(), &Vector3::zeros()).unwrap();
        let exact = -rho * g * PI * a * a;
        assert!((l.pressure[0].y - exact).abs() < 1e-6 * exact.abs());
        assert!(l.pressure[0].x.abs() < 1e-10);
    }

    #[test]
    fn circle_quadrature_matches_disk() {
        let s = circle(512, 1.0);
        let d = approx_tensors_uniform(&s, &Vector3::zeros(), 1.0, 1.0).unwrap();
        assert!((d.vv()[(0, 0)] - PI).abs() < 1e-3 * PI);
        assert!((d.vv()[(1, 1)] - PI).abs() < 1e-3 * PI);
        assert!((d.ww()[(2, 2)] - 2.0 * PI).abs() < 1e-3 * 2.0 * PI);
        assert!(d.vw().norm() < 1e-10);
        assert!(d.asymmetry() < 1e-10 && d.min_relative_eigenvalue() > -1e-10);
        assert!((s.enclosed_volume() - PI).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_swaps_rectangle_entries() {
        let d = shapes::ShapeSpec::Rectangle { w: 1.0, h: 0.5 }.analytic_tensor(1.0, 1.0).unwrap();
        let r = crate::linalg::rot_z(PI / 2.0);
        let e = rotate_tensor(&d, &r).unwrap();
        assert!((e.vv()[(0, 0)] - d.vv()[(1, 1)]).abs() < 1e-14);
        assert!((e.vv()[(1, 1)] - d.vv()[(0, 0)]).abs() < 1e-14);
        assert!(rotate_tensor(&d, &(2.0 * r)).is_err());
    }
}
