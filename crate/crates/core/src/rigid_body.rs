//! Rigid-body state, kinematics of surface points and the explicit
//! predictor/corrector used by the partitioned time stepper.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::rot_z;
use crate::verification::ramp;

/// Which planar degrees of freedom are free to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMask {
    pub x: bool,
    pub y: bool,
    pub theta: bool,
}

impl DofMask {
    pub const ALL: DofMask = DofMask { x: true, y: true, theta: true };

    pub fn as_array(&self) -> [bool; 3] {
        [self.x, self.y, self.theta]
    }
}

impl Default for DofMask {
    fn default() -> Self {
        Self::ALL
    }
}

/// State of a rigid body. Quantities are per unit depth in planar mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyState {
    pub mass: f64,
    /// Inertia tensor in the body frame (principal axes).
    pub inertia_body: Matrix3<f64>,
    /// Centre of mass.
    pub x: Vector3<f64>,
    pub v: Vector3<f64>,
    pub omega: Vector3<f64>,
    /// Principal axes as columns; orthonormal with determinant one.
    pub axes: Matrix3<f64>,
    /// Linear acceleration.
    pub a: Vector3<f64>,
    /// Angular acceleration.
    pub b: Vector3<f64>,
    /// Rotation angle about z (planar mode).
    pub theta: f64,
    pub planar: bool,
    pub free: DofMask,
}

/// Position, velocity and acceleration of a point fixed to the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePointKinematics {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
}

impl RigidBodyState {
    /// A planar body at rest at `(x, y)` with mass and polar moment `iz`.
    pub fn planar(mass: f64, iz: f64, x: f64, y: f64) -> Self {
        Self {
            mass,
            inertia_body: Matrix3::from_diagonal(&Vector3::new(iz, iz, iz)),
            x: Vector3::new(x, y, 0.0),
            v: Vector3::zeros(),
            omega: Vector3::zeros(),
            axes: Matrix3::identity(),
            a: Vector3::zeros(),
            b: Vector3::zeros(),
            theta: 0.0,
            planar: true,
            free: DofMask::ALL,
        }
    }

    /// Inertia in the world frame, `E I_body E^T`.
    pub fn inertia_world(&self) -> Matrix3<f64> {
        self.axes * self.inertia_body * self.axes.transpose()
    }

    /// Polar moment about z used by the planar equations.
    pub fn inertia_zz(&self) -> f64 {
        self.inertia_world()[(2, 2)]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0) {
            return Err(Error::InvalidState("negative or NaN body mass".into()));
        }
        let ib = self.inertia_body;
        if (ib - ib.transpose()).abs().max() > 1e-12 * ib.abs().max().max(1.0) {
            return Err(Error::InvalidState("inertia tensor is not symmetric".into()));
        }
        if ib.symmetric_eigenvalues().iter().any(|&e| e < -1e-12 * ib.abs().max().max(1.0)) {
            return Err(Error::InvalidState("inertia tensor is not positive semidefinite".into()));
        }
        let e = self.axes;
        if (e.transpose() * e - Matrix3::identity()).abs().max() > 1e-10 || (e.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState("principal axes are not a rotation".into()));
        }
        let vals = [self.x, self.v, self.omega, self.a, self.b];
        if vals.iter().any(|v| v.iter().any(|c| !c.is_finite())) || !self.theta.is_finite() {
            return Err(Error::InvalidState("non-finite body state".into()));
        }
        if self.planar {
            let oop = [self.x.z, self.v.z, self.a.z, self.omega.x, self.omega.y, self.b.x, self.b.y];
            if oop.iter().any(|c| *c != 0.0) {
                return Err(Error::InvalidState("planar body has out-of-plane components".into()));
            }
        }
        Ok(())
    }

    /// Kinematics of the body-fixed point currently at `r`.
    pub fn surface_point_state(&self, r: &Vector3<f64>) -> SurfacePointKinematics {
        let d = r - self.x;
        SurfacePointKinematics {
            position: *r,
            velocity: self.v + self.omega.cross(&d),
            acceleration: self.a + self.b.cross(&d) + self.omega.cross(&self.omega.cross(&d)),
        }
    }

    /// Kinematics of the body-fixed point that sat at `r0` when the centre
    /// was at `x_b0` and the axes were `axes0`.
    pub fn track_surface_point(
        &self,
        axes0: &Matrix3<f64>,
        r0: &Vector3<f64>,
        x_b0: &Vector3<f64>,
    ) -> Result<SurfacePointKinematics> {
        let r = rotation_matrix(&self.axes, axes0)?;
        Ok(self.surface_point_state(&(self.x + r * (r0 - x_b0))))
    }

    /// Planar accelerations `[a_x, a_y, b_z]`.
    pub fn planar_accel(&self) -> [f64; 3] {
        [self.a.x, self.a.y, self.b.z]
    }

    fn set_planar_accel(&mut self, u: [f64; 3]) {
        self.a = Vector3::new(u[0], u[1], 0.0);
        self.b = Vector3::new(0.0, 0.0, u[2]);
    }

    /// Zeroes every constrained component of velocity and acceleration.
    pub fn apply_constraints(&mut self) {
        if !self.planar {
            return;
        }
        let f = self.free;
        if !f.x {
            self.v.x = 0.0;
            self.a.x = 0.0;
        }
        if !f.y {
            self.v.y = 0.0;
            self.a.y = 0.0;
        }
        if !f.theta {
            self.omega.z = 0.0;
            self.b.z = 0.0;
        }
    }

    /// Sets accelerations from the planar vector `[a_x, a_y, b_z]`.
    pub fn with_planar_accel(mut self, u: [f64; 3]) -> Self {
        self.set_planar_accel(u);
        self
    }
}

/// Projects a nearly orthogonal matrix onto the closest rotation.
/// Rotation `E_t E_0^T` carrying initial body-fixed offsets to current ones.
pub fn rotation_matrix(e_t: &Matrix3<f64>, e_0: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    for e in [e_t, e_0] {
        if (e.transpose() * e - Matrix3::identity()).abs().max() > 1e-8 {
            return Err(Error::InvalidState("principal axes are not orthonormal".into()));
        }
    }
    Ok(e_t * e_0.transpose())
}

fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        r = u2 * vt;
    }
    r
}

/// Predictor with equal steps: leap-frog positions and velocities and
/// linear extrapolation of accelerations.
pub fn predict_and_extrapolate(q_n: &RigidBodyState, q_nm1: &RigidBodyState, dt: f64) -> RigidBodyState {
    predict_and_extrapolate_variable(q_n, q_nm1, dt, dt)
}

/// Predictor for a step `dt` after a previous step `dt_prev`. Reduces to
/// the leap-frog update when the steps are equal.
pub fn predict_and_extrapolate_variable(
    q_n: &RigidBodyState,
    q_nm1: &RigidBodyState,
    dt: f64,
    dt_prev: f64,
) -> RigidBodyState {
    let s = dt + dt_prev;
    let c = 0.5 * (dt * dt - dt_prev * dt_prev);
    let ratio = dt / dt_prev;
    let mut q = q_n.clone();
    let jerk = (q_n.a - q_nm1.a) / dt_prev;
    let spin_jerk = (q_n.b - q_nm1.b) / dt_prev;
    q.x = q_nm1.x + s * q_n.v + c * q_n.a;
    q.v = q_nm1.v + s * q_n.a + c * jerk;
    q.omega = q_nm1.omega + s * q_n.b + c * spin_jerk;
    q.a = q_n.a + ratio * (q_n.a - q_nm1.a);
    q.b = q_n.b + ratio * (q_n.b - q_nm1.b);
    if q_n.planar {
        q.theta = q_nm1.theta + s * q_n.omega.z + c * q_n.b.z;
        q.axes = rot_z(q.theta);
    } else {
        let w = crate::linalg::skew(&q_n.omega);
        q.axes = orthonormalize(&(q_nm1.axes + s * w * q_n.axes));
    }
    q.apply_constraints();
    q
}

/// Trapezoidal update of velocities and positions given new accelerations.
pub fn correct_with_acceleration(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    q_n: &RigidBodyState,
    dt: f64,
) -> RigidBodyState {
    correct_with_weight(a, b, q_n, dt, 0.5)
}

/// As [`correct_with_acceleration`] with weight `w` on the new
/// acceleration (`w = 1/2` is the trapezoidal rule).
pub fn correct_with_weight(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    q_n: &RigidBodyState,
    dt: f64,
    w: f64,
) -> RigidBodyState {
    let mut q = q_n.clone();
    q.a = *a;
    q.b = *b;
    q.v = q_n.v + dt * (w * a + (1.0 - w) * q_n.a);
    q.omega = q_n.omega + dt * (w * b + (1.0 - w) * q_n.b);
    q.apply_constraints();
    q.x = q_n.x + dt * (w * q.v + (1.0 - w) * q_n.v);
    if q_n.planar {
        q.theta = q_n.theta + dt * (w * q.omega.z + (1.0 - w) * q_n.omega.z);
        q.axes = rot_z(q.theta);
    } else {
        // two fixed-point sweeps of the trapezoidal rule for dE/dt = [omega]x E
        let wn = crate::linalg::skew(&q_n.omega);
        let wp = crate::linalg::skew(&q.omega);
        let mut e = q_n.axes + dt * wn * q_n.axes;
        for _ in 0..2 {
            e = q_n.axes + dt * (w * wp * e + (1.0 - w) * wn * q_n.axes);
        }
        q.axes = orthonormalize(&e);
    }
    q
}

/// Prescribed external force and torque on the body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ForceSpec {
    #[default]
    None,
    Constant { force: Vector3<f64>, torque: Vector3<f64> },
    /// Gravity minus buoyancy on a body of cross-section `area`, switched
    /// on by the smooth ramp over `0 <= t <= 1`.
    RampedBuoyancy { area: f64, rho_b: f64, rho: f64, gravity: Vector3<f64> },
}

/// External force and torque at time `t`.
pub fn external_force(spec: &ForceSpec, t: f64) -> (Vector3<f64>, Vector3<f64>) {
    match *spec {
        ForceSpec::None => (Vector3::zeros(), Vector3::zeros()),
        ForceSpec::Constant { force, torque } => (force, torque),
        ForceSpec::RampedBuoyancy { area, rho_b, rho, gravity } => {
            (area * (rho_b - rho) * gravity * ramp(t), Vector3::zeros())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body() -> RigidBodyState {
        let mut q = RigidBodyState::planar(2.0, 0.5, 0.1, -0.2);
        q.v = Vector3::new(0.3, -0.1, 0.0);
        q.omega = Vector3::new(0.0, 0.0, 0.7);
        q.a = Vector3::new(-0.2, 0.4, 0.0);
        q.b = Vector3::new(0.0, 0.0, 0.1);
        q
    }

    #[test]
    fn rest_stays_at_rest() {
        let q = RigidBodyState::planar(1.0, 1.0, 0.0, 0.0);
        let p = predict_and_extrapolate(&q, &q, 0.1);
        assert_eq!(p, q);
    }

    #[test]
    fn surface_point_velocity() {
        let mut q = RigidBodyState::planar(1.0, 1.0, 0.0, 0.0);
        q.omega.z = 1.0;
        let k = q.surface_point_state(&Vector3::new(1.0, 0.0, 0.0));
        assert!((k.velocity - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((k.acceleration - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ramped_buoyancy_example() {
        let spec = ForceSpec::RampedBuoyancy { area: 0.5, rho_b: 0.001, rho: 1.0, gravity: Vector3::new(0.0, -1.0, 0.0) };
        let (f, g) = external_force(&spec, 2.0);
        assert!((f - Vector3::new(0.0, 0.4995, 0.0)).norm() < 1e-15);
        assert_eq!(g, Vector3::zeros());
        assert_eq!(external_force(&spec, 0.0).0, Vector3::zeros());
    }

    #[test]
    fn corrector_is_trapezoidal() {
        let q = body();
        let a = Vector3::new(1.0, 0.0, 0.0);
        let b = Vector3::new(0.0, 0.0, -1.0);
        let c = correct_with_acceleration(&a, &b, &q, 0.1);
        assert!((c.v.x - (0.3 + 0.05 * (1.0 - 0.2))).abs() < 1e-15);
        assert!((c.omega.z - (0.7 + 0.05 * (-1.0 + 0.1))).abs() < 1e-15);
        assert!((c.x.x - (0.1 + 0.05 * (c.v.x + 0.3))).abs() < 1e-15);
        c.validate().unwrap();
    }

    #[test]
    fn constraints_are_enforced() {
        let mut q = body();
        q.free = DofMask { x: true, y: false, theta: false };
        q.apply_constraints();
        let p = predict_and_extrapolate(&q, &q, 0.1);
        assert_eq!(p.v.y, 0.0);
        assert_eq!(p.omega.z, 0.0);
        assert_eq!(p.a.y, 0.0);
    }

    #[test]
    fn three_d_axes_stay_orthonormal() {
        let mut q = body();
        q.planar = false;
        q.omega = Vector3::new(0.3, -0.5, 1.1);
        let mut prev = q.clone();
        for _ in 0..50 {
            let p = predict_and_extrapolate(&q, &prev, 0.05);
            prev = q;
            q = p;
        }
        let e = q.axes;
        assert!((e.transpose() * e - Matrix3::identity()).abs().max() < 1e-12);
        assert!((e.determinant() - 1.0).abs() < 1e-12);
    }
}
