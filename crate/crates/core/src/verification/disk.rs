//! Exact solution for a disk spinning down inside a fixed annulus.
//!
//! The disk of radius `r1` rotates inside a stationary circular wall of
//! radius `r2`. The azimuthal velocity decays as
//! `v(r, t) = amplitude * C(lambda r) / C(lambda r1) * exp(-lambda^2 nu t)`,
//! with `C(z) = J1(z) Y1(lambda r2) - J1(lambda r2) Y1(z)`. The decay rate
//! comes from balancing the disk's angular acceleration against the wall
//! shear torque; the smallest positive root is the slowest mode.

use std::f64::consts::PI;

use super::bessel::{j1, j1_prime, y1, y1_prime};
use super::quadrature::integrate;
use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskParams {
    pub rho: f64,
    pub mu: f64,
    pub r1: f64,
    pub r2: f64,
    /// Body density; the disk mass is `rho_b pi r1^2`.
    pub rho_b: f64,
    /// Initial surface speed of the disk.
    pub amplitude: f64,
    /// Pressure at `r = r1`.
    pub p0: f64,
}

impl Default for DiskParams {
    fn default() -> Self {
        Self { rho: 1.0, mu: 0.1, r1: 1.0, r2: 2.0, rho_b: 1.0, amplitude: 0.1, p0: 0.0 }
    }
}

impl DiskParams {
    pub fn moment_of_inertia(&self) -> f64 {
        0.5 * self.rho_b * PI * self.r1.powi(4)
    }

    pub fn mass(&self) -> f64 {
        self.rho_b * PI * self.r1 * self.r1
    }

    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }

    fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r2 > self.r1) {
            return param("disk: need 0 < r1 < r2");
        }
        if !(self.rho > 0.0 && self.mu > 0.0 && self.rho_b >= 0.0) {
            return param("disk: need rho > 0, mu > 0, rho_b >= 0");
        }
        Ok(())
    }
}

/// Residual of the torque balance at decay parameter `lambda`.
pub fn torque_balance(p: &DiskParams, lambda: f64) -> f64 {
    let (j2, y2) = (j1(lambda * p.r2), y1(lambda * p.r2));
    let z = lambda * p.r1;
    let c = j1(z) * y2 - j2 * y1(z);
    let dc = j1_prime(z) * y2 - j2 * y1_prime(z);
    p.moment_of_inertia() * lambda * lambda * p.nu() * c / p.r1
        + 2.0 * PI * p.r1 * p.r1 * p.mu * (lambda * dc - c / p.r1)
}

/// Smallest positive root of [`torque_balance`].
pub fn decay_parameter(p: &DiskParams) -> Result<f64> {
    p.validate()?;
    let g = |l: f64| torque_balance(p, l);
    let step = 0.01 / (p.r2 - p.r1).min(p.r1);
    let mut a = step;
    let mut ga = g(a);
    let limit = 2000.0 * step;
    while a < limit {
        let b = a + step;
        let gb = g(b);
        if ga == 0.0 {
            return Ok(a);
        }
        if ga.signum() != gb.signum() {
            return refine(&g, a, b, ga, gb);
        }
        a = b;
        ga = gb;
    }
    Err(Error::RootFind(format!("no sign change of the torque balance below {limit}")))
}

fn refine(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, gb: f64) -> Result<f64> {
    if !(ga.signum() != gb.signum()) {
        return Err(Error::RootFind("bracket does not change sign".into()));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingDiskSolution {
    pub params: DiskParams,
    pub lambda: f64,
    c_r1: f64,
    j_r2: f64,
    y_r2: f64,
}

impl RotatingDiskSolution {
    pub fn new(params: DiskParams) -> Result<Self> {
        let lambda = decay_parameter(&params)?;
        let j_r2 = j1(lambda * params.r2);
        let y_r2 = y1(lambda * params.r2);
        let z = lambda * params.r1;
        let c_r1 = j1(z) * y_r2 - j_r2 * y1(z);
        Ok(Self { params, lambda, c_r1, j_r2, y_r2 })
    }

    fn decay(&self) -> f64 {
        self.lambda * self.lambda * self.params.nu()
    }

    /// Time-independent radial profile `amplitude * C(lambda r) / C(lambda r1)`.
    pub fn profile(&self, r: f64) -> f64 {
        let z = self.lambda * r;
        self.params.amplitude * (j1(z) * self.y_r2 - self.j_r2 * y1(z)) / self.c_r1
    }

    pub fn v_theta(&self, r: f64, t: f64) -> f64 {
        self.profile(r) * (-self.decay() * t).exp()
    }

    /// Cartesian velocity at `(x, y)` measured from the disk centre.
    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let r = x.hypot(y);
        let v = self.v_theta(r, t);
        [-v * y / r, v * x / r]
    }

    /// `int_{r1}^{r} profile(s)^2 / s ds`.
    pub fn pressure_integral(&self, r: f64) -> Result<f64> {
        integrate(|s| self.profile(s).powi(2) / s, self.params.r1, r, 1e-12)
    }

    /// Pressure from radial balance, given the precomputed integral.
    pub fn pressure_from_integral(&self, integral: f64, t: f64) -> f64 {
        self.params.p0 + self.params.rho * (-2.0 * self.decay() * t).exp() * integral
    }

    pub fn pressure(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.pressure_from_integral(self.pressure_integral(r)?, t))
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.params.amplitude / self.params.r1 * (-self.decay() * t).exp()
    }

    pub fn omega_dot(&self, t: f64) -> f64 {
        -self.decay() * self.omega(t)
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.params.amplitude / (self.params.r1 * self.decay()) * (1.0 - (-self.decay() * t).exp())
    }
}
