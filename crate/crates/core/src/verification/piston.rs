//! Exact solution for a piston driving fluid along a channel.
//!
//! The body of width `body_width` fills a channel of height `height` and
//! moves as `x_b(t) = amplitude * sin(2 pi t)`. The fluid occupies
//! `x_I(t) <= x <= length`, where `x_I = x_b + body_width / 2`. The fluid
//! velocity is uniform and equal to the body velocity; the pressure is
//! linear in `x` and takes the value `p_L(t)` at `x = length`.

use std::f64::consts::PI;

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonParams {
    pub rho: f64,
    pub mu: f64,
    /// Body mass per unit depth.
    pub body_mass: f64,
    pub body_width: f64,
    pub height: f64,
    pub length: f64,
    pub amplitude: f64,
}

impl Default for PistonParams {
    fn default() -> Self {
        Self { rho: 1.0, mu: 0.1, body_mass: 1.0, body_width: 1.0, height: 1.0, length: 1.5, amplitude: 0.25 }
    }
}

/// Exact piston state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonExact {
    pub x_b: f64,
    pub v_b: f64,
    pub a_b: f64,
    /// Interface position `x_I`.
    pub x_interface: f64,
    /// Added mass `rho * H * (L - x_I)`.
    pub added_mass: f64,
    /// Pressure at the far end.
    pub p_end: f64,
}

impl PistonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.mu >= 0.0 && self.body_mass >= 0.0) {
            return param("piston: rho must be positive, mu and body mass non-negative");
        }
        if !(self.height > 0.0 && self.body_width > 0.0) {
            return param("piston: height and body width must be positive");
        }
        let reach = self.amplitude.abs() + 0.5 * self.body_width;
        if reach >= self.length {
            return param("piston: the body would reach the end of the channel");
        }
        Ok(())
    }
}

/// Evaluates the exact body motion, added mass and end pressure at `t`.
pub fn piston_exact(p: &PistonParams, t: f64) -> Result<PistonExact> {
    p.validate()?;
    let w = 2.0 * PI;
    let x_b = p.amplitude * (w * t).sin();
    let v_b = p.amplitude * w * (w * t).cos();
    let a_b = -p.amplitude * w * w * (w * t).sin();
    let x_i = x_b + 0.5 * p.body_width;
    let added_mass = p.rho * p.height * (p.length - x_i);
    let p_end = -(p.body_mass + added_mass) * a_b / p.height;
    Ok(PistonExact { x_b, v_b, a_b, x_interface: x_i, added_mass, p_end })
}

impl PistonExact {
    /// Pressure at `x` (independent of `y`).
    pub fn pressure(&self, p: &PistonParams, x: f64) -> f64 {
        let frac = (p.length - x) / (p.length - self.x_interface);
        self.p_end + frac * (-self.p_end) / (p.body_mass / self.added_mass + 1.0)
    }

    /// Fluid velocity (uniform).
    pub fn velocity(&self) -> [f64; 2] {
        [self.v_b, 0.0]
    }
}
