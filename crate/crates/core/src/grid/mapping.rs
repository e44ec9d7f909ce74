//! Analytic mappings from the unit square to physical space.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

/// A mapping `x = G(r)` with analytic first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Mapping {
    Annulus(AnnulusMapping),
    Channel(ChannelMapping),
}

/// `r1` runs radially outwards, `r2` counter-clockwise in angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusMapping {
    pub inner: f64,
    pub outer: f64,
    pub center: [f64; 2],
    /// Exponential clustering towards the inner radius; 0 means uniform.
    pub stretch: f64,
}

/// Axis-aligned rectangle whose left edge moves with speed `left_speed`;
/// the right edge is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMapping {
    pub left: f64,
    pub right: f64,
    pub bottom: f64,
    pub top: f64,
    pub left_speed: f64,
}

/// First derivatives `J[a][b] = dx_a/dr_b`.
pub type Jacobian = [[f64; 2]; 2];
/// Second derivatives `H[a][b][c] = d^2 x_a / dr_b dr_c`.
pub type Hessian = [[[f64; 2]; 2]; 2];

impl AnnulusMapping {
    /// Radius as a function of `s` and its first two derivatives.
    fn radius(&self, s: f64) -> (f64, f64, f64) {
        let w = self.outer - self.inner;
        let b = self.stretch;
        if b == 0.0 {
            (self.inner + w * s, w, 0.0)
        } else {
            let den = b.exp_m1();
            let e = (b * s).exp();
            (self.inner + w * (b * s).exp_m1() / den, w * b * e / den, w * b * b * e / den)
        }
    }
}

impl Mapping {
    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        match self {
            Mapping::Annulus(m) => {
                let (rad, _, _) = m.radius(r[0]);
                let th = 2.0 * PI * r[1];
                [m.center[0] + rad * th.cos(), m.center[1] + rad * th.sin()]
            }
            Mapping::Channel(m) => [m.left + r[0] * (m.right - m.left), m.bottom + r[1] * (m.top - m.bottom)],
        }
    }

    pub fn jacobian(&self, r: [f64; 2]) -> Jacobian {
        match self {
            Mapping::Annulus(m) => {
                let (rad, dr, _) = m.radius(r[0]);
                let th = 2.0 * PI * r[1];
                let (s, c) = th.sin_cos();
                [[dr * c, -2.0 * PI * rad * s], [dr * s, 2.0 * PI * rad * c]]
            }
            Mapping::Channel(m) => [[m.right - m.left, 0.0], [0.0, m.top - m.bottom]],
        }
    }

    pub fn hessian(&self, r: [f64; 2]) -> Hessian {
        match self {
            Mapping::Annulus(m) => {
                let (rad, dr, ddr) = m.radius(r[0]);
                let th = 2.0 * PI * r[1];
                let (s, c) = th.sin_cos();
                let tp = 2.0 * PI;
                [
                    [[ddr * c, -tp * dr * s], [-tp * dr * s, -tp * tp * rad * c]],
                    [[ddr * s, tp * dr * c], [tp * dr * c, -tp * tp * rad * s]],
                ]
            }
            Mapping::Channel(_) => [[[0.0; 2]; 2]; 2],
        }
    }

    /// `dx/dt` at fixed reference coordinates.
    pub fn grid_velocity(&self, r: [f64; 2]) -> [f64; 2] {
        match self {
            Mapping::Annulus(_) => [0.0, 0.0],
            Mapping::Channel(m) => [m.left_speed * (1.0 - r[0]), 0.0],
        }
    }

    /// Hash of the mapping's parameters; equal keys mean identical nodes
    /// and metrics (grid velocity excluded).
    pub fn geometry_key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        let vals: Vec<u64> = match self {
            Mapping::Annulus(m) => {
                [0.0, m.inner, m.outer, m.center[0], m.center[1], m.stretch].iter().map(|v| v.to_bits()).collect()
            }
            Mapping::Channel(m) => [1.0, m.left, m.right, m.bottom, m.top].iter().map(|v| v.to_bits()).collect(),
        };
        vals.hash(&mut h);
        h.finish()
    }

    /// Whether the grid does not move (zero grid velocity).
    pub fn is_static(&self) -> bool {
        match self {
            Mapping::Annulus(_) => true,
            Mapping::Channel(m) => m.left_speed == 0.0,
        }
    }
}
