//! Incompressible fluid solver on a mapped grid: the implicit velocity
//! update and the coupled pressure and body-acceleration solve.
//!
//! The advection-pressure term `f = rho ((v - w) . grad) v + grad p`
//! carries the fluid density, so the momentum equation reads
//! `rho dv/dt + f = mu lap v`.

pub mod boundary;
pub(crate) mod layout;
pub mod ops;
pub mod pressure;
pub mod velocity;

pub use boundary::extrapolate_second_layer;
pub use ops::{advection_pressure_term, curl_curl, divergence, gradient, laplacian, max_divergence, traction};
pub use pressure::{interface_loads, pressure_body_solve, PressureBodySolution, PressureMethod};
pub use velocity::{advance_velocity, fill_velocity_ghosts, velocity_matrix};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{param, Result};
use crate::grid::MappedGrid;
use crate::linalg::{Factorization, SymbolicCache};

/// Body coupling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeMode {
    /// Added-mass and added-damping partitioned scheme.
    #[default]
    Amp,
    /// Traditional partitioned scheme: pressure from predicted body
    /// accelerations, then the explicit Newton-Euler update.
    Tp,
}

impl SchemeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "amp" | "amp-rb" => Ok(SchemeMode::Amp),
            "tp" | "tp-rb" => Ok(SchemeMode::Tp),
            _ => param(format!("unknown scheme mode '{s}'")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeMode::Amp => "amp",
            SchemeMode::Tp => "tp",
        }
    }
}

/// Fluid properties and scheme parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub rho: f64,
    pub mu: f64,
    /// Implicitness of the viscous term (`1/2` is Crank-Nicolson).
    pub alpha: f64,
    /// Implicitness assumed by the added-damping length scale.
    pub alpha_bar: f64,
    /// Scale of the added-damping terms.
    pub beta_d: f64,
    pub mode: SchemeMode,
    /// Extra TP fixed-point sweeps per solve.
    pub tp_subiterations: usize,
    /// Whether the velocity is re-solved in each correction.
    pub velocity_correction: bool,
    pub n_corrections: usize,
    pub pressure_method: PressureMethod,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 0.1,
            alpha: 0.5,
            alpha_bar: 0.5,
            beta_d: 1.0,
            mode: SchemeMode::Amp,
            tp_subiterations: 0,
            velocity_correction: true,
            n_corrections: 1,
            pressure_method: PressureMethod::Schur,
        }
    }
}

impl SchemeParams {
    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return param("fluid density must be positive");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return param("viscosity must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(self.alpha_bar > 0.0 && self.alpha_bar <= 1.0) {
            return param("implicitness factors must lie in (0, 1]");
        }
        if !(self.beta_d >= 0.0 && self.beta_d.is_finite()) {
            return param("beta_d must be non-negative");
        }
        Ok(())
    }
}

/// Time-dependent boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryData {
    /// Pressure on each side with a given pressure, indexed by
    /// [`crate::grid::Side::index`].
    pub pressure: [f64; 4],
}

/// Factorizations reused across solves.
#[derive(Debug, Default)]
pub struct SolverCache {
    pub(crate) symbolic: SymbolicCache,
    pub(crate) velocity: Option<(u64, Factorization)>,
    pub(crate) pressure: Option<(u64, Factorization)>,
    /// Number of numeric factorizations performed.
    pub factorizations: usize,
}

impl SolverCache {
    pub fn new() -> Self {
        Self::default()
    }
}

pub(crate) fn hash_key(grid: &MappedGrid, extra: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    grid.geometry_key().hash(&mut h);
    for t in grid.tags {
        t.hash(&mut h);
    }
    for x in extra {
        x.to_bits().hash(&mut h);
    }
    h.finish()
}
