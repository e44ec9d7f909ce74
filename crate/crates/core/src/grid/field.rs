//! Grid functions carried between time levels.

use super::MappedGrid;
use crate::error::{Error, Result};

/// Velocity, pressure and the stored advection-pressure terms on one grid.
/// Every array covers all stored nodes, ghosts included.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    /// Advection-pressure term at the current level.
    pub f_n: [Vec<f64>; 2],
    /// Advection-pressure term at the previous level.
    pub f_nm1: [Vec<f64>; 2],
    pub t: f64,
}

impl FieldState {
    pub fn zeros(grid: &MappedGrid, t: f64) -> Self {
        let n = grid.len();
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
            p: vec![0.0; n],
            f_n: [vec![0.0; n], vec![0.0; n]],
            f_nm1: [vec![0.0; n], vec![0.0; n]],
            t,
        }
    }

    pub fn check_shape(&self, grid: &MappedGrid) -> Result<()> {
        let n = grid.len();
        let ok = [self.u.len(), self.v.len(), self.p.len(), self.f_n[0].len(), self.f_n[1].len()]
            .iter()
            .all(|&l| l == n);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidState("field arrays do not match the grid".into()))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).chain(&self.p).all(|x| x.is_finite())
    }

    /// Largest speed over depth-0 nodes.
    pub fn max_speed(&self, grid: &MappedGrid) -> f64 {
        grid.nodes()
            .map(|(i, j)| {
                let k = grid.idx(i, j);
                self.u[k].hypot(self.v[k])
            })
            .fold(0.0, f64::max)
    }
}
