//! Unknown numbering and node classification shared by the velocity and
//! pressure systems.

use crate::grid::{AxisPos, BoundaryTag, MappedGrid, Side};

/// Role of an active node (ghost depth at most one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum NodeKind {
    Interior,
    /// Boundary node. `dominant` is the side with the lowest precedence,
    /// `dirichlet` a side with given pressure if the node touches one.
    Boundary { dominant: Side, dirichlet: Option<Side> },
    /// First ghost of `side`; `t` is the tangential index.
    Ghost { side: Side, t: isize },
    /// Corner ghost; `dir` points diagonally into the domain.
    Corner { dir: (isize, isize) },
}

fn side_of(axis: usize, high: bool) -> Side {
    match (axis, high) {
        (0, false) => Side::R1Min,
        (0, true) => Side::R1Max,
        (1, false) => Side::R2Min,
        _ => Side::R2Max,
    }
}

pub(crate) fn classify(grid: &MappedGrid, i: isize, j: isize) -> NodeKind {
    let p = [grid.axis_pos(0, i), grid.axis_pos(1, j)];
    let ghost = |a: usize| match p[a] {
        AxisPos::Ghost(h, _) => Some(h),
        _ => None,
    };
    match (ghost(0), ghost(1)) {
        (Some(h0), Some(h1)) => Corner { dir: (if h0 { -1 } else { 1 }, if h1 { -1 } else { 1 }) },
        (Some(h), None) => Ghost { side: side_of(0, h), t: j },
        (None, Some(h)) => Ghost { side: side_of(1, h), t: i },
        (None, None) => {
            let mut sides = Vec::with_capacity(2);
            for (a, pa) in p.iter().enumerate() {
                if let AxisPos::Boundary(h) = pa {
                    sides.push(side_of(a, *h));
                }
            }
            if sides.is_empty() {
                return Interior;
            }
            let dominant = *sides.iter().min_by_key(|s| grid.tag(**s).precedence()).unwrap();
            let dirichlet = sides.iter().copied().find(|s| grid.tag(*s).pressure_dirichlet());
            Boundary { dominant, dirichlet }
        }
    }
}

use NodeKind::{Boundary, Corner, Ghost, Interior};

/// Active nodes and their unknown slots.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub active: Vec<usize>,
    pub slot: Vec<usize>,
}

pub(crate) const INACTIVE: usize = usize::MAX;

impl Layout {
    pub fn new(grid: &MappedGrid) -> Self {
        let mut slot = vec![INACTIVE; grid.len()];
        let mut active = Vec::new();
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            if grid.depth(i, j) <= 1 {
                slot[k] = active.len();
                active.push(k);
            }
        }
        Self { active, slot }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }
}

/// Storage indices of the boundary node and its first two interior
/// neighbours for the ghost of `side` at tangential index `t`.
pub(crate) fn ghost_column(grid: &MappedGrid, side: Side, t: isize) -> [usize; 4] {
    let mut out = [0; 4];
    for (n, d) in (-1..=2).enumerate() {
        let (i, j) = grid.side_node(side, t, d);
        out[n] = grid.idx(i, j);
    }
    out
}

/// Storage indices along the inward diagonal from a corner ghost.
pub(crate) fn corner_column(grid: &MappedGrid, i: isize, j: isize, dir: (isize, isize)) -> [usize; 4] {
    let mut out = [0; 4];
    for (n, s) in (0..4).enumerate() {
        out[n] = grid.idx(i + s * dir.0, j + s * dir.1);
    }
    out
}

/// Weights of the third-order extrapolation `u_G - 3 u_B + 3 u_1 - u_2`.
pub(crate) const EXTRAP: [f64; 4] = [1.0, -3.0, 3.0, -1.0];

/// Tangent rotated from the fluid normal.
pub(crate) fn tangent(n: [f64; 2]) -> [f64; 2] {
    [-n[1], n[0]]
}

/// Whether no side carries a given pressure.
pub(crate) fn pressure_all_neumann(grid: &MappedGrid) -> bool {
    Side::ALL.iter().all(|s| !grid.tag(*s).pressure_dirichlet())
}

/// Node used to pin the pressure level when every side is of Neumann type:
/// the first node of the first non-interface wall, or any depth-zero node.
pub(crate) fn pin_node(grid: &MappedGrid) -> usize {
    for s in Side::ALL {
        let tag = grid.tag(s);
        if tag != BoundaryTag::Interface && tag != BoundaryTag::Periodic {
            let t = *grid.side_range(s).start();
            let (i, j) = grid.side_node(s, t, 0);
            return grid.idx(i, j);
        }
    }
    let (i, j) = grid.nodes().next().unwrap_or((0, 0));
    grid.idx(i, j)
}
