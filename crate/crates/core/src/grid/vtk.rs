//! Legacy ASCII VTK structured-grid output.

use std::fmt::Write as _;

use super::{FieldState, MappedGrid};

/// Renders depth-0 nodes with pressure and velocity as a VTK structured
/// grid. Periodic axes repeat their first line so the surface closes.
pub fn to_vtk(grid: &MappedGrid, fields: &FieldState, title: &str) -> String {
    let mut ni: Vec<isize> = grid.node_range(0).collect();
    let mut nj: Vec<isize> = grid.node_range(1).collect();
    if grid.periodic[0] {
        ni.push(grid.n[0] as isize);
    }
    if grid.periodic[1] {
        nj.push(grid.n[1] as isize);
    }
    let count = ni.len() * nj.len();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", ni.len(), nj.len());
    let _ = writeln!(s, "POINTS {count} double");
    let order: Vec<usize> = nj.iter().flat_map(|&j| ni.iter().map(move |&i| (i, j))).map(|(i, j)| grid.idx(i, j)).collect();
    for &k in &order {
        let (x, y) = grid.xy(k);
        let _ = writeln!(s, "{x:e} {y:e} 0");
    }
    let _ = writeln!(s, "POINT_DATA {count}");
    let _ = writeln!(s, "SCALARS p double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for &k in &order {
        let _ = writeln!(s, "{:e}", fields.p[k]);
    }
    let _ = writeln!(s, "VECTORS v double");
    for &k in &order {
        let _ = writeln!(s, "{:e} {:e} 0", fields.u[k], fields.v[k]);
    }
    s
}
