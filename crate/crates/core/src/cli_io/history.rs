//! Time-history CSV output.

use std::fmt::Write as _;
use std::path::Path;

use crate::amp_stepper::HistoryRow;
use crate::error::Result;

pub const HISTORY_COLUMNS: [&str; 12] =
    ["t", "x_b1", "x_b2", "theta_b", "v_b1", "v_b2", "omega_b", "a_b1", "a_b2", "bdot_b", "dt", "flag"];

pub const ERROR_COLUMNS: [&str; 6] = ["err_x_b", "err_v_b", "err_a_b", "err_theta_b", "err_omega_b", "err_bdot_b"];

/// Renders the history as CSV with LF line endings. Floats are written in
/// shortest round-trip form, so a rerun reproduces the file byte for byte.
pub fn history_csv(rows: &[HistoryRow], with_errors: bool) -> String {
    let mut s = HISTORY_COLUMNS.join(",");
    if with_errors {
        s.push(',');
        s.push_str(&ERROR_COLUMNS.join(","));
    }
    s.push('\n');
    for r in rows {
        let vals = [r.t, r.x_b[0], r.x_b[1], r.theta, r.v_b[0], r.v_b[1], r.omega, r.a_b[0], r.a_b[1], r.bdot, r.dt];
        for v in vals {
            let _ = write!(s, "{v:?},");
        }
        let _ = write!(s, "{}", u8::from(r.unstable));
        if with_errors {
            let e = &r.errors;
            for v in [e.x_b, e.v_b, e.a_b, e.theta, e.omega, e.bdot] {
                let _ = write!(s, ",{v:?}");
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_history(path: &Path, rows: &[HistoryRow], with_errors: bool) -> Result<()> {
    std::fs::write(path, history_csv(rows, with_errors))?;
    Ok(())
}
