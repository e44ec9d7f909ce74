//! Partitioned simulation of incompressible flow coupled to rigid bodies
//! with added-mass and added-damping interface conditions.
//!
//! The crate is organised by role:
//!
//! * [`rigid_body`]: body state, predictor and corrector.
//! * [`added_damping`]: added-damping tensors (analytic, surface
//!   quadrature and discrete variational).
//! * [`grid`]: mapped grids with ghost layers and finite-difference
//!   stencils.
//! * [`fluid_solver`]: implicit velocity update and the coupled
//!   pressure/body-acceleration solve.
//! * [`amp_stepper`]: the time-stepping loop and benchmark problems.
//! * [`verification`]: exact solutions and convergence estimators.
//! * [`cli_io`]: configuration files, CSV/VTK output and reports.
//!
//! ```
//! use amprb::amp_stepper::{run, ProblemSpec, SimulationConfig};
//! use amprb::verification::PistonParams;
//!
//! let mut cfg = SimulationConfig::new(ProblemSpec::Piston(PistonParams::default()), 1);
//! cfg.time.t_final = 0.2;
//! let summary = run(&cfg).unwrap();
//! assert!(summary.stable());
//! assert!(summary.final_errors.body.x_b < 1e-2);
//! ```

pub mod added_damping;
pub mod amp_stepper;
pub mod cli_io;
pub mod error;
pub mod fluid_solver;
pub mod grid;
pub mod linalg;
pub mod rigid_body;
pub mod verification;

pub use error::{Error, Result};
