//! Finite element solver for the Stokes-Biot fluid-poroelastic problem with an
//! explicit, loosely coupled time splitting.

#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod mms;
pub mod params;
pub mod study;
pub mod subproblems;

pub use diagnostics::{convergence_rates, EnergyRecord, ErrorReport};
pub use driver::{run, InitMode, RunConfig, Simulation, Trajectory};
pub use error::{Error, Result};
pub use mesh::{build_rect_mesh, Mesh2D, Region};
pub use mms::{CaseKind, MmsCase};
pub use params::PhysicalParams;
pub use study::{ConvergenceTable, EnergyRun, ProjectionStudy, StudyOptions};
pub use subproblems::{Discretization, State};
