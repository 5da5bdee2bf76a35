//! Primal-dual mixed finite elements for Darcy flow on a two-region
//! (bipartite) domain.
//!
//! Region Ω₁ carries a lowest-order Raviart–Thomas velocity and a piecewise
//! constant pressure; region Ω₂ carries a continuous linear pressure and a
//! gradient velocity. The regions exchange normal stress and normal flux across
//! the interface Γ.
//!
//! ```no_run
//! use pdmix_core::{analysis, manufactured};
//!
//! let case = manufactured::example1();
//! let report = analysis::convergence_study(&case, &[1, 2, 4, 8]).unwrap();
//! print!("{}", report.to_csv());
//! ```

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod io;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod spaces;

pub use analysis::{convergence_study, error_norms, rate, ConvergenceReport, ErrorReport};
pub use assembly::{assemble_system, CoefficientSet, SaddleSystem};
pub use error::{Error, Result};
pub use geometry::Point;
pub use manufactured::{InterfaceMode, ManufacturedCase};
pub use mesh::{build_cartesian_mesh, BipartiteMesh, Quadrant, Region};
pub use solver::{check_wellposedness, solve, SolutionFields, WellposednessDiagnostics};
pub use spaces::{build_dof_layout, DofLayout};
