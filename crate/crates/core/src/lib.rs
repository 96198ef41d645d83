//! Mixed virtual element solver for the two-dimensional generalized Oseen
//! problem in pseudostress–velocity form, lowest order, on polygonal meshes.
//!
//! The pipeline is [`mesh`] → [`assembly`] → [`solver`] → [`postprocess`],
//! driven for whole convergence sweeps by [`experiment`].

#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod experiment;
pub mod geom;
pub mod mesh;
pub mod polybasis;
pub mod postprocess;
pub mod problems;
pub mod solver;
pub mod vemspace;

pub use assembly::{assemble, AssemblyOptions, ConvectiveScaling, SaddleSystem, Stabilization};
pub use experiment::{run_experiment, ExperimentError, RunConfig};
pub use geom::{Rect, Tensor2, Vec2};
pub use mesh::{generate_mesh, generate_mesh_seeded, MeshFamily, PolyMesh};
pub use postprocess::{compute_errors, convergence_rates, ConvergenceRecord, DiscreteSolution, ErrorReport, NormPolicy};
pub use problems::{build_case, CaseTag, OseenCase, Overrides};
pub use solver::{solve, SolveReport, SolverError};
