//! Finite element solver for singularly perturbed convection-diffusion
//! problems on the unit square, with layer-adapted Bakhvalov-type and
//! Bakhvalov–Shishkin meshes.
//!
//! The pipeline is: build graded 1D meshes ([`mesh`]), form their tensor
//! product, assemble the `Q_k` Galerkin system ([`assembly`]), solve it with
//! preconditioned GMRES or a direct oracle ([`linalg`]) and measure errors
//! against a known solution ([`analysis`]). [`interp`] studies the
//! layer-corrected interpolant that the error analysis is built on.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod element;
pub mod interp;
pub mod linalg;
pub mod mesh;
pub mod problems;

pub use analysis::{
    compare_meshes, convergence_study, r_factor, rate_reference, solve_and_measure,
    ConvergenceTable, ErrorReport, MeshPair, SolveOptions, SolverMethod, StudyConfig,
};
pub use assembly::{assemble, DofMap, FeFunction, LinearSystem};
pub use interp::{build_pi_u, benchmark_decomposition, LayerDecomposition, Norm};
pub use linalg::{CsrMatrix, PrecondKind, SolverConfig};
pub use mesh::{build_tensor_mesh, Mesh1D, MeshConfig, MeshVariant, TensorMesh};
pub use problems::{benchmark_problem, problem_by_name, ProblemSpec};
