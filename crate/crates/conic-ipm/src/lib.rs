//! Primal-dual interior-point solver for linear conic programs over products of
//! nonnegative orthants, second-order cones and positive semidefinite cones.
//!
//! Problems are stated in primal standard form
//!
//! ```text
//! minimize cᵀx   subject to   A x = b,   x ∈ K
//! ```
//!
//! and solved with a homogeneous self-dual embedding, Nesterov–Todd scaling and
//! Mehrotra predictor-corrector steps. The normal equations are assembled on a
//! fixed sparsity pattern and factored with a sparse Cholesky decomposition.
//!
//! ```
//! use conic_ipm::{solve, Cone, Problem, Settings, Status};
//!
//! // minimize x subject to x - t = 1, x, t ≥ 0
//! let problem = Problem {
//!     num_rows: 1,
//!     entries: vec![(0, 0, 1.0), (0, 1, -1.0)],
//!     b: vec![1.0],
//!     c: vec![1.0, 0.0],
//!     cones: vec![Cone::Nonnegative(2)],
//! };
//! let sol = solve(&problem, &Settings::default()).unwrap();
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.primal_objective - 1.0).abs() < 1e-7);
//! ```

mod cones;
mod problem;
mod schur;
mod solver;
pub mod svec;

pub use problem::{Cone, Problem, ProblemError};
pub use solver::{solve, Residuals, Settings, Solution, Status};
