//! Box-constrained task allocation on undirected connected graphs, solved
//! with population-game tools.
//!
//! - [`drd`] runs distributed replicator dynamics toward the Nash
//!   equilibrium of the potential game whose payoff is the negated marginal
//!   cost.
//! - [`lambda_solver`] computes the box-clamped optimum directly from the
//!   sorted marginal-cost breakpoints.
//! - [`verify`] certifies optimality (KKT multipliers) and cross-checks it
//!   against Monte Carlo and grid oracles.
//!
//! ```
//! use taskalloc::lambda_solver::solve_lambda;
//! use taskalloc::verify::{kkt_check, MULTIPLIER_TOL};
//! use taskalloc::{AllocationProblem, CostModel, Graph};
//!
//! let agents = vec![
//!     CostModel::exponential(1000.0, 200.0, 350.0)?,
//!     CostModel::exponential(1900.0, 350.0, 480.0)?,
//!     CostModel::exponential(2300.0, 410.0, 540.0)?,
//! ];
//! let p = AllocationProblem::new(Graph::path(3)?, agents, 1150.0)?;
//! let sol = solve_lambda(&p)?;
//! assert!(kkt_check(&p, &sol.allocation, MULTIPLIER_TOL)?.passed);
//! assert!((sol.allocation[1] - 382.4).abs() < 0.1);
//! # Ok::<(), taskalloc::Error>(())
//! ```

pub mod costs;
pub mod drd;
pub mod error;
pub mod graph;
pub mod instances;
pub mod io;
pub mod lambda_solver;
pub mod problem;
pub mod verify;

pub use costs::{CostKind, CostModel, Family};
pub use drd::{DrdConfig, InitStrategy, Trajectory};
pub use error::{Error, Result};
pub use graph::Graph;
pub use lambda_solver::{BreakpointTable, KeyScale, SolverResult};
pub use problem::{Allocation, AllocationProblem};
pub use verify::{KktCertificate, OracleResult};
