//! Optimality checks: Nash membership, KKT certificates and brute-force oracles.

mod kkt;
mod oracle;

pub use kkt::{kkt_check, KktCertificate, ACTIVITY_REL_TOL, MULTIPLIER_TOL};
pub use oracle::{
    grid_min, monte_carlo_min, monte_carlo_samples, monte_carlo_with, MonteCarloConfig,
    OracleResult, SamplerKind, SamplerMode, GRID_MAX_DIM, HIT_AND_RUN_THRESHOLD,
    STARVATION_THRESHOLD,
};

use crate::drd::nash_residual;
use crate::problem::{Allocation, AllocationProblem};

/// Nash membership: every agent with positive mass attains the best fitness
/// to within `tol`.
pub fn is_nash(p: &AllocationProblem, w: &Allocation, tol: f64) -> bool {
    nash_residual(p, w) <= tol
}
