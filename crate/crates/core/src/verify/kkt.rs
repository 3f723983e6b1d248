//! Executable KKT certificates for the box-and-sum constrained problem.
//!
//! Stationarity reads `∇C(W) - Σ_I α_i e_i + Σ_J β_j e_j - γ 1 = 0`, so with
//! `γ = λ`: interior agents need `marginal_k = λ`, lower-active agents get
//! `α_i = marginal_i(lower_i) - λ` and upper-active agents get
//! `β_j = λ - marginal_j(upper_j)`. Optimality holds when every multiplier
//! is nonnegative.

use crate::error::{Error, Result};
use crate::problem::{Allocation, AllocationProblem};

/// Relative box width within which a bound counts as active.
pub const ACTIVITY_REL_TOL: f64 = 1e-6;

/// Default multiplier tolerance, in λ units.
pub const MULTIPLIER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    /// Common marginal level `λ` (also the sum-constraint multiplier `γ`).
    pub lambda: f64,
    /// `(agent, α_i)` for lower-active agents.
    pub alphas: Vec<(usize, f64)>,
    /// `(agent, β_j)` for upper-active agents.
    pub betas: Vec<(usize, f64)>,
    pub interior: Vec<usize>,
    /// Max-norm of the stationarity residual over all coordinates.
    pub stationarity_residual: f64,
    /// Max minus min marginal over interior agents.
    pub interior_spread: f64,
    pub feasibility_residual: f64,
    pub passed: bool,
}

impl KktCertificate {
    pub fn active_lower(&self) -> Vec<usize> {
        self.alphas.iter().map(|a| a.0).collect()
    }

    pub fn active_upper(&self) -> Vec<usize> {
        self.betas.iter().map(|b| b.0).collect()
    }

    pub fn min_multiplier(&self) -> f64 {
        self.alphas
            .iter()
            .chain(&self.betas)
            .map(|m| m.1)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds the certificate for `w` with multiplier tolerance `tol`.
pub fn kkt_check(p: &AllocationProblem, w: &Allocation, tol: f64) -> Result<KktCertificate> {
    let feas_tol = p.default_tol();
    if !p.in_feasible_set(w, feas_tol)? {
        return Err(Error::NotFeasible(format!(
            "residual {:e} exceeds {:e}",
            p.feasibility_residual(w)?,
            feas_tol
        )));
    }

    enum Activity {
        Lower,
        Upper,
        Both,
        Interior,
    }
    let activity: Vec<Activity> = p
        .agents()
        .iter()
        .zip(w.loads())
        .map(|(c, &x)| {
            let band = ACTIVITY_REL_TOL * c.width();
            let at_lo = (x - c.lower()).abs() <= band;
            let at_hi = (x - c.upper()).abs() <= band;
            match (at_lo, at_hi) {
                (true, true) => Activity::Both,
                (true, false) => Activity::Lower,
                (false, true) => Activity::Upper,
                (false, false) => Activity::Interior,
            }
        })
        .collect();

    let interior: Vec<usize> = activity
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a, Activity::Interior))
        .map(|(i, _)| i)
        .collect();
    let interior_marginals: Vec<f64> = interior
        .iter()
        .map(|&k| p.agent(k).marginal(w[k]))
        .collect();

    let lambda = if !interior_marginals.is_empty() {
        interior_marginals.iter().sum::<f64>() / interior_marginals.len() as f64
    } else {
        // λ must sit in [max_J marginal(upper), min_I marginal(lower)].
        let lo = activity
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, Activity::Upper))
            .map(|(j, _)| p.agent(j).marginal(p.agent(j).upper()))
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = activity
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, Activity::Lower))
            .map(|(i, _)| p.agent(i).marginal(p.agent(i).lower()))
            .fold(f64::INFINITY, f64::min);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            // Every agent has a zero-width box.
            (false, false) => {
                p.agents()
                    .iter()
                    .map(|c| c.marginal(c.lower()))
                    .sum::<f64>()
                    / p.n() as f64
            }
        }
    };

    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for (i, a) in activity.iter().enumerate() {
        let c = p.agent(i);
        match a {
            Activity::Lower => alphas.push((i, c.marginal(c.lower()) - lambda)),
            Activity::Upper => betas.push((i, lambda - c.marginal(c.upper()))),
            // Fixed agent: both bounds active, pick the sign-consistent side.
            Activity::Both => {
                let m = c.marginal(c.lower());
                if m >= lambda {
                    alphas.push((i, m - lambda));
                } else {
                    betas.push((i, lambda - m));
                }
            }
            Activity::Interior => {}
        }
    }

    let stationarity_residual = interior_marginals
        .iter()
        .map(|m| (m - lambda).abs())
        .fold(0.0, f64::max);
    let interior_spread = if interior_marginals.is_empty() {
        0.0
    } else {
        interior_marginals
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
            - interior_marginals
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
    };
    let feasibility_residual = p.feasibility_residual(w)?;
    let multipliers_ok = alphas.iter().chain(&betas).all(|m| m.1 >= -tol);
    let passed = multipliers_ok
        && stationarity_residual <= tol
        && interior_spread <= tol
        && feasibility_residual <= feas_tol;

    Ok(KktCertificate {
        lambda,
        alphas,
        betas,
        interior,
        stationarity_residual,
        interior_spread,
        feasibility_residual,
        passed,
    })
}
