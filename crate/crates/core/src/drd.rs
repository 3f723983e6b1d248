//! Distributed replicator dynamics.
//!
//! Forward-Euler iteration of the neighbor-local replicator flow
//!
//! ```text
//! w_i(t+1) = w_i(t) + dt * (w_i(t) / w) * ( f_i(w_i) * sum_{j in N_i} w_j  -  sum_{j in N_i} f_j(w_j) w_j )
//! ```
//!
//! All agents update synchronously from the same state. Every edge
//! contributes antisymmetric terms to its two endpoints, so the total load is
//! conserved up to rounding. Agents with zero load stay at zero.

use crate::error::{Error, Result};
use crate::problem::{Allocation, AllocationProblem};

/// Loads at or below `MASS_FLOOR_REL * w` count as zero mass.
pub const MASS_FLOOR_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrdConfig {
    /// Euler step `dt`.
    pub step: f64,
    pub max_steps: u64,
    /// Stop once the Nash residual (fitness spread) is at or below this.
    pub residual_tol: f64,
    /// Record every k-th state. The initial and final states are always kept.
    pub record_every: u64,
}

impl Default for DrdConfig {
    fn default() -> Self {
        DrdConfig {
            step: 1e-3,
            max_steps: 10_000_000,
            residual_tol: 1e-6,
            record_every: 100,
        }
    }
}

impl DrdConfig {
    pub fn with_step(step: f64) -> Self {
        DrdConfig {
            step,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
        }
        if self.residual_tol.is_nan() || self.residual_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "residual_tol must be > 0, got {}",
                self.residual_tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// How the default starting state is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// `w / n` for every agent.
    #[default]
    Uniform,
    /// Proportional to box widths, shifted so every share is positive.
    Proportional,
}

/// A strictly positive starting point on the simplex.
pub fn initial_state(p: &AllocationProblem, strategy: InitStrategy) -> Allocation {
    let n = p.n();
    let w = p.total();
    match strategy {
        InitStrategy::Uniform => Allocation(vec![w / n as f64; n]),
        InitStrategy::Proportional => {
            let widths: Vec<f64> = p.agents().iter().map(|c| c.width()).collect();
            let max = widths.iter().cloned().fold(0.0, f64::max);
            let shift = if max > 0.0 { 1e-3 * max } else { 1.0 };
            let weights: Vec<f64> = widths.iter().map(|u| u + shift).collect();
            let sum: f64 = weights.iter().sum();
            Allocation(weights.iter().map(|x| w * x / sum).collect())
        }
    }
}

/// Recorded run of the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    /// Step indices of the recorded samples, strictly increasing.
    pub times: Vec<u64>,
    pub states: Vec<Allocation>,
    pub costs: Vec<f64>,
    /// `C(W) - C(W*)`, present when a reference `W*` was supplied.
    pub lyapunov: Option<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Number of Euler steps taken.
    pub steps: u64,
    /// Whether any state left the boxes `[lower_i, upper_i]`.
    pub left_boxes: bool,
    pub final_state: Allocation,
}

impl Trajectory {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_cost(&self) -> f64 {
        self.costs.last().copied().unwrap_or(f64::NAN)
    }

    /// Largest `|sum W(t) - w|` over the recorded samples.
    pub fn max_sum_drift(&self, total: f64) -> f64 {
        self.states
            .iter()
            .map(|s| (s.sum() - total).abs())
            .fold(0.0, f64::max)
    }

    /// True when `series` never rises by more than `rel_tol` relative between samples.
    pub fn is_nonincreasing(series: &[f64], rel_tol: f64) -> bool {
        series
            .windows(2)
            .all(|w| w[1] <= w[0] + rel_tol * w[0].abs().max(1.0))
    }
}

/// Neighbor-local mean payoff `sum_{j in N_i} f_j(w_j) w_j / w`.
pub fn local_mean_fitness(p: &AllocationProblem, w: &Allocation, i: usize) -> Result<f64> {
    p.check_len(w)?;
    let neighbors = p.graph().neighbors(i)?;
    let s: f64 = neighbors
        .iter()
        .map(|&j| p.agent(j).fitness(w[j]) * w[j])
        .sum();
    Ok(s / p.total())
}

/// One synchronous Euler step.
pub fn drd_step(p: &AllocationProblem, w: &Allocation, dt: f64) -> Result<Allocation> {
    p.check_len(w)?;
    let fitness = fitness_vector(p, w.loads());
    advance(p, w.loads(), &fitness, dt, 0).map(Allocation)
}

/// Fitness spread among agents with positive mass:
/// `max_j f_j - min_{i : w_i > floor} f_i`, floored at zero.
pub fn nash_residual(p: &AllocationProblem, w: &Allocation) -> f64 {
    let fitness = fitness_vector(p, w.loads());
    residual_from(p, w.loads(), &fitness)
}

/// `V(W) = C(W) - C(W*)`.
pub fn lyapunov_value(p: &AllocationProblem, w: &Allocation, w_star: &Allocation) -> Result<f64> {
    Ok(p.total_cost(w)? - p.total_cost(w_star)?)
}

/// Iterates [`drd_step`] from `w0` until the Nash residual reaches the
/// tolerance or `max_steps` is exhausted.
pub fn simulate(p: &AllocationProblem, w0: &Allocation, cfg: &DrdConfig) -> Result<Trajectory> {
    run(p, w0, cfg, None)
}

/// As [`simulate`], also recording the Lyapunov value against `reference`.
pub fn simulate_with_reference(
    p: &AllocationProblem,
    w0: &Allocation,
    cfg: &DrdConfig,
    reference: &Allocation,
) -> Result<Trajectory> {
    p.check_len(reference)?;
    run(p, w0, cfg, Some(reference))
}

fn run(
    p: &AllocationProblem,
    w0: &Allocation,
    cfg: &DrdConfig,
    reference: Option<&Allocation>,
) -> Result<Trajectory> {
    cfg.validate()?;
    p.check_len(w0)?;
    if !p.in_simplex(w0, p.default_tol())? {
        return Err(Error::InvalidInitialState(format!(
            "initial state must lie on the simplex (sum {} vs total {})",
            w0.sum(),
            p.total()
        )));
    }
    if let Some(i) = w0.loads().iter().position(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::InvalidInitialState(format!(
            "agent {i} starts with nonpositive load {}; zero mass is absorbing",
            w0[i]
        )));
    }

    let reference_cost = reference.map(|r| p.cost_unchecked(r.loads()));
    let mut traj = Trajectory {
        dt: cfg.step,
        times: Vec::new(),
        states: Vec::new(),
        costs: Vec::new(),
        lyapunov: reference_cost.map(|_| Vec::new()),
        residuals: Vec::new(),
        converged: false,
        steps: 0,
        left_boxes: false,
        final_state: w0.clone(),
    };

    let mut state = w0.0.clone();
    let mut step: u64 = 0;
    loop {
        let fitness = fitness_vector(p, &state);
        let residual = residual_from(p, &state, &fitness);
        let done = residual <= cfg.residual_tol || step == cfg.max_steps;
        if !traj.left_boxes && p.agents().iter().zip(&state).any(|(c, &x)| !c.in_box(x)) {
            traj.left_boxes = true;
            log::info!("replicator state left the boxes at step {step}; costs evaluated outside [lower, upper]");
        }
        if step.is_multiple_of(cfg.record_every) || done {
            let cost = p.cost_unchecked(&state);
            traj.times.push(step);
            traj.costs.push(cost);
            traj.residuals.push(residual);
            if let (Some(v), Some(c_ref)) = (traj.lyapunov.as_mut(), reference_cost) {
                v.push(cost - c_ref);
            }
            traj.states.push(Allocation(state.clone()));
        }
        if done {
            traj.converged = residual <= cfg.residual_tol;
            break;
        }
        state = advance(p, &state, &fitness, cfg.step, step)?;
        step += 1;
    }
    traj.steps = step;
    traj.final_state = Allocation(state);
    Ok(traj)
}

fn fitness_vector(p: &AllocationProblem, loads: &[f64]) -> Vec<f64> {
    p.agents()
        .iter()
        .zip(loads)
        .map(|(c, &x)| c.fitness(x))
        .collect()
}

fn residual_from(p: &AllocationProblem, loads: &[f64], fitness: &[f64]) -> f64 {
    let floor = MASS_FLOOR_REL * p.total();
    let best = fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst_supported = loads
        .iter()
        .zip(fitness)
        .filter(|(&x, _)| x > floor)
        .map(|(_, &f)| f)
        .fold(f64::INFINITY, f64::min);
    if worst_supported.is_finite() {
        (best - worst_supported).max(0.0)
    } else {
        0.0
    }
}

fn advance(
    p: &AllocationProblem,
    loads: &[f64],
    fitness: &[f64],
    dt: f64,
    step: u64,
) -> Result<Vec<f64>> {
    let total = p.total();
    let g = p.graph();
    let mut next = Vec::with_capacity(loads.len());
    for (i, (&wi, &fi)) in loads.iter().zip(fitness).enumerate() {
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for &j in g.neighbors_of(i) {
            mass += loads[j];
            weighted += fitness[j] * loads[j];
        }
        let value = wi + dt * (wi / total) * (fi * mass - weighted);
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::StepOverflow {
                step,
                agent: i,
                value,
            });
        }
        next.push(value);
    }
    Ok(next)
}
