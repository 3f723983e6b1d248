//! Non-iterative breakpoint solver for the box-constrained optimum.
//!
//! Every agent's clamped best response to a common marginal level λ is
//! constant below its lower breakpoint, constant above its upper breakpoint,
//! and affine in between once λ is expressed in the right coordinate (`ln λ`
//! for exponential costs, `λ` itself for quadratic costs). The aggregate
//! response is therefore piecewise linear in that coordinate, so sorting the
//! `2n` breakpoints, tabulating the aggregate at each, and interpolating
//! inside the bracket that contains `w` lands exactly on the optimum.
//!
//! Instances that mix families have no common linearizing coordinate and
//! fall back to bisection on λ.

use crate::costs::{CostKind, CostModel, Family};
use crate::error::{Error, Result};
use crate::problem::{Allocation, AllocationProblem};

/// Coordinate in which breakpoint keys are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyScale {
    /// Keys are `ln λ`.
    Log,
    /// Keys are `λ`.
    Linear,
}

impl KeyScale {
    pub fn for_family(family: Family) -> Self {
        match family {
            Family::Exponential => KeyScale::Log,
            Family::Quadratic => KeyScale::Linear,
        }
    }

    /// `Log` for all-exponential instances, `Linear` otherwise.
    pub fn for_problem(p: &AllocationProblem) -> Self {
        p.uniform_family()
            .map(Self::for_family)
            .unwrap_or(KeyScale::Linear)
    }

    pub fn to_lambda(self, key: f64) -> f64 {
        match self {
            KeyScale::Log => key.exp(),
            KeyScale::Linear => key,
        }
    }

    pub fn from_lambda(self, lambda: f64) -> f64 {
        match self {
            KeyScale::Log => lambda.ln(),
            KeyScale::Linear => lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Marginal level (in key coordinates) at which one agent's response switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub agent: usize,
    pub kind: BoundKind,
    pub key: f64,
}

/// Agent's breakpoint keys `(key at lower bound, key at upper bound)`.
fn agent_keys(c: &CostModel, scale: KeyScale) -> (f64, f64) {
    let (lo, hi) = c.marginal_range();
    (scale.from_lambda(lo), scale.from_lambda(hi))
}

/// Three-branch clamped response at `key`, compared against `keys`.
fn response(c: &CostModel, scale: KeyScale, keys: (f64, f64), key: f64) -> f64 {
    if key <= keys.0 {
        c.lower()
    } else if key >= keys.1 {
        c.upper()
    } else {
        let w = match scale {
            KeyScale::Log => c.inverse_marginal_log(key),
            KeyScale::Linear => c.inverse_marginal(key).unwrap_or(c.lower()),
        };
        w.clamp(c.lower(), c.upper())
    }
}

/// Sorted breakpoints with the aggregate allocation at each key.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointTable {
    pub scale: KeyScale,
    /// `2n` breakpoints ascending by key (stable for ties: agent order, lower first).
    pub sorted: Vec<Breakpoint>,
    /// `m_j`, the total clamped allocation at `sorted[j].key`.
    pub aggregates: Vec<f64>,
    /// `Slope[j -> j+1] = (L_{j+1} - L_j) / (m_{j+1} - m_j)`; `None` on zero-width brackets.
    pub slopes: Vec<Option<f64>>,
    /// Per-agent `(lower key, upper key)` used for the three-branch rule.
    pub agent_keys: Vec<(f64, f64)>,
}

impl BreakpointTable {
    pub fn keys(&self) -> Vec<f64> {
        self.sorted.iter().map(|b| b.key).collect()
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Index `j` of the bracket `[m_j, m_{j+1}]` holding `total`, skipping
    /// zero-width brackets. An exact hit on a table value yields that index.
    pub fn bracket(&self, total: f64) -> Option<usize> {
        if let Some(j) = self.aggregates.iter().position(|&m| m == total) {
            return Some(j);
        }
        (0..self.aggregates.len().saturating_sub(1)).find(|&j| {
            self.slopes[j].is_some()
                && self.aggregates[j] <= total
                && total <= self.aggregates[j + 1]
        })
    }
}

/// Breakpoint table in the family's natural coordinate.
pub fn breakpoints(p: &AllocationProblem) -> Result<BreakpointTable> {
    build_table(p, None)
}

/// Breakpoint table whose keys are rounded to `decimals` places before
/// tabulating, the convention used when tables are printed at fixed precision.
/// The interior formula still uses the exact coefficients.
pub fn breakpoints_rounded(p: &AllocationProblem, decimals: u32) -> Result<BreakpointTable> {
    build_table(p, Some(decimals))
}

fn build_table(p: &AllocationProblem, decimals: Option<u32>) -> Result<BreakpointTable> {
    let family = p.uniform_family().ok_or(Error::MixedFamilies)?;
    let scale = KeyScale::for_family(family);
    let round = |x: f64| match decimals {
        Some(d) => {
            let f = 10f64.powi(d as i32);
            (x * f).round() / f
        }
        None => x,
    };
    let agent_keys: Vec<(f64, f64)> = p
        .agents()
        .iter()
        .map(|c| {
            let (lo, hi) = agent_keys(c, scale);
            (round(lo), round(hi))
        })
        .collect();

    let mut sorted: Vec<Breakpoint> = agent_keys
        .iter()
        .enumerate()
        .flat_map(|(agent, &(lo, hi))| {
            [
                Breakpoint {
                    agent,
                    kind: BoundKind::Lower,
                    key: lo,
                },
                Breakpoint {
                    agent,
                    kind: BoundKind::Upper,
                    key: hi,
                },
            ]
        })
        .collect();
    sorted.sort_by(|a, b| a.key.total_cmp(&b.key));

    // Rounded keys can put the interior formula outside the box near a
    // breakpoint, so that table evaluates the clamped rule directly.
    let aggregates = match decimals {
        None => sweep_aggregates(p, scale, &sorted),
        Some(_) => None,
    }
    .unwrap_or_else(|| {
        sorted
            .iter()
            .map(|bp| aggregate_with_keys(p, scale, &agent_keys, bp.key))
            .collect()
    });
    let slopes = (0..sorted.len().saturating_sub(1))
        .map(|j| {
            let dm = aggregates[j + 1] - aggregates[j];
            (dm != 0.0).then(|| (sorted[j + 1].key - sorted[j].key) / dm)
        })
        .collect();
    Ok(BreakpointTable {
        scale,
        sorted,
        aggregates,
        slopes,
        agent_keys,
    })
}

/// Interior response written as `coef * key + intercept`; the inverse
/// marginal is affine in the scale's natural coordinate.
fn interior_affine(c: &CostModel, scale: KeyScale) -> Option<(f64, f64)> {
    match (c.kind(), scale) {
        (CostKind::Exponential { a }, KeyScale::Log) => {
            let u = c.width();
            Some((u, c.lower() + u * (u.ln() - a.ln())))
        }
        (CostKind::Quadratic { a, b }, KeyScale::Linear) => Some((1.0 / a, c.lower() - b / a)),
        _ => None,
    }
}

/// All `m_j` in one pass over the sorted breakpoints, keeping running sums
/// of the clamped loads and of the interior agents' affine coefficients.
fn sweep_aggregates(
    p: &AllocationProblem,
    scale: KeyScale,
    sorted: &[Breakpoint],
) -> Option<Vec<f64>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Low,
        Interior,
        High,
    }
    let affine: Vec<(f64, f64)> = p
        .agents()
        .iter()
        .map(|c| interior_affine(c, scale))
        .collect::<Option<_>>()?;
    let mut state = vec![State::Low; p.n()];
    let mut clamped = p.lower_sum();
    let (mut coef, mut intercept) = (0.0, 0.0);
    let mut out = Vec::with_capacity(sorted.len());
    let mut j = 0;
    while j < sorted.len() {
        let key = sorted[j].key;
        let end = j + sorted[j..].iter().take_while(|bp| bp.key == key).count();
        // At the key itself an upper breakpoint already clamps high, a lower one still clamps low.
        for bp in sorted[j..end]
            .iter()
            .filter(|bp| bp.kind == BoundKind::Upper)
        {
            let (i, c) = (bp.agent, p.agent(bp.agent));
            match state[i] {
                State::Low => clamped -= c.lower(),
                State::Interior => {
                    coef -= affine[i].0;
                    intercept -= affine[i].1;
                }
                State::High => continue,
            }
            clamped += c.upper();
            state[i] = State::High;
        }
        let m = clamped + coef * key + intercept;
        out.extend(std::iter::repeat_n(m, end - j));
        for bp in sorted[j..end]
            .iter()
            .filter(|bp| bp.kind == BoundKind::Lower)
        {
            let i = bp.agent;
            if state[i] == State::Low {
                clamped -= p.agent(i).lower();
                coef += affine[i].0;
                intercept += affine[i].1;
                state[i] = State::Interior;
            }
        }
        j = end;
    }
    Some(out)
}

fn aggregate_with_keys(
    p: &AllocationProblem,
    scale: KeyScale,
    keys: &[(f64, f64)],
    key: f64,
) -> f64 {
    p.agents()
        .iter()
        .zip(keys)
        .map(|(c, &k)| response(c, scale, k, key))
        .sum()
}

/// Total clamped allocation at `key` (coordinate from [`KeyScale::for_problem`]).
pub fn aggregate_allocation(p: &AllocationProblem, key: f64) -> f64 {
    let scale = KeyScale::for_problem(p);
    p.agents()
        .iter()
        .map(|c| response(c, scale, agent_keys(c, scale), key))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Interpolation inside a breakpoint bracket.
    Breakpoint,
    /// Total equals a bound sum; the bound vector is the only feasible point.
    Degenerate,
    /// Bisection on λ for mixed-family instances.
    Bisection,
}

/// Clamped allocation at a marginal level with its active-set partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub allocation: Allocation,
    pub scale: KeyScale,
    /// Water level in key coordinates (`ln λ` or `λ`).
    pub key: f64,
    /// Bracket index `J` when the breakpoint path was used.
    pub bracket: Option<usize>,
    pub method: SolveMethod,
    /// Agents pinned at their lower bound (`I`).
    pub active_lower: Vec<usize>,
    /// Agents pinned at their upper bound (`J`).
    pub active_upper: Vec<usize>,
    /// Agents strictly inside their box (`K`).
    pub interior: Vec<usize>,
}

impl SolverResult {
    pub fn lambda(&self) -> f64 {
        self.scale.to_lambda(self.key)
    }

    /// Whether every agent is interior, i.e. the result is the Nash equilibrium.
    pub fn all_interior(&self) -> bool {
        self.active_lower.is_empty() && self.active_upper.is_empty()
    }
}

/// Clamped allocation at `key` (coordinate from [`KeyScale::for_problem`]).
pub fn allocate_from_lambda(p: &AllocationProblem, key: f64) -> SolverResult {
    let scale = KeyScale::for_problem(p);
    allocate(p, scale, key, None, SolveMethod::Breakpoint)
}

fn allocate(
    p: &AllocationProblem,
    scale: KeyScale,
    key: f64,
    bracket: Option<usize>,
    method: SolveMethod,
) -> SolverResult {
    let mut loads = Vec::with_capacity(p.n());
    let (mut lower, mut upper, mut interior) = (Vec::new(), Vec::new(), Vec::new());
    for (i, c) in p.agents().iter().enumerate() {
        let keys = agent_keys(c, scale);
        if key <= keys.0 {
            lower.push(i);
        } else if key >= keys.1 {
            upper.push(i);
        } else {
            interior.push(i);
        }
        loads.push(response(c, scale, keys, key));
    }
    SolverResult {
        allocation: Allocation(loads),
        scale,
        key,
        bracket,
        method,
        active_lower: lower,
        active_upper: upper,
        interior,
    }
}

/// Globally optimal allocation of the box-constrained problem.
pub fn solve_lambda(p: &AllocationProblem) -> Result<SolverResult> {
    let total = p.total();
    let (lo_sum, hi_sum) = (p.lower_sum(), p.upper_sum());
    if lo_sum > total || hi_sum < total {
        return Err(Error::Infeasible(format!(
            "total {total} outside [{lo_sum}, {hi_sum}]"
        )));
    }
    let scale = KeyScale::for_problem(p);
    if let Some(point) = p.degenerate_point() {
        let at_lower = lo_sum == total;
        let keys = p.agents().iter().map(|c| agent_keys(c, scale));
        let key = if at_lower {
            keys.map(|k| k.0).fold(f64::INFINITY, f64::min)
        } else {
            keys.map(|k| k.1).fold(f64::NEG_INFINITY, f64::max)
        };
        let all: Vec<usize> = (0..p.n()).collect();
        let (active_lower, active_upper) = if at_lower {
            (all, vec![])
        } else {
            (vec![], all)
        };
        return Ok(SolverResult {
            allocation: point,
            scale,
            key,
            bracket: None,
            method: SolveMethod::Degenerate,
            active_lower,
            active_upper,
            interior: vec![],
        });
    }
    if p.uniform_family().is_none() {
        return Ok(bisect(p));
    }

    let table = breakpoints(p)?;
    let j = table
        .bracket(total)
        .ok_or(Error::DegenerateBracket { total })?;
    let key = if table.aggregates[j] == total {
        table.sorted[j].key
    } else {
        let slope = table.slopes[j].ok_or(Error::DegenerateBracket { total })?;
        slope * (total - table.aggregates[j]) + table.sorted[j].key
    };
    Ok(allocate(p, scale, key, Some(j), SolveMethod::Breakpoint))
}

/// Monotone root-find of `sum_i clamp(response_i(λ)) = w`.
fn bisect(p: &AllocationProblem) -> SolverResult {
    let total = p.total();
    let scale = KeyScale::Linear;
    let ranges: Vec<(f64, f64)> = p.agents().iter().map(CostModel::marginal_range).collect();
    let mut lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let mut hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let target = 1e-10 * total;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let gap = aggregate_allocation(p, mid) - total;
        if gap.abs() <= target {
            break;
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    allocate(p, scale, mid, None, SolveMethod::Bisection)
}

/// Relative difference in total cost below which two candidates count as tied.
pub const TIE_REL_TOL: f64 = 1e-9;

/// Which candidate the final comparison picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    /// The replicator limit `W*`.
    Nash,
    /// The clamped solver output `W°`.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    /// Accumulation rounds; `None` means graph diameter + 1.
    pub rounds: Option<usize>,
    /// Cross-check the accumulated comparison against direct total costs.
    pub sanity_check: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            rounds: None,
            sanity_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Candidate,
    pub allocation: Allocation,
    pub rounds: usize,
    /// Node-0 accumulators for `W*` and `W°` after `rounds` rounds.
    pub accumulated: (f64, f64),
    /// `C(W*)` and `C(W°)`.
    pub totals: (f64, f64),
    /// Whether `W*` lies in the feasible set.
    pub nash_feasible: bool,
    /// Whether the accumulated and the direct comparison agree.
    pub agreed: bool,
}

/// Picks between the replicator limit and the clamped solution by comparing
/// per-agent costs after `rounds` rounds of adjacency accumulation
/// `C[i] <- sum_j A[i][j] C[j]`, read at node 0.
///
/// An infeasible `W*` is never selected.
pub fn compare_and_select(
    p: &AllocationProblem,
    w_star: &Allocation,
    w_o: &Allocation,
    cfg: &CompareConfig,
) -> Result<Selection> {
    p.check_len(w_star)?;
    p.check_len(w_o)?;
    let rounds = cfg.rounds.unwrap_or_else(|| p.graph().diameter() + 1);
    let per_agent = |w: &Allocation| -> Vec<f64> {
        p.agents()
            .iter()
            .zip(w.loads())
            .map(|(c, &x)| c.cost(x))
            .collect()
    };
    let mut c1 = per_agent(w_star);
    let mut c2 = per_agent(w_o);
    let g = p.graph();
    for _ in 0..rounds {
        c1 = (0..p.n())
            .map(|i| g.neighbors_of(i).iter().map(|&j| c1[j]).sum())
            .collect();
        c2 = (0..p.n())
            .map(|i| g.neighbors_of(i).iter().map(|&j| c2[j]).sum())
            .collect();
    }
    let accumulated = (c1[0], c2[0]);
    let totals = (
        p.cost_unchecked(w_star.loads()),
        p.cost_unchecked(w_o.loads()),
    );
    let by_accumulated = if accumulated.0 <= accumulated.1 {
        Candidate::Nash
    } else {
        Candidate::Clamped
    };
    let by_total = if totals.0 <= totals.1 {
        Candidate::Nash
    } else {
        Candidate::Clamped
    };
    // Candidates whose totals tie to rounding are interchangeable.
    let tie = (totals.0 - totals.1).abs() <= TIE_REL_TOL * totals.0.abs().max(totals.1.abs());
    let agreed = tie || by_accumulated == by_total;
    let nash_feasible = p.in_feasible_set(w_star, p.default_tol())?;

    let chosen = if !nash_feasible {
        Candidate::Clamped
    } else if cfg.sanity_check && !agreed {
        log::warn!(
            "accumulated comparison ({:.6e} vs {:.6e}) disagrees with total costs ({:.6e} vs {:.6e}); using total costs",
            accumulated.0,
            accumulated.1,
            totals.0,
            totals.1
        );
        by_total
    } else {
        by_accumulated
    };
    let allocation = match chosen {
        Candidate::Nash => w_star.clone(),
        Candidate::Clamped => w_o.clone(),
    };
    Ok(Selection {
        chosen,
        allocation,
        rounds,
        accumulated,
        totals,
        nash_feasible,
        agreed,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::graph::Graph;
    use crate::instances;

    #[test]
    fn single_agent_table() {
        let c = CostModel::quadratic(0.5, 1.0, 2.0, 6.0).unwrap();
        let p =
            AllocationProblem::new(Graph::from_edge_list(1, &[]).unwrap(), vec![c], 4.0).unwrap();
        let t = breakpoints(&p).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.aggregates, vec![2.0, 6.0]);
        let r = solve_lambda(&p).unwrap();
        assert_relative_eq!(r.allocation[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn table_endpoints_are_bound_sums() {
        for p in [instances::tab1(), instances::tab3(), instances::fig3()] {
            let t = breakpoints(&p).unwrap();
            assert_eq!(t.aggregates[0], p.lower_sum());
            assert_relative_eq!(
                *t.aggregates.last().unwrap(),
                p.upper_sum(),
                max_relative = 1e-12
            );
            assert!(t.aggregates.windows(2).all(|w| w[0] <= w[1]));
            for (c, k) in p.agents().iter().zip(&t.agent_keys) {
                assert!(k.0 <= k.1, "{c:?}");
            }
        }
    }

    #[test]
    fn aggregate_at_extremes() {
        let p = instances::tab1();
        assert_eq!(aggregate_allocation(&p, 1.897), 960.0);
        assert_eq!(aggregate_allocation(&p, -100.0), 960.0);
        let q = instances::tab3();
        assert_relative_eq!(aggregate_allocation(&q, 6.9), 1370.0, epsilon = 1e-9);
        assert_eq!(aggregate_allocation(&q, 100.0), 1370.0);
    }

    #[test]
    fn mixed_families_need_bisection() {
        let agents = vec![
            CostModel::quadratic(0.01, 5.0, 100.0, 300.0).unwrap(),
            CostModel::exponential(1000.0, 100.0, 300.0).unwrap(),
        ];
        let p = AllocationProblem::new(Graph::path(2).unwrap(), agents, 380.0).unwrap();
        assert_eq!(breakpoints(&p).unwrap_err(), Error::MixedFamilies);
        let r = solve_lambda(&p).unwrap();
        assert_eq!(r.method, SolveMethod::Bisection);
        assert!((r.allocation.sum() - 380.0).abs() <= 1e-9 * 380.0);
        for &i in &r.interior {
            let m = p.agent(i).marginal(r.allocation[i]);
            assert_relative_eq!(m, r.lambda(), max_relative = 1e-8);
        }
    }

    #[test]
    fn degenerate_totals_return_bounds() {
        let agents = vec![
            CostModel::quadratic(0.01, 5.0, 100.0, 300.0).unwrap(),
            CostModel::quadratic(0.02, 4.0, 50.0, 250.0).unwrap(),
        ];
        let g = Graph::path(2).unwrap();
        let p = AllocationProblem::new(g.clone(), agents.clone(), 150.0).unwrap();
        let r = solve_lambda(&p).unwrap();
        assert_eq!(r.allocation, p.lower_bounds());
        assert_eq!(r.method, SolveMethod::Degenerate);
        let p = AllocationProblem::new(g, agents, 550.0).unwrap();
        assert_eq!(solve_lambda(&p).unwrap().allocation, p.upper_bounds());
    }

    #[test]
    fn allocation_below_all_breakpoints() {
        let p = instances::tab3();
        let r = allocate_from_lambda(&p, 0.0);
        assert_eq!(r.allocation, p.lower_bounds());
        assert_eq!(r.active_lower, vec![0, 1, 2]);
    }

    #[test]
    fn exponential_upper_clamp() {
        let p = instances::tab1();
        let r = allocate_from_lambda(&p, 2.931);
        assert_eq!(r.active_upper, vec![0]);
        assert_eq!(r.interior, vec![1, 2]);
        assert_eq!(r.allocation[0], 350.0);
        for &i in &r.interior {
            assert_relative_eq!(
                p.agent(i).marginal(r.allocation[i]).ln(),
                2.931,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn duplicate_keys_skip_zero_width_brackets() {
        // Two identical agents share both breakpoints.
        let c = CostModel::quadratic(0.01, 5.0, 100.0, 300.0).unwrap();
        let p = AllocationProblem::new(Graph::path(2).unwrap(), vec![c, c], 400.0).unwrap();
        let t = breakpoints(&p).unwrap();
        assert_eq!(t.slopes[0], None);
        assert_eq!(t.slopes[2], None);
        let r = solve_lambda(&p).unwrap();
        assert_eq!(r.bracket, Some(1));
        assert_relative_eq!(r.allocation[0], 200.0, epsilon = 1e-9);
        assert_relative_eq!(r.allocation[1], 200.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_table_hit_avoids_interpolation() {
        let p = instances::tab3();
        let t = breakpoints(&p).unwrap();
        let hit = AllocationProblem::new(p.graph().clone(), p.agents().to_vec(), t.aggregates[2])
            .unwrap();
        let r = solve_lambda(&hit).unwrap();
        assert_eq!(r.bracket, Some(2));
        assert_eq!(r.key, t.sorted[2].key);
    }

    #[test]
    fn compare_identical_candidates() {
        let p = instances::tab3();
        let w = solve_lambda(&p).unwrap().allocation;
        for rounds in [0usize, 1, 5] {
            let s = compare_and_select(
                &p,
                &w,
                &w,
                &CompareConfig {
                    rounds: Some(rounds),
                    sanity_check: true,
                },
            )
            .unwrap();
            assert_eq!(s.allocation, w);
            assert!(s.agreed);
        }
    }

    #[test]
    fn compare_treats_rounding_ties_as_agreement() {
        let p = instances::fig3();
        let w_o = solve_lambda(&p).unwrap().allocation;
        let mut near = w_o.clone();
        near.0[0] += 1e-6;
        near.0[5] -= 1e-6;
        let s = compare_and_select(&p, &near, &w_o, &CompareConfig::default()).unwrap();
        assert!(s.agreed);
    }

    #[test]
    fn compare_rejects_infeasible_nash() {
        let p = instances::tab1();
        let w_o = solve_lambda(&p).unwrap().allocation;
        // Unconstrained equal-marginal point on the simplex violates agent 1's upper bound.
        let w_star = Allocation(vec![400.0, 360.0, 390.0]);
        let s = compare_and_select(&p, &w_star, &w_o, &CompareConfig::default()).unwrap();
        assert!(!s.nash_feasible);
        assert_eq!(s.chosen, Candidate::Clamped);
        assert_eq!(s.allocation, w_o);
        assert_eq!(s.rounds, 3);
    }

    #[test]
    fn compare_complete_graph_one_round() {
        // On K_3 one round gives node 0 the sum of the other two costs.
        let c = CostModel::quadratic(0.01, 1.0, 0.0, 100.0).unwrap();
        let p = AllocationProblem::new(Graph::complete(3).unwrap(), vec![c, c, c], 90.0).unwrap();
        let a = Allocation(vec![30.0, 30.0, 30.0]);
        let b = Allocation(vec![30.0, 50.0, 10.0]);
        let s = compare_and_select(
            &p,
            &a,
            &b,
            &CompareConfig {
                rounds: Some(1),
                sanity_check: true,
            },
        )
        .unwrap();
        assert_relative_eq!(s.accumulated.0, 2.0 * c.cost(30.0));
        assert_relative_eq!(s.accumulated.1, c.cost(50.0) + c.cost(10.0));
        assert_eq!(s.chosen, Candidate::Nash);
        assert!(s.agreed);
        assert!(matches!(
            compare_and_select(&p, &Allocation(vec![1.0]), &b, &CompareConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn sweep_matches_direct_evaluation(
            boxes in proptest::collection::vec((0.0f64..500.0, 0.0f64..200.0, 0.01f64..5.0), 1..40),
            exponential in proptest::bool::ANY,
            t in 0.0f64..1.0,
        ) {
            let agents: Vec<CostModel> = boxes
                .iter()
                .map(|&(l, wdt, k)| if exponential {
                    CostModel::exponential(100.0 * k, l, l + wdt + 1.0).unwrap()
                } else {
                    CostModel::quadratic(0.01 * k, k, l, l + wdt).unwrap()
                })
                .collect();
            let lo: f64 = agents.iter().map(|c| c.lower()).sum();
            let hi: f64 = agents.iter().map(|c| c.upper()).sum();
            proptest::prop_assume!(hi > 0.0);
            let total = (lo + t * (hi - lo)).max(1e-9);
            let p = AllocationProblem::new(Graph::path(agents.len()).unwrap(), agents, total).unwrap();
            let table = breakpoints(&p).unwrap();
            for (bp, &m) in table.sorted.iter().zip(&table.aggregates) {
                let direct = aggregate_with_keys(&p, table.scale, &table.agent_keys, bp.key);
                proptest::prop_assert!((m - direct).abs() <= 1e-9 * hi.max(1.0), "{} vs {}", m, direct);
            }
        }
    }
}
