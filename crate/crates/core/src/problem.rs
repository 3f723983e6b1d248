//! The constrained allocation instance and allocation vectors.

use crate::costs::{CostModel, Family};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative set-membership tolerance, scaled by the total task.
pub const MEMBERSHIP_REL_TOL: f64 = 1e-6;

/// Per-agent task loads `W = (w_1, ..., w_n)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Allocation(pub Vec<f64>);

impl Allocation {
    pub fn new(loads: Vec<f64>) -> Self {
        Allocation(loads)
    }

    pub fn loads(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum in ascending index order.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Allocation) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Allocation) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for Allocation {
    fn from(v: Vec<f64>) -> Self {
        Allocation(v)
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Graph, per-agent costs with boxes, and the total task `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    graph: Graph,
    agents: Vec<CostModel>,
    total: f64,
}

impl AllocationProblem {
    pub fn new(graph: Graph, agents: Vec<CostModel>, total: f64) -> Result<Self> {
        if agents.len() != graph.n() {
            return Err(Error::LengthMismatch {
                expected: graph.n(),
                got: agents.len(),
            });
        }
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Infeasible(format!(
                "total task must be positive and finite, got {total}"
            )));
        }
        let lower: f64 = agents.iter().map(CostModel::lower).sum();
        let upper: f64 = agents.iter().map(CostModel::upper).sum();
        if lower > total {
            return Err(Error::Infeasible(format!(
                "sum of lower bounds {lower} exceeds total {total}"
            )));
        }
        if upper < total {
            return Err(Error::Infeasible(format!(
                "sum of upper bounds {upper} is below total {total}"
            )));
        }
        Ok(AllocationProblem {
            graph,
            agents,
            total,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn agents(&self) -> &[CostModel] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &CostModel {
        &self.agents[i]
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Default membership tolerance, `1e-6 * w`.
    pub fn default_tol(&self) -> f64 {
        MEMBERSHIP_REL_TOL * self.total
    }

    pub fn lower_sum(&self) -> f64 {
        self.agents.iter().map(CostModel::lower).sum()
    }

    pub fn upper_sum(&self) -> f64 {
        self.agents.iter().map(CostModel::upper).sum()
    }

    pub fn lower_bounds(&self) -> Allocation {
        Allocation(self.agents.iter().map(CostModel::lower).collect())
    }

    pub fn upper_bounds(&self) -> Allocation {
        Allocation(self.agents.iter().map(CostModel::upper).collect())
    }

    /// The common cost family, if every agent uses the same one.
    pub fn uniform_family(&self) -> Option<Family> {
        let first = self.agents.first()?.family();
        self.agents
            .iter()
            .all(|c| c.family() == first)
            .then_some(first)
    }

    /// The single feasible point when the total sits exactly on a bound sum.
    pub fn degenerate_point(&self) -> Option<Allocation> {
        if self.lower_sum() == self.total {
            Some(self.lower_bounds())
        } else if self.upper_sum() == self.total {
            Some(self.upper_bounds())
        } else {
            None
        }
    }

    pub fn check_len(&self, w: &Allocation) -> Result<()> {
        if w.len() == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n(),
                got: w.len(),
            })
        }
    }

    /// `C(W) = sum_i c_i(w_i)`.
    pub fn total_cost(&self, w: &Allocation) -> Result<f64> {
        self.check_len(w)?;
        Ok(self.cost_unchecked(w.loads()))
    }

    pub(crate) fn cost_unchecked(&self, loads: &[f64]) -> f64 {
        self.agents.iter().zip(loads).map(|(c, &x)| c.cost(x)).sum()
    }

    /// Membership in `S`: sum constraint and boxes, each within `tol`.
    pub fn in_feasible_set(&self, w: &Allocation, tol: f64) -> Result<bool> {
        self.check_len(w)?;
        let sum_ok = (w.sum() - self.total).abs() <= tol;
        let box_ok = self
            .agents
            .iter()
            .zip(w.loads())
            .all(|(c, &x)| x >= c.lower() - tol && x <= c.upper() + tol);
        Ok(sum_ok && box_ok)
    }

    /// Membership in the simplex `Δ`: nonnegative loads summing to `w`.
    pub fn in_simplex(&self, w: &Allocation, tol: f64) -> Result<bool> {
        self.check_len(w)?;
        Ok((w.sum() - self.total).abs() <= tol && w.loads().iter().all(|&x| x >= -tol))
    }

    /// Largest violation of the feasible-set constraints.
    pub fn feasibility_residual(&self, w: &Allocation) -> Result<f64> {
        self.check_len(w)?;
        let sum = (w.sum() - self.total).abs();
        let boxes = self
            .agents
            .iter()
            .zip(w.loads())
            .map(|(c, &x)| (c.lower() - x).max(x - c.upper()).max(0.0))
            .fold(0.0, f64::max);
        Ok(sum.max(boxes))
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::instances;

    #[test]
    fn fig2_cost_at_origin() {
        let p = instances::fig2();
        let c = p.total_cost(&Allocation(vec![0.0; 6])).unwrap();
        assert_relative_eq!(c, 6550.0, max_relative = 1e-15);
    }

    #[test]
    fn single_agent_cost() {
        let c = CostModel::quadratic(0.5, 1.0, 0.0, 10.0).unwrap();
        let p =
            AllocationProblem::new(Graph::from_edge_list(1, &[]).unwrap(), vec![c], 4.0).unwrap();
        assert_eq!(p.total_cost(&Allocation(vec![4.0])).unwrap(), c.cost(4.0));
    }

    #[test]
    fn feasible_set_membership() {
        let p = instances::tab1();
        let tol = p.default_tol();
        assert!(p
            .in_feasible_set(&Allocation(vec![350.0, 382.4, 417.6]), tol)
            .unwrap());
        assert!(!p
            .in_feasible_set(&Allocation(vec![200.0, 350.0, 410.0]), tol)
            .unwrap());
        assert!(matches!(
            p.in_feasible_set(&Allocation(vec![1.0]), tol),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn lower_vertex_is_feasible_when_tight() {
        let agents = vec![
            CostModel::quadratic(1.0, 1.0, 2.0, 5.0).unwrap(),
            CostModel::quadratic(1.0, 1.0, 3.0, 5.0).unwrap(),
        ];
        let p = AllocationProblem::new(Graph::path(2).unwrap(), agents, 5.0).unwrap();
        assert!(p
            .in_feasible_set(&p.lower_bounds(), p.default_tol())
            .unwrap());
        assert_eq!(p.degenerate_point(), Some(Allocation(vec![2.0, 3.0])));
    }

    #[test]
    fn simplex_membership() {
        let p = instances::tab3();
        let tol = p.default_tol();
        assert!(p
            .in_simplex(&Allocation(vec![1150.0, 0.0, 0.0]), tol)
            .unwrap());
        assert!(!p
            .in_simplex(&Allocation(vec![1160.0, -10.0, 0.0]), tol)
            .unwrap());
    }

    #[test]
    fn infeasible_instances_are_rejected() {
        let agents = vec![
            CostModel::quadratic(1.0, 1.0, 2.0, 5.0).unwrap(),
            CostModel::quadratic(1.0, 1.0, 3.0, 5.0).unwrap(),
        ];
        let g = Graph::path(2).unwrap();
        let low = AllocationProblem::new(g.clone(), agents.clone(), 4.0).unwrap_err();
        assert!(matches!(low, Error::Infeasible(ref m) if m.contains("lower")));
        let high = AllocationProblem::new(g.clone(), agents.clone(), 11.0).unwrap_err();
        assert!(matches!(high, Error::Infeasible(ref m) if m.contains("upper")));
        assert!(matches!(
            AllocationProblem::new(g, agents[..1].to_vec(), 4.0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn uniform_family_detection() {
        assert_eq!(
            instances::tab1().uniform_family(),
            Some(Family::Exponential)
        );
        let agents = vec![
            CostModel::quadratic(1.0, 1.0, 0.0, 5.0).unwrap(),
            CostModel::exponential(1.0, 0.0, 5.0).unwrap(),
        ];
        let p = AllocationProblem::new(Graph::path(2).unwrap(), agents, 4.0).unwrap();
        assert_eq!(p.uniform_family(), None);
    }
}
