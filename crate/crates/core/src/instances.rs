//! Built-in benchmark instances.
//!
//! `fig2`/`fig3` live on the six-agent topology and have their Nash
//! equilibrium inside the feasible set; `tab1`/`tab3` live on the
//! three-agent path and need box clamping.

use std::str::FromStr;

use crate::costs::CostModel;
use crate::error::Error;
use crate::graph::Graph;
use crate::problem::AllocationProblem;

/// Edges of the six-agent topology (0-based).
pub const SIX_AGENT_EDGES: [(usize, usize); 8] = [
    (0, 1),
    (0, 2),
    (1, 2),
    (1, 3),
    (2, 4),
    (3, 4),
    (3, 5),
    (4, 5),
];

pub fn six_agent_graph() -> Graph {
    Graph::from_edge_list(6, &SIX_AGENT_EDGES).expect("static topology is connected")
}

pub fn three_agent_path() -> Graph {
    Graph::path(3).expect("static topology is connected")
}

/// Exponential costs with zero lower bounds and `a_i = upper_i`, `w = 2800`.
pub fn fig2() -> AllocationProblem {
    let upper = [750.0, 800.0, 1400.0, 1000.0, 900.0, 1700.0];
    let agents = upper
        .iter()
        .map(|&u| CostModel::exponential(u, 0.0, u).expect("valid"))
        .collect();
    AllocationProblem::new(six_agent_graph(), agents, 2800.0).expect("feasible")
}

/// Quadratic costs on the six-agent topology, `w = 2800`.
pub fn fig3() -> AllocationProblem {
    let lower = [700.0, 350.0, 200.0, 50.0, 40.0, 200.0];
    let upper = [980.0, 580.0, 350.0, 170.0, 150.0, 790.0];
    let a = [0.006, 0.008, 0.01, 0.012, 0.0132, 0.00136];
    let b = [0.4, 0.2, 0.5, 0.56, 0.828, 0.88];
    let agents = (0..6)
        .map(|i| CostModel::quadratic(a[i], b[i], lower[i], upper[i]).expect("valid"))
        .collect();
    AllocationProblem::new(six_agent_graph(), agents, 2800.0).expect("feasible")
}

/// Three exponential agents on a path, `w = 1150`.
pub fn tab1() -> AllocationProblem {
    let agents = vec![
        CostModel::exponential(1000.0, 200.0, 350.0).expect("valid"),
        CostModel::exponential(1900.0, 350.0, 480.0).expect("valid"),
        CostModel::exponential(2300.0, 410.0, 540.0).expect("valid"),
    ];
    AllocationProblem::new(three_agent_path(), agents, 1150.0).expect("feasible")
}

/// Three quadratic agents on a path, `w = 1150`; coefficients given in the
/// `alpha (w - lower)^2 + b w` form.
pub fn tab3() -> AllocationProblem {
    let agents = vec![
        CostModel::quadratic_from_alpha(0.003, 5.0, 200.0, 350.0).expect("valid"),
        CostModel::quadratic_from_alpha(0.004, 5.4, 350.0, 480.0).expect("valid"),
        CostModel::quadratic_from_alpha(0.005, 5.6, 410.0, 540.0).expect("valid"),
    ];
    AllocationProblem::new(three_agent_path(), agents, 1150.0).expect("feasible")
}

/// Identifier of a built-in instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    Fig2,
    Fig3,
    Tab1,
    Tab3,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [
        ExampleId::Fig2,
        ExampleId::Fig3,
        ExampleId::Tab1,
        ExampleId::Tab3,
    ];

    pub fn problem(self) -> AllocationProblem {
        match self {
            ExampleId::Fig2 => fig2(),
            ExampleId::Fig3 => fig3(),
            ExampleId::Tab1 => tab1(),
            ExampleId::Tab3 => tab3(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Fig2 => "fig2",
            ExampleId::Fig3 => "fig3",
            ExampleId::Tab1 => "tab1",
            ExampleId::Tab3 => "tab3",
        }
    }

    /// Step size used for the replicator runs on this instance.
    pub fn default_dt(self) -> f64 {
        match self {
            ExampleId::Fig2 => 1e-4,
            ExampleId::Fig3 | ExampleId::Tab1 | ExampleId::Tab3 => 1e-3,
        }
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(ExampleId::Fig2),
            "fig3" => Ok(ExampleId::Fig3),
            "tab1" => Ok(ExampleId::Tab1),
            "tab3" => Ok(ExampleId::Tab3),
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
