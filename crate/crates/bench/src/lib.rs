//! Deterministic instances of arbitrary size for the benchmarks.

use taskalloc::{AllocationProblem, CostModel, Graph};

/// Ring of `n` agents with staggered boxes, total halfway between the
/// lower and upper sums so roughly half the agents end up interior.
pub fn ring_instance(n: usize, exponential: bool) -> AllocationProblem {
    let agents: Vec<CostModel> = (0..n)
        .map(|i| {
            let k = (i % 7) as f64;
            let lower = 10.0 * k;
            let upper = lower + 50.0 + 15.0 * ((i * 3) % 5) as f64;
            if exponential {
                CostModel::exponential(100.0 + 40.0 * k, lower, upper).unwrap()
            } else {
                CostModel::quadratic(0.01 + 0.002 * k, 1.0 + 0.3 * k, lower, upper).unwrap()
            }
        })
        .collect();
    let lo: f64 = agents.iter().map(|c| c.lower()).sum();
    let hi: f64 = agents.iter().map(|c| c.upper()).sum();
    let graph = if n < 3 {
        Graph::path(n).unwrap()
    } else {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edge_list(n, &edges).unwrap()
    };
    AllocationProblem::new(graph, agents, 0.5 * (lo + hi)).unwrap()
}
