//! File formats: the JSON problem file and the CSV traces.
//!
//! Problem file (edge labels are 1-based, as agents are numbered from 1):
//!
//! ```json
//! {"total": 1150,
//!  "graph": {"n": 3, "edges": [[1, 2], [2, 3]]},
//!  "agents": [{"family": "quadratic", "a": 0.006, "b": 5, "lower": 200, "upper": 350}, ...]}
//! ```

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::costs::{CostKind, CostModel, Family};
use crate::drd::Trajectory;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::problem::{Allocation, AllocationProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    total: f64,
    graph: GraphSection,
    agents: Vec<AgentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphSection {
    n: usize,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentEntry {
    family: Family,
    a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    lower: f64,
    upper: f64,
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<AllocationProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.graph.n;
    let mut edges = Vec::with_capacity(file.graph.edges.len());
    for (k, [i, j]) in file.graph.edges.iter().copied().enumerate() {
        if i == 0 || j == 0 {
            return Err(Error::Parse(format!(
                "graph.edges[{k}]: node labels are 1-based, found 0"
            )));
        }
        edges.push((i - 1, j - 1));
    }
    let graph = Graph::from_edge_list(n, &edges)?;
    let agents = file
        .agents
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let kind = match (e.family, e.b) {
                (Family::Exponential, None) => CostKind::Exponential { a: e.a },
                (Family::Quadratic, Some(b)) => CostKind::Quadratic { a: e.a, b },
                (Family::Exponential, Some(_)) => {
                    return Err(Error::Parse(format!(
                        "agents[{k}]: field `b` is only valid for the quadratic family"
                    )))
                }
                (Family::Quadratic, None) => {
                    return Err(Error::Parse(format!("agents[{k}]: missing field `b`")))
                }
            };
            CostModel::new(kind, e.lower, e.upper).map_err(|err| match err {
                Error::InvalidCost(m) => Error::InvalidCost(format!("agents[{k}]: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AllocationProblem::new(graph, agents, file.total)
}

/// Serializes a problem in the file format. Parsing the output gives back
/// an identical problem.
pub fn problem_to_json(p: &AllocationProblem) -> String {
    let file = ProblemFile {
        total: p.total(),
        graph: GraphSection {
            n: p.n(),
            edges: p
                .graph()
                .edges()
                .into_iter()
                .map(|(i, j)| [i + 1, j + 1])
                .collect(),
        },
        agents: p
            .agents()
            .iter()
            .map(|c| AgentEntry {
                family: c.family(),
                a: c.a(),
                b: c.b(),
                lower: c.lower(),
                upper: c.upper(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("problem file serializes")
}

/// Decimal rendering with at least 12 significant digits; scientific below 1e-4.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() < 1e-4 {
        let sci = format!("{x:.11e}");
        let short = format!("{x:e}");
        return if short.len() <= sci.len() { short } else { sci };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Exact values print no worse with the shortest round-trip form.
    let short = format!("{x}");
    if short.len() <= s.len() && short.parse::<f64>().ok() == Some(x) && !short.contains('e') {
        short
    } else {
        s
    }
}

/// Trajectory CSV: `step,t,w_1,...,w_n,C,V,residual`. `V` is empty when no
/// reference state was supplied.
pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> io::Result<()> {
    let n = traj.final_state.len();
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend((1..=n).map(|i| format!("w_{i}")));
    header.extend(["C", "V", "residual"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for (k, &step) in traj.times.iter().enumerate() {
        let mut row = vec![step.to_string(), fmt_num(step as f64 * traj.dt)];
        row.extend(traj.states[k].loads().iter().map(|&x| fmt_num(x)));
        row.push(fmt_num(traj.costs[k]));
        row.push(
            traj.lyapunov
                .as_ref()
                .map(|v| fmt_num(v[k]))
                .unwrap_or_default(),
        );
        row.push(fmt_num(traj.residuals[k]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Oracle dump: `sample_index,w_1,...,w_n,C`.
pub fn write_oracle_csv<W: Write>(
    out: &mut W,
    p: &AllocationProblem,
    samples: &[Allocation],
) -> io::Result<()> {
    let mut header = vec!["sample_index".to_string()];
    header.extend((1..=p.n()).map(|i| format!("w_{i}")));
    header.push("C".to_string());
    writeln!(out, "{}", header.join(","))?;
    for (k, w) in samples.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(w.loads().iter().map(|&x| fmt_num(x)));
        row.push(fmt_num(p.cost_unchecked(w.loads())));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
