//! Undirected, connected interaction topology.
//!
//! A [`Graph`] is validated once at construction (no self-loops, indices in
//! range, connected) and is immutable afterwards. Indices are 0-based.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Symmetric 0/1 adjacency over `n` agents with cached neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Duplicate edges (in either
    /// orientation) collapse to one.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[i * n + j]).collect())
            .collect();
        let g = Graph {
            n,
            adjacency,
            neighbors,
        };
        let reach = g.reachable_from_zero();
        if reach.iter().any(|r| !r) {
            let unreachable = (0..n).filter(|&i| !reach[i]).collect();
            return Err(Error::Disconnected { unreachable });
        }
        Ok(g)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::from_edge_list(n, &edges)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edge_list(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    /// Neighbor set `N_i`, ascending. Never contains `i`.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.neighbors
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::NodeOutOfRange { node: i, n: self.n })
    }

    /// Unchecked neighbor access for hot loops where `i < n` is already known.
    pub(crate) fn neighbors_of(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Edges as `(i, j)` with `i < j`, ordered lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| {
                self.neighbors[i]
                    .iter()
                    .filter(move |&&j| j > i)
                    .map(move |&j| (i, j))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Breadth-first reachability from node 0 over the stored adjacency.
    pub fn is_connected(&self) -> bool {
        self.reachable_from_zero().into_iter().all(|r| r)
    }

    /// Longest shortest-path distance between any two nodes.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .map(|s| self.bfs_depths(s).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn reachable_from_zero(&self) -> Vec<bool> {
        self.bfs_depths(0)
            .into_iter()
            .map(|d| d.is_some())
            .collect()
    }

    fn bfs_depths(&self, start: usize) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.n];
        let mut queue = VecDeque::new();
        depth[start] = Some(0);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let d = depth[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if depth[v].is_none() {
                    depth[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        depth
    }
}
