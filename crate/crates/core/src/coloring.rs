//! Independent covers of (hyper)graphs.
//!
//! Two vertices conflict when they appear together in any edge, so every
//! color class holds at most one vertex of each edge.

use serde::{Deserialize, Serialize};

use crate::states::GraphSpec;

/// Vertex count up to which the chromatic number is found exactly.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringResult {
    /// Disjoint independent sets covering the vertices, each sorted ascending.
    pub sets: Vec<Vec<usize>>,
    /// False when the count came from the greedy heuristic (an upper bound).
    pub exact: bool,
}

impl ColoringResult {
    pub fn colors(&self) -> usize {
        self.sets.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    /// True if the sets partition `0..g.n` and no edge has two vertices in one set.
    pub fn is_valid_for(&self, g: &GraphSpec) -> bool {
        let mut color = vec![usize::MAX; g.n];
        for (c, set) in self.sets.iter().enumerate() {
            for &v in set {
                if v >= g.n || color[v] != usize::MAX {
                    return false;
                }
                color[v] = c;
            }
        }
        color.iter().all(|&c| c != usize::MAX)
            && g.edges.iter().all(|e| {
                let mut seen: Vec<usize> = e.vertices.iter().map(|&v| color[v]).collect();
                seen.sort_unstable();
                seen.windows(2).all(|w| w[0] != w[1])
            })
    }
}

pub fn adjacency(g: &GraphSpec) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; g.n]; g.n];
    for e in &g.edges {
        for &a in &e.vertices {
            for &b in &e.vertices {
                if a != b && a < g.n && b < g.n {
                    adj[a][b] = true;
                }
            }
        }
    }
    adj
}

fn extend(v: usize, k: usize, adj: &[Vec<bool>], color: &mut [usize], used: usize) -> bool {
    if v == color.len() {
        return true;
    }
    // New colors are introduced in order, which removes label symmetry.
    for c in 0..k.min(used + 1) {
        if (0..v).all(|u| !adj[v][u] || color[u] != c) {
            color[v] = c;
            if extend(v + 1, k, adj, color, used.max(c + 1)) {
                return true;
            }
        }
    }
    false
}

fn dsatur(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut color = vec![usize::MAX; n];
    for _ in 0..n {
        let sat = |v: usize| {
            let mut cs: Vec<usize> = (0..n).filter(|&u| adj[v][u] && color[u] != usize::MAX).map(|u| color[u]).collect();
            cs.sort_unstable();
            cs.dedup();
            cs.len()
        };
        let degree = |v: usize| adj[v].iter().filter(|&&a| a).count();
        let v = (0..n)
            .filter(|&v| color[v] == usize::MAX)
            .max_by(|&a, &b| (sat(a), degree(a), std::cmp::Reverse(a)).cmp(&(sat(b), degree(b), std::cmp::Reverse(b))))
            .expect("uncolored vertex remains");
        color[v] = (0..).find(|&c| (0..n).all(|u| !adj[v][u] || color[u] != c)).expect("some color is free");
    }
    color
}

/// Minimum coloring for small graphs, DSATUR beyond [`EXACT_LIMIT`] vertices.
pub fn color_graph(g: &GraphSpec) -> ColoringResult {
    let adj = adjacency(g);
    let (color, exact) = if g.n <= EXACT_LIMIT {
        let mut color = vec![0; g.n];
        let solved = (1..=g.n.max(1)).any(|k| extend(0, k, &adj, &mut color, 0));
        debug_assert!(solved, "n colors always suffice");
        (color, true)
    } else {
        (dsatur(&adj), false)
    };
    let k = color.iter().copied().max().map_or(0, |m| m + 1);
    let mut sets = vec![Vec::new(); k];
    for (v, &c) in color.iter().enumerate() {
        sets[c].push(v);
    }
    ColoringResult { sets, exact }
}
