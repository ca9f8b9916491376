//! Splitting a graph into two sets with no edges between them plus a Hamilton
//! path on the rest.

use crate::graph::{ColouredGraph, View};
use crate::hamiltonicity::{is_path, longest_path_length, HamError, DP_CAP};
use crate::vertex_set::VertexSet;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathPartition {
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub path: Vec<usize>,
}

impl PathPartition {
    /// `|U| = |W|`, no `U–W` edges, `path` is a path, and the three pieces partition `V`.
    pub fn is_valid(&self, g: &ColouredGraph, view: View) -> bool {
        let n = g.n();
        let u = VertexSet::from_vertices(n, self.u.iter().copied());
        let w = VertexSet::from_vertices(n, self.w.iter().copied());
        let p = VertexSet::from_vertices(n, self.path.iter().copied());
        self.u.len() == self.w.len()
            && u.len() == self.u.len()
            && w.len() == self.w.len()
            && u.is_disjoint(&w)
            && p.is_disjoint(&u.union(&w))
            && u.len() + w.len() + self.path.len() == n
            && is_path(g, view, &self.path)
            && u.iter().all(|x| g.neighbours(x, view).is_disjoint(&w))
    }
}

/// Runs the greedy procedure on the vertices of `within` only.
///
/// Starting from `U = within`, `W = ∅` and an empty path, each step either
/// starts the path with the lowest vertex of `U`, extends it by the lowest
/// `U`-neighbour of its endpoint, or moves the endpoint to `W`. It stops once
/// `|U| <= |W|`.
pub fn partition_within(g: &ColouredGraph, view: View, within: &VertexSet) -> PathPartition {
    partition_traced(g, view, within).0
}

/// [`partition_within`] together with the progress measure `|U| - |W|` before
/// the first step and after every step.
pub fn partition_traced(g: &ColouredGraph, view: View, within: &VertexSet) -> (PathPartition, Vec<isize>) {
    let mut u = within.clone();
    let mut w = VertexSet::empty(g.n());
    let mut path: Vec<usize> = Vec::new();
    let mut trace = vec![u.len() as isize];
    while u.len() > w.len() {
        match path.last() {
            None => {
                let v = u.first().expect("U is larger than W, so nonempty");
                u.remove(v);
                path.push(v);
            }
            Some(&end) => match g.neighbours(end, view).intersection(&u).first() {
                Some(x) => {
                    u.remove(x);
                    path.push(x);
                }
                None => {
                    path.pop();
                    w.insert(end);
                }
            },
        }
        trace.push(u.len() as isize - w.len() as isize);
    }
    (PathPartition { u: u.to_vec(), w: w.to_vec(), path }, trace)
}

pub fn partition_empty_pair_path(g: &ColouredGraph, view: View) -> PathPartition {
    partition_within(g, view, &g.vertices())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorollaryError {
    #[error("premise violated: {0}")]
    Premise(String),
    #[error(transparent)]
    Ham(#[from] HamError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorollaryPair {
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    /// Whether the path piece had an odd number of vertices.
    pub odd_path: bool,
}

/// For a balanced bipartite view with no path of `k` edges: `X_i ⊆ V_i` of equal
/// size at least `(n - k)/4` with no edges between them.
///
/// The premise is checked exactly when `n <= DP_CAP`. Returns `Ok(None)` when the
/// derived sets miss the size bound, which can only happen for an odd path piece.
pub fn bipartite_corollary(
    g: &ColouredGraph,
    view: View,
    v1: &VertexSet,
    v2: &VertexSet,
    k: usize,
) -> Result<Option<CorollaryPair>, CorollaryError> {
    let n = g.n();
    if v1.len() != v2.len() || !v1.is_disjoint(v2) || v1.len() + v2.len() != n {
        return Err(CorollaryError::Premise("V1, V2 must be a balanced bipartition".into()));
    }
    for part in [v1, v2] {
        if part.iter().any(|v| !g.neighbours(v, view).is_disjoint(part)) {
            return Err(CorollaryError::Premise("an edge lies inside one side".into()));
        }
    }
    if n <= DP_CAP {
        let longest = longest_path_length(g, view)?;
        if longest >= k {
            return Err(CorollaryError::Premise(format!("a path of length {longest} >= {k} exists")));
        }
    }
    let pp = partition_empty_pair_path(g, view);
    let u = VertexSet::from_vertices(n, pp.u.iter().copied());
    let w = VertexSet::from_vertices(n, pp.w.iter().copied());
    let (u1, u2) = (u.intersection(v1), u.intersection(v2));
    let (w1, w2) = (w.intersection(v1), w.intersection(v2));
    let (x1, x2) = if u1.len() >= u2.len() { (u1, w2) } else { (w1, u2) };
    let t = x1.len().min(x2.len());
    let pair = CorollaryPair {
        x1: x1.iter().take(t).collect(),
        x2: x2.iter().take(t).collect(),
        odd_path: pp.path.len() % 2 == 1,
    };
    debug_assert!(pair.x1.iter().all(|&a| pair.x2.iter().all(|&b| !g.has_edge(a, b, view))));
    Ok((4 * t + k >= n).then_some(pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mark;

    #[test]
    fn empty_graph_trace() {
        let g = ColouredGraph::empty(4);
        let pp = partition_empty_pair_path(&g, View::Red);
        assert_eq!(pp, PathPartition { u: vec![2, 3], w: vec![0, 1], path: vec![] });
        assert!(pp.is_valid(&g, View::Red));
    }

    #[test]
    fn complete_graph_is_one_path() {
        let g = ColouredGraph::complete(4, Mark::Blue);
        let pp = partition_empty_pair_path(&g, View::Blue);
        assert!(pp.u.is_empty() && pp.w.is_empty());
        assert_eq!(pp.path, vec![0, 1, 2, 3]);
    }

    #[test]
    fn star_is_valid() {
        let g = ColouredGraph::from_edges(4, (1..4).map(|i| (0, i, Mark::Red)));
        let pp = partition_empty_pair_path(&g, View::Red);
        assert!(pp.is_valid(&g, View::Red));
    }

    fn bipartite(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> (ColouredGraph, VertexSet, VertexSet) {
        let n = 2 * m;
        let g = ColouredGraph::from_edges(n, edges.into_iter().map(|(a, b)| (a, m + b, Mark::Red)));
        (g, VertexSet::from_vertices(n, 0..m), VertexSet::from_vertices(n, m..n))
    }

    #[test]
    fn corollary_examples() {
        let m = 5;
        let (g, v1, v2) = bipartite(m, (0..m).map(|i| (i, i)));
        let pair = bipartite_corollary(&g, View::Red, &v1, &v2, 3).unwrap().unwrap();
        assert_eq!(pair.x1.len(), pair.x2.len());
        assert!(4 * pair.x1.len() + 3 >= 2 * m);

        let (g, v1, v2) = bipartite(4, (0..4).flat_map(|i| (0..4).map(move |j| (i, j))));
        assert!(matches!(bipartite_corollary(&g, View::Red, &v1, &v2, 6), Err(CorollaryError::Premise(_))));

        let (g, v1, v2) = bipartite(4, []);
        let pair = bipartite_corollary(&g, View::Red, &v1, &v2, 1).unwrap().unwrap();
        assert!(4 * pair.x1.len() + 1 >= 8);
    }
}
