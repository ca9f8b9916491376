//! Two-coloured simple graphs on dense vertex ids `0..n`.

use crate::vertex_set::VertexSet;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Colour {
    Red,
    Blue,
}

impl Colour {
    pub fn other(self) -> Colour {
        match self {
            Colour::Red => Colour::Blue,
            Colour::Blue => Colour::Red,
        }
    }
}

/// Which edges a query sees: one colour class, or every coloured pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum View {
    Red,
    Blue,
    Union,
}

impl From<Colour> for View {
    fn from(c: Colour) -> View {
        match c {
            Colour::Red => View::Red,
            Colour::Blue => View::Blue,
        }
    }
}

/// Colour mark carried by an unordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mark {
    #[default]
    None,
    Red,
    Blue,
    Both,
}

impl Mark {
    pub fn from_flags(red: bool, blue: bool) -> Mark {
        match (red, blue) {
            (false, false) => Mark::None,
            (true, false) => Mark::Red,
            (false, true) => Mark::Blue,
            (true, true) => Mark::Both,
        }
    }

    pub fn is_red(self) -> bool {
        matches!(self, Mark::Red | Mark::Both)
    }

    pub fn is_blue(self) -> bool {
        matches!(self, Mark::Blue | Mark::Both)
    }

    pub fn in_view(self, view: View) -> bool {
        match view {
            View::Red => self.is_red(),
            View::Blue => self.is_blue(),
            View::Union => self != Mark::None,
        }
    }

    pub fn tag(self) -> Option<&'static str> {
        match self {
            Mark::None => None,
            Mark::Red => Some("R"),
            Mark::Blue => Some("B"),
            Mark::Both => Some("RB"),
        }
    }

    pub fn from_tag(tag: &str) -> Option<Mark> {
        match tag {
            "R" => Some(Mark::Red),
            "B" => Some(Mark::Blue),
            "RB" => Some(Mark::Both),
            _ => None,
        }
    }
}

impl From<Colour> for Mark {
    fn from(c: Colour) -> Mark {
        match c {
            Colour::Red => Mark::Red,
            Colour::Blue => Mark::Blue,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("malformed graph JSON: {0}")]
    Malformed(String),
    #[error("vertex {vertex} out of range for n = {n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("pair ({u}, {v}) listed more than once; use \"RB\" for a double-coloured edge")]
    DuplicatePair { u: usize, v: usize },
    #[error("unknown colour tag {0:?}; expected \"R\", \"B\" or \"RB\"")]
    BadColour(String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("no graph on {n} vertices has minimum degree {delta}")]
    InfeasibleDegree { n: usize, delta: usize },
}

impl GraphError {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Empty => "empty-graph",
            GraphError::Malformed(_) => "malformed",
            GraphError::OutOfRange { .. } => "out-of-range",
            GraphError::DuplicatePair { .. } => "duplicate-pair",
            GraphError::BadColour(_) => "bad-colour",
            GraphError::SelfLoop(_) => "self-loop",
            GraphError::InfeasibleDegree { .. } => "infeasible-degree",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColouredGraph {
    n: usize,
    red: Vec<VertexSet>,
    blue: Vec<VertexSet>,
}

impl std::fmt::Debug for ColouredGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ColouredGraph({})", self.to_json())
    }
}

impl ColouredGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        ColouredGraph { n, red: vec![VertexSet::empty(n); n], blue: vec![VertexSet::empty(n); n] }
    }

    /// Complete graph with every pair carrying `mark`.
    pub fn complete(n: usize, mark: Mark) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_mark(u, v, mark);
            }
        }
        g
    }

    /// Builds a graph from `(u, v, mark)` triples. Later triples overwrite earlier ones.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize, Mark)>>(n: usize, edges: I) -> Self {
        let mut g = Self::empty(n);
        for (u, v, m) in edges {
            g.set_mark(u, v, m);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Sets the mark on `{u, v}`; panics on a self-loop or an out-of-range id.
    pub fn set_mark(&mut self, u: usize, v: usize, mark: Mark) {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n && v < self.n, "pair ({u}, {v}) out of range for n = {}", self.n);
        let (r, b) = (mark.is_red(), mark.is_blue());
        for (rows, on) in [(&mut self.red, r), (&mut self.blue, b)] {
            if on {
                rows[u].insert(v);
                rows[v].insert(u);
            } else {
                rows[u].remove(v);
                rows[v].remove(u);
            }
        }
    }

    /// Adds `colour` to the pair, keeping any colour it already has.
    pub fn add_colour(&mut self, u: usize, v: usize, colour: Colour) {
        let m = self.mark(u, v);
        let m = match colour {
            Colour::Red => Mark::from_flags(true, m.is_blue()),
            Colour::Blue => Mark::from_flags(m.is_red(), true),
        };
        self.set_mark(u, v, m);
    }

    pub fn mark(&self, u: usize, v: usize) -> Mark {
        if u >= self.n || v >= self.n || u == v {
            return Mark::None;
        }
        Mark::from_flags(self.red[u].contains(v), self.blue[u].contains(v))
    }

    pub fn has_edge(&self, u: usize, v: usize, view: View) -> bool {
        self.mark(u, v).in_view(view)
    }

    /// Neighbourhood of `v` in `view`.
    pub fn neighbours(&self, v: usize, view: View) -> VertexSet {
        match view {
            View::Red => self.red[v].clone(),
            View::Blue => self.blue[v].clone(),
            View::Union => self.red[v].union(&self.blue[v]),
        }
    }

    /// Borrowed neighbourhood for a single colour.
    pub fn colour_row(&self, v: usize, colour: Colour) -> &VertexSet {
        match colour {
            Colour::Red => &self.red[v],
            Colour::Blue => &self.blue[v],
        }
    }

    pub fn degree(&self, v: usize, view: View) -> usize {
        match view {
            View::Red => self.red[v].len(),
            View::Blue => self.blue[v].len(),
            View::Union => self.red[v].len() + self.blue[v].len() - self.red[v].intersection_len(&self.blue[v]),
        }
    }

    /// Degree of `v` into `s`.
    pub fn degree_into(&self, v: usize, s: &VertexSet, view: View) -> usize {
        match view {
            View::Red => self.red[v].intersection_len(s),
            View::Blue => self.blue[v].intersection_len(s),
            View::Union => self.neighbours(v, View::Union).intersection_len(s),
        }
    }

    pub fn min_degree(&self, view: View) -> Result<usize, GraphError> {
        (0..self.n).map(|v| self.degree(v, view)).min().ok_or(GraphError::Empty)
    }

    pub fn max_degree(&self, view: View) -> Result<usize, GraphError> {
        (0..self.n).map(|v| self.degree(v, view)).max().ok_or(GraphError::Empty)
    }

    /// Nondecreasing degree sequence in `view`.
    pub fn degree_sequence(&self, view: View) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v, view)).collect();
        d.sort_unstable();
        d
    }

    /// Pairs `u < v` present in `view`, in lexicographic order.
    pub fn edges(&self, view: View) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.neighbours(u, view).iter().filter(|&v| v > u) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn edge_count(&self, view: View) -> usize {
        (0..self.n).map(|v| self.degree(v, view)).sum::<usize>() / 2
    }

    /// Number of pairs with one end in `x` and the other in `y`, counted with multiplicity
    /// when the sets overlap (pairs inside the overlap are counted twice).
    pub fn edges_between(&self, x: &VertexSet, y: &VertexSet, view: View) -> usize {
        x.iter().map(|v| self.degree_into(v, y, view)).sum()
    }

    /// Adjacency rows as `u32` masks; only valid for `n <= 32`.
    pub fn masks32(&self, view: View) -> Vec<u32> {
        assert!(self.n <= 32, "masks32 needs n <= 32, got {}", self.n);
        (0..self.n).map(|v| self.neighbours(v, view).low_word() as u32).collect()
    }

    /// Subgraph induced by `s`, relabelled to `0..|s|` in increasing id order.
    pub fn induced(&self, s: &VertexSet) -> ColouredGraph {
        let ids = s.to_vec();
        let mut g = ColouredGraph::empty(ids.len());
        for (i, &u) in ids.iter().enumerate() {
            for (j, &v) in ids.iter().enumerate().skip(i + 1) {
                let m = self.mark(u, v);
                if m != Mark::None {
                    g.set_mark(i, j, m);
                }
            }
        }
        g
    }

    /// Bipartite subgraph `G[X, Y]`: keeps only pairs with one end in each set.
    pub fn bipartite_part(&self, x: &VertexSet, y: &VertexSet) -> ColouredGraph {
        let mut g = ColouredGraph::empty(self.n);
        for u in x {
            for v in y {
                let m = self.mark(u, v);
                if m != Mark::None {
                    g.set_mark(u, v, m);
                }
            }
        }
        g
    }

    /// The pairs of `view`, all marked red.
    pub fn view_graph(&self, view: View) -> ColouredGraph {
        let mut g = ColouredGraph::empty(self.n);
        for (u, v) in self.edges(view) {
            g.set_mark(u, v, Mark::Red);
        }
        g
    }

    /// Removes vertex `v`, relabelling higher ids down by one.
    pub fn delete_vertex(&self, v: usize) -> ColouredGraph {
        let mut keep = self.vertices();
        keep.remove(v);
        self.induced(&keep)
    }

    /// Copy with one extra isolated vertex (id `n`).
    pub fn with_extra_vertex(&self) -> ColouredGraph {
        let mut g = ColouredGraph::empty(self.n + 1);
        for u in 0..self.n {
            for v in u + 1..self.n {
                let m = self.mark(u, v);
                if m != Mark::None {
                    g.set_mark(u, v, m);
                }
            }
        }
        g
    }

    pub fn to_json(&self) -> String {
        let edges: Vec<(usize, usize, &str)> = (0..self.n)
            .flat_map(|u| (u + 1..self.n).map(move |v| (u, v)))
            .filter_map(|(u, v)| self.mark(u, v).tag().map(|t| (u, v, t)))
            .collect();
        serde_json::to_string(&RawGraphRef { n: self.n, edges }).expect("graph serialisation cannot fail")
    }

    pub fn from_json(text: &str) -> Result<ColouredGraph, GraphError> {
        let raw: RawGraph = serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        let mut g = ColouredGraph::empty(raw.n);
        for (a, b, tag) in raw.edges {
            for x in [a, b] {
                if x >= raw.n {
                    return Err(GraphError::OutOfRange { vertex: x, n: raw.n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let mark = Mark::from_tag(&tag).ok_or(GraphError::BadColour(tag))?;
            let (u, v) = (a.min(b), a.max(b));
            if g.mark(u, v) != Mark::None {
                return Err(GraphError::DuplicatePair { u, v });
            }
            g.set_mark(u, v, mark);
        }
        Ok(g)
    }

    /// Graphviz rendering; double-coloured pairs are drawn purple.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v) in self.edges(View::Union) {
            let colour = match self.mark(u, v) {
                Mark::Red => "red",
                Mark::Blue => "blue",
                _ => "purple",
            };
            let _ = writeln!(out, "  {u} -- {v} [color={colour}];");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize, String)>,
}

#[derive(Serialize)]
struct RawGraphRef<'a> {
    n: usize,
    edges: Vec<(usize, usize, &'a str)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> ColouredGraph {
        let marks = [Mark::Red, Mark::Blue, Mark::Red, Mark::Blue, Mark::Red];
        ColouredGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, marks[i])))
    }

    #[test]
    fn min_degree_examples() {
        let k4 = ColouredGraph::complete(4, Mark::Red);
        assert_eq!(k4.min_degree(View::Union), Ok(3));
        assert_eq!(k4.min_degree(View::Blue), Ok(0));
        assert_eq!(c5().min_degree(View::Union), Ok(2));
        assert_eq!(ColouredGraph::empty(0).min_degree(View::Red), Err(GraphError::Empty));
    }

    #[test]
    fn induced_examples() {
        let k4 = ColouredGraph::complete(4, Mark::Red);
        let e = k4.induced(&VertexSet::from_vertices(4, [0, 1]));
        assert_eq!(e.to_json(), r#"{"n":2,"edges":[[0,1,"R"]]}"#);
        assert_eq!(k4.induced(&VertexSet::empty(4)).n(), 0);
        let p = c5().induced(&VertexSet::from_vertices(5, [0, 1, 2]));
        assert_eq!(p.mark(0, 1), Mark::Red);
        assert_eq!(p.mark(1, 2), Mark::Blue);
        assert_eq!(p.mark(0, 2), Mark::None);
    }

    #[test]
    fn json_examples() {
        let text = r#"{"n":2,"edges":[[0,1,"R"]]}"#;
        let g = ColouredGraph::from_json(text).unwrap();
        assert_eq!(g.mark(0, 1), Mark::Red);
        assert_eq!(g.to_json(), text);

        let dup = ColouredGraph::from_json(r#"{"n":2,"edges":[[0,1,"R"],[0,1,"B"]]}"#).unwrap_err();
        assert_eq!(dup.code(), "duplicate-pair");
        let oor = ColouredGraph::from_json(r#"{"n":3,"edges":[[0,5,"R"]]}"#).unwrap_err();
        assert_eq!(oor.code(), "out-of-range");
        let bad = ColouredGraph::from_json(r#"{"n":3,"edges":[[0,1,"G"]]}"#).unwrap_err();
        assert_eq!(bad.code(), "bad-colour");
        let mal = ColouredGraph::from_json(r#"{"n":3,"edges":"#).unwrap_err();
        assert_eq!(mal.code(), "malformed");
        let lp = ColouredGraph::from_json(r#"{"n":3,"edges":[[1,1,"R"]]}"#).unwrap_err();
        assert_eq!(lp.code(), "self-loop");
    }

    #[test]
    fn reversed_pair_is_accepted_and_canonicalised() {
        let g = ColouredGraph::from_json(r#"{"n":3,"edges":[[2,0,"RB"]]}"#).unwrap();
        assert_eq!(g.to_json(), r#"{"n":3,"edges":[[0,2,"RB"]]}"#);
    }

    #[test]
    fn dot_uses_purple_for_double_edges() {
        let g = ColouredGraph::from_edges(3, [(0, 1, Mark::Red), (1, 2, Mark::Both), (0, 2, Mark::Blue)]);
        let dot = g.to_dot();
        assert!(dot.contains("0 -- 1 [color=red]"));
        assert!(dot.contains("1 -- 2 [color=purple]"));
        assert!(dot.contains("0 -- 2 [color=blue]"));
    }

    #[test]
    fn union_degree_counts_double_edges_once() {
        let g = ColouredGraph::from_edges(3, [(0, 1, Mark::Both), (0, 2, Mark::Blue)]);
        assert_eq!(g.degree(0, View::Union), 2);
        assert_eq!(g.degree(0, View::Red), 1);
        assert_eq!(g.degree(0, View::Blue), 2);
        assert_eq!(g.edge_count(View::Union), 2);
    }
}
