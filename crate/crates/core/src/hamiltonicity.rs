//! Exact Hamiltonicity by subset dynamic programming, and the classical
//! degree conditions that guarantee Hamilton cycles.
//!
//! Lengths are edge counts: a path on `k` vertices has length `k - 1`.

use crate::graph::{ColouredGraph, View};
use crate::vertex_set::VertexSet;
use rayon::prelude::*;
use thiserror::Error;

/// Largest vertex count the subset DP accepts.
pub const DP_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HamError {
    #[error("subset DP is capped at {cap} vertices, got {n}")]
    Capacity { n: usize, cap: usize },
    #[error("degree sequence must be sorted nondecreasing")]
    Unsorted,
    #[error("degree condition needs at least {min} vertices, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("bipartite condition needs equal parts, got {x} and {y}")]
    Unbalanced { x: usize, y: usize },
    #[error("vertex {0} is not in the requested set")]
    NotInSet(usize),
}

fn check_cap(n: usize) -> Result<(), HamError> {
    if n > DP_CAP {
        Err(HamError::Capacity { n, cap: DP_CAP })
    } else {
        Ok(())
    }
}

#[inline]
fn lowest(mask: u32) -> usize {
    mask.trailing_zeros() as usize
}

/// For every vertex mask, the set of vertices `v` such that the view restricted
/// to the mask has a Hamilton path from the lowest vertex of the mask to `v`.
#[derive(Clone)]
pub struct HamTable {
    n: usize,
    adj: Vec<u32>,
    ends: Vec<u32>,
}

impl HamTable {
    pub fn build(g: &ColouredGraph, view: View) -> Result<HamTable, HamError> {
        check_cap(g.n())?;
        Ok(Self::from_adjacency(g.masks32(view)))
    }

    pub fn from_adjacency(adj: Vec<u32>) -> HamTable {
        let n = adj.len();
        assert!(n <= DP_CAP);
        let size = 1usize << n;
        let mut ends = vec![0u32; size];
        for mask in 1..size as u32 {
            let low = lowest(mask);
            if mask & (mask - 1) == 0 {
                ends[mask as usize] = mask;
                continue;
            }
            let mut acc = 0u32;
            let mut rest = mask & !(1 << low);
            while rest != 0 {
                let v = lowest(rest);
                rest &= rest - 1;
                if adj[v] & ends[(mask ^ (1 << v)) as usize] != 0 {
                    acc |= 1 << v;
                }
            }
            ends[mask as usize] = acc;
        }
        HamTable { n, adj, ends }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ends of Hamilton paths of `mask` that start at its lowest vertex.
    pub fn ends(&self, mask: u32) -> u32 {
        self.ends[mask as usize]
    }

    /// Degenerate-aware cycle test: sets of size 0 and 1 are cycles, a pair is a
    /// cycle iff it is an edge, larger sets need a Hamilton cycle.
    #[inline]
    pub fn has_cycle(&self, mask: u32) -> bool {
        match mask.count_ones() {
            0 | 1 => true,
            2 => {
                let a = lowest(mask);
                self.adj[a] & mask != 0
            }
            _ => self.ends[mask as usize] & self.adj[lowest(mask)] != 0,
        }
    }

    /// Hamilton path of `mask` from its lowest vertex to `end`, if one exists.
    pub fn path_to(&self, mask: u32, end: usize) -> Option<Vec<usize>> {
        if mask == 0 || self.ends[mask as usize] & (1 << end) == 0 {
            return None;
        }
        let mut path = vec![end];
        let mut cur = mask;
        let mut v = end;
        while cur.count_ones() > 1 {
            let prev_mask = cur ^ (1 << v);
            let cands = self.adj[v] & self.ends[prev_mask as usize];
            debug_assert!(cands != 0);
            let u = lowest(cands);
            path.push(u);
            cur = prev_mask;
            v = u;
        }
        path.reverse();
        Some(path)
    }

    /// A cycle through exactly the vertices of `mask`, starting at its lowest vertex.
    pub fn cycle(&self, mask: u32) -> Option<Vec<usize>> {
        match mask.count_ones() {
            0 => Some(Vec::new()),
            1 | 2 if self.has_cycle(mask) => Some(bits(mask)),
            1 | 2 => None,
            _ => {
                let closing = self.ends[mask as usize] & self.adj[lowest(mask)];
                if closing == 0 {
                    return None;
                }
                self.path_to(mask, lowest(closing))
            }
        }
    }

    /// Bitset over masks: entry `m` is set iff `has_cycle(m)`.
    pub fn cycle_masks(&self) -> Vec<bool> {
        (0..1u64 << self.n).into_par_iter().map(|m| self.has_cycle(m as u32)).collect()
    }
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Whether the `view` subgraph on `s` is a cycle under the degenerate convention.
pub fn has_mono_cycle_on(g: &ColouredGraph, view: View, s: &VertexSet) -> Result<bool, HamError> {
    Ok(mono_cycle_on(g, view, s)?.is_some())
}

/// A witness cycle for [`has_mono_cycle_on`], in original vertex ids.
pub fn mono_cycle_on(g: &ColouredGraph, view: View, s: &VertexSet) -> Result<Option<Vec<usize>>, HamError> {
    let ids = s.to_vec();
    match ids.len() {
        0 | 1 => return Ok(Some(ids)),
        2 => return Ok(g.has_edge(ids[0], ids[1], view).then_some(ids)),
        k => check_cap(k)?,
    }
    let sub = g.induced(s);
    let table = HamTable::build(&sub, view)?;
    let full = ((1u64 << ids.len()) - 1) as u32;
    Ok(table.cycle(full).map(|c| c.into_iter().map(|i| ids[i]).collect()))
}

/// Hamilton path of the `view` subgraph on `s` from `a` to `b`, if one exists.
pub fn hamilton_path_between(
    g: &ColouredGraph,
    view: View,
    s: &VertexSet,
    a: usize,
    b: usize,
) -> Result<Option<Vec<usize>>, HamError> {
    for x in [a, b] {
        if !s.contains(x) {
            return Err(HamError::NotInSet(x));
        }
    }
    let ids = s.to_vec();
    check_cap(ids.len())?;
    if a == b {
        return Ok((ids.len() == 1).then(|| vec![a]));
    }
    let sub = g.induced(s);
    let adj = sub.masks32(view);
    let ia = ids.iter().position(|&x| x == a).unwrap();
    let ib = ids.iter().position(|&x| x == b).unwrap();
    let k = ids.len();
    // reach[mask]: ends of paths covering mask that start at ia.
    let mut reach = vec![0u32; 1 << k];
    reach[1 << ia] = 1 << ia;
    for mask in 1..(1u32 << k) {
        if mask & (1 << ia) == 0 || mask == 1 << ia {
            continue;
        }
        let mut acc = 0;
        let mut rest = mask & !(1 << ia);
        while rest != 0 {
            let v = lowest(rest);
            rest &= rest - 1;
            if adj[v] & reach[(mask ^ (1 << v)) as usize] != 0 {
                acc |= 1 << v;
            }
        }
        reach[mask as usize] = acc;
    }
    let full = ((1u64 << k) - 1) as u32;
    if reach[full as usize] & (1 << ib) == 0 {
        return Ok(None);
    }
    let mut path = vec![ib];
    let (mut cur, mut v) = (full, ib);
    while cur.count_ones() > 1 {
        let prev = cur ^ (1 << v);
        let u = lowest(adj[v] & reach[prev as usize]);
        path.push(u);
        cur = prev;
        v = u;
    }
    path.reverse();
    Ok(Some(path.into_iter().map(|i| ids[i]).collect()))
}

/// Checks that `path` visits distinct vertices joined consecutively in `view`.
pub fn is_path(g: &ColouredGraph, view: View, path: &[usize]) -> bool {
    let mut seen = VertexSet::empty(g.n());
    path.iter().all(|&v| v < g.n() && seen.insert(v)) && path.windows(2).all(|w| g.has_edge(w[0], w[1], view))
}

/// Checks a cycle under the degenerate convention.
pub fn is_cycle(g: &ColouredGraph, view: View, cycle: &[usize]) -> bool {
    if !is_path(g, view, cycle) {
        return false;
    }
    match cycle.len() {
        0..=2 => true,
        k => g.has_edge(cycle[k - 1], cycle[0], view),
    }
}

fn check_sorted(d: &[usize]) -> Result<(), HamError> {
    if d.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(HamError::Unsorted)
    }
}

/// Chvátal's condition: `d_i >= i + 1` or `d_{n-i} >= n - i` for every `1 <= i <= n/2`
/// (one-indexed, nondecreasing sequence).
pub fn chvatal_guarantees(degrees: &[usize]) -> Result<bool, HamError> {
    let n = degrees.len();
    if n < 3 {
        return Err(HamError::TooSmall { n, min: 3 });
    }
    check_sorted(degrees)?;
    let d = |i: usize| degrees[i - 1];
    Ok((1..=n / 2).all(|i| d(i) > i || d(n - i) >= n - i))
}

/// Bipartite form: `x_i >= i + 1` or `y_{n-i} >= n - i + 1` for `1 <= i <= n - 1`.
/// At `i = n` the term `y_0` does not exist, so that index is skipped.
pub fn chvatal_bipartite_guarantees(x: &[usize], y: &[usize]) -> Result<bool, HamError> {
    if x.len() != y.len() {
        return Err(HamError::Unbalanced { x: x.len(), y: y.len() });
    }
    check_sorted(x)?;
    check_sorted(y)?;
    let n = x.len();
    if n == 0 {
        return Err(HamError::TooSmall { n: 0, min: 1 });
    }
    Ok((1..n).all(|i| x[i - 1] > i || y[n - i - 1] > n - i))
}

/// Longest path length (edges) in `view`, exact.
pub fn longest_path_length(g: &ColouredGraph, view: View) -> Result<usize, HamError> {
    Ok(longest_path(g, view)?.len().saturating_sub(1))
}

/// A longest path in `view`; empty only for the empty graph.
pub fn longest_path(g: &ColouredGraph, view: View) -> Result<Vec<usize>, HamError> {
    let n = g.n();
    check_cap(n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let adj = g.masks32(view);
    // any[mask]: ends of Hamilton paths of mask with unconstrained start.
    let mut any = vec![0u32; 1 << n];
    let mut best = (1u32, 1u32);
    for mask in 1..(1u32 << n) {
        if mask & (mask - 1) == 0 {
            any[mask as usize] = mask;
            continue;
        }
        let mut acc = 0;
        let mut rest = mask;
        while rest != 0 {
            let v = lowest(rest);
            rest &= rest - 1;
            if adj[v] & any[(mask ^ (1 << v)) as usize] != 0 {
                acc |= 1 << v;
            }
        }
        any[mask as usize] = acc;
        if acc != 0 && mask.count_ones() > best.0 {
            best = (mask.count_ones(), mask);
        }
    }
    let mask = best.1;
    let mut v = lowest(any[mask as usize]);
    let mut path = vec![v];
    let mut cur = mask;
    while cur.count_ones() > 1 {
        let prev = cur ^ (1 << v);
        let u = lowest(adj[v] & any[prev as usize]);
        path.push(u);
        cur = prev;
        v = u;
    }
    Ok(path)
}

/// Evaluates the implication "longest path `<= l`  implies  `e <= n l / 2`".
pub fn erdos_gallai_bound_holds(g: &ColouredGraph, view: View, l: usize) -> Result<bool, HamError> {
    let longest = longest_path_length(g, view)?;
    Ok(longest > l || 2 * g.edge_count(view) <= g.n() * l)
}

/// Premise of Bondy's pancyclicity theorem: `δ > n/2` in `view`.
pub fn bondy_premise(g: &ColouredGraph, view: View) -> bool {
    g.n() > 0 && 2 * g.min_degree(view).unwrap_or(0) > g.n()
}

/// Lengths `k` in `3..=n` for which `view` contains a cycle of exactly `k` vertices.
pub fn cycle_lengths(g: &ColouredGraph, view: View) -> Result<Vec<usize>, HamError> {
    let table = HamTable::build(g, view)?;
    let n = g.n();
    let mut found = vec![false; n + 1];
    for mask in 1..(1u64 << n) {
        let k = mask.count_ones() as usize;
        if k >= 3 && !found[k] && table.has_cycle(mask as u32) {
            found[k] = true;
        }
    }
    Ok((3..=n).filter(|&k| found[k]).collect())
}

/// True when every cycle length from 3 to `n` occurs.
pub fn is_pancyclic(g: &ColouredGraph, view: View) -> Result<bool, HamError> {
    Ok(cycle_lengths(g, view)?.len() == g.n().saturating_sub(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mark;

    fn c4_alternating() -> ColouredGraph {
        ColouredGraph::from_edges(4, [(0, 1, Mark::Red), (1, 2, Mark::Blue), (2, 3, Mark::Red), (3, 0, Mark::Blue)])
    }

    fn cycle_graph(n: usize) -> ColouredGraph {
        ColouredGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, Mark::Red)))
    }

    fn complete_bipartite(a: usize, b: usize) -> ColouredGraph {
        ColouredGraph::from_edges(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v, Mark::Red))))
    }

    #[test]
    fn cycle_examples() {
        let k4 = ColouredGraph::complete(4, Mark::Red);
        assert!(has_mono_cycle_on(&k4, View::Red, &VertexSet::empty(4)).unwrap());
        assert!(has_mono_cycle_on(&k4, View::Red, &k4.vertices()).unwrap());
        let c4 = c4_alternating();
        assert!(!has_mono_cycle_on(&c4, View::Red, &c4.vertices()).unwrap());
        let cyc = mono_cycle_on(&k4, View::Red, &k4.vertices()).unwrap().unwrap();
        assert!(is_cycle(&k4, View::Red, &cyc) && cyc.len() == 4);
    }

    #[test]
    fn path_between_examples() {
        let k4 = ColouredGraph::complete(4, Mark::Blue);
        let p = hamilton_path_between(&k4, View::Blue, &k4.vertices(), 0, 3).unwrap().unwrap();
        assert_eq!((p.len(), p[0], p[3]), (4, 0, 3));
        assert!(is_path(&k4, View::Blue, &p));

        let pm = ColouredGraph::from_edges(4, [(0, 1, Mark::Red), (2, 3, Mark::Red)]);
        assert_eq!(hamilton_path_between(&pm, View::Red, &pm.vertices(), 0, 2).unwrap(), None);

        let p3 = ColouredGraph::from_edges(3, [(0, 1, Mark::Red), (1, 2, Mark::Red)]);
        assert_eq!(hamilton_path_between(&p3, View::Red, &p3.vertices(), 0, 2).unwrap(), Some(vec![0, 1, 2]));
    }

    #[test]
    fn chvatal_examples() {
        assert_eq!(chvatal_guarantees(&[3, 3, 3, 3]), Ok(true));
        assert_eq!(chvatal_guarantees(&[2, 2, 2, 2, 2]), Ok(false));
        assert_eq!(chvatal_guarantees(&[1, 1, 1, 3]), Ok(false));
        assert_eq!(chvatal_guarantees(&[3, 1, 1, 1]), Err(HamError::Unsorted));
    }

    #[test]
    fn bipartite_chvatal_examples() {
        assert_eq!(chvatal_bipartite_guarantees(&[3, 3, 3], &[3, 3, 3]), Ok(true));
        assert_eq!(chvatal_bipartite_guarantees(&[1, 1, 1], &[1, 1, 1]), Ok(false));
        // i = 1: x_1 = 2 >= 2; i = 2: y_1 = 2 >= 2.
        assert_eq!(chvatal_bipartite_guarantees(&[2, 2, 2], &[2, 2, 2]), Ok(true));
        assert!(matches!(chvatal_bipartite_guarantees(&[1, 1], &[1]), Err(HamError::Unbalanced { .. })));
    }

    #[test]
    fn longest_path_examples() {
        let k4 = ColouredGraph::complete(4, Mark::Both);
        assert!(longest_path_length(&k4, View::Union).unwrap() >= 3);
        let e = ColouredGraph::empty(5);
        assert_eq!(longest_path_length(&e, View::Union), Ok(0));
        assert!((0..6).all(|l| erdos_gallai_bound_holds(&e, View::Union, l).unwrap()));
        let tri = ColouredGraph::complete(3, Mark::Red);
        assert_eq!(longest_path_length(&tri, View::Red), Ok(2));
        assert!(erdos_gallai_bound_holds(&tri, View::Red, 2).unwrap());
    }

    #[test]
    fn bondy_examples() {
        let k5 = ColouredGraph::complete(5, Mark::Red);
        assert!(bondy_premise(&k5, View::Red));
        assert_eq!(cycle_lengths(&k5, View::Red).unwrap(), vec![3, 4, 5]);
        assert!(!bondy_premise(&cycle_graph(6), View::Red));
        let k33 = complete_bipartite(3, 3);
        assert!(!bondy_premise(&k33, View::Red));
        assert_eq!(cycle_lengths(&k33, View::Red).unwrap(), vec![4, 6]);
    }

    #[test]
    fn capacity_error_beyond_cap() {
        let g = ColouredGraph::empty(DP_CAP + 1);
        assert!(matches!(HamTable::build(&g, View::Red), Err(HamError::Capacity { .. })));
    }

    #[test]
    fn degenerate_pairs() {
        let g = ColouredGraph::from_edges(3, [(0, 1, Mark::Blue)]);
        let pair = VertexSet::from_vertices(3, [0, 1]);
        assert!(has_mono_cycle_on(&g, View::Blue, &pair).unwrap());
        assert!(!has_mono_cycle_on(&g, View::Red, &pair).unwrap());
        assert!(has_mono_cycle_on(&g, View::Red, &VertexSet::from_vertices(3, [2])).unwrap());
    }
}
