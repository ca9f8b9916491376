//! Reference implementations that share no code with the library: brute-force
//! permutation search and petgraph's algorithms.

#![allow(dead_code)]

use monocycle::{ColouredGraph, Mark, View};
use petgraph::graph::{NodeIndex, UnGraph};
use std::hash::RandomState;

pub fn to_petgraph(g: &ColouredGraph, view: View) -> UnGraph<(), ()> {
    let mut pg = UnGraph::with_capacity(g.n(), 0);
    for _ in 0..g.n() {
        pg.add_node(());
    }
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            if g.has_edge(u, v, view) {
                pg.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
            }
        }
    }
    pg
}

/// Lexicographic successor of `a`; false once `a` is the last permutation.
fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Whether `verts` can be cyclically ordered along `view` edges. Degenerate
/// sets (empty, one vertex, one edge) count as cycles.
pub fn perm_cycle(g: &ColouredGraph, view: View, verts: &[usize]) -> bool {
    match verts.len() {
        0 | 1 => return true,
        2 => return g.has_edge(verts[0], verts[1], view),
        _ => {}
    }
    let first = verts[0];
    let mut rest: Vec<usize> = verts[1..].to_vec();
    rest.sort_unstable();
    loop {
        let mut prev = first;
        let ok = rest.iter().all(|&v| {
            let e = g.has_edge(prev, v, view);
            prev = v;
            e
        }) && g.has_edge(prev, first, view);
        if ok {
            return true;
        }
        if !next_permutation(&mut rest) {
            return false;
        }
    }
}

/// Whether some ordering of all vertices is a Hamilton path in `view`.
pub fn perm_ham_path(g: &ColouredGraph, view: View) -> bool {
    let mut order: Vec<usize> = (0..g.n()).collect();
    loop {
        if order.windows(2).all(|w| g.has_edge(w[0], w[1], view)) {
            return true;
        }
        if !next_permutation(&mut order) {
            return false;
        }
    }
}

/// A red/blue cycle partition by trying every red set and every cyclic order.
pub fn perm_partition(g: &ColouredGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = g.n();
    assert!(n <= 12, "permutation oracle is for small graphs");
    (0u32..1 << n).find_map(|mask| {
        let (red, blue): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| mask >> v & 1 == 1);
        (perm_cycle(g, View::Red, &red) && perm_cycle(g, View::Blue, &blue)).then_some((red, blue))
    })
}

/// Number of simple `x–y` paths with exactly `l` internal vertices.
pub fn simple_path_count(g: &ColouredGraph, view: View, x: usize, y: usize, l: usize) -> u64 {
    let pg = to_petgraph(g, view);
    petgraph::algo::all_simple_paths::<Vec<NodeIndex>, _, RandomState>(&pg, NodeIndex::new(x), NodeIndex::new(y), l, Some(l)).count() as u64
}

pub fn max_matching_size(g: &ColouredGraph, view: View) -> usize {
    petgraph::algo::maximum_matching(&to_petgraph(g, view)).len()
}

/// Every colouring of `K_n` with each pair red or blue, or also double-coloured
/// when `double` is set.
pub fn all_markings(n: usize, double: bool) -> Vec<ColouredGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let base: u64 = if double { 3 } else { 2 };
    let total = base.pow(pairs.len() as u32);
    (0..total)
        .map(|mut code| {
            let edges = pairs.iter().map(|&(u, v)| {
                let m = match code % base {
                    0 => Mark::Red,
                    1 => Mark::Blue,
                    _ => Mark::Both,
                };
                code /= base;
                (u, v, m)
            });
            ColouredGraph::from_edges(n, edges.collect::<Vec<_>>())
        })
        .collect()
}
