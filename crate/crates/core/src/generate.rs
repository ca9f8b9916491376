//! Seeded random instance generators.

use crate::graph::{ColouredGraph, GraphError, Mark, View};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with union-view minimum degree at least `delta`.
///
/// Starts from `K_n`, visits the pairs in random order and drops each one with
/// probability 1/2 while both ends stay above `delta`. Each surviving pair is
/// red with probability `colour_bias`, blue otherwise.
pub fn random_min_degree_graph(
    n: usize,
    delta: usize,
    colour_bias: f64,
    seed: u64,
) -> Result<ColouredGraph, GraphError> {
    if delta > n.saturating_sub(1) {
        return Err(GraphError::InfeasibleDegree { n, delta });
    }
    let mut rng = rng(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let mut deg = vec![n.saturating_sub(1); n];
    let mut keep = vec![true; pairs.len()];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if deg[u] > delta && deg[v] > delta && rng.random_bool(0.5) {
            keep[i] = false;
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
    let mut g = ColouredGraph::empty(n);
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if keep[i] {
            let mark = if rng.random_bool(colour_bias) { Mark::Red } else { Mark::Blue };
            g.set_mark(u, v, mark);
        }
    }
    debug_assert!(n == 0 || g.min_degree(View::Union).unwrap() >= delta);
    Ok(g)
}

/// Erdős–Rényi style graph: each pair present with probability `p_edge` and
/// then marked red, blue or both with the given probabilities.
pub fn random_graph(n: usize, p_edge: f64, p_red: f64, p_both: f64, seed: u64) -> ColouredGraph {
    let mut rng = rng(seed);
    let mut g = ColouredGraph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p_edge) {
                let x: f64 = rng.random();
                let mark = if x < p_both {
                    Mark::Both
                } else if x < p_both + p_red {
                    Mark::Red
                } else {
                    Mark::Blue
                };
                g.set_mark(u, v, mark);
            }
        }
    }
    g
}

/// Recolours every union-view pair of `base`: red with probability `bias`, blue otherwise.
pub fn random_recolouring(base: &ColouredGraph, bias: f64, seed: u64) -> ColouredGraph {
    let mut rng = rng(seed);
    let mut g = ColouredGraph::empty(base.n());
    for (u, v) in base.edges(View::Union) {
        let mark = if rng.random_bool(bias) { Mark::Red } else { Mark::Blue };
        g.set_mark(u, v, mark);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_is_forced() {
        let g = random_min_degree_graph(4, 3, 0.5, 11).unwrap();
        assert_eq!(g.edge_count(View::Union), 6);
    }

    #[test]
    fn eight_vertices_delta_six() {
        for seed in 0..50 {
            let g = random_min_degree_graph(8, 6, 0.5, seed).unwrap();
            assert!(g.min_degree(View::Union).unwrap() >= 6);
        }
    }

    #[test]
    fn impossible_degree_is_rejected() {
        let err = random_min_degree_graph(3, 3, 0.5, 0).unwrap_err();
        assert_eq!(err, GraphError::InfeasibleDegree { n: 3, delta: 3 });
    }

    #[test]
    fn deterministic_under_seed() {
        let a = random_min_degree_graph(12, 7, 0.3, 99).unwrap();
        let b = random_min_degree_graph(12, 7, 0.3, 99).unwrap();
        assert_eq!(a, b);
        let c = random_min_degree_graph(12, 7, 0.3, 100).unwrap();
        assert_ne!(a, c);
    }
}
