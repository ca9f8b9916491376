//! Path counting and the strong/weak robustness predicates.
//!
//! `con(x, y, l)` counts `x–y` paths with exactly `l` internal vertices, so
//! each such path has `l + 1` edges.

use crate::generate::rng;
use crate::graph::{ColouredGraph, Mark, View};
use crate::vertex_set::VertexSet;
use rand::seq::{IndexedRandom, SliceRandom};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RobustError {
    #[error("path enumeration exceeded its budget of {0} expansions")]
    Budget(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

struct Counter<'a> {
    rows: &'a [VertexSet],
    y: usize,
    budget: u64,
    spent: u64,
}

impl Counter<'_> {
    fn go(&mut self, cur: usize, remaining: usize, visited: &mut VertexSet) -> Result<u64, RobustError> {
        self.spent += 1;
        if self.spent > self.budget {
            return Err(RobustError::Budget(self.budget));
        }
        if remaining == 1 {
            // Last internal vertex: any common neighbour of `cur` and `y` not yet used.
            let mut c = self.rows[cur].intersection(&self.rows[self.y]);
            c.subtract(visited);
            return Ok(c.len() as u64);
        }
        let mut total = 0u64;
        let mut cands = self.rows[cur].clone();
        cands.subtract(visited);
        for v in cands.iter() {
            visited.insert(v);
            total += self.go(v, remaining - 1, visited)?;
            visited.remove(v);
        }
        Ok(total)
    }
}

fn count_in_rows(rows: &[VertexSet], x: usize, y: usize, l: usize, budget: u64) -> Result<u64, RobustError> {
    if l == 0 {
        return Ok(rows[x].contains(y) as u64);
    }
    let mut visited = VertexSet::empty(rows.len());
    visited.insert(x);
    visited.insert(y);
    Counter { rows, y, budget, spent: 0 }.go(x, l, &mut visited)
}

/// Exact number of `x–y` paths with `l` internal vertices in `view`.
pub fn count_paths(g: &ColouredGraph, view: View, x: usize, y: usize, l: usize, budget: u64) -> Result<u64, RobustError> {
    if x == y || x >= g.n() || y >= g.n() {
        return Err(RobustError::Invalid(format!("need distinct vertices below {}", g.n())));
    }
    let rows: Vec<VertexSet> = (0..g.n()).map(|v| g.neighbours(v, view)).collect();
    count_in_rows(&rows, x, y, l, budget)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Strong,
    Weak,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessCheck {
    pub alpha: f64,
    pub k: usize,
    pub n_ref: usize,
    pub verdict: Verdict,
    /// Smallest `l` meeting the bound, when the verdict is not `None`.
    pub witness_l: Option<usize>,
    /// Smallest count over the checked pairs at `witness_l`, or at `l = k` when none.
    pub min_count: u64,
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
}

/// Adjacency of `F = view[f]`, or of `F[X, Y]` when a bipartition is given.
fn subgraph_rows(g: &ColouredGraph, view: View, f: &VertexSet, bip: Option<(&VertexSet, &VertexSet)>) -> Vec<VertexSet> {
    (0..g.n())
        .map(|v| {
            if !f.contains(v) {
                return VertexSet::empty(g.n());
            }
            let row = g.neighbours(v, view).intersection(f);
            match bip {
                None => row,
                Some((x, y)) => row.intersection(if x.contains(v) { y } else { x }),
            }
        })
        .collect()
}

/// Tests `(α, k)` robustness of `F = view[f]` relative to `n_ref`.
///
/// Without a bipartition every pair of `F` must have at least `α n_ref^l`
/// connecting paths for a common `l` in `1..=k`; with one, only pairs across it
/// count and paths run in `F[X, Y]`. `l = 0` is not searched, so a positive
/// verdict implies `δ(F) >= α n_ref`.
#[allow(clippy::too_many_arguments)]
pub fn check_robust(
    g: &ColouredGraph,
    view: View,
    f: &VertexSet,
    alpha: f64,
    k: usize,
    n_ref: usize,
    bipartition: Option<(&VertexSet, &VertexSet)>,
    budget: u64,
) -> Result<RobustnessCheck, RobustError> {
    if n_ref < f.len() {
        return Err(RobustError::Invalid(format!("n_ref = {n_ref} is smaller than |F| = {}", f.len())));
    }
    if let Some((x, y)) = bipartition {
        if !x.is_disjoint(y) || x.union(y) != *f {
            return Err(RobustError::Invalid("bipartition must split F".into()));
        }
    }
    let rows = subgraph_rows(g, view, f, bipartition);
    let pairs: Vec<(usize, usize)> = match bipartition {
        None => {
            let vs = f.to_vec();
            vs.iter().enumerate().flat_map(|(i, &a)| vs[i + 1..].iter().map(move |&b| (a, b))).collect()
        }
        Some((x, y)) => x.iter().flat_map(|a| y.iter().map(move |b| (a, b))).collect(),
    };
    let mut last_min = 0;
    for l in 1..=k {
        let threshold = alpha * (n_ref as f64).powi(l as i32);
        let counts: Result<Vec<u64>, RobustError> =
            pairs.par_iter().map(|&(a, b)| count_in_rows(&rows, a, b, l, budget)).collect();
        let min = counts?.into_iter().min().unwrap_or(u64::MAX);
        last_min = min;
        if pairs.is_empty() || min as f64 >= threshold - 1e-9 {
            let verdict = if bipartition.is_some() { Verdict::Weak } else { Verdict::Strong };
            if verdict == Verdict::Strong {
                debug_assert!(f.iter().all(|v| rows[v].len() as f64 >= alpha * n_ref as f64 - 1e-9));
            }
            return Ok(RobustnessCheck {
                alpha,
                k,
                n_ref,
                verdict,
                witness_l: Some(l),
                min_count: min,
                bipartition: bipartition.map(|(x, y)| (x.to_vec(), y.to_vec())),
            });
        }
    }
    Ok(RobustnessCheck {
        alpha,
        k,
        n_ref,
        verdict: Verdict::None,
        witness_l: None,
        min_count: last_min,
        bipartition: bipartition.map(|(x, y)| (x.to_vec(), y.to_vec())),
    })
}

/// Smallest `k >= 1` such that every ordered pair, including `(v, v)`, is joined
/// by a walk of exactly `k` edges. `None` when the view is disconnected or bipartite.
pub fn uniform_odd_walk_length(g: &ColouredGraph, view: View) -> Option<usize> {
    let n = g.n();
    if n == 0 {
        return None;
    }
    let adj: Vec<VertexSet> = (0..n).map(|v| g.neighbours(v, view)).collect();
    let full = VertexSet::full(n);
    let mut reach = adj.clone();
    for k in 1..=3 * n {
        if reach.iter().all(|r| *r == full) {
            return Some(k);
        }
        reach = reach
            .iter()
            .map(|r| {
                let mut next = VertexSet::empty(n);
                for w in r {
                    next.union_with(&adj[w]);
                }
                next
            })
            .collect();
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    VertexDeletion,
    EdgeDeletion,
    VertexAddition,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationTrial {
    pub kind: Perturbation,
    pub alpha: f64,
    pub k: usize,
    pub n_ref: usize,
    pub passed: bool,
    /// Vertices removed, edges removed, or attachments added.
    pub size: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub trials: Vec<PerturbationTrial>,
}

impl PerturbationReport {
    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| !t.passed).count()
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationParams {
    pub alpha: f64,
    pub k: usize,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    pub budget: u64,
}

/// Applies each perturbation `trials` times and re-checks robustness at the
/// degraded parameters: `(α/2, k)` after deleting `⌊βn⌋` vertices or edges with
/// at most `⌊βn⌋` lost per vertex, `(α³/2, k + 2)` after adding a vertex with
/// `⌈αn⌉` neighbours in `F`. Here `n = g.n()`.
pub fn perturbation_suite(
    g: &ColouredGraph,
    view: View,
    f: &VertexSet,
    bipartition: Option<(&VertexSet, &VertexSet)>,
    p: &PerturbationParams,
) -> PerturbationReport {
    let n = g.n();
    let cap = (p.beta * n as f64).floor() as usize;
    let mut rng = rng(p.seed);
    let mut trials = Vec::new();
    let mut record = |kind, alpha: f64, k, n_ref, size, res: Result<RobustnessCheck, RobustError>| {
        let (passed, error) = match res {
            Ok(c) => (c.verdict != Verdict::None, None),
            Err(e) => (false, Some(e.to_string())),
        };
        trials.push(PerturbationTrial { kind, alpha, k, n_ref, passed, size, error });
    };
    let restrict = |s: &VertexSet, keep: &VertexSet| s.intersection(keep);

    for _ in 0..p.trials {
        // Vertex deletion.
        let mut members = f.to_vec();
        members.shuffle(&mut rng);
        let mut keep = f.clone();
        for &v in members.iter().take(cap) {
            keep.remove(v);
        }
        let bip = bipartition.map(|(x, y)| (restrict(x, &keep), restrict(y, &keep)));
        let res = check_robust(g, view, &keep, p.alpha / 2.0, p.k, n, bip.as_ref().map(|(x, y)| (x, y)), p.budget);
        record(Perturbation::VertexDeletion, p.alpha / 2.0, p.k, n, cap.min(f.len()), res);

        // Edge deletion with a per-vertex cap.
        let mut h = g.clone();
        let mut lost = vec![0usize; n];
        let mut edges: Vec<(usize, usize)> =
            g.edges(view).into_iter().filter(|&(a, b)| f.contains(a) && f.contains(b)).collect();
        edges.shuffle(&mut rng);
        let mut removed = 0;
        for (a, b) in edges {
            if lost[a] < cap && lost[b] < cap {
                let m = h.mark(a, b);
                let keep_mark = match view {
                    View::Red => Mark::from_flags(false, m.is_blue()),
                    View::Blue => Mark::from_flags(m.is_red(), false),
                    View::Union => Mark::None,
                };
                h.set_mark(a, b, keep_mark);
                lost[a] += 1;
                lost[b] += 1;
                removed += 1;
            }
        }
        let res = check_robust(&h, view, f, p.alpha / 2.0, p.k, n, bipartition, p.budget);
        record(Perturbation::EdgeDeletion, p.alpha / 2.0, p.k, n, removed, res);

        // Vertex addition.
        let mut h = g.with_extra_vertex();
        let new = n;
        let attach = (p.alpha * n as f64).ceil() as usize;
        let pool: Vec<usize> = match bipartition {
            // The new vertex joins X, so it attaches into Y.
            Some((_, y)) => y.to_vec(),
            None => f.to_vec(),
        };
        let chosen: Vec<usize> = pool.choose_multiple(&mut rng, attach.min(pool.len())).copied().collect();
        for &v in &chosen {
            let mark = match view {
                View::Blue => Mark::Blue,
                _ => Mark::Red,
            };
            h.set_mark(new, v, mark);
        }
        let lift = |s: &VertexSet| VertexSet::from_vertices(n + 1, s.iter());
        let mut f2 = lift(f);
        f2.insert(new);
        let bip = bipartition.map(|(x, y)| {
            let mut x2 = lift(x);
            x2.insert(new);
            (x2, lift(y))
        });
        let a3 = p.alpha.powi(3) / 2.0;
        let res = check_robust(&h, view, &f2, a3, p.k + 2, n + 1, bip.as_ref().map(|(x, y)| (x, y)), p.budget);
        record(Perturbation::VertexAddition, a3, p.k + 2, n + 1, chosen.len(), res);
    }
    PerturbationReport { trials }
}
