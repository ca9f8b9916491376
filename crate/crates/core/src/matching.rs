//! Maximum matchings and the matching-or-structure dichotomies built on them.
//!
//! [`max_matching`] is Edmonds' blossom algorithm; [`bipartite_max_matching`]
//! is Hopcroft–Karp. Both are deterministic for a fixed vertex numbering.

use crate::graph::{ColouredGraph, View};
use crate::vertex_set::VertexSet;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;
use thiserror::Error;

/// Largest vertex count accepted by the exhaustive searches.
pub const EXHAUSTIVE_CAP: usize = 16;

const NONE: usize = usize::MAX;
const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("exhaustive search is capped at {cap} vertices, got {n}")]
    Capacity { n: usize, cap: usize },
    #[error("premise violated: {0}")]
    Premise(String),
    /// The premises held but no perfect matching exists. Unreachable if the lemma is true.
    #[error("lemma falsified: {0}")]
    LemmaFalsified(String),
}

fn premise<T>(msg: impl Into<String>) -> Result<T, MatchingError> {
    Err(MatchingError::Premise(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Matching {
    /// Matched pairs `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl Matching {
    fn from_mates(mate: &[usize]) -> Matching {
        let edges = mate.iter().enumerate().filter(|&(u, &v)| v != NONE && u < v).map(|(u, &v)| (u, v)).collect();
        Matching { edges }
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_perfect(&self, n: usize) -> bool {
        2 * self.edges.len() == n
    }

    /// Disjoint edges, all present in `view`.
    pub fn is_valid(&self, g: &ColouredGraph, view: View) -> bool {
        let mut seen = VertexSet::empty(g.n());
        self.edges.iter().all(|&(u, v)| g.has_edge(u, v, view) && seen.insert(u) && seen.insert(v))
    }

    pub fn covered(&self, n: usize) -> VertexSet {
        VertexSet::from_vertices(n, self.edges.iter().flat_map(|&(u, v)| [u, v]))
    }
}

fn adjacency_lists(g: &ColouredGraph, view: View) -> Vec<Vec<usize>> {
    (0..g.n()).map(|v| g.neighbours(v, view).to_vec()).collect()
}

struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        let n = adj.len();
        Blossom {
            adj,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for i in 0..n {
            self.base[i] = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn run(mut self) -> Vec<usize> {
        let n = self.adj.len();
        for v in 0..n {
            if self.mate[v] == NONE {
                if let Some(&u) = self.adj[v].iter().find(|&&u| self.mate[u] == NONE) {
                    self.mate[v] = u;
                    self.mate[u] = v;
                }
            }
        }
        for root in 0..n {
            if self.mate[root] != NONE {
                continue;
            }
            if let Some(mut v) = self.find_path(root) {
                while v != NONE {
                    let pv = self.parent[v];
                    let ppv = self.mate[pv];
                    self.mate[v] = pv;
                    self.mate[pv] = v;
                    v = ppv;
                }
            }
        }
        self.mate
    }
}

/// Maximum-cardinality matching of `view` (Edmonds' blossom algorithm).
pub fn max_matching(g: &ColouredGraph, view: View) -> Matching {
    let adj = adjacency_lists(g, view);
    Matching::from_mates(&Blossom::new(&adj).run())
}

/// Maximum matching using only edges between `left` and its complement (Hopcroft–Karp).
pub fn bipartite_max_matching(g: &ColouredGraph, view: View, left: &VertexSet) -> Matching {
    let n = g.n();
    let right = left.complement();
    let ls = left.to_vec();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbours(v, view).intersection(&right).to_vec()).collect();
    let mut mate = vec![NONE; n];
    let mut dist = vec![usize::MAX; n];
    loop {
        // Layer the free left vertices and everything reachable by alternating paths.
        let mut queue = VecDeque::new();
        for &u in &ls {
            if mate[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                match mate[w] {
                    NONE => found = true,
                    m if dist[m] == usize::MAX => {
                        dist[m] = dist[u] + 1;
                        queue.push_back(m);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        fn augment(u: usize, adj: &[Vec<usize>], mate: &mut [usize], dist: &mut [usize]) -> bool {
            for i in 0..adj[u].len() {
                let w = adj[u][i];
                let m = mate[w];
                if m == NONE || (dist[m] == dist[u] + 1 && augment(m, adj, mate, dist)) {
                    mate[u] = w;
                    mate[w] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for &u in &ls {
            if mate[u] == NONE {
                augment(u, &adj, &mut mate, &mut dist);
            }
        }
    }
    Matching::from_mates(&mate)
}

/// Connected components of `view` restricted to `keep`, each as a vertex set, ordered by smallest vertex.
pub fn components(g: &ColouredGraph, view: View, keep: &VertexSet) -> Vec<VertexSet> {
    let mut left = keep.clone();
    let mut out = Vec::new();
    while let Some(s) = left.first() {
        let mut comp = VertexSet::empty(g.n());
        comp.insert(s);
        let mut stack = vec![s];
        left.remove(s);
        while let Some(v) = stack.pop() {
            for w in g.neighbours(v, view).intersection(&left).iter() {
                left.remove(w);
                comp.insert(w);
                stack.push(w);
            }
        }
        out.push(comp);
    }
    out
}

/// Number of odd components of `view` after deleting `removed`.
pub fn odd_components(g: &ColouredGraph, view: View, removed: &VertexSet) -> usize {
    components(g, view, &removed.complement()).iter().filter(|c| c.len() % 2 == 1).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum TutteVerdict {
    Ok,
    /// Deleting `set` leaves `odd_components > |set|` odd components.
    Violation { set: Vec<usize>, odd_components: usize },
}

fn odd_components_mask(adj: &[u32], keep: u32) -> usize {
    let mut rest = keep;
    let mut odd = 0;
    while rest != 0 {
        let mut comp = rest & rest.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let mut grow = 0;
            let mut f = frontier;
            while f != 0 {
                grow |= adj[f.trailing_zeros() as usize];
                f &= f - 1;
            }
            frontier = grow & keep & !comp;
            comp |= frontier;
        }
        odd += (comp.count_ones() & 1) as usize;
        rest &= !comp;
    }
    odd
}

/// Exhaustive Tutte check: the lowest-mask set `U` whose deletion leaves more
/// than `|U|` odd components, or `Ok` when none exists.
pub fn tutte_oracle(g: &ColouredGraph, view: View) -> Result<TutteVerdict, MatchingError> {
    let n = g.n();
    if n > EXHAUSTIVE_CAP {
        return Err(MatchingError::Capacity { n, cap: EXHAUSTIVE_CAP });
    }
    let adj = g.masks32(view);
    let full = ((1u64 << n) - 1) as u32;
    let hit = (0..=full)
        .into_par_iter()
        .map(|u| (u, odd_components_mask(&adj, full & !u)))
        .find_first(|&(u, odd)| odd > u.count_ones() as usize);
    Ok(match hit {
        None => TutteVerdict::Ok,
        Some((u, odd)) => TutteVerdict::Violation {
            set: (0..n).filter(|&i| u >> i & 1 == 1).collect(),
            odd_components: odd,
        },
    })
}

/// Gallai–Edmonds decomposition: `d` holds vertices missed by some maximum
/// matching, `a = N(d) \ d`, and `c` the rest. `a` is a Tutte barrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GallaiEdmonds {
    pub d: VertexSet,
    pub a: VertexSet,
    pub c: VertexSet,
    pub matching_size: usize,
}

pub fn gallai_edmonds(g: &ColouredGraph, view: View) -> GallaiEdmonds {
    let n = g.n();
    let nu = max_matching(g, view).size();
    let d = VertexSet::from_vertices(
        n,
        (0..n).into_par_iter().filter(|&v| max_matching(&g.delete_vertex(v), view).size() == nu).collect::<Vec<_>>(),
    );
    let mut a = VertexSet::empty(n);
    for v in &d {
        a.union_with(&g.neighbours(v, view));
    }
    a.subtract(&d);
    let c = d.union(&a).complement();
    GallaiEdmonds { d, a, c, matching_size: nu }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// An independent set split across two parts.
    IndependentPair,
    /// An independent set inside one part with a small neighbourhood.
    SmallNeighbourhood,
    /// A large independent set inside one part.
    LargeIndependent,
    /// A set of at most one vertex whose deletion disconnects the graph.
    NotTwoConnected,
}

/// Structural certificate returned when a lemma's matching does not exist.
///
/// `sets` by kind: independent-pair holds the two halves of the independent set;
/// small-neighbourhood holds the set and its neighbourhood; large-independent
/// holds the set; not-2-connected holds the cut.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityWitness {
    pub kind: WitnessKind,
    pub parts: Vec<usize>,
    pub sets: Vec<Vec<usize>>,
    pub eps: f64,
}

fn is_independent(g: &ColouredGraph, view: View, s: &VertexSet) -> bool {
    s.iter().all(|v| g.neighbours(v, view).is_disjoint(s))
}

fn neighbourhood(g: &ColouredGraph, view: View, s: &VertexSet) -> VertexSet {
    let mut out = VertexSet::empty(g.n());
    for v in s {
        out.union_with(&g.neighbours(v, view));
    }
    out
}

impl StabilityWitness {
    /// Checks the structural property named by `kind` directly against `g`.
    /// Size thresholds are lemma-specific and checked by the lemma functions.
    pub fn verify(&self, g: &ColouredGraph, view: View, parts: &[VertexSet]) -> bool {
        let n = g.n();
        let set = |i: usize| VertexSet::from_vertices(n, self.sets[i].iter().copied());
        let within = |s: &VertexSet, p: usize| p < parts.len() && s.is_subset(&parts[p]);
        match self.kind {
            WitnessKind::IndependentPair => {
                self.sets.len() == 2
                    && self.parts.len() == 2
                    && within(&set(0), self.parts[0])
                    && within(&set(1), self.parts[1])
                    && is_independent(g, view, &set(0).union(&set(1)))
            }
            WitnessKind::SmallNeighbourhood => {
                self.sets.len() == 2
                    && within(&set(0), self.parts[0])
                    && is_independent(g, view, &set(0))
                    && neighbourhood(g, view, &set(0)) == set(1)
            }
            WitnessKind::LargeIndependent => {
                self.sets.len() == 1 && within(&set(0), self.parts[0]) && is_independent(g, view, &set(0))
            }
            WitnessKind::NotTwoConnected => {
                let cut = set(0);
                cut.len() <= 1 && n >= cut.len() + 2 && components(g, view, &cut.complement()).len() >= 2
            }
        }
    }
}

fn check_partition(n: usize, parts: &[VertexSet], k: usize) -> Result<(), MatchingError> {
    if parts.len() != k {
        return premise(format!("expected {k} parts, got {}", parts.len()));
    }
    let mut seen = VertexSet::empty(n);
    for p in parts {
        if p.universe() != n || !p.is_disjoint(&seen) {
            return premise("parts overlap or exceed the vertex range");
        }
        seen.union_with(p);
    }
    if seen.len() != n {
        return premise("parts do not cover every vertex");
    }
    Ok(())
}

fn ge(lhs: usize, rhs: f64) -> bool {
    lhs as f64 >= rhs - TOL
}

/// Perfect matching of an even tripartite graph in which every `x ∈ X_i`
/// satisfies `deg(x) > 3n/4 - |X_i|` and every `|X_i| <= n/2`.
pub fn tripartite_exact(g: &ColouredGraph, view: View, parts: &[VertexSet]) -> Result<Matching, MatchingError> {
    let n = g.n();
    check_partition(n, parts, 3)?;
    if n % 2 == 1 {
        return premise("n must be even");
    }
    for (i, p) in parts.iter().enumerate() {
        if 2 * p.len() > n {
            return premise(format!("|X{}| = {} exceeds n/2", i + 1, p.len()));
        }
        if !is_independent(g, view, p) {
            return premise(format!("X{} is not independent", i + 1));
        }
        for x in p {
            if 4 * g.degree(x, view) + 4 * p.len() <= 3 * n {
                return premise(format!("deg({x}) = {} is not above 3n/4 - |X{}|", g.degree(x, view), i + 1));
            }
        }
    }
    let m = max_matching(g, view);
    if !m.is_perfect(n) {
        return Err(MatchingError::LemmaFalsified(format!(
            "premises hold but the maximum matching has size {} < {}",
            m.size(),
            n / 2
        )));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum LemmaOutcome {
    Matching(Matching),
    Witness(StabilityWitness),
    /// No matching, and no witness could be verified at this scale.
    Exhausted { matching_size: usize },
}

/// Tutte barrier used to seed witness candidates on large instances.
fn barrier(g: &ColouredGraph, view: View) -> VertexSet {
    gallai_edmonds(g, view).a
}

/// One vertex from each component of `G - s`, restricted to `allowed`, choosing
/// between the two `targets` so the two sides stay as even as possible.
fn balanced_representatives(
    g: &ColouredGraph,
    view: View,
    s: &VertexSet,
    allowed: &VertexSet,
    targets: [&VertexSet; 2],
) -> [VertexSet; 2] {
    let n = g.n();
    let mut out = [VertexSet::empty(n), VertexSet::empty(n)];
    for comp in components(g, view, &s.complement()) {
        let choices = [comp.intersection(targets[0]).intersection(allowed), comp.intersection(targets[1]).intersection(allowed)];
        let order = if out[0].len() <= out[1].len() { [0, 1] } else { [1, 0] };
        for side in order {
            if let Some(v) = choices[side].first() {
                out[side].insert(v);
                break;
            }
        }
    }
    out
}

/// Exhaustive search for an independent set split over two sets, each side at least `lo_each`
/// and the total at least `lo_total`.
fn exhaustive_split_independent(
    g: &ColouredGraph,
    view: View,
    a: &VertexSet,
    b: &VertexSet,
    lo_each: f64,
    lo_total: f64,
) -> Option<[VertexSet; 2]> {
    let ids = a.union(b).to_vec();
    let k = ids.len();
    let n = g.n();
    let local_adj: Vec<u32> = ids
        .iter()
        .map(|&v| ids.iter().enumerate().filter(|&(_, &w)| g.has_edge(v, w, view)).fold(0u32, |m, (j, _)| m | 1 << j))
        .collect();
    let in_a: u32 = ids.iter().enumerate().filter(|&(_, &v)| a.contains(v)).fold(0, |m, (j, _)| m | 1 << j);
    let hit = (0..1u32 << k).into_par_iter().find_first(|&m| {
        let ca = (m & in_a).count_ones() as usize;
        let cb = (m & !in_a).count_ones() as usize;
        ge(ca, lo_each)
            && ge(cb, lo_each)
            && ge(ca + cb, lo_total)
            && (0..k).all(|j| m >> j & 1 == 0 || local_adj[j] & m == 0)
    })?;
    let pick = |side: bool| {
        VertexSet::from_vertices(
            n,
            (0..k).filter(|&j| hit >> j & 1 == 1 && ((in_a >> j & 1 == 1) == side)).map(|j| ids[j]),
        )
    };
    Some([pick(true), pick(false)])
}

/// Largest independent set inside `s` (exhaustive; `|s| <= 24`).
fn max_independent_within(g: &ColouredGraph, view: View, s: &VertexSet) -> VertexSet {
    let ids = s.to_vec();
    let k = ids.len();
    assert!(k <= 24);
    let local_adj: Vec<u32> = ids
        .iter()
        .map(|&v| ids.iter().enumerate().filter(|&(_, &w)| g.has_edge(v, w, view)).fold(0u32, |m, (j, _)| m | 1 << j))
        .collect();
    let best = (0..1u32 << k)
        .into_par_iter()
        .filter(|&m| (0..k).all(|j| m >> j & 1 == 0 || local_adj[j] & m == 0))
        .max_by_key(|&m| (m.count_ones(), std::cmp::Reverse(m)))
        .unwrap_or(0);
    VertexSet::from_vertices(g.n(), (0..k).filter(|&j| best >> j & 1 == 1).map(|j| ids[j]))
}

/// Greedy independent set inside `s`, taking minimum-degree vertices first.
fn greedy_independent_within(g: &ColouredGraph, view: View, s: &VertexSet) -> VertexSet {
    let mut pool = s.clone();
    let mut out = VertexSet::empty(g.n());
    while !pool.is_empty() {
        let v = pool.iter().min_by_key(|&v| (g.degree_into(v, &pool, view), v)).unwrap();
        out.insert(v);
        pool.remove(v);
        pool.subtract(&g.neighbours(v, view));
    }
    out
}

fn pair_witness(parts: [usize; 2], sets: [VertexSet; 2], eps: f64) -> StabilityWitness {
    StabilityWitness {
        kind: WitnessKind::IndependentPair,
        parts: parts.to_vec(),
        sets: sets.iter().map(|s| s.to_vec()).collect(),
        eps,
    }
}

/// Stability form of the tripartite lemma: a perfect matching, or an
/// independent `Y ⊆ X_i ∪ X_j` with `|Y ∩ X_i|, |Y ∩ X_j| >= (1/4 - 5ε)n`.
pub fn tripartite_stability(
    g: &ColouredGraph,
    view: View,
    parts: &[VertexSet],
    eps: f64,
) -> Result<LemmaOutcome, MatchingError> {
    let n = g.n();
    check_partition(n, parts, 3)?;
    if !(eps > 0.0 && eps < 0.125) {
        return premise(format!("eps = {eps} outside (0, 1/8)"));
    }
    if n % 2 == 1 {
        return premise("n must be even");
    }
    let nf = n as f64;
    for (i, p) in parts.iter().enumerate() {
        if p.len() as f64 > (0.5 - 4.0 * eps) * nf + TOL {
            return premise(format!("|X{}| = {} exceeds (1/2 - 4 eps) n", i + 1, p.len()));
        }
        let outside = p.complement();
        for x in p {
            if !ge(g.degree_into(x, &outside, view), (0.75 - eps) * nf - p.len() as f64) {
                return premise(format!("deg({x}, V \\ X{}) below (3/4 - eps) n - |X{}|", i + 1, i + 1));
            }
        }
    }
    let m = max_matching(g, view);
    if m.is_perfect(n) {
        return Ok(LemmaOutcome::Matching(m));
    }
    let lo = (0.25 - 5.0 * eps) * nf;
    let pairs = [[0, 1], [0, 2], [1, 2]];
    for [i, j] in pairs {
        let found = if n <= EXHAUSTIVE_CAP {
            exhaustive_split_independent(g, view, &parts[i], &parts[j], lo, 0.0)
        } else {
            let s = barrier(g, view);
            let allowed = parts[i].union(&parts[j]);
            let reps = balanced_representatives(g, view, &s, &allowed, [&parts[i], &parts[j]]);
            (ge(reps[0].len(), lo) && ge(reps[1].len(), lo)).then_some(reps)
        };
        if let Some(sets) = found {
            let w = pair_witness([i, j], sets, eps);
            assert!(w.verify(g, view, parts), "tripartite witness failed verification");
            return Ok(LemmaOutcome::Witness(w));
        }
    }
    Ok(LemmaOutcome::Exhausted { matching_size: m.size() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum HallOutcome {
    Matching(Matching),
    /// `A1 ⊆ X1`, `A2 ⊆ X2` with no edges between and sizes within `(1/4 ± ε)n`.
    EmptyPair { a1: Vec<usize>, a2: Vec<usize>, eps: f64 },
    Exhausted { matching_size: usize },
}

/// Balanced bipartite graph with `δ >= (1/4 - ε)n`: a perfect matching or an
/// empty pair `G[A1, A2]`.
pub fn hall_dichotomy(
    g: &ColouredGraph,
    view: View,
    x1: &VertexSet,
    x2: &VertexSet,
    eps: f64,
) -> Result<HallOutcome, MatchingError> {
    let n = g.n();
    check_partition(n, &[x1.clone(), x2.clone()], 2)?;
    if x1.len() != x2.len() {
        return premise(format!("parts have sizes {} and {}", x1.len(), x2.len()));
    }
    let nf = n as f64;
    for (p, q) in [(x1, x2), (x2, x1)] {
        for v in p {
            if !ge(g.degree_into(v, q, view), (0.25 - eps) * nf) {
                return premise(format!("vertex {v} has cross degree below (1/4 - eps) n"));
            }
        }
    }
    let m = bipartite_max_matching(g, view, x1);
    if m.is_perfect(n) {
        return Ok(HallOutcome::Matching(m));
    }
    // König: vertices reachable from free X1 vertices along alternating paths.
    let mut mate = vec![NONE; n];
    for &(u, v) in &m.edges {
        mate[u] = v;
        mate[v] = u;
    }
    let mut reached = VertexSet::empty(n);
    let mut queue: VecDeque<usize> = x1.iter().filter(|&u| mate[u] == NONE).collect();
    for &u in &queue {
        reached.insert(u);
    }
    while let Some(u) = queue.pop_front() {
        for w in g.neighbours(u, view).intersection(x2).iter() {
            if reached.insert(w) {
                let m = mate[w];
                if m != NONE && reached.insert(m) {
                    queue.push_back(m);
                }
            }
        }
    }
    let a1 = reached.intersection(x1);
    let na1 = neighbourhood(g, view, &a1).intersection(x2);
    debug_assert!(na1.len() < a1.len());
    let a2 = x2.difference(&na1);
    let (lo, hi) = ((0.25 - eps) * nf, (0.25 + eps) * nf);
    let t = a1.len().min(a2.len()).min((hi + TOL).floor() as usize);
    if !ge(t, lo) {
        return Ok(HallOutcome::Exhausted { matching_size: m.size() });
    }
    let a1: Vec<usize> = a1.iter().take(t).collect();
    let a2: Vec<usize> = a2.iter().take(t).collect();
    assert!(a1.iter().all(|&u| a2.iter().all(|&v| !g.has_edge(u, v, view))));
    Ok(HallOutcome::EmptyPair { a1, a2, eps })
}

/// A cut of size at most one, if the graph is not 2-connected.
pub fn small_cut(g: &ColouredGraph, view: View) -> Option<Vec<usize>> {
    let n = g.n();
    if n < 3 {
        return None;
    }
    let all = g.vertices();
    if components(g, view, &all).len() > 1 {
        return Some(Vec::new());
    }
    (0..n).find(|&v| {
        let mut keep = all.clone();
        keep.remove(v);
        components(g, view, &keep).len() > 1
    })
    .map(|v| vec![v])
}

/// The five-way dichotomy for a near-balanced partition `{X1, X2}`; see [`WitnessKind`].
/// Outcomes are tried in order: perfect matching, small cut, small
/// neighbourhood, large independent set in the bigger part, split independent set.
pub fn bipartite_technical(
    g: &ColouredGraph,
    view: View,
    x1: &VertexSet,
    x2: &VertexSet,
    eps: f64,
) -> Result<LemmaOutcome, MatchingError> {
    let n = g.n();
    let parts = [x1.clone(), x2.clone()];
    check_partition(n, &parts, 2)?;
    if n % 2 == 1 {
        return premise("n must be even");
    }
    if !(eps > 0.0 && eps < 0.25) {
        return premise(format!("eps = {eps} outside (0, 1/4)"));
    }
    let nf = n as f64;
    for i in 0..2 {
        if !ge(parts[i].len(), (0.5 - eps) * nf) {
            return premise(format!("|X{}| below (1/2 - eps) n", i + 1));
        }
        for u in &parts[i] {
            if !ge(g.degree_into(u, &parts[1 - i], view), (0.75 - eps) * nf - parts[i].len() as f64) {
                return premise(format!("deg({u}, X{}) below (3/4 - eps) n - |X{}|", 2 - i, i + 1));
            }
        }
    }
    let m = max_matching(g, view);
    if m.is_perfect(n) {
        return Ok(LemmaOutcome::Matching(m));
    }
    let ret = |w: StabilityWitness| {
        assert!(w.verify(g, view, &parts), "bipartite technical witness failed verification");
        Ok(LemmaOutcome::Witness(w))
    };
    if let Some(cut) = small_cut(g, view) {
        return ret(StabilityWitness { kind: WitnessKind::NotTwoConnected, parts: vec![], sets: vec![cut], eps });
    }

    let exhaustive = n <= EXHAUSTIVE_CAP;
    let s = if exhaustive { VertexSet::empty(n) } else { barrier(g, view) };

    // Small neighbourhood: independent A_i ⊆ X_i, |A_i| >= (1/4 - 4ε)n, |N(A_i)| <= (1/4 + 3ε)n.
    let (lo3, hi3) = ((0.25 - 4.0 * eps) * nf, (0.25 + 3.0 * eps) * nf);
    for i in 0..2 {
        let cand = if exhaustive {
            let ids = parts[i].to_vec();
            (0..1u32 << ids.len()).into_par_iter().find_first(|&m| {
                let a = VertexSet::from_vertices(n, (0..ids.len()).filter(|&j| m >> j & 1 == 1).map(|j| ids[j]));
                ge(a.len(), lo3) && is_independent(g, view, &a) && neighbourhood(g, view, &a).len() as f64 <= hi3 + TOL
            })
            .map(|m| VertexSet::from_vertices(n, (0..ids.len()).filter(|&j| m >> j & 1 == 1).map(|j| ids[j])))
        } else {
            // Vertices of X_i isolated in G - S have all neighbours in S.
            let isolated = VertexSet::from_vertices(
                n,
                parts[i].difference(&s).iter().filter(|&v| g.neighbours(v, view).is_subset(&s)),
            );
            let a = greedy_independent_within(g, view, &isolated);
            (ge(a.len(), lo3) && neighbourhood(g, view, &a).len() as f64 <= hi3 + TOL).then_some(a)
        };
        if let Some(a) = cand {
            let nb = neighbourhood(g, view, &a);
            return ret(StabilityWitness {
                kind: WitnessKind::SmallNeighbourhood,
                parts: vec![i],
                sets: vec![a.to_vec(), nb.to_vec()],
                eps,
            });
        }
    }

    // Large independent set inside the strictly bigger part.
    let lo4 = (0.5 - eps) * nf;
    for i in 0..2 {
        if parts[i].len() <= parts[1 - i].len() {
            continue;
        }
        let a = if parts[i].len() <= 24 {
            max_independent_within(g, view, &parts[i])
        } else {
            let reps = balanced_representatives(g, view, &s, &parts[i], [&parts[i], &parts[i]]);
            let greedy = greedy_independent_within(g, view, &parts[i]);
            if reps[0].len() >= greedy.len() { reps[0].clone() } else { greedy }
        };
        if ge(a.len(), lo4) {
            return ret(StabilityWitness { kind: WitnessKind::LargeIndependent, parts: vec![i], sets: vec![a.to_vec()], eps });
        }
    }

    // Split independent set: |A| >= (1/2 - 6ε)n, |A ∩ X_i| >= (1/4 - 9ε)n for both i.
    let (lo5_each, lo5_total) = ((0.25 - 9.0 * eps) * nf, (0.5 - 6.0 * eps) * nf);
    let found = if exhaustive {
        exhaustive_split_independent(g, view, x1, x2, lo5_each, lo5_total)
    } else {
        let reps = balanced_representatives(g, view, &s, &g.vertices(), [x1, x2]);
        (ge(reps[0].len(), lo5_each) && ge(reps[1].len(), lo5_each) && ge(reps[0].len() + reps[1].len(), lo5_total))
            .then_some(reps)
    };
    if let Some(sets) = found {
        return ret(pair_witness([0, 1], sets, eps));
    }
    Ok(LemmaOutcome::Exhausted { matching_size: m.size() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mark;

    fn petersen() -> ColouredGraph {
        let mut g = ColouredGraph::empty(10);
        for i in 0..5 {
            g.set_mark(i, (i + 1) % 5, Mark::Red);
            g.set_mark(i, i + 5, Mark::Red);
            g.set_mark(5 + i, 5 + (i + 2) % 5, Mark::Red);
        }
        g
    }

    fn set(n: usize, vs: impl IntoIterator<Item = usize>) -> VertexSet {
        VertexSet::from_vertices(n, vs)
    }

    fn complete_multipartite(sizes: &[usize]) -> (ColouredGraph, Vec<VertexSet>) {
        let n: usize = sizes.iter().sum();
        let mut parts = Vec::new();
        let mut start = 0;
        for &s in sizes {
            parts.push(set(n, start..start + s));
            start += s;
        }
        let mut g = ColouredGraph::empty(n);
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                for u in &parts[i] {
                    for v in &parts[j] {
                        g.set_mark(u, v, Mark::Red);
                    }
                }
            }
        }
        (g, parts)
    }

    #[test]
    fn matching_sizes() {
        assert_eq!(max_matching(&ColouredGraph::complete(4, Mark::Red), View::Red).size(), 2);
        let c5 = ColouredGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, Mark::Blue)));
        assert_eq!(max_matching(&c5, View::Blue).size(), 2);
        let p = petersen();
        let m = max_matching(&p, View::Red);
        assert_eq!(m.size(), 5);
        assert!(m.is_valid(&p, View::Red));
        assert_eq!(tutte_oracle(&p, View::Red), Ok(TutteVerdict::Ok));
    }

    #[test]
    fn tutte_examples() {
        assert_eq!(tutte_oracle(&ColouredGraph::complete(4, Mark::Red), View::Red), Ok(TutteVerdict::Ok));
        let star = ColouredGraph::from_edges(4, (1..4).map(|i| (0, i, Mark::Red)));
        assert_eq!(
            tutte_oracle(&star, View::Red),
            Ok(TutteVerdict::Violation { set: vec![0], odd_components: 3 })
        );
        let odd = ColouredGraph::complete(5, Mark::Red);
        assert_eq!(tutte_oracle(&odd, View::Red), Ok(TutteVerdict::Violation { set: vec![], odd_components: 1 }));
        assert!(matches!(tutte_oracle(&ColouredGraph::empty(17), View::Red), Err(MatchingError::Capacity { .. })));
    }

    #[test]
    fn hopcroft_karp_on_complete_bipartite() {
        let (g, parts) = complete_multipartite(&[4, 4]);
        let m = bipartite_max_matching(&g, View::Red, &parts[0]);
        assert!(m.is_perfect(8) && m.is_valid(&g, View::Red));
    }

    #[test]
    fn gallai_edmonds_on_star() {
        let star = ColouredGraph::from_edges(4, (1..4).map(|i| (0, i, Mark::Red)));
        let ge = gallai_edmonds(&star, View::Red);
        assert_eq!(ge.a.to_vec(), vec![0]);
        assert_eq!(ge.d.to_vec(), vec![1, 2, 3]);
        assert!(ge.c.is_empty());
    }

    #[test]
    fn tripartite_exact_examples() {
        let (g, parts) = complete_multipartite(&[2, 2, 2]);
        assert_eq!(tripartite_exact(&g, View::Red, &parts).unwrap().size(), 3);

        let (mut g, parts) = complete_multipartite(&[4, 4, 4]);
        g.set_mark(0, 4, Mark::None);
        assert!(tripartite_exact(&g, View::Red, &parts).unwrap().is_perfect(12));

        let (mut g, parts) = complete_multipartite(&[2, 2, 2]);
        g.set_mark(0, 2, Mark::None);
        g.set_mark(0, 3, Mark::None);
        assert!(matches!(tripartite_exact(&g, View::Red, &parts), Err(MatchingError::Premise(_))));
    }

    /// X1 complete to everything; Y2 ⊆ X2 and Y3 ⊆ X3 independent with no edges between them.
    fn stability_extremal() -> (ColouredGraph, Vec<VertexSet>) {
        let n = 26;
        let x1 = set(n, 0..8);
        let (s2, y2) = (set(n, 8..10), set(n, 10..17));
        let (s3, y3) = (set(n, 17..19), set(n, 19..26));
        let parts = vec![x1, s2.union(&y2), s3.union(&y3)];
        let mut g = ColouredGraph::empty(n);
        for i in 0..3 {
            for j in i + 1..3 {
                for u in &parts[i] {
                    for v in &parts[j] {
                        if !(y2.contains(u) && y3.contains(v)) {
                            g.set_mark(u, v, Mark::Red);
                        }
                    }
                }
            }
        }
        (g, parts)
    }

    #[test]
    fn tripartite_stability_examples() {
        let (g, parts) = complete_multipartite(&[6, 6, 6]);
        assert!(matches!(tripartite_stability(&g, View::Red, &parts, 0.02), Ok(LemmaOutcome::Matching(_))));

        let (g, parts) = stability_extremal();
        match tripartite_stability(&g, View::Red, &parts, 0.03).unwrap() {
            LemmaOutcome::Witness(w) => {
                assert_eq!(w.kind, WitnessKind::IndependentPair);
                assert_eq!(w.parts, vec![1, 2]);
                assert!(w.sets.iter().all(|s| s.len() as f64 >= (0.25 - 0.15) * 26.0));
                assert!(w.verify(&g, View::Red, &parts));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        assert!(matches!(tripartite_stability(&g, View::Red, &parts, 0.2), Err(MatchingError::Premise(_))));
    }

    #[test]
    fn hall_examples() {
        let (g, parts) = complete_multipartite(&[5, 5]);
        assert!(matches!(hall_dichotomy(&g, View::Red, &parts[0], &parts[1], 0.05), Ok(HallOutcome::Matching(_))));

        // K_{5,4} ∪ K_{4,5}: X1 = A ∪ B', X2 = B ∪ A'.
        let n = 18;
        let (a, b, b2, a2) = (set(n, 0..5), set(n, 5..9), set(n, 9..13), set(n, 13..18));
        let mut g = ColouredGraph::empty(n);
        for (p, q) in [(&a, &b), (&b2, &a2)] {
            for u in p {
                for v in q {
                    g.set_mark(u, v, Mark::Red);
                }
            }
        }
        let x1 = a.union(&b2);
        let x2 = b.union(&a2);
        match hall_dichotomy(&g, View::Red, &x1, &x2, 0.05).unwrap() {
            HallOutcome::EmptyPair { a1, a2, .. } => {
                assert_eq!(a1.len(), a2.len());
                assert!((3.6..=5.4).contains(&(a1.len() as f64)));
            }
            other => panic!("expected an empty pair, got {other:?}"),
        }
        let (g, _) = complete_multipartite(&[3, 5]);
        assert!(matches!(
            hall_dichotomy(&g, View::Red, &set(8, 0..3), &set(8, 3..8), 0.05),
            Err(MatchingError::Premise(_))
        ));
    }

    #[test]
    fn bipartite_technical_examples() {
        let (g, parts) = complete_multipartite(&[6, 6]);
        assert!(matches!(
            bipartite_technical(&g, View::Red, &parts[0], &parts[1], 0.05),
            Ok(LemmaOutcome::Matching(_))
        ));

        // Cut vertex c = 0 joins P–Q and P'–Q'.
        let n = 16;
        let (p, p2) = (set(n, 1..4), set(n, 4..7));
        let (q, q2) = (set(n, 7..12), set(n, 12..16));
        let mut g = ColouredGraph::empty(n);
        for (s, t) in [(&p, &q), (&p2, &q2)] {
            for u in s {
                for v in t {
                    g.set_mark(u, v, Mark::Red);
                }
            }
        }
        for v in q.union(&q2).iter() {
            g.set_mark(0, v, Mark::Red);
        }
        let x1 = set(n, 0..7);
        let x2 = set(n, 7..16);
        match bipartite_technical(&g, View::Red, &x1, &x2, 0.1).unwrap() {
            LemmaOutcome::Witness(w) => {
                assert_eq!(w.kind, WitnessKind::NotTwoConnected);
                assert_eq!(w.sets, vec![vec![0]]);
            }
            other => panic!("expected a cut, got {other:?}"),
        }

        // Independent X1 of 11 against X2 of 9.
        let (g, parts) = complete_multipartite(&[11, 9]);
        match bipartite_technical(&g, View::Red, &parts[0], &parts[1], 0.05).unwrap() {
            LemmaOutcome::Witness(w) => {
                assert_eq!(w.kind, WitnessKind::LargeIndependent);
                assert_eq!(w.parts, vec![0]);
                assert!(w.sets[0].len() as f64 >= 0.45 * 20.0);
            }
            other => panic!("expected a large independent set, got {other:?}"),
        }
    }
}
