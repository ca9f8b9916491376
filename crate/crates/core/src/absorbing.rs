//! Absorbing paths inside robust subgraphs.
//!
//! An absorbing path is a chain of vertex-disjoint gadgets joined by short
//! links. Each gadget is built around an anchor: a pair `(x, y)` in strong mode
//! or a quadruple `(a, b, c, d)` in weak mode. A gadget can be rewired into a
//! path with the same ends that also passes through one extra vertex `w`
//! adjacent to both anchor vertices (strong), or through an extra pair
//! `x ∈ X`, `y ∈ Y` with `a, c ∈ N(x)` and `b, d ∈ N(y)` (weak). Absorbing a
//! set means assigning each new vertex (or pair) its own unused gadget.
//!
//! Strong gadget with parameter `l`: a spine `u_1 … u_{4l}` from `x = u_1` to
//! `y = u_{4l}`, connectors `P_i` of `4l - 1` edges joining `u_i` to `u_{i+3}`
//! for odd `i <= 4l - 5`, and `P_{4l-3}` joining `u_{4l-3}` to `u_{4l-1}`. Its
//! block in the path runs from `u_2` to `u_{4l}`.
//!
//! Weak gadget (`l >= 2`): spines `a_1 b_1 … a_{2l} b_{2l}` and
//! `c_1 d_1 … c_{2l} d_{2l}` with `a_1 = a`, `b_{2l} = b`, `c_1 = c`,
//! `d_{2l} = d`, and connectors `P_1 (a_1, c_{2l})`, `P_i (a_i, b_{i+1})` for
//! `2 <= i <= 2l - 2`, `P_{2l-1} (a_{2l-1}, a_{2l})`, `Q_2 (d_2, d_1)`,
//! `Q_i (d_i, c_{i-1})` for `3 <= i <= 2l` and `R (c_1, b_2)`. Each connector
//! takes the shortest length of the parity forced by the bipartition. Its
//! block runs from `b_1` to `b_{2l}`.

use crate::generate::rng;
use crate::graph::{ColouredGraph, View};
use crate::robustness::{count_paths, RobustError};
use crate::vertex_set::VertexSet;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbsorbError {
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("no anchor family met the coverage threshold after {attempts} attempts")]
    CoverageUnachievable { attempts: usize },
    #[error("ran out of fresh vertices: {0}")]
    Exhausted(String),
    #[error("vertex {w} is not adjacent to the anchors of gadget {gadget}")]
    NotAdjacent { gadget: usize, w: usize },
    #[error("gadget {0} has already absorbed")]
    GadgetUsed(usize),
    #[error("no unused gadget can absorb vertex {stuck}")]
    Assignment { stuck: usize },
    #[error("W meets X in {x} vertices and Y in {y}; weak absorption needs equal counts")]
    Unbalanced { x: usize, y: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no l <= {k_max} has enough paths of length 4l - 1")]
    NoUniformL { k_max: usize },
    #[error(transparent)]
    Robust(#[from] RobustError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

/// The subgraph `F` that all constructions live in: strong mode uses `view[f]`,
/// weak mode `view[X, Y]`.
#[derive(Clone, Debug)]
pub struct Host {
    n: usize,
    rows: Vec<VertexSet>,
    f: VertexSet,
    bip: Option<(VertexSet, VertexSet)>,
}

impl Host {
    pub fn strong(g: &ColouredGraph, view: View, f: &VertexSet) -> Host {
        let rows = (0..g.n())
            .map(|v| if f.contains(v) { g.neighbours(v, view).intersection(f) } else { VertexSet::empty(g.n()) })
            .collect();
        Host { n: g.n(), rows, f: f.clone(), bip: None }
    }

    pub fn weak(g: &ColouredGraph, view: View, x: &VertexSet, y: &VertexSet) -> Result<Host, AbsorbError> {
        if !x.is_disjoint(y) {
            return Err(AbsorbError::Invalid("X and Y overlap".into()));
        }
        let f = x.union(y);
        let rows = (0..g.n())
            .map(|v| {
                if x.contains(v) {
                    g.neighbours(v, view).intersection(y)
                } else if y.contains(v) {
                    g.neighbours(v, view).intersection(x)
                } else {
                    VertexSet::empty(g.n())
                }
            })
            .collect();
        Ok(Host { n: g.n(), rows, f, bip: Some((x.clone(), y.clone())) })
    }

    pub fn mode(&self) -> Mode {
        if self.bip.is_some() {
            Mode::Weak
        } else {
            Mode::Strong
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.f
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u < self.n && self.rows[u].contains(v)
    }

    pub fn neighbours(&self, v: usize) -> &VertexSet {
        &self.rows[v]
    }

    pub fn min_degree(&self) -> usize {
        self.f.iter().map(|v| self.rows[v].len()).min().unwrap_or(0)
    }

    fn is_path(&self, p: &[usize]) -> bool {
        let mut seen = VertexSet::empty(self.n);
        p.iter().all(|&v| self.f.contains(v) && seen.insert(v)) && p.windows(2).all(|w| self.adjacent(w[0], w[1]))
    }

    /// Path of exactly `len` edges from `from` to `to` whose interior avoids
    /// `blocked`, found by depth-first search in increasing vertex order.
    fn find_path(&self, from: usize, to: usize, len: usize, blocked: &VertexSet, budget: &mut u64) -> Option<Vec<usize>> {
        if len == 0 || from == to {
            return None;
        }
        let mut allowed = self.f.difference(blocked);
        allowed.remove(from);
        allowed.remove(to);
        let mut path = vec![from];
        self.dfs(from, to, len, &mut allowed, &mut path, budget).then_some(path)
    }

    fn dfs(&self, cur: usize, to: usize, left: usize, allowed: &mut VertexSet, path: &mut Vec<usize>, budget: &mut u64) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if left == 1 {
            if self.adjacent(cur, to) {
                path.push(to);
                return true;
            }
            return false;
        }
        let mut cands = self.rows[cur].intersection(allowed);
        if left == 2 {
            cands.intersect_with(&self.rows[to]);
        }
        for v in cands.iter() {
            allowed.remove(v);
            path.push(v);
            if self.dfs(v, to, left - 1, allowed, path, budget) {
                return true;
            }
            path.pop();
            allowed.insert(v);
        }
        false
    }
}

/// Disjoint anchors sampled at random, with the coverage they achieved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnchorFamily {
    pub mode: Mode,
    pub members: Vec<Vec<usize>>,
    pub p: f64,
    pub seed: u64,
    /// Seed of the attempt that met the threshold.
    pub attempt_seed: u64,
    pub threshold: f64,
    pub min_coverage: usize,
}

/// Coverage of `v` (strong) by anchors inside `N(v)`.
fn strong_coverage(host: &Host, members: &[Vec<usize>], v: usize) -> usize {
    let nb = host.neighbours(v);
    members.iter().filter(|m| nb.contains(m[0]) && nb.contains(m[1])).count()
}

/// Quadruples `(a, b, c, d)` usable for the pair `x ∈ X`, `y ∈ Y`.
fn weak_coverage(host: &Host, members: &[Vec<usize>], x: usize, y: usize) -> usize {
    let (nx, ny) = (host.neighbours(x), host.neighbours(y));
    members
        .iter()
        .filter(|m| nx.contains(m[0]) && nx.contains(m[2]) && ny.contains(m[1]) && ny.contains(m[3]))
        .count()
}

fn family_min_coverage(host: &Host, members: &[Vec<usize>], skip: &VertexSet) -> usize {
    match &host.bip {
        None => host.f.difference(skip).iter().map(|v| strong_coverage(host, members, v)).min().unwrap_or(0),
        Some((x, y)) => {
            let (xs, ys) = (x.difference(skip), y.difference(skip));
            xs.iter()
                .flat_map(|a| ys.iter().map(move |b| (a, b)))
                .map(|(a, b)| weak_coverage(host, members, a, b))
                .min()
                .unwrap_or(0)
        }
    }
}

/// Coverage threshold: `pα²n/16` for pairs, `pα⁴n/16` for quadruples.
pub fn coverage_threshold(mode: Mode, p: f64, alpha: f64, n: usize) -> f64 {
    match mode {
        Mode::Strong => p * alpha.powi(2) * n as f64 / 16.0,
        Mode::Weak => p * alpha.powi(4) * n as f64 / 16.0,
    }
}

fn sample_once(host: &Host, p: f64, seed: u64) -> Vec<Vec<usize>> {
    let n = host.n;
    let mut rng = rng(seed);
    let fv = host.f.to_vec();
    let (total, prob): (u64, f64) = match &host.bip {
        None => {
            let m = fv.len() as u64 * (fv.len() as u64).saturating_sub(1) / 2;
            (m, p / n as f64)
        }
        Some((x, y)) => {
            let (sx, sy) = (x.len() as u64, y.len() as u64);
            let m = sy * sy.saturating_sub(1) * sx * sx.saturating_sub(1);
            (m, if m == 0 { 0.0 } else { (p * n as f64 / 2.0 / m as f64).min(1.0) })
        }
    };
    if total == 0 {
        return Vec::new();
    }
    let count = Binomial::new(total, prob.clamp(0.0, 1.0)).map(|b| b.sample(&mut rng)).unwrap_or(0);
    let count = count.min(total) as usize;
    let picks: Vec<u64> = if total <= usize::MAX as u64 {
        index::sample(&mut rng, total as usize, count).into_iter().map(|i| i as u64).collect()
    } else {
        (0..count).map(|_| rng.random_range(0..total)).collect()
    };
    let decode = |idx: u64| -> Vec<usize> {
        match &host.bip {
            None => {
                // Pairs i < j of fv in lexicographic order.
                let k = fv.len() as u64;
                let mut i = 0u64;
                let mut rest = idx;
                while rest >= k - 1 - i {
                    rest -= k - 1 - i;
                    i += 1;
                }
                vec![fv[i as usize], fv[(i + 1 + rest) as usize]]
            }
            Some((x, y)) => {
                let (xs, ys) = (x.to_vec(), y.to_vec());
                let (sx, sy) = (xs.len() as u64, ys.len() as u64);
                let mut r = idx;
                let ai = r % sy;
                r /= sy;
                let mut ci = r % (sy - 1);
                r /= sy - 1;
                let bi = r % sx;
                r /= sx;
                let mut di = r % (sx - 1);
                if ci >= ai {
                    ci += 1;
                }
                if di >= bi {
                    di += 1;
                }
                vec![ys[ai as usize], xs[bi as usize], ys[ci as usize], xs[di as usize]]
            }
        }
    };
    let cap = (p * n as f64).floor() as usize;
    let mut used = VertexSet::empty(n);
    let mut out = Vec::new();
    for idx in picks {
        let m = decode(idx);
        if m.iter().all(|&v| !used.contains(v)) {
            m.iter().for_each(|&v| {
                used.insert(v);
            });
            out.push(m);
            if out.len() >= cap {
                break;
            }
        }
    }
    out
}

/// Samples a disjoint anchor family whose minimum coverage reaches the threshold
/// for `alpha`, retrying with derived seeds up to `max_attempts` times.
pub fn sample_anchors(host: &Host, p: f64, alpha: f64, seed: u64, max_attempts: usize) -> Result<AnchorFamily, AbsorbError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(AbsorbError::Invalid(format!("p = {p} outside (0, 1]")));
    }
    let mode = host.mode();
    let threshold = coverage_threshold(mode, p, alpha, host.n);
    let mut seeds = rng(seed);
    for attempt in 0..max_attempts {
        let s = if attempt == 0 { seed } else { seeds.random() };
        let members = sample_once(host, p, s);
        if members.is_empty() {
            continue;
        }
        let cov = family_min_coverage(host, &members, &VertexSet::empty(host.n));
        if cov as f64 >= threshold - 1e-9 && cov > 0 {
            return Ok(AnchorFamily { mode, members, p, seed, attempt_seed: s, threshold, min_coverage: cov });
        }
    }
    Err(AbsorbError::CoverageUnachievable { attempts: max_attempts })
}

/// Evidence that every sampled pair has many paths of `4l - 1` edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformL {
    pub l: usize,
    pub threshold: f64,
    pub pairs: Vec<(usize, usize)>,
    pub counts: Vec<u64>,
}

/// Smallest `l <= k_max` for which each of `samples` random pairs (cross pairs in
/// weak mode) has at least `beta n^{4l-2}` paths of `4l - 1` edges.
pub fn find_uniform_l(host: &Host, k_max: usize, beta: f64, samples: usize, seed: u64, budget: u64) -> Result<UniformL, AbsorbError> {
    let mut rng = rng(seed);
    let (left, right) = match &host.bip {
        None => (host.f.to_vec(), host.f.to_vec()),
        Some((x, y)) => (x.to_vec(), y.to_vec()),
    };
    if left.is_empty() || right.is_empty() {
        return Err(AbsorbError::Invalid("F is too small".into()));
    }
    let mut pairs = Vec::new();
    let mut guard = 0;
    while pairs.len() < samples && guard < 100 * samples.max(1) {
        guard += 1;
        let (a, b) = (left[rng.random_range(0..left.len())], right[rng.random_range(0..right.len())]);
        if a != b {
            pairs.push((a, b));
        }
    }
    let g = host_graph(host);
    for l in 1..=k_max {
        let threshold = beta * (host.n as f64).powi(4 * l as i32 - 2);
        let counts = pairs
            .iter()
            .map(|&(a, b)| count_paths(&g, View::Red, a, b, 4 * l - 2, budget))
            .collect::<Result<Vec<_>, _>>()?;
        if counts.iter().all(|&c| c as f64 >= threshold - 1e-9) && !pairs.is_empty() {
            return Ok(UniformL { l, threshold, pairs, counts });
        }
    }
    Err(AbsorbError::NoUniformL { k_max })
}

fn host_graph(host: &Host) -> ColouredGraph {
    let mut g = ColouredGraph::empty(host.n);
    for u in host.f.iter() {
        for v in host.rows[u].iter().filter(|&v| v > u) {
            g.set_mark(u, v, crate::graph::Mark::Red);
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gadget {
    pub anchor: Vec<usize>,
    pub l: usize,
    /// `u_1 … u_{4l}` (strong) or `a_1 b_1 … a_{2l} b_{2l}` (weak).
    pub spine: Vec<usize>,
    /// `c_1 d_1 … c_{2l} d_{2l}` in weak mode; empty otherwise.
    pub spine2: Vec<usize>,
    /// Connector paths by name (`P1`, `Q3`, `R`, …), ends included.
    pub connectors: BTreeMap<String, Vec<usize>>,
    /// The unabsorbed traversal.
    pub base: Vec<usize>,
    /// Current traversal: `base`, or the rewired path after absorption.
    pub block: Vec<usize>,
    pub used: bool,
    pub absorbed: Vec<usize>,
}

impl Gadget {
    fn conn(&self, name: &str) -> &[usize] {
        &self.connectors[name]
    }

    /// Interior of connector `name`, oriented to start next to `from`.
    fn interior_from(&self, name: &str, from: usize) -> Vec<usize> {
        let c = self.conn(name);
        let inner = &c[1..c.len() - 1];
        if c[0] == from {
            inner.to_vec()
        } else {
            debug_assert_eq!(*c.last().unwrap(), from);
            inner.iter().rev().copied().collect()
        }
    }

    fn u(&self, i: usize) -> usize {
        self.spine[i - 1]
    }

    fn a(&self, i: usize) -> usize {
        self.spine[2 * (i - 1)]
    }

    fn b(&self, i: usize) -> usize {
        self.spine[2 * (i - 1) + 1]
    }

    fn c(&self, i: usize) -> usize {
        self.spine2[2 * (i - 1)]
    }

    fn d(&self, i: usize) -> usize {
        self.spine2[2 * (i - 1) + 1]
    }

    /// Walks from `from` through connector `name` to its other end.
    fn through(&self, out: &mut Vec<usize>, name: &str, from: usize) {
        out.push(from);
        out.extend(self.interior_from(name, from));
        let c = self.conn(name);
        out.push(if c[0] == from { *c.last().unwrap() } else { c[0] });
    }

    fn strong_base(&self) -> Vec<usize> {
        let l = self.l;
        let mut q = Vec::new();
        for i in (1..=(4 * l).saturating_sub(5)).step_by(2) {
            q.push(self.u(i + 1));
            q.push(self.u(i));
            q.extend(self.interior_from(&format!("P{i}"), self.u(i)));
        }
        q.push(self.u(4 * l - 2));
        self.through(&mut q, &format!("P{}", 4 * l - 3), self.u(4 * l - 3));
        q.push(self.u(4 * l));
        q
    }

    fn strong_rewired(&self, w: usize) -> Vec<usize> {
        let l = self.l;
        let mut q = vec![self.u(2)];
        for i in (3..=(4 * l).saturating_sub(5)).step_by(4) {
            self.through(&mut q, &format!("P{i}"), self.u(i));
        }
        // Now at u_{4l-2}.
        self.through(&mut q, &format!("P{}", 4 * l - 3), self.u(4 * l - 1));
        // Now at u_{4l-3}; descend over i ≡ 1 (mod 4).
        let mut i = 4 * l as isize - 7;
        while i >= 1 {
            let iu = i as usize;
            self.through(&mut q, &format!("P{iu}"), self.u(iu + 3));
            i -= 4;
        }
        q.push(w);
        q.push(self.u(4 * l));
        q
    }

    fn weak_base(&self) -> Vec<usize> {
        let l = self.l;
        let mut q = vec![self.b(1)];
        self.through(&mut q, "P1", self.a(1));
        for i in (3..=2 * l).rev() {
            self.through(&mut q, &format!("Q{i}"), self.d(i));
        }
        self.through(&mut q, "Q2", self.d(2));
        self.through(&mut q, "R", self.c(1));
        for i in 2..=2 * l - 2 {
            self.through(&mut q, &format!("P{i}"), self.a(i));
        }
        self.through(&mut q, &format!("P{}", 2 * l - 1), self.a(2 * l - 1));
        q.push(self.b(2 * l));
        q
    }

    fn weak_rewired(&self, x: usize, y: usize) -> Vec<usize> {
        let l = self.l;
        let mut q = vec![self.b(1)];
        for i in (2..=2 * l - 2).step_by(2) {
            self.through(&mut q, &format!("P{i}"), self.a(i));
        }
        self.through(&mut q, &format!("P{}", 2 * l - 1), self.a(2 * l));
        let mut i = 2 * l as isize - 3;
        while i >= 3 {
            let iu = i as usize;
            self.through(&mut q, &format!("P{iu}"), self.b(iu + 1));
            i -= 2;
        }
        self.through(&mut q, "R", self.b(2));
        q.push(x);
        self.through(&mut q, "P1", self.a(1));
        let mut i = 2 * l as isize - 1;
        while i >= 3 {
            let iu = i as usize;
            self.through(&mut q, &format!("Q{iu}"), self.d(iu));
            i -= 2;
        }
        self.through(&mut q, "Q2", self.d(1));
        for i in (4..=2 * l).step_by(2) {
            self.through(&mut q, &format!("Q{i}"), self.c(i - 1));
        }
        q.push(y);
        q.push(self.b(2 * l));
        q
    }

    /// Named connector ends and the parity (or exact length) they must have.
    fn required_connectors(&self, mode: Mode) -> Vec<(String, usize, usize, ConnLen)> {
        let l = self.l;
        let mut out = Vec::new();
        match mode {
            Mode::Strong => {
                for i in (1..=(4 * l).saturating_sub(5)).step_by(2) {
                    out.push((format!("P{i}"), self.u(i), self.u(i + 3), ConnLen::Exact(4 * l - 1)));
                }
                out.push((format!("P{}", 4 * l - 3), self.u(4 * l - 3), self.u(4 * l - 1), ConnLen::Exact(4 * l - 1)));
            }
            Mode::Weak => {
                out.push(("P1".into(), self.a(1), self.c(2 * l), ConnLen::Even));
                for i in 2..=2 * l - 2 {
                    out.push((format!("P{i}"), self.a(i), self.b(i + 1), ConnLen::Odd));
                }
                out.push((format!("P{}", 2 * l - 1), self.a(2 * l - 1), self.a(2 * l), ConnLen::Even));
                out.push(("Q2".into(), self.d(2), self.d(1), ConnLen::Even));
                for i in 3..=2 * l {
                    out.push((format!("Q{i}"), self.d(i), self.c(i - 1), ConnLen::Odd));
                }
                out.push(("R".into(), self.c(1), self.b(2), ConnLen::Odd));
            }
        }
        out
    }

    pub fn start(&self) -> usize {
        self.block[0]
    }

    pub fn end(&self) -> usize {
        *self.block.last().unwrap()
    }

    /// Vertices of the unabsorbed gadget.
    pub fn vertex_count(&self) -> usize {
        self.base.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ConnLen {
    Exact(usize),
    Odd,
    Even,
}

impl ConnLen {
    fn admits(self, len: usize) -> bool {
        match self {
            ConnLen::Exact(k) => len == k,
            ConnLen::Odd => len % 2 == 1,
            ConnLen::Even => len.is_multiple_of(2) && len > 0,
        }
    }

    fn candidates(self, max_len: usize) -> Vec<usize> {
        match self {
            ConnLen::Exact(k) => vec![k],
            ConnLen::Odd => (1..=max_len).step_by(2).collect(),
            ConnLen::Even => (2..=max_len).step_by(2).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Segment {
    Gadget(usize),
    /// Interior vertices of a link between consecutive gadgets.
    Link(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsorbingPath {
    pub n: usize,
    pub mode: Mode,
    pub l: usize,
    pub rho: f64,
    pub gadgets: Vec<Gadget>,
    pub segments: Vec<Segment>,
    /// Vertices of the path before any absorption.
    pub original: Vec<usize>,
    /// Largest `|W|` (strong) or `|W ∩ X|` (weak) guaranteed absorbable.
    pub capacity: usize,
    pub family: AnchorFamily,
}

#[derive(Clone, Debug)]
pub struct AbsorbParams {
    pub alpha: f64,
    pub rho: f64,
    pub l: usize,
    /// Anchor sampling probability; defaults to `rho / (8 l²)`.
    pub p: Option<f64>,
    pub seed: u64,
    pub max_attempts: usize,
    /// Search-node budget for each connector.
    pub path_budget: u64,
    /// Longest connector tried in weak mode.
    pub max_connector: usize,
}

impl AbsorbParams {
    pub fn new(alpha: f64, rho: f64, l: usize, seed: u64) -> Self {
        AbsorbParams { alpha, rho, l, p: None, seed, max_attempts: 20, path_budget: 1_000_000, max_connector: 0 }
    }

    fn p(&self) -> f64 {
        self.p.unwrap_or(self.rho / (8.0 * (self.l * self.l) as f64))
    }

    fn max_connector(&self) -> usize {
        if self.max_connector > 0 {
            self.max_connector
        } else {
            4 * self.l
        }
    }
}

fn build_gadget(
    host: &Host,
    anchor: &[usize],
    l: usize,
    occupied: &VertexSet,
    params: &AbsorbParams,
) -> Result<Gadget, AbsorbError> {
    let mode = host.mode();
    let mut blocked = occupied.clone();
    let mut budget = params.path_budget;
    let mut take = |from: usize, to: usize, lens: &[usize], blocked: &mut VertexSet, what: &str| {
        for &len in lens {
            if let Some(p) = host.find_path(from, to, len, blocked, &mut budget) {
                p.iter().for_each(|&v| {
                    blocked.insert(v);
                });
                return Ok(p);
            }
        }
        Err(AbsorbError::Exhausted(format!("{what} between {from} and {to}")))
    };
    for &v in anchor {
        blocked.insert(v);
    }
    let spine_len = 4 * l - 1;
    let (spine, spine2) = match mode {
        Mode::Strong => (take(anchor[0], anchor[1], &[spine_len], &mut blocked, "spine")?, Vec::new()),
        Mode::Weak => {
            let s1 = take(anchor[0], anchor[1], &[spine_len], &mut blocked, "spine a-b")?;
            let s2 = take(anchor[2], anchor[3], &[spine_len], &mut blocked, "spine c-d")?;
            (s1, s2)
        }
    };
    let mut g = Gadget {
        anchor: anchor.to_vec(),
        l,
        spine,
        spine2,
        connectors: BTreeMap::new(),
        base: Vec::new(),
        block: Vec::new(),
        used: false,
        absorbed: Vec::new(),
    };
    for (name, from, to, len) in g.required_connectors(mode) {
        let lens = len.candidates(params.max_connector().max(spine_len));
        let p = take(from, to, &lens, &mut blocked, &name)?;
        g.connectors.insert(name, p);
    }
    g.base = match mode {
        Mode::Strong => g.strong_base(),
        Mode::Weak => g.weak_base(),
    };
    g.block = g.base.clone();
    debug_assert!(host.is_path(&g.base));
    Ok(g)
}

/// Builds a strong gadget for one anchor pair, avoiding `occupied`.
pub fn build_strong_gadget(host: &Host, anchor: (usize, usize), l: usize, occupied: &VertexSet, params: &AbsorbParams) -> Result<Gadget, AbsorbError> {
    if host.mode() != Mode::Strong || l == 0 {
        return Err(AbsorbError::Invalid("strong gadgets need a strong host and l >= 1".into()));
    }
    build_gadget(host, &[anchor.0, anchor.1], l, occupied, params)
}

/// Builds the absorbing path: anchors, one gadget per anchor while the path
/// stays within `ρn` vertices, and links between consecutive gadgets.
pub fn build_absorbing_path(host: &Host, params: &AbsorbParams) -> Result<AbsorbingPath, AbsorbError> {
    let mode = host.mode();
    let l = params.l;
    if l == 0 || (mode == Mode::Weak && l < 2) {
        return Err(AbsorbError::Invalid(format!("l = {l} is too small for {mode:?} gadgets")));
    }
    let n = host.n;
    let limit = (params.rho * n as f64).floor() as usize;
    let family = sample_anchors(host, params.p(), params.alpha, params.seed, params.max_attempts)?;
    let mut occupied = VertexSet::empty(n);
    for m in &family.members {
        m.iter().for_each(|&v| {
            occupied.insert(v);
        });
    }
    let link_len = |mode: Mode| match mode {
        Mode::Strong => vec![4 * l - 1],
        Mode::Weak => (2..=params.max_connector().max(4 * l)).step_by(2).collect::<Vec<_>>(),
    };
    let min_link_interior = match mode {
        Mode::Strong => 4 * l - 2,
        Mode::Weak => 1,
    };
    let mut gadgets: Vec<Gadget> = Vec::new();
    let mut used_vertices = 0usize;
    for m in &family.members {
        let extra = if gadgets.is_empty() { 0 } else { min_link_interior };
        let gad = match build_gadget(host, m, l, &occupied, params) {
            Ok(g) => g,
            Err(AbsorbError::Exhausted(_)) => break,
            Err(e) => return Err(e),
        };
        if used_vertices + extra + gad.vertex_count() > limit {
            break;
        }
        used_vertices += extra + gad.vertex_count();
        gad.base.iter().for_each(|&v| {
            occupied.insert(v);
        });
        gadgets.push(gad);
    }
    // Release anchors of gadgets that were not built.
    let mut occupied = VertexSet::empty(n);
    gadgets.iter().flat_map(|g| g.base.iter()).for_each(|&v| {
        occupied.insert(v);
    });
    loop {
        if gadgets.is_empty() {
            return Err(AbsorbError::Capacity(format!("rho = {} leaves room for no gadget", params.rho)));
        }
        let mut occ = occupied.clone();
        let mut segments = vec![Segment::Gadget(0)];
        let mut ok = true;
        let mut budget = params.path_budget;
        for j in 1..gadgets.len() {
            let (from, to) = (gadgets[j - 1].end(), gadgets[j].start());
            let found = link_len(mode).into_iter().find_map(|len| host.find_path(from, to, len, &occ, &mut budget));
            match found {
                Some(p) => {
                    let inner = p[1..p.len() - 1].to_vec();
                    inner.iter().for_each(|&v| {
                        occ.insert(v);
                    });
                    segments.push(Segment::Link(inner));
                    segments.push(Segment::Gadget(j));
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let total = occ.len();
        if ok && total <= limit {
            let mut path = AbsorbingPath {
                n,
                mode,
                l,
                rho: params.rho,
                gadgets,
                segments,
                original: Vec::new(),
                capacity: 0,
                family,
            };
            path.original = path.vertices().to_vec();
            path.capacity = path.declared_capacity(host);
            path.check(host).map_err(AbsorbError::Invalid)?;
            return Ok(path);
        }
        let last = gadgets.pop().unwrap();
        last.base.iter().for_each(|&v| {
            occupied.remove(v);
        });
    }
}

impl AbsorbingPath {
    pub fn path(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s {
                Segment::Gadget(j) => out.extend(&self.gadgets[*j].block),
                Segment::Link(inner) => out.extend(inner),
            }
        }
        out
    }

    pub fn ends(&self) -> (usize, usize) {
        let p = self.path();
        (p[0], *p.last().unwrap())
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::from_vertices(self.n, self.path())
    }

    /// Position of each gadget's block in `path()`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0; self.gadgets.len()];
        let mut at = 0;
        for s in &self.segments {
            match s {
                Segment::Gadget(j) => {
                    out[*j] = at;
                    at += self.gadgets[*j].block.len();
                }
                Segment::Link(inner) => at += inner.len(),
            }
        }
        out
    }

    pub fn unused(&self) -> usize {
        self.gadgets.iter().filter(|g| !g.used).count()
    }

    fn declared_capacity(&self, host: &Host) -> usize {
        let anchors: Vec<Vec<usize>> = self.gadgets.iter().filter(|g| !g.used).map(|g| g.anchor.clone()).collect();
        let cover = family_min_coverage(host, &anchors, &self.vertices());
        let by_rho = (self.rho * self.rho * self.n as f64).floor() as usize;
        by_rho.min(cover)
    }

    /// Checks the path, every gadget's structure and traversal, and that the
    /// vertex set is the original one plus the absorbed vertices.
    pub fn check(&self, host: &Host) -> Result<(), String> {
        let path = self.path();
        if !host.is_path(&path) {
            return Err("not a path of F".into());
        }
        let mut expected = VertexSet::from_vertices(self.n, self.original.iter().copied());
        for (j, g) in self.gadgets.iter().enumerate() {
            let spine_ok = |s: &[usize], a: usize, b: usize| s.len() == 4 * g.l && s[0] == a && s[s.len() - 1] == b && host.is_path(s);
            let ok = match self.mode {
                Mode::Strong => spine_ok(&g.spine, g.anchor[0], g.anchor[1]),
                Mode::Weak => spine_ok(&g.spine, g.anchor[0], g.anchor[1]) && spine_ok(&g.spine2, g.anchor[2], g.anchor[3]),
            };
            if !ok {
                return Err(format!("gadget {j}: bad spine"));
            }
            for (name, from, to, len) in g.required_connectors(self.mode) {
                let c = g.connectors.get(&name).ok_or(format!("gadget {j}: missing {name}"))?;
                if c[0] != from || c[c.len() - 1] != to || !len.admits(c.len() - 1) || !host.is_path(c) {
                    return Err(format!("gadget {j}: bad connector {name}"));
                }
            }
            let want = match (self.mode, g.used) {
                (_, false) => g.base.clone(),
                (Mode::Strong, true) => g.strong_rewired(g.absorbed[0]),
                (Mode::Weak, true) => g.weak_rewired(g.absorbed[0], g.absorbed[1]),
            };
            if want != g.block {
                return Err(format!("gadget {j}: traversal does not match its state"));
            }
            if g.base.len() + g.absorbed.len() != g.block.len() {
                return Err(format!("gadget {j}: block size"));
            }
            for &w in &g.absorbed {
                expected.insert(w);
            }
        }
        if self.vertices() != expected {
            return Err("vertex set differs from original plus absorbed".into());
        }
        Ok(())
    }

    /// A random admissible `W`: fresh vertices of `F`, at most `capacity` of them
    /// in strong mode, or equally many from `X` and `Y` in weak mode.
    pub fn random_admissible(&self, host: &Host, seed: u64) -> Vec<usize> {
        let mut r = rng(seed);
        let on = self.vertices();
        let fresh = |s: &VertexSet| -> Vec<usize> { s.iter().filter(|&v| !on.contains(v)).collect() };
        let pick = |r: &mut rand_chacha::ChaCha8Rng, pool: &[usize], k: usize| -> Vec<usize> {
            index::sample(r, pool.len(), k).into_iter().map(|i| pool[i]).collect()
        };
        let mut out = match &host.bip {
            None => {
                let pool = fresh(&host.f);
                let k = r.random_range(0..=self.capacity.min(pool.len()));
                pick(&mut r, &pool, k)
            }
            Some((x, y)) => {
                let (px, py) = (fresh(x), fresh(y));
                let k = r.random_range(0..=self.capacity.min(px.len()).min(py.len()));
                let mut w = pick(&mut r, &px, k);
                w.extend(pick(&mut r, &py, k));
                w
            }
        };
        out.sort_unstable();
        out
    }

    /// Re-verifies an absorption result against this path: a valid absorbing
    /// path with the same ends whose vertex set is exactly `V(self) ∪ W`.
    pub fn verify_absorption(&self, host: &Host, out: &AbsorbingPath, w: &[usize]) -> Result<(), String> {
        out.check(host)?;
        if out.ends() != self.ends() {
            return Err("ends changed".into());
        }
        let mut want = self.vertices();
        w.iter().for_each(|&v| {
            want.insert(v);
        });
        if out.vertices() != want || out.path().len() != self.path().len() + w.len() {
            return Err("vertex set is not V(Q) plus W".into());
        }
        Ok(())
    }

    /// Rewires unused gadget `j` to take in `w` (strong mode).
    pub fn absorb_one(&mut self, host: &Host, j: usize, w: usize) -> Result<(), AbsorbError> {
        self.precheck(j, &[w])?;
        let g = &self.gadgets[j];
        if self.mode != Mode::Strong {
            return Err(AbsorbError::Invalid("weak paths absorb pairs".into()));
        }
        if !host.adjacent(w, g.anchor[0]) || !host.adjacent(w, g.anchor[1]) {
            return Err(AbsorbError::NotAdjacent { gadget: j, w });
        }
        let g = &mut self.gadgets[j];
        g.block = g.strong_rewired(w);
        g.used = true;
        g.absorbed = vec![w];
        Ok(())
    }

    /// Rewires unused gadget `j` to take in `x ∈ X` and `y ∈ Y` (weak mode).
    pub fn absorb_pair(&mut self, host: &Host, j: usize, x: usize, y: usize) -> Result<(), AbsorbError> {
        self.precheck(j, &[x, y])?;
        let (bx, by) = match &host.bip {
            Some(b) => b,
            None => return Err(AbsorbError::Invalid("strong paths absorb single vertices".into())),
        };
        if !bx.contains(x) || !by.contains(y) {
            return Err(AbsorbError::Invalid(format!("need x = {x} in X and y = {y} in Y")));
        }
        let g = &self.gadgets[j];
        let [a, b, c, d] = [g.anchor[0], g.anchor[1], g.anchor[2], g.anchor[3]];
        if !host.adjacent(x, a) || !host.adjacent(x, c) {
            return Err(AbsorbError::NotAdjacent { gadget: j, w: x });
        }
        if !host.adjacent(y, b) || !host.adjacent(y, d) {
            return Err(AbsorbError::NotAdjacent { gadget: j, w: y });
        }
        let g = &mut self.gadgets[j];
        g.block = g.weak_rewired(x, y);
        g.used = true;
        g.absorbed = vec![x, y];
        Ok(())
    }

    fn precheck(&self, j: usize, ws: &[usize]) -> Result<(), AbsorbError> {
        let g = self.gadgets.get(j).ok_or(AbsorbError::Invalid(format!("no gadget {j}")))?;
        if g.used {
            return Err(AbsorbError::GadgetUsed(j));
        }
        let on = self.vertices();
        match ws.iter().find(|&&w| w >= self.n || on.contains(w)) {
            Some(&w) => Err(AbsorbError::Invalid(format!("vertex {w} is already on the path"))),
            None => Ok(()),
        }
    }

    /// Absorbs all of `w`, giving each vertex (strong) or each `X`–`Y` pair
    /// (weak, paired in increasing order) its own gadget. Returns the new path;
    /// `self` is unchanged.
    pub fn absorb_set(&self, host: &Host, w: &[usize]) -> Result<AbsorbingPath, AbsorbError> {
        let ws = VertexSet::from_vertices(self.n, w.iter().copied().filter(|&v| v < self.n));
        if ws.len() != w.len() {
            return Err(AbsorbError::Invalid("W has repeated or out-of-range vertices".into()));
        }
        if !ws.is_subset(&host.f) {
            return Err(AbsorbError::Invalid("W leaves F".into()));
        }
        if !ws.is_disjoint(&self.vertices()) {
            return Err(AbsorbError::Invalid("W meets the path".into()));
        }
        let limit = (self.rho * self.rho * self.n as f64).floor() as usize;
        let items: Vec<Vec<usize>> = match &host.bip {
            None => {
                if ws.len() > limit {
                    return Err(AbsorbError::Capacity(format!("|W| = {} exceeds {limit}", ws.len())));
                }
                ws.iter().map(|v| vec![v]).collect()
            }
            Some((x, y)) => {
                let (wx, wy) = (ws.intersection(x), ws.intersection(y));
                if wx.len() != wy.len() {
                    return Err(AbsorbError::Unbalanced { x: wx.len(), y: wy.len() });
                }
                if wx.len() > limit {
                    return Err(AbsorbError::Capacity(format!("|W ∩ X| = {} exceeds {limit}", wx.len())));
                }
                wx.iter().zip(wy.iter()).map(|(a, b)| vec![a, b]).collect()
            }
        };
        let fits = |it: &[usize], g: &Gadget| -> bool {
            if g.used {
                return false;
            }
            match it {
                [v] => host.adjacent(*v, g.anchor[0]) && host.adjacent(*v, g.anchor[1]),
                [x, y] => {
                    host.adjacent(*x, g.anchor[0])
                        && host.adjacent(*x, g.anchor[2])
                        && host.adjacent(*y, g.anchor[1])
                        && host.adjacent(*y, g.anchor[3])
                }
                _ => false,
            }
        };
        // Gadget per item by augmenting paths, preferring low gadget indices.
        let options: Vec<Vec<usize>> =
            items.iter().map(|it| (0..self.gadgets.len()).filter(|&j| fits(it, &self.gadgets[j])).collect()).collect();
        let mut owner: Vec<Option<usize>> = vec![None; self.gadgets.len()];
        for i in 0..items.len() {
            let mut seen = vec![false; self.gadgets.len()];
            if !augment(i, &options, &mut owner, &mut seen) {
                return Err(AbsorbError::Assignment { stuck: items[i][0] });
            }
        }
        let mut out = self.clone();
        for (j, o) in owner.iter().enumerate() {
            if let Some(i) = *o {
                match items[i].as_slice() {
                    [v] => out.absorb_one(host, j, *v)?,
                    [x, y] => out.absorb_pair(host, j, *x, *y)?,
                    _ => unreachable!(),
                }
            }
        }
        out.check(host).map_err(AbsorbError::Invalid)?;
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let offsets = self.offsets();
        let gadgets: Vec<Value> = self
            .gadgets
            .iter()
            .zip(&offsets)
            .map(|(g, off)| {
                json!({
                    "anchor": g.anchor,
                    "offset": off,
                    "len": g.block.len(),
                    "used": g.used,
                    "absorbed": g.absorbed,
                    "spine": g.spine,
                    "spine2": g.spine2,
                    "connectors": g.connectors,
                })
            })
            .collect();
        let (s, t) = self.ends();
        json!({
            "mode": self.mode,
            "l": self.l,
            "rho": self.rho,
            "path": self.path(),
            "ends": [s, t],
            "capacity": self.capacity,
            "anchor_seed": self.family.attempt_seed,
            "gadgets": gadgets,
        })
    }
}

fn augment(i: usize, options: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &options[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none() || augment(owner[j].unwrap(), options, owner, seen) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mark;

    fn strong_host(n: usize) -> (ColouredGraph, Host) {
        let g = ColouredGraph::complete(n, Mark::Red);
        let h = Host::strong(&g, View::Red, &g.vertices());
        (g, h)
    }

    fn weak_host(m: usize) -> Host {
        let n = 2 * m;
        let g = ColouredGraph::from_edges(n, (0..m).flat_map(|i| (m..n).map(move |j| (i, j, Mark::Blue))));
        Host::weak(&g, View::Blue, &VertexSet::from_vertices(n, 0..m), &VertexSet::from_vertices(n, m..n)).unwrap()
    }

    #[test]
    fn anchors_in_k40() {
        let (_, h) = strong_host(40);
        let fam = sample_anchors(&h, 0.2, 0.5, 3, 20).unwrap();
        assert!(!fam.members.is_empty() && fam.members.len() <= 8);
        let mut seen = VertexSet::empty(40);
        assert!(fam.members.iter().flatten().all(|&v| seen.insert(v)));
        assert!(fam.min_coverage as f64 >= fam.threshold);
    }

    #[test]
    fn strong_gadget_l1_and_l2() {
        for (n, l) in [(60, 1), (200, 2)] {
            let (_, h) = strong_host(n);
            let params = AbsorbParams::new(0.5, 0.3, l, 1);
            let g = build_strong_gadget(&h, (0, 1), l, &VertexSet::empty(n), &params).unwrap();
            assert_eq!(g.vertex_count(), 8 * l * l - 4 * l + 2);
            assert_eq!((g.start(), g.end()), (g.spine[1], 1));
            assert!(h.is_path(&g.base));
            let w = n - 1;
            let r = g.strong_rewired(w);
            assert!(h.is_path(&r));
            assert_eq!((r[0], *r.last().unwrap()), (g.start(), g.end()));
            assert_eq!(r.len(), g.base.len() + 1);
        }
    }

    #[test]
    fn weak_gadget_l2_and_l3() {
        for l in [2, 3] {
            let h = weak_host(60);
            let params = AbsorbParams::new(0.2, 0.3, l, 1);
            let g = build_gadget(&h, &[60, 0, 61, 1], l, &VertexSet::empty(120), &params).unwrap();
            assert!(h.is_path(&g.base));
            let x = (0..60).find(|v| !g.base.contains(v)).unwrap();
            let y = (60..120).find(|v| !g.base.contains(v)).unwrap();
            let r = g.weak_rewired(x, y);
            assert!(h.is_path(&r));
            assert_eq!((r[0], *r.last().unwrap()), (g.start(), g.end()));
            assert_eq!(r.len(), g.base.len() + 2);
        }
    }

    #[test]
    fn strong_path_absorbs() {
        let (_, h) = strong_host(200);
        let mut params = AbsorbParams::new(0.5, 0.3, 1, 5);
        params.p = Some(0.2);
        let path = build_absorbing_path(&h, &params).unwrap();
        assert!(path.path().len() <= 60);
        assert!(path.capacity >= 5);
        let off = path.vertices();
        let w: Vec<usize> = (0..200).filter(|&v| !off.contains(v)).take(5).collect();
        let out = path.absorb_set(&h, &w).unwrap();
        assert_eq!(out.ends(), path.ends());
        assert_eq!(out.path().len(), path.path().len() + 5);
        assert_eq!(path.absorb_set(&h, &[]).unwrap().path(), path.path());
    }

    #[test]
    fn absorb_one_errors() {
        let (g, _) = strong_host(200);
        let mut g2 = g.clone();
        let (_, h) = strong_host(200);
        let mut params = AbsorbParams::new(0.5, 0.3, 1, 5);
        params.p = Some(0.2);
        let mut path = build_absorbing_path(&h, &params).unwrap();
        let off = path.vertices();
        let free: Vec<usize> = (0..200).filter(|&v| !off.contains(v)).collect();
        path.absorb_one(&h, 0, free[0]).unwrap();
        assert_eq!(path.absorb_one(&h, 0, free[1]), Err(AbsorbError::GadgetUsed(0)));
        let a = path.gadgets[1].anchor[0];
        g2.set_mark(free[1], a, Mark::None);
        let h2 = Host::strong(&g2, View::Red, &g2.vertices());
        assert_eq!(path.absorb_one(&h2, 1, free[1]), Err(AbsorbError::NotAdjacent { gadget: 1, w: free[1] }));
        assert!(path.check(&h).is_ok());
    }

    #[test]
    fn weak_path_absorbs_and_rejects_unbalanced() {
        let h = weak_host(100);
        let mut params = AbsorbParams::new(0.2, 0.3, 2, 9);
        params.p = Some(0.2);
        let path = build_absorbing_path(&h, &params).unwrap();
        assert!(path.path().len() <= 60);
        let off = path.vertices();
        let xs: Vec<usize> = (0..100).filter(|&v| !off.contains(v)).take(2).collect();
        let ys: Vec<usize> = (100..200).filter(|&v| !off.contains(v)).take(2).collect();
        let w: Vec<usize> = xs.iter().chain(&ys).copied().collect();
        let out = path.absorb_set(&h, &w).unwrap();
        assert_eq!(out.path().len(), path.path().len() + 4);
        assert_eq!(path.absorb_set(&h, &w[..3]), Err(AbsorbError::Unbalanced { x: 2, y: 1 }));
    }

    #[test]
    fn uniform_l_in_clique_and_disconnected() {
        let (_, h) = strong_host(20);
        assert_eq!(find_uniform_l(&h, 2, 0.1, 10, 1, 10_000_000).unwrap().l, 1);
        let g = ColouredGraph::from_edges(20, (0..10).flat_map(|i| (i + 1..10).flat_map(move |j| [(i, j, Mark::Red), (i + 10, j + 10, Mark::Red)])));
        let h = Host::strong(&g, View::Red, &g.vertices());
        assert!(matches!(find_uniform_l(&h, 1, 0.01, 20, 1, 10_000_000), Err(AbsorbError::NoUniformL { .. })));
    }
}
