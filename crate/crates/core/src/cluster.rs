//! Cluster graphs and their blow-ups: robust subgraphs from connected cluster
//! components, connected matchings, and turning a connected matching into a
//! long monochromatic cycle.

use crate::generate::rng;
use crate::graph::{Colour, ColouredGraph, Mark, View};
use crate::matching::{components, max_matching};
use crate::path_partition::partition_within;
use crate::robustness::{check_robust, RobustError, RobustnessCheck};
use crate::vertex_set::VertexSet;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("invalid cluster graph: {0}")]
    Invalid(String),
    #[error("designated clusters are not connected in the colour view")]
    Disconnected,
    #[error("only {retained} of {total} vertices survive; need {needed}")]
    Retention { retained: usize, total: usize, needed: usize },
    #[error("no connector from matched pair {pair} to the next")]
    Connector { pair: usize },
    #[error("cannot splice the long path of matched pair {pair}")]
    Splice { pair: usize },
    #[error("cycle covers {covered} of U, below the floor {floor}")]
    Coverage { covered: usize, floor: usize },
    #[error(transparent)]
    Robust(#[from] RobustError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGraph {
    pub sizes: Vec<usize>,
    /// Symmetric `m × m` flags; the diagonal is `Mark::None`.
    pub flags: Vec<Vec<Mark>>,
    pub d: f64,
}

impl ClusterGraph {
    pub fn new(sizes: Vec<usize>, pairs: &[(usize, usize, Mark)], d: f64) -> Result<ClusterGraph, ClusterError> {
        let m = sizes.len();
        if sizes.contains(&0) {
            return Err(ClusterError::Invalid("cluster sizes must be at least 1".into()));
        }
        if !(d > 0.0 && d <= 1.0) {
            return Err(ClusterError::Invalid(format!("d = {d} outside (0, 1]")));
        }
        let mut flags = vec![vec![Mark::None; m]; m];
        for &(i, j, mark) in pairs {
            if i >= m || j >= m || i == j {
                return Err(ClusterError::Invalid(format!("bad pair ({i}, {j})")));
            }
            flags[i][j] = mark;
            flags[j][i] = mark;
        }
        Ok(ClusterGraph { sizes, flags, d })
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn mark(&self, i: usize, j: usize) -> Mark {
        self.flags[i][j]
    }

    /// The clusters as vertices of a coloured graph.
    pub fn as_graph(&self) -> ColouredGraph {
        let m = self.m();
        let mut g = ColouredGraph::empty(m);
        for i in 0..m {
            for j in i + 1..m {
                if self.flags[i][j] != Mark::None {
                    g.set_mark(i, j, self.flags[i][j]);
                }
            }
        }
        g
    }

    pub fn from_json(s: &str) -> Result<ClusterGraph, ClusterError> {
        let v: Value = serde_json::from_str(s).map_err(|e| ClusterError::Invalid(e.to_string()))?;
        let bad = |what: &str| ClusterError::Invalid(what.to_string());
        let sizes = v["sizes"]
            .as_array()
            .ok_or_else(|| bad("missing sizes"))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("size is not an integer")))
            .collect::<Result<Vec<_>, _>>()?;
        let d = v["d"].as_f64().ok_or_else(|| bad("missing d"))?;
        let mut pairs = Vec::new();
        for p in v["pairs"].as_array().ok_or_else(|| bad("missing pairs"))? {
            let a = p.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad("pair must be [i, j, tag]"))?;
            let i = a[0].as_u64().ok_or_else(|| bad("pair index"))? as usize;
            let j = a[1].as_u64().ok_or_else(|| bad("pair index"))? as usize;
            let mark = a[2].as_str().and_then(Mark::from_tag).ok_or_else(|| bad("pair colour must be R, B or RB"))?;
            pairs.push((i, j, mark));
        }
        ClusterGraph::new(sizes, &pairs, d)
    }

    pub fn to_json(&self) -> Value {
        let m = self.m();
        let pairs: Vec<Value> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.flags[i][j].tag().map(|t| json!([i, j, t])))
            .collect();
        json!({ "sizes": self.sizes, "pairs": pairs, "d": self.d })
    }

    fn adjacent(&self, i: usize, j: usize, colour: Colour) -> bool {
        self.flags[i][j].in_view(colour.into())
    }

    /// Proper 2-colouring of the colour view on `comp`, if bipartite.
    fn two_colouring(&self, comp: &[usize], colour: Colour) -> Option<Vec<(usize, bool)>> {
        let mut side = vec![None; self.m()];
        for &s in comp {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut stack = vec![s];
            while let Some(i) = stack.pop() {
                for &j in comp {
                    if self.adjacent(i, j, colour) {
                        match side[j] {
                            None => {
                                side[j] = Some(!side[i].unwrap());
                                stack.push(j);
                            }
                            Some(sj) if sj == side[i].unwrap() => return None,
                            _ => {}
                        }
                    }
                }
            }
        }
        Some(comp.iter().map(|&i| (i, side[i].unwrap())).collect())
    }

    fn connected(&self, comp: &[usize], colour: Colour) -> bool {
        if comp.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.m()];
        seen[comp[0]] = true;
        let mut stack = vec![comp[0]];
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in comp {
                if !seen[j] && self.adjacent(i, j, colour) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == comp.len()
    }

    /// Shortest cluster path from `a` to `b` inside `comp` (BFS).
    fn cluster_path(&self, comp: &[usize], colour: Colour, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.m()];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(i) = queue.pop_front() {
            if i == b {
                let mut path = vec![b];
                while *path.last().unwrap() != a {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                return Some(path);
            }
            for &j in comp {
                if prev[j] == usize::MAX && self.adjacent(i, j, colour) {
                    prev[j] = i;
                    queue.push_back(j);
                }
            }
        }
        None
    }
}

/// Which cluster each vertex of a blow-up belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterMap {
    pub clusters: Vec<Vec<usize>>,
    pub cluster_of: Vec<usize>,
}

impl ClusterMap {
    pub fn contiguous(sizes: &[usize]) -> ClusterMap {
        let mut clusters = Vec::new();
        let mut cluster_of = Vec::new();
        for (i, &s) in sizes.iter().enumerate() {
            let start = cluster_of.len();
            clusters.push((start..start + s).collect());
            cluster_of.extend(std::iter::repeat_n(i, s));
        }
        ClusterMap { clusters, cluster_of }
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn set(&self, i: usize) -> VertexSet {
        VertexSet::from_vertices(self.n(), self.clusters[i].iter().copied())
    }

    pub fn union(&self, ids: &[usize]) -> VertexSet {
        let mut s = VertexSet::empty(self.n());
        for &i in ids {
            s.union_with(&self.set(i));
        }
        s
    }
}

/// Random blow-up: no edges inside clusters; each cross pair of a flagged
/// cluster pair gets each flagged colour independently with probability `d`.
pub fn blow_up(cg: &ClusterGraph, seed: u64) -> (ColouredGraph, ClusterMap) {
    let map = ClusterMap::contiguous(&cg.sizes);
    let mut g = ColouredGraph::empty(map.n());
    let mut r = rng(seed);
    for i in 0..cg.m() {
        for j in i + 1..cg.m() {
            let flag = cg.flags[i][j];
            if flag == Mark::None {
                continue;
            }
            for &u in &map.clusters[i] {
                for &v in &map.clusters[j] {
                    let red = flag.is_red() && r.random_bool(cg.d);
                    let blue = flag.is_blue() && r.random_bool(cg.d);
                    let mark = Mark::from_flags(red, blue);
                    if mark != Mark::None {
                        g.set_mark(u, v, mark);
                    }
                }
            }
        }
    }
    (g, map)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub vertices: Vec<usize>,
    pub removed: Vec<usize>,
    pub retention: f64,
    pub check: RobustnessCheck,
}

/// Robustness parameters used for the verdict on the extracted subgraph.
#[derive(Clone, Copy, Debug)]
pub struct RobustParams {
    pub alpha: f64,
    pub k: usize,
    pub budget: u64,
}

/// Strips, until stable, vertices of `survivors` with at most `3ε|N_i|` colour
/// neighbours inside `N_i ∩ survivors`, where `N_i` is the union of the
/// clusters joined to the vertex's cluster within `comp`.
fn strip(g: &ColouredGraph, map: &ClusterMap, cg: &ClusterGraph, comp: &[usize], colour: Colour, eps: f64, survivors: &mut VertexSet) {
    let nbhd: Vec<(usize, VertexSet)> = comp
        .iter()
        .map(|&i| {
            let ids: Vec<usize> = comp.iter().copied().filter(|&j| cg.adjacent(i, j, colour)).collect();
            (i, map.union(&ids))
        })
        .collect();
    loop {
        let mut changed = false;
        for (i, n_i) in &nbhd {
            let bound = 3.0 * eps * n_i.len() as f64;
            let live = n_i.intersection(survivors);
            for &v in &map.clusters[*i] {
                if survivors.contains(v) && g.degree_into(v, &live, colour.into()) as f64 <= bound {
                    survivors.remove(v);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn verdict_for(
    g: &ColouredGraph,
    map: &ClusterMap,
    cg: &ClusterGraph,
    comp: &[usize],
    colour: Colour,
    f: &VertexSet,
    rp: RobustParams,
) -> Result<RobustnessCheck, ClusterError> {
    let view: View = colour.into();
    let check = match cg.two_colouring(comp, colour) {
        None => check_robust(g, view, f, rp.alpha, rp.k, g.n(), None, rp.budget)?,
        Some(sides) => {
            let xs: Vec<usize> = sides.iter().filter(|s| !s.1).map(|s| s.0).collect();
            let ys: Vec<usize> = sides.iter().filter(|s| s.1).map(|s| s.0).collect();
            let x = map.union(&xs).intersection(f);
            let y = map.union(&ys).intersection(f);
            check_robust(g, view, f, rp.alpha, rp.k, g.n(), Some((&x, &y)), rp.budget)?
        }
    };
    Ok(check)
}

/// Robust subgraph of the colour view on the clusters of `comp`, keeping at
/// least `(1 - ε)|U|` vertices. The verdict is weak when `comp` is bipartite in
/// the cluster graph (using the cluster 2-colouring) and strong otherwise.
pub fn extract_robust_component(
    g: &ColouredGraph,
    map: &ClusterMap,
    cg: &ClusterGraph,
    comp: &[usize],
    colour: Colour,
    eps: f64,
    rp: RobustParams,
) -> Result<Extraction, ClusterError> {
    if !cg.connected(comp, colour) {
        return Err(ClusterError::Disconnected);
    }
    let u = map.union(comp);
    let mut f = u.clone();
    strip(g, map, cg, comp, colour, eps, &mut f);
    let needed = ((1.0 - eps) * u.len() as f64).ceil() as usize;
    if f.len() < needed {
        return Err(ClusterError::Retention { retained: f.len(), total: u.len(), needed });
    }
    let check = verdict_for(g, map, cg, comp, colour, &f, rp)?;
    Ok(Extraction {
        vertices: f.to_vec(),
        removed: u.difference(&f).to_vec(),
        retention: f.len() as f64 / u.len() as f64,
        check,
    })
}

/// Several components (of either colour) extracted over one shared survivor
/// set, so that equal cluster unions give equal vertex unions. Each cluster
/// keeps at least `(1 - 2ε)` of its vertices.
pub fn extract_many(
    g: &ColouredGraph,
    map: &ClusterMap,
    cg: &ClusterGraph,
    comps: &[(Vec<usize>, Colour)],
    eps: f64,
    rp: RobustParams,
) -> Result<Vec<Extraction>, ClusterError> {
    for (comp, colour) in comps {
        if !cg.connected(comp, *colour) {
            return Err(ClusterError::Disconnected);
        }
    }
    let mut survivors = VertexSet::full(g.n());
    loop {
        let before = survivors.len();
        for (comp, colour) in comps {
            strip(g, map, cg, comp, *colour, eps, &mut survivors);
        }
        if survivors.len() == before {
            break;
        }
    }
    for (i, c) in map.clusters.iter().enumerate() {
        let kept = c.iter().filter(|&&v| survivors.contains(v)).count();
        let needed = ((1.0 - 2.0 * eps) * c.len() as f64).ceil() as usize;
        if comps.iter().any(|(comp, _)| comp.contains(&i)) && kept < needed {
            return Err(ClusterError::Retention { retained: kept, total: c.len(), needed });
        }
    }
    comps
        .iter()
        .map(|(comp, colour)| {
            let u = map.union(comp);
            let f = u.intersection(&survivors);
            let check = verdict_for(g, map, cg, comp, *colour, &f, rp)?;
            Ok(Extraction {
                vertices: f.to_vec(),
                removed: u.difference(&f).to_vec(),
                retention: f.len() as f64 / u.len() as f64,
                check,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectedMatching {
    pub colour: Colour,
    pub edges: Vec<(usize, usize)>,
    /// The colour component containing every matched vertex.
    pub component: Vec<usize>,
}

/// Largest matching lying inside a single colour component (first component
/// wins ties).
pub fn find_connected_matching(g: &ColouredGraph, colour: Colour) -> ConnectedMatching {
    let view: View = colour.into();
    let mut best = ConnectedMatching { colour, edges: Vec::new(), component: Vec::new() };
    for comp in components(g, view, &g.vertices()) {
        if comp.len() < 2 && !best.component.is_empty() {
            continue;
        }
        let ids = comp.to_vec();
        let m = max_matching(&g.induced(&comp), view);
        if best.component.is_empty() || m.size() > best.edges.len() {
            best.edges = m.edges.iter().map(|&(a, b)| (ids[a], ids[b])).collect();
            best.component = ids;
        }
    }
    best
}

/// A converted cycle (or path between given ends) with its coverage of `U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conversion {
    pub sequence: Vec<usize>,
    pub closed: bool,
    pub covered: usize,
    pub u_size: usize,
    pub floor: usize,
}

impl Conversion {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.u_size as f64
    }
}

struct Layered<'a> {
    g: &'a ColouredGraph,
    view: View,
    map: &'a ClusterMap,
    free: &'a VertexSet,
    budget: u64,
}

impl Layered<'_> {
    /// One free vertex per cluster of `route`, consecutive ones adjacent, with
    /// `first` and `last` filters on the ends.
    fn find(&mut self, route: &[usize], first: &dyn Fn(usize) -> bool, last: &dyn Fn(usize) -> bool) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        let starts: Vec<usize> = self.map.clusters[route[0]].iter().copied().filter(|&v| self.free.contains(v) && first(v)).collect();
        for v in starts {
            out.push(v);
            if self.extend(route, 1, &mut out, last) {
                return Some(out);
            }
            out.pop();
        }
        None
    }

    fn extend(&mut self, route: &[usize], t: usize, out: &mut Vec<usize>, last: &dyn Fn(usize) -> bool) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        let cur = *out.last().unwrap();
        if t == route.len() {
            return last(cur);
        }
        let cands = self.g.neighbours(cur, self.view).intersection(&self.map.set(route[t])).intersection(self.free);
        for v in cands.iter() {
            out.push(v);
            if self.extend(route, t + 1, out, last) {
                return true;
            }
            out.pop();
        }
        false
    }
}

/// Longest sub-path of `q` that starts in `c` next to `prev` and ends in `d`
/// next to `next`, trying both orientations.
fn trim(g: &ColouredGraph, view: View, q: &[usize], c: &VertexSet, d: &VertexSet, prev: usize, next: usize) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for forward in [true, false] {
        let seq: Vec<usize> = if forward { q.to_vec() } else { q.iter().rev().copied().collect() };
        let s = seq.iter().position(|&v| c.contains(v) && g.has_edge(prev, v, view));
        let e = seq.iter().rposition(|&v| d.contains(v) && g.has_edge(v, next, view));
        if let (Some(s), Some(e)) = (s, e) {
            if s <= e && best.as_ref().is_none_or(|b| b.len() < e - s + 1) {
                best = Some(seq[s..=e].to_vec());
            }
        }
    }
    best
}

/// Turns a connected matching of the cluster graph into a cycle of the blow-up
/// covering at least `(1 - 6ε)|U|` vertices of the matched clusters `U`.
///
/// Matched pairs `(i_l, j_l)` are joined cyclically by connectors running from
/// `V_{i_l}` to `V_{j_{l+1}}` along shortest cluster paths, one vertex per
/// cluster. Each pair then gets a long path from the path-partition procedure
/// on its free vertices, trimmed so that it starts next to the previous
/// connector and ends next to the following one. Vertices in `reserved` are
/// never used. With `endpoints = Some((s, t))` the result is a path from `s`
/// to `t` instead, and only `M - 1` connectors are built.
pub fn matching_to_cycle(
    g: &ColouredGraph,
    map: &ClusterMap,
    cg: &ClusterGraph,
    cm: &ConnectedMatching,
    eps: f64,
    reserved: &VertexSet,
    endpoints: Option<(usize, usize)>,
) -> Result<Conversion, ClusterError> {
    let colour = cm.colour;
    let view: View = colour.into();
    let pairs = &cm.edges;
    if pairs.is_empty() {
        return Err(ClusterError::Invalid("empty matching".into()));
    }
    for &(i, j) in pairs {
        if i >= cg.m() || j >= cg.m() || !cg.adjacent(i, j, colour) {
            return Err(ClusterError::Invalid(format!("({i}, {j}) is not a flagged pair of this colour")));
        }
    }
    let matched: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    let mut seen = vec![false; cg.m()];
    if matched.iter().any(|&i| std::mem::replace(&mut seen[i], true)) {
        return Err(ClusterError::Invalid("matching edges share a cluster".into()));
    }
    let comp: Vec<usize> = cm.component.clone();
    if !matched.iter().all(|i| comp.contains(i)) || !cg.connected(&comp, colour) {
        return Err(ClusterError::Disconnected);
    }
    let big_m = pairs.len();
    let mut free = VertexSet::full(g.n()).difference(reserved);
    if let Some((s, t)) = endpoints {
        free.remove(s);
        free.remove(t);
    }
    // Connectors: conn[l] joins pair l to pair l + 1.
    let count = if endpoints.is_some() { big_m - 1 } else { big_m };
    let mut conns: Vec<Vec<usize>> = Vec::new();
    for l in 0..count {
        let (i_l, j_l) = pairs[l];
        let (i_n, j_n) = pairs[(l + 1) % big_m];
        let route = cg.cluster_path(&comp, colour, i_l, j_n).ok_or(ClusterError::Connector { pair: l })?;
        let need_j = 2.0 * eps * map.clusters[j_l].len() as f64;
        let need_i = 2.0 * eps * map.clusters[i_n].len() as f64;
        let (vj, vi) = (map.set(j_l), map.set(i_n));
        let free_now = free.clone();
        let first = |v: usize| g.degree_into(v, &vj.intersection(&free_now), view) as f64 >= need_j;
        let last = |v: usize| g.degree_into(v, &vi.intersection(&free_now), view) as f64 >= need_i;
        let mut search = Layered { g, view, map, free: &free_now, budget: 1_000_000 };
        let p = search.find(&route, &first, &last).ok_or(ClusterError::Connector { pair: l })?;
        for &v in &p {
            free.remove(v);
        }
        conns.push(p);
    }
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for (l, &(i_l, j_l)) in pairs.iter().enumerate() {
        let prev = match (l, endpoints) {
            (0, Some((s, _))) => s,
            _ => *conns[(l + big_m - 1) % big_m].last().unwrap(),
        };
        let next = match endpoints {
            Some((_, t)) if l == big_m - 1 => t,
            _ => conns[l][0],
        };
        let c = map.set(i_l).intersection(&free);
        let d = map.set(j_l).intersection(&free);
        let h = g.bipartite_part(&c, &d);
        let q = partition_within(&h, view, &c.union(&d)).path;
        let piece = trim(g, view, &q, &c, &d, prev, next).ok_or(ClusterError::Splice { pair: l })?;
        for &v in &piece {
            free.remove(v);
        }
        pieces.push(piece);
    }
    let mut seq = Vec::new();
    if let Some((s, _)) = endpoints {
        seq.push(s);
    }
    for l in 0..big_m {
        seq.extend(&pieces[l]);
        if l < conns.len() {
            seq.extend(&conns[l]);
        }
    }
    if let Some((_, t)) = endpoints {
        seq.push(t);
    }
    let closed = endpoints.is_none();
    let ok_edges = seq.windows(2).all(|w| g.has_edge(w[0], w[1], view)) && (!closed || g.has_edge(seq[0], *seq.last().unwrap(), view));
    let distinct = VertexSet::from_vertices(g.n(), seq.iter().copied()).len() == seq.len();
    let inner = if closed { &seq[..] } else { &seq[1..seq.len() - 1] };
    debug_assert!(ok_edges && distinct && inner.iter().all(|&v| !reserved.contains(v)));
    if !(ok_edges && distinct) {
        return Err(ClusterError::Splice { pair: 0 });
    }
    let u = map.union(&matched);
    let covered = seq.iter().filter(|&&v| u.contains(v)).count();
    let floor = ((1.0 - 6.0 * eps) * u.len() as f64).ceil().max(0.0) as usize;
    if covered < floor {
        return Err(ClusterError::Coverage { covered, floor });
    }
    Ok(Conversion { sequence: seq, closed, covered, u_size: u.len(), floor })
}
