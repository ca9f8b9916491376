//! Exact red/blue cycle partition solver, certificate verifier and scanner.

use crate::generate::random_min_degree_graph;
use crate::graph::{Colour, ColouredGraph, Mark, View};
use crate::hamiltonicity::{is_cycle, HamError, HamTable};
use crate::vertex_set::VertexSet;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A red cycle and a blue cycle, each in traversal order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub red: Vec<usize>,
    pub blue: Vec<usize>,
}

impl PartitionCertificate {
    pub fn cycle(&self, colour: Colour) -> &[usize] {
        match colour {
            Colour::Red => &self.red,
            Colour::Blue => &self.blue,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyFailure {
    /// A vertex is missing, repeated, or out of range.
    NotAPartition { vertex: usize },
    /// Consecutive vertices of a cycle are not joined in its colour.
    ColourViolation { colour: Colour, u: usize, v: usize },
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyFailure::NotAPartition { vertex } => write!(f, "not a partition (vertex {vertex})"),
            VerifyFailure::ColourViolation { colour, u, v } => {
                write!(f, "colour violation: {{{u}, {v}}} is not {}", if *colour == Colour::Red { "red" } else { "blue" })
            }
        }
    }
}

/// Checks a certificate: the two vertex sequences partition `V`, and each is a
/// cycle in its own colour under the degenerate convention.
pub fn verify(g: &ColouredGraph, cert: &PartitionCertificate) -> Result<(), VerifyFailure> {
    let n = g.n();
    let mut seen = VertexSet::empty(n);
    for &v in cert.red.iter().chain(&cert.blue) {
        if v >= n || !seen.insert(v) {
            return Err(VerifyFailure::NotAPartition { vertex: v });
        }
    }
    if let Some(v) = seen.complement().first() {
        return Err(VerifyFailure::NotAPartition { vertex: v });
    }
    for colour in [Colour::Red, Colour::Blue] {
        let c = cert.cycle(colour);
        let k = c.len();
        let closing = if k >= 3 { Some((c[k - 1], c[0])) } else { None };
        for (u, v) in c.windows(2).map(|w| (w[0], w[1])).chain(closing) {
            if !g.has_edge(u, v, colour.into()) {
                return Err(VerifyFailure::ColourViolation { colour, u, v });
            }
        }
        debug_assert!(is_cycle(g, colour.into(), c));
    }
    Ok(())
}

/// Exhaustive solver over all `2^n` splits. The blue vertex set with the
/// smallest bitmask wins, so a single red cycle is preferred when one exists.
pub fn solve(g: &ColouredGraph) -> Result<Option<PartitionCertificate>, HamError> {
    let (red, blue) = rayon::join(|| HamTable::build(g, View::Red), || HamTable::build(g, View::Blue));
    let (red, blue) = (red?, blue?);
    Ok(solve_with_tables(g.n(), &red, &blue))
}

fn solve_with_tables(n: usize, red: &HamTable, blue: &HamTable) -> Option<PartitionCertificate> {
    let full = ((1u64 << n) - 1) as u32;
    let b = (0..=full).into_par_iter().find_first(|&b| blue.has_cycle(b) && red.has_cycle(full ^ b))?;
    Some(PartitionCertificate { red: red.cycle(full ^ b).unwrap(), blue: blue.cycle(b).unwrap() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub n: usize,
    pub trials: usize,
    pub min_degree: usize,
    pub yes: usize,
    pub no: usize,
    /// Graphs without a partition, in trial order, as graph JSON values.
    pub no_instances: Vec<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub seed: u64,
    pub records: Vec<ScanRecord>,
}

/// Trial seeds for one vertex count, derived from the scan seed.
pub fn trial_seeds(n: usize, trials: usize, seed: u64) -> Vec<u64> {
    let mut rng = crate::generate::rng(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..trials).map(|_| rng.random()).collect()
}

/// The `(graph, certificate)` pairs of one scan of `n`, trial by trial.
pub fn scan_instances(
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<(ColouredGraph, Option<PartitionCertificate>)>, HamError> {
    let delta = (3 * n).div_ceil(4);
    trial_seeds(n, trials, seed)
        .into_par_iter()
        .map(|s| {
            let g = random_min_degree_graph(n, delta, 0.5, s).expect("delta <= n - 1 for n >= 4");
            let cert = solve(&g)?;
            Ok((g, cert))
        })
        .collect()
}

/// Random graphs with `δ >= ⌈3n/4⌉` and fair colouring, solved exactly.
pub fn scan_conjecture(n: usize, trials: usize, seed: u64) -> Result<ScanRecord, HamError> {
    let delta = (3 * n).div_ceil(4);
    let results = scan_instances(n, trials, seed)?;
    let mut record = ScanRecord { n, trials, min_degree: delta, yes: 0, no: 0, no_instances: Vec::new() };
    for (g, cert) in results {
        match cert {
            Some(c) => {
                debug_assert!(verify(&g, &c).is_ok());
                record.yes += 1;
            }
            None => {
                record.no += 1;
                record.no_instances.push(serde_json::from_str(&g.to_json()).unwrap());
            }
        }
    }
    Ok(record)
}

/// Scan over several vertex counts with one seed.
pub fn scan_range(ns: impl IntoIterator<Item = usize>, trials: usize, seed: u64) -> Result<ScanReport, HamError> {
    let records = ns.into_iter().map(|n| scan_conjecture(n, trials, seed)).collect::<Result<_, _>>()?;
    Ok(ScanReport { seed, records })
}

/// Every red/blue colouring of the union view of `base`, solved exactly.
/// Colouring `i` paints edge `j` (lexicographic order) red iff bit `j` of `i` is set.
pub fn all_colourings(base: &ColouredGraph) -> Result<Vec<(ColouredGraph, Option<PartitionCertificate>)>, HamError> {
    let edges = base.edges(View::Union);
    assert!(edges.len() < 32, "too many edges to enumerate colourings");
    (0..1u64 << edges.len())
        .into_par_iter()
        .map(|bits| {
            let g = ColouredGraph::from_edges(
                base.n(),
                edges.iter().enumerate().map(|(j, &(u, v))| (u, v, if bits >> j & 1 == 1 { Mark::Red } else { Mark::Blue })),
            );
            let cert = solve(&g)?;
            Ok((g, cert))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4_alternating() -> ColouredGraph {
        ColouredGraph::from_edges(4, [(0, 1, Mark::Red), (1, 2, Mark::Blue), (2, 3, Mark::Red), (3, 0, Mark::Blue)])
    }

    #[test]
    fn red_k4_uses_one_cycle() {
        let g = ColouredGraph::complete(4, Mark::Red);
        let cert = solve(&g).unwrap().unwrap();
        assert_eq!(cert.red.len(), 4);
        assert!(cert.blue.is_empty());
        assert_eq!(verify(&g, &cert), Ok(()));
    }

    #[test]
    fn alternating_c4_has_no_partition() {
        assert_eq!(solve(&c4_alternating()).unwrap(), None);
    }

    #[test]
    fn red_and_blue_triangles() {
        let mut g = ColouredGraph::empty(6);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            g.set_mark(u, v, Mark::Red);
            g.set_mark(u + 3, v + 3, Mark::Blue);
        }
        g.set_mark(0, 3, Mark::Blue);
        g.set_mark(2, 5, Mark::Red);
        let cert = solve(&g).unwrap().unwrap();
        assert_eq!(verify(&g, &cert), Ok(()));
    }

    #[test]
    fn verify_reasons() {
        let g = ColouredGraph::complete(4, Mark::Red);
        let bad = PartitionCertificate { red: vec![0, 1, 2], blue: vec![2, 3] };
        assert!(matches!(verify(&g, &bad), Err(VerifyFailure::NotAPartition { .. })));
        let short = PartitionCertificate { red: vec![0, 1, 2], blue: vec![] };
        assert_eq!(verify(&g, &short), Err(VerifyFailure::NotAPartition { vertex: 3 }));

        let blue_edge = ColouredGraph::from_edges(2, [(0, 1, Mark::Blue)]);
        let cert = PartitionCertificate { red: vec![0, 1], blue: vec![] };
        assert!(matches!(verify(&blue_edge, &cert), Err(VerifyFailure::ColourViolation { colour: Colour::Red, .. })));
    }

    #[test]
    fn k4_colourings_enumerated() {
        let all = all_colourings(&ColouredGraph::complete(4, Mark::Red)).unwrap();
        assert_eq!(all.len(), 64);
        for (g, cert) in &all {
            assert!(verify(g, cert.as_ref().expect("every colouring of K4 splits")).is_ok());
        }
    }

    #[test]
    fn empty_scan() {
        let r = scan_conjecture(8, 0, 1).unwrap();
        assert_eq!((r.yes, r.no, r.no_instances.len()), (0, 0, 0));
    }

    #[test]
    fn scan_is_deterministic() {
        let a = scan_conjecture(9, 40, 3).unwrap();
        let b = scan_conjecture(9, 40, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.yes + a.no, 40);
    }
}
