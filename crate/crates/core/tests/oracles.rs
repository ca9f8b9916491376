mod common;

use common::{all_markings, perm_partition};
use monocycle::solver::{all_colourings, solve, verify};
use monocycle::{ColouredGraph, Mark};

#[test]
fn every_marking_of_k5_matches_permutation_oracle() {
    for g in all_markings(5, true) {
        let cert = solve(&g).unwrap();
        assert_eq!(cert.is_some(), perm_partition(&g).is_some(), "{}", g.to_json());
        if let Some(c) = cert {
            verify(&g, &c).unwrap();
        }
    }
}

#[test]
fn all_colourings_of_c5_agree_with_oracle() {
    let c5 = ColouredGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, Mark::Red)));
    let rows = all_colourings(&c5).unwrap();
    assert_eq!(rows.len(), 32);
    for (g, cert) in rows {
        assert_eq!(cert.is_some(), perm_partition(&g).is_some());
    }
}

#[test]
fn alternating_c4_has_no_partition() {
    let g = ColouredGraph::from_edges(4, [(0, 1, Mark::Red), (1, 2, Mark::Blue), (2, 3, Mark::Red), (3, 0, Mark::Blue)]);
    assert!(perm_partition(&g).is_none());
    assert!(solve(&g).unwrap().is_none());
}
