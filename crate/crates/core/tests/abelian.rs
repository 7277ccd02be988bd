mod common;

use std::collections::BTreeSet;

use common::{fixture, simple_undirected, small_multigraph, FIXTURES};
use mgq::abelian::*;
use mgq::aut::{compose, enumerate_automorphisms, Flavor};
use mgq::presentation::{emit_presentation, Kind};
use mgq::EnumerationError;
use proptest::prelude::*;

fn flavor_of(kind: Kind) -> Flavor {
    match kind {
        Kind::QS => Flavor::Source,
        Kind::QT => Flavor::Target,
        Kind::QST | Kind::QSTUndirected => Flavor::Both,
        _ => Flavor::All,
    }
}

fn points(name: &str, kind: Kind) -> Vec<ClassicalPoint> {
    let g = fixture(name);
    classical_points(&emit_presentation(&g, kind).unwrap(), &g).unwrap()
}

/// Point counts per fixture, in the order of `Kind::ALL`; `None` where the kind does not apply.
const COUNTS: [(&str, [Option<usize>; 11]); 9] = [
    ("g1", [Some(24), Some(24), Some(24), None, Some(24), Some(24), Some(24), None, Some(1), Some(1), Some(24)]),
    ("g2", [Some(2), Some(2), Some(2), None, Some(2), Some(2), Some(2), None, Some(1), Some(1), Some(2)]),
    ("g2u", [Some(4), Some(4), Some(4), Some(4), None, None, None, Some(4), Some(2), Some(2), Some(4)]),
    ("g3", [Some(48), Some(48), Some(48), Some(48), None, None, None, Some(48), Some(2), Some(2), Some(48)]),
    ("g4", [Some(48), Some(48), Some(48), Some(48), None, None, None, Some(12), Some(6), Some(6), Some(48)]),
    ("g5", [Some(32), Some(32), Some(32), Some(32), None, None, None, Some(32), Some(8), Some(8), Some(32)]),
    ("g6", [Some(128), Some(128), Some(128), Some(128), None, None, None, Some(16), Some(8), Some(8), Some(128)]),
    ("fan_in", [Some(8), Some(8), Some(8), None, Some(8), Some(4), Some(4), None, Some(2), Some(2), Some(8)]),
    ("doubled_path", [Some(4), Some(4), Some(4), None, Some(4), Some(4), Some(4), None, Some(1), Some(1), Some(4)]),
];

#[test]
fn frozen_counts_and_bijections() {
    for (name, counts) in COUNTS {
        let g = fixture(name);
        for (kind, expected) in Kind::ALL.into_iter().zip(counts) {
            let Ok(p) = emit_presentation(&g, kind) else {
                assert_eq!(expected, None, "{name} {kind}");
                continue;
            };
            let pts = classical_points(&p, &g).unwrap();
            assert_eq!(Some(pts.len()), expected, "{name} {kind}");
            let group = enumerate_automorphisms(&g, flavor_of(kind));
            let report = match_against_aut(&pts, &group, &p, &g);
            assert!(report.matched(), "{name} {kind}: {report}");
        }
    }
}

#[test]
fn paper_examples() {
    assert_eq!(points("g1", Kind::QBic).len(), 24);
    assert_eq!(points("g2u", Kind::QBic).len(), 4);
    assert_eq!(points("g6", Kind::QSTUndirected).len(), 16);
}

#[test]
fn edge_kinds_share_their_points() {
    for name in FIXTURES {
        let ban = points(name, Kind::QBan);
        assert_eq!(ban, points(name, Kind::QSym), "{name}");
        assert_eq!(ban, points(name, Kind::QBic), "{name}");
    }
}

#[test]
fn points_are_sorted_and_distinct() {
    let pts = points("g4", Kind::QBic);
    assert!(pts.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn orientation_matches_composition() {
    let g = fixture("g4");
    let p = emit_presentation(&g, Kind::QBic).unwrap();
    let rep = g.canonical_edge_representation().unwrap();
    let group = enumerate_automorphisms(&g, Flavor::All);
    let matrices: BTreeSet<Vec<Vec<u8>>> = points("g4", Kind::QBic).iter().map(|pt| edge_matrix(pt, &p, &g).unwrap()).collect();
    let e = g.edge_count();
    let matrix_of = |a: &mgq::aut::MultigraphAutomorphism| {
        let f = a.edge_map(&rep);
        (0..e).map(|s| (0..e).map(|t| u8::from(f[t] == s)).collect::<Vec<u8>>()).collect::<Vec<_>>()
    };
    for a in group.elements.iter().step_by(7) {
        assert!(matrices.contains(&matrix_of(a)));
        for b in group.elements.iter().step_by(5) {
            let (ma, mb) = (matrix_of(a), matrix_of(b));
            let product: Vec<Vec<u8>> = (0..e).map(|i| (0..e).map(|j| (0..e).map(|k| ma[i][k] * mb[k][j]).sum()).collect()).collect();
            assert_eq!(matrix_of(&compose(a, b).unwrap()), product);
        }
    }
}

#[test]
fn mismatch_is_reported() {
    let g = fixture("fan_in");
    let p = emit_presentation(&g, Kind::QS).unwrap();
    let pts = classical_points(&p, &g).unwrap();
    let report = match_against_aut(&pts, &enumerate_automorphisms(&g, Flavor::Both), &p, &g);
    assert!(!report.matched());
    assert!(report.to_string().contains("mismatch"));
}

#[test]
fn guard_refuses_oversized_searches() {
    let g = fixture("g6");
    let p = emit_presentation(&g, Kind::QBic).unwrap();
    let err = classical_points_with_limit(&p, &g, 100).unwrap_err();
    assert_eq!(err, EnumerationError::TooManyCandidates { candidates: 8 * 256, limit: 100 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn qbic_points_biject_with_automorphisms(g in small_multigraph()) {
        let p = emit_presentation(&g, Kind::QBic).unwrap();
        let pts = classical_points(&p, &g).unwrap();
        let report = match_against_aut(&pts, &enumerate_automorphisms(&g, Flavor::All), &p, &g);
        prop_assert!(report.matched(), "{}", report);
    }

    #[test]
    fn st_points_biject_with_both_dependent_group(g in small_multigraph()) {
        let kind = if g.is_undirected() { Kind::QSTUndirected } else { Kind::QST };
        let p = emit_presentation(&g, kind).unwrap();
        let pts = classical_points(&p, &g).unwrap();
        let report = match_against_aut(&pts, &enumerate_automorphisms(&g, Flavor::Both), &p, &g);
        prop_assert!(report.matched(), "{}", report);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn complement_has_the_same_sban_points(n in 4usize..=6, bits in prop::collection::vec(any::<bool>(), 15)) {
        let mut adj = vec![vec![false; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                adj[i][j] = bits[k];
                adj[j][i] = bits[k];
                k += 1;
            }
        }
        let comp: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && !adj[i][j]).collect()).collect();
        let (Some(g), Some(h)) = (simple_undirected(&adj), simple_undirected(&comp)) else {
            return Ok(());
        };
        let pg = classical_points(&emit_presentation(&g, Kind::SBan).unwrap(), &g).unwrap();
        let ph = classical_points(&emit_presentation(&h, Kind::SBan).unwrap(), &h).unwrap();
        prop_assert_eq!(pg, ph);
    }
}
