mod common;

use common::{fixture, graph_from_pairs};
use mgq::aut::{enumerate_automorphisms, Flavor, MultigraphAutomorphism};
use mgq::cstar::*;
use mgq::ncpoly::{CMatrix, Generator};
use mgq::reps::{default_wreath_rep, rep_from_automorphism};
use mgq::{CStarError, Graph};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complex(m: &DMatrix<i64>) -> CMatrix {
    m.map(|x| num::complex::Complex64::new(x as f64, 0.0))
}

fn identity_rep(g: &Graph) -> mgq::reps::MagicUnitaryRep {
    let rep = g.canonical_edge_representation().unwrap();
    rep_from_automorphism(g, &MultigraphAutomorphism::identity(&rep, g.vertex_count()))
}

#[test]
fn path_space_dimensions() {
    assert_eq!(build_ck_family(&fixture("g2")).unwrap().dim(), 3);
    let single = graph_from_pairs(&[(0, 1)], false);
    assert_eq!(build_ck_family(&single).unwrap().dim(), 2);
    // only v2 is a sink: the empty path, e2 and the two words through e2
    let chain = graph_from_pairs(&[(0, 1), (0, 1), (1, 2)], false);
    let ck = build_ck_family(&chain).unwrap();
    assert_eq!(ck.dim(), 4);
    assert!(ck.violations(&chain).is_empty());
}

#[test]
fn cyclic_and_undirected_graphs_are_refused() {
    assert!(matches!(build_ck_family(&fixture("g1")), Err(CStarError::CyclicGraph(_))));
    let cycle = graph_from_pairs(&[(0, 1), (1, 2), (2, 0)], false);
    assert!(matches!(build_ck_family(&cycle), Err(CStarError::CyclicGraph(_))));
    assert_eq!(build_ck_family(&fixture("g2u")), Err(CStarError::Undirected));
}

#[test]
fn trivial_rep_is_the_identity_coaction() {
    for name in ["g2", "fan_in", "doubled_path"] {
        let g = fixture(name);
        let ck = build_ck_family(&g).unwrap();
        let co = coaction_matrices(&ck, &g, &identity_rep(&g)).unwrap();
        for t in 0..g.edge_count() {
            assert_eq!(co.s[t], complex(&ck.s[t]), "{name}");
        }
        for i in 0..g.vertex_count() {
            assert_eq!(co.p[i], complex(&ck.p[i]), "{name}");
        }
    }
}

#[test]
fn swapping_parallel_edges_swaps_isometries() {
    let g = fixture("g2");
    let ck = build_ck_family(&g).unwrap();
    let group = enumerate_automorphisms(&g, Flavor::All);
    let swap = group.elements.iter().find(|a| !a.is_identity()).unwrap();
    let co = coaction_matrices(&ck, &g, &rep_from_automorphism(&g, swap)).unwrap();
    let (e1, e2) = (g.edge_index("e1").unwrap(), g.edge_index("e2").unwrap());
    assert_eq!(co.s[e1], complex(&ck.s[e2]));
    assert_eq!(co.s[e2], complex(&ck.s[e1]));
}

#[test]
fn classical_reps_give_exact_coactions() {
    for name in ["g2", "fan_in", "doubled_path"] {
        let g = fixture(name);
        let ck = build_ck_family(&g).unwrap();
        for a in enumerate_automorphisms(&g, Flavor::All).elements {
            let r = rep_from_automorphism(&g, &a);
            assert_eq!(verify_ck_coaction(&ck, &g, &r).unwrap().max_residual, 0.0, "{name}");
            assert_eq!(verify_correspondence_covariance(&g, &r).unwrap().max_residual, 0.0, "{name}");
        }
    }
}

#[test]
fn wreath_reps_give_coactions() {
    for name in ["g2", "doubled_path"] {
        let g = fixture(name);
        let ck = build_ck_family(&g).unwrap();
        let rep = default_wreath_rep(&g, 0.9, 1e-9).unwrap();
        let report = verify_ck_coaction(&ck, &g, &rep).unwrap();
        assert!(report.passed() && report.max_residual <= 1e-9, "{name} {report}");
        assert!(verify_correspondence_covariance(&g, &rep).unwrap().passed(), "{name}");
    }
    let g3 = fixture("g3");
    let report = verify_correspondence_covariance(&g3, &default_wreath_rep(&g3, 0.9, 1e-9).unwrap()).unwrap();
    assert!(report.max_residual <= 1e-9, "{report}");
}

#[test]
fn corrupted_rep_is_reported() {
    let g = fixture("g2");
    let ck = build_ck_family(&g).unwrap();
    let mut rep = identity_rep(&g);
    rep.assign.insert(Generator::u("e1", "e2"), CMatrix::identity(1, 1));
    let report = verify_ck_coaction(&ck, &g, &rep).unwrap();
    assert!(!report.passed());
    assert!(report.failures.iter().any(|(w, _)| w.starts_with("S*S")), "{report}");
    assert!(!verify_correspondence_covariance(&g, &rep).unwrap().passed());
    rep.assign.remove(&Generator::u("e1", "e1"));
    assert!(matches!(coaction_matrices(&ck, &g, &rep), Err(CStarError::GraphMismatch(_))));
}

fn small_dag() -> impl Strategy<Value = Graph> {
    (2usize..=4)
        .prop_flat_map(|n| prop::collection::vec((0..n, 0..n), 1..=5))
        .prop_filter_map("needs a forward edge", |pairs| {
            let forward: Vec<(usize, usize)> = pairs.into_iter().filter(|(a, b)| a < b).collect();
            (!forward.is_empty()).then(|| graph_from_pairs(&forward, false))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn automorphisms_of_dags_coact(g in small_dag()) {
        let ck = build_ck_family(&g).unwrap();
        prop_assert!(ck.violations(&g).is_empty());
        for a in enumerate_automorphisms(&g, Flavor::All).elements.iter().take(8) {
            let r = rep_from_automorphism(&g, a);
            prop_assert_eq!(verify_ck_coaction(&ck, &g, &r).unwrap().max_residual, 0.0);
            prop_assert!(verify_correspondence_covariance(&g, &r).unwrap().passed());
        }
    }
}
