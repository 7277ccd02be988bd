//! One line per acceptance criterion; exits nonzero if any criterion fails.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use common::{fixture, random_multigraph, simple_undirected, FIXTURES};
use mgq::abelian::{classical_points, match_against_aut};
use mgq::aut::{brute_force_oracle, brute_force_oracle_with_limit, enumerate_automorphisms, enumerate_vertex_symmetries, predicted_order, Flavor, MultigraphAutomorphism};
use mgq::cstar::{build_ck_family, verify_ck_coaction, verify_correspondence_covariance};
use mgq::ncpoly::operator_norm;
use mgq::perm;
use mgq::presentation::{emit_presentation, Kind};
use mgq::reps::{block_invariance_check, default_wreath_rep, example5_witness, rep_from_automorphism, verify_rep};
use mgq::Graph;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn edge_kind(g: &Graph) -> Kind {
    if g.is_undirected() {
        Kind::QBicUndirected
    } else {
        Kind::QBic
    }
}

fn qbic_points_match(g: &Graph) -> Result<usize, String> {
    let p = emit_presentation(g, Kind::QBic).map_err(|e| e.to_string())?;
    let points = classical_points(&p, g).map_err(|e| e.to_string())?;
    let report = match_against_aut(&points, &enumerate_automorphisms(g, Flavor::All), &p, g);
    ensure!(report.matched(), "{report}");
    Ok(points.len())
}

fn order_and_points(name: &str, expected: usize) -> Outcome {
    let g = fixture(name);
    let order = enumerate_automorphisms(&g, Flavor::All).order();
    ensure!(order == expected, "{name}: |G^aut| = {order}, expected {expected}");
    let points = qbic_points_match(&g)?;
    ensure!(points == expected, "{name}: {points} QBic classical points, expected {expected}");
    Ok(format!("{name}: order {order}, {points} QBic classical points in bijection"))
}

fn criterion_1() -> Outcome {
    let g2u = enumerate_automorphisms(&fixture("g2u"), Flavor::All).order();
    let g2 = enumerate_automorphisms(&fixture("g2"), Flavor::All).order();
    ensure!(g2u == 4 && g2 == 2, "orders g2u={g2u}, g2={g2}");
    Ok("g2u order 4, g2 order 2".into())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let detail = order_and_points("g1", 24)?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 1.0, "took {elapsed:.2}s");
    Ok(detail)
}

fn criterion_3() -> Outcome {
    order_and_points("g3", 48)
}

fn criterion_4() -> Outcome {
    let g = fixture("g4");
    let rep = g.canonical_edge_representation().unwrap();
    // 12 edges is past the default guard, but endpoint pruning keeps this cheap
    let oracle = brute_force_oracle_with_limit(&g, g.edge_count()).map_err(|e| e.to_string())?;
    let detail = order_and_points("g4", 48)?;
    ensure!(oracle.edge_maps(&rep) == enumerate_automorphisms(&g, Flavor::All).edge_maps(&rep), "oracle order {}", oracle.order());
    Ok(format!("{detail}, oracle agrees"))
}

fn criterion_5() -> Outcome {
    let g = fixture("g5");
    let group = enumerate_automorphisms(&g, Flavor::All);
    let vertex_parts = group.vertex_parts().len();
    ensure!(group.order() == 32 && vertex_parts == 8, "order {}, vertex part {vertex_parts}", group.order());
    let sban = classical_points(&emit_presentation(&g, Kind::SBan).unwrap(), &g).map_err(|e| e.to_string())?;
    ensure!(sban.len() == 8, "{} SBan classical points", sban.len());
    Ok("g5 order 32, vertex part of order 8".into())
}

fn criterion_6() -> Outcome {
    let g = fixture("g6");
    let (_, w) = example5_witness(&g, FRAC_PI_4, false, 1e-9).map_err(|e| e.to_string())?;
    ensure!(w.sban_residual <= 1e-9, "SBan residual {:.3e}", w.sban_residual);
    ensure!(w.st_residual <= 1e-9, "{} residual {:.3e}", w.st_kind, w.st_residual);
    ensure!((w.commutator - 0.5).abs() <= 1e-9, "commutator {}", w.commutator);
    let p = emit_presentation(&g, Kind::QSTUndirected).unwrap();
    let points = classical_points(&p, &g).map_err(|e| e.to_string())?.len();
    ensure!(points == 16, "{points} QSTUndirected classical points");
    Ok(format!("commutator {:.12}, SBan {:.1e}, QST {:.1e}, 16 QST classical points", w.commutator, w.sban_residual, w.st_residual))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for name in ["g1", "g3", "g4"] {
        let g = fixture(name);
        let rep = default_wreath_rep(&g, FRAC_PI_4, 1e-9).map_err(|e| format!("{name}: {e}"))?;
        ensure!(rep.dim == 2, "{name}: dimension {}", rep.dim);
        let noncommuting = rep.assign.values().any(|a| rep.assign.values().any(|b| operator_norm(&(a * b - b * a)) > 0.1));
        ensure!(noncommuting, "{name}: rep is commutative");
        let report = verify_rep(&rep, &emit_presentation(&g, edge_kind(&g)).unwrap()).map_err(|e| e.to_string())?;
        ensure!(report.max_residual <= 1e-9, "{name}: {report}");
        let block = block_invariance_check(&rep, &g).map_err(|e| e.to_string())?;
        ensure!(block.passed(), "{name}: {block}");
        worst = worst.max(report.max_residual).max(block.max_residual);
    }
    Ok(format!("g1, g3, g4 wreath reps verify, max residual {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x006d_6771);
    for k in 0..50 {
        let undirected = rng.random_bool(0.5);
        let g = random_multigraph(&mut rng, 3, 5, undirected);
        let rep = g.canonical_edge_representation().map_err(|e| e.to_string())?;
        let fast = enumerate_automorphisms(&g, Flavor::All);
        let slow = brute_force_oracle(&g).map_err(|e| e.to_string())?;
        ensure!(fast.edge_maps(&rep) == slow.edge_maps(&rep), "graph {k}: search disagrees with oracle\n{}", g.multigraph().to_json());
        qbic_points_match(&g).map_err(|e| format!("graph {k}: {e}"))?;
    }
    Ok("50/50 random multigraphs agree".into())
}

fn directed_variant(g: &Graph) -> Graph {
    let mut raw = g.multigraph().clone();
    raw.inversion = None;
    Graph::new(raw).expect("dropping the inversion keeps the graph valid")
}

fn criterion_9() -> Outcome {
    let mut checked = 0;
    for name in FIXTURES {
        let g = fixture(name);
        let variants = if g.is_undirected() { vec![directed_variant(&g), g] } else { vec![g] };
        for g in variants {
            let w = g.adjacency_matrix().entries;
            let n = w.len();
            let bundles: u128 = (0..n)
                .flat_map(|k| (0..n).map(move |l| (k, l)))
                .filter(|&(k, l)| !(g.is_undirected() && l < k))
                .map(|(k, l)| perm::factorial(w[k][l] as usize))
                .product();
            let formula = enumerate_vertex_symmetries(&g).len() as u128 * bundles;
            let order = enumerate_automorphisms(&g, Flavor::All).order() as u128;
            ensure!(order == formula && formula == predicted_order(&g), "{name}: order {order}, formula {formula}");
            checked += 1;
        }
    }
    Ok(format!("{checked} fixture variants match"))
}

fn criterion_10() -> Outcome {
    for name in ["g2", "doubled_path"] {
        let g = fixture(name);
        let ck = build_ck_family(&g).map_err(|e| format!("{name}: {e}"))?;
        let violations = ck.violations(&g);
        ensure!(violations.is_empty(), "{name}: {violations:?}");
        let rep = g.canonical_edge_representation().unwrap();
        let mut classical = enumerate_automorphisms(&g, Flavor::All).elements;
        classical.push(MultigraphAutomorphism::identity(&rep, g.vertex_count()));
        for a in &classical {
            let r = rep_from_automorphism(&g, a);
            let co = verify_ck_coaction(&ck, &g, &r).map_err(|e| e.to_string())?;
            let cov = verify_correspondence_covariance(&g, &r).map_err(|e| e.to_string())?;
            ensure!(co.max_residual == 0.0 && cov.max_residual == 0.0, "{name}: classical rep\n{co}\n{cov}");
        }
        let wreath = default_wreath_rep(&g, FRAC_PI_4, 1e-9).map_err(|e| e.to_string())?;
        let co = verify_ck_coaction(&ck, &g, &wreath).map_err(|e| e.to_string())?;
        let cov = verify_correspondence_covariance(&g, &wreath).map_err(|e| e.to_string())?;
        ensure!(co.max_residual <= 1e-9 && cov.max_residual <= 1e-9, "{name}: wreath rep\n{co}\n{cov}");
    }
    Ok("g2 and doubled_path coactions verify".into())
}

fn criterion_11() -> Outcome {
    for name in FIXTURES {
        let g = fixture(name);
        let w = g.adjacency_matrix();
        for f in enumerate_vertex_symmetries(&g) {
            ensure!(w.levels().values().all(|lv| lv.commutes_with_permutation(&f)), "{name}: {f:?} moves a level");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = 0;
    while pairs < 20 {
        let n = rng.random_range(4..=6);
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let b = rng.random_bool(0.5);
                adj[i][j] = b;
                adj[j][i] = b;
            }
        }
        let comp: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && !adj[i][j]).collect()).collect();
        // both sides need every vertex present
        let (Some(g), Some(h)) = (simple_undirected(&adj), simple_undirected(&comp)) else {
            continue;
        };
        let pg = classical_points(&emit_presentation(&g, Kind::SBan).unwrap(), &g).map_err(|e| e.to_string())?;
        let ph = classical_points(&emit_presentation(&h, Kind::SBan).unwrap(), &h).map_err(|e| e.to_string())?;
        ensure!(pg == ph, "graph and complement differ on {adj:?}");
        pairs += 1;
    }
    Ok("levels preserved on every fixture; 20/20 complements agree".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("automorphism orders of the interplay pair", criterion_1),
        ("loop graph QBic points", criterion_2),
        ("doubled edge QBic points", criterion_3),
        ("triangle of double edges QBic points", criterion_4),
        ("weighted square orders", criterion_5),
        ("noncommutative square witness", criterion_6),
        ("wreath realization", criterion_7),
        ("oracle property suite", criterion_8),
        ("order formula", criterion_9),
        ("Cuntz-Krieger coaction", criterion_10),
        ("levels and complements", criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.2}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.2}s]", n + 1);
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
