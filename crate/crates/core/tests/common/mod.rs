#![allow(dead_code)]

use std::path::PathBuf;

use mgq::Graph;
use proptest::prelude::*;
use rand::RngExt;
use serde_json::json;

pub const FIXTURES: [&str; 9] = ["g1", "g2", "g2u", "g3", "g4", "g5", "g6", "fan_in", "doubled_path"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Graph {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    Graph::from_json(&text).expect("fixture is valid")
}

/// Builds a graph from endpoint pairs, dropping unused vertices. Undirected
/// graphs get a reversed partner for every non-loop pair.
pub fn graph_from_pairs(pairs: &[(usize, usize)], undirected: bool) -> Graph {
    let mut edges = Vec::new();
    let mut inversion = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    for (k, &(a, b)) in pairs.iter().enumerate() {
        used.insert(a);
        used.insert(b);
        let id = format!("e{k}");
        edges.push(json!({"id": id, "src": format!("v{a}"), "tgt": format!("v{b}")}));
        if undirected && a != b {
            let rev = format!("e{k}r");
            edges.push(json!({"id": rev, "src": format!("v{b}"), "tgt": format!("v{a}")}));
            inversion.push(json!([id, rev]));
        }
    }
    let vertices: Vec<String> = used.iter().map(|v| format!("v{v}")).collect();
    let mut doc = json!({"vertices": vertices, "edges": edges});
    if undirected {
        doc["inversion"] = json!(inversion);
    }
    Graph::from_json(&doc.to_string()).expect("generated graph is valid")
}

/// Number of directed edges the pairs produce.
pub fn directed_size(pairs: &[(usize, usize)], undirected: bool) -> usize {
    pairs.iter().map(|&(a, b)| if undirected && a != b { 2 } else { 1 }).sum()
}

/// A random multigraph with at most `max_v` vertices and `max_e` directed edges.
pub fn random_multigraph(rng: &mut impl rand::Rng, max_v: usize, max_e: usize, undirected: bool) -> Graph {
    let n = rng.random_range(1..=max_v);
    let mut pairs = Vec::new();
    let budget = rng.random_range(1..=max_e);
    while directed_size(&pairs, undirected) < budget {
        let pair = (rng.random_range(0..n), rng.random_range(0..n));
        pairs.push(pair);
        if directed_size(&pairs, undirected) > max_e {
            pairs.pop();
            if pairs.is_empty() {
                continue;
            }
            break;
        }
    }
    graph_from_pairs(&pairs, undirected)
}

/// Proptest strategy: multigraphs on at most 3 vertices with at most 5 directed edges.
pub fn small_multigraph() -> impl Strategy<Value = Graph> {
    (any::<bool>(), prop::collection::vec((0..3usize, 0..3usize), 1..=5)).prop_filter_map("too many edges", |(undirected, pairs)| {
        (directed_size(&pairs, undirected) <= 5).then(|| graph_from_pairs(&pairs, undirected))
    })
}

/// Symmetric loop-free 0/1 adjacency as an undirected graph, or `None` if a
/// vertex is isolated.
pub fn simple_undirected(adj: &[Vec<bool>]) -> Option<Graph> {
    let n = adj.len();
    if (0..n).any(|i| !(0..n).any(|j| adj[i][j])) {
        return None;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| adj[i][j]).collect();
    Some(graph_from_pairs(&pairs, true))
}
