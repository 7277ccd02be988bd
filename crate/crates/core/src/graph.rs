//! Finite multigraphs: the JSON model, validation, and the derived structures
//! (adjacency, underlying weighted graph, uniform components, canonical edge labels).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, ParseError};

/// One edge record of the JSON model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// A multigraph exactly as it appears on disk.
///
/// `inversion` lists unordered edge pairs; loops are left out and are implicitly
/// fixed. Its presence is what makes the graph undirected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multigraph {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<Vec<[String; 2]>>,
}

impl Multigraph {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(ParseError::from_path_error)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("multigraph serialization is infallible")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("multigraph serialization is infallible")
    }

    pub fn kind(&self) -> GraphKind {
        if self.inversion.is_some() {
            GraphKind::Undirected
        } else {
            GraphKind::Directed
        }
    }

    /// Checks every structural invariant and collects all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen_v = BTreeSet::new();
        for v in &self.vertices {
            if !seen_v.insert(v.as_str()) {
                violations.push(Violation::DuplicateVertex(v.clone()));
            }
            if has_bracket(v) {
                violations.push(Violation::BracketInId(v.clone()));
            }
        }
        let mut touched = BTreeSet::new();
        let mut edge_ends: HashMap<&str, (&str, &str)> = HashMap::new();
        for e in &self.edges {
            if has_bracket(&e.id) {
                violations.push(Violation::BracketInId(e.id.clone()));
            }
            if edge_ends.insert(&e.id, (&e.src, &e.tgt)).is_some() {
                violations.push(Violation::DuplicateEdge(e.id.clone()));
            }
            for (end, v) in [("src", &e.src), ("tgt", &e.tgt)] {
                if seen_v.contains(v.as_str()) {
                    touched.insert(v.as_str());
                } else {
                    violations.push(Violation::UnknownVertex {
                        edge: e.id.clone(),
                        end,
                        vertex: v.clone(),
                    });
                }
            }
        }
        for v in &self.vertices {
            if !touched.contains(v.as_str()) && !violations.contains(&Violation::DuplicateVertex(v.clone())) {
                violations.push(Violation::IsolatedVertex(v.clone()));
            }
        }

        if let Some(pairs) = &self.inversion {
            let mut partner: HashMap<&str, &str> = HashMap::new();
            for [a, b] in pairs {
                let mut known = true;
                for x in [a, b] {
                    if !edge_ends.contains_key(x.as_str()) {
                        violations.push(Violation::InversionUnknownEdge(x.clone()));
                        known = false;
                    }
                }
                if !known {
                    continue;
                }
                for x in [a, b] {
                    if partner.contains_key(x.as_str()) {
                        violations.push(Violation::InversionRepeated(x.clone()));
                    }
                }
                partner.insert(a, b);
                partner.insert(b, a);
                let (sa, ta) = edge_ends[a.as_str()];
                let (sb, tb) = edge_ends[b.as_str()];
                let a_loop = sa == ta;
                let b_loop = sb == tb;
                if a == b {
                    if !a_loop {
                        violations.push(Violation::InversionFixesNonLoop(a.clone()));
                    }
                } else if a_loop || b_loop {
                    let l = if a_loop { a } else { b };
                    violations.push(Violation::InversionMovesLoop(l.clone()));
                } else if sa != tb || ta != sb {
                    violations.push(Violation::InversionEndpoints(a.clone(), b.clone()));
                }
            }
            for e in &self.edges {
                if e.src != e.tgt && !partner.contains_key(e.id.as_str()) {
                    violations.push(Violation::InversionFixesNonLoop(e.id.clone()));
                }
            }
            let mut w: BTreeMap<(&str, &str), usize> = BTreeMap::new();
            for e in &self.edges {
                *w.entry((&e.src, &e.tgt)).or_default() += 1;
            }
            let mut reported = BTreeSet::new();
            for (&(i, j), &c) in &w {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                if w.get(&(j, i)).copied().unwrap_or(0) != c && reported.insert((a, b)) {
                    violations.push(Violation::AsymmetricAdjacency(a.to_string(), b.to_string()));
                }
            }
        }
        ValidationReport { kind: self.kind(), violations }
    }
}

fn has_bracket(s: &str) -> bool {
    s.contains('[') || s.contains(']')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Directed,
    Undirected,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Directed => f.write_str("directed"),
            GraphKind::Undirected => f.write_str("undirected"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    IsolatedVertex(String),
    DuplicateVertex(String),
    DuplicateEdge(String),
    UnknownVertex { edge: String, end: &'static str, vertex: String },
    BracketInId(String),
    InversionUnknownEdge(String),
    InversionRepeated(String),
    InversionFixesNonLoop(String),
    InversionMovesLoop(String),
    InversionEndpoints(String, String),
    AsymmetricAdjacency(String, String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IsolatedVertex(v) => write!(f, "isolated vertex {v}"),
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex {v}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge id {e}"),
            Violation::UnknownVertex { edge, end, vertex } => {
                write!(f, "edge {edge}: {end} refers to unknown vertex {vertex}")
            }
            Violation::BracketInId(s) => write!(f, "identifier {s} contains a bracket"),
            Violation::InversionUnknownEdge(e) => write!(f, "inversion refers to unknown edge {e}"),
            Violation::InversionRepeated(e) => write!(f, "inversion pairs edge {e} more than once"),
            Violation::InversionFixesNonLoop(e) => write!(f, "inversion leaves non-loop edge {e} unpaired"),
            Violation::InversionMovesLoop(e) => write!(f, "inversion moves loop {e}"),
            Violation::InversionEndpoints(a, b) => {
                write!(f, "inversion pair ({a},{b}) does not swap source and target")
            }
            Violation::AsymmetricAdjacency(i, j) => {
                write!(f, "adjacency not symmetric at ({i},{j})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub kind: GraphKind,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid, {}", self.kind)
        } else {
            write!(f, "invalid ({}):", self.kind)?;
            for v in &self.violations {
                write!(f, "\n  {v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

/// A validated multigraph with vertices and edges sorted by id.
///
/// All index-based APIs refer to these sorted positions.
#[derive(Clone, Debug)]
pub struct Graph {
    raw: Multigraph,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    inversion: Option<Vec<usize>>,
    vindex: HashMap<String, usize>,
    eindex: HashMap<String, usize>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.inversion == other.inversion
    }
}

impl Graph {
    pub fn new(raw: Multigraph) -> Result<Self, GraphError> {
        let report = raw.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(report));
        }
        let mut vertices = raw.vertices.clone();
        vertices.sort();
        let vindex: HashMap<String, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut edges: Vec<Edge> = raw
            .edges
            .iter()
            .map(|e| Edge { id: e.id.clone(), src: vindex[&e.src], tgt: vindex[&e.tgt] })
            .collect();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let eindex: HashMap<String, usize> =
            edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        let inversion = raw.inversion.as_ref().map(|pairs| {
            let mut j: Vec<usize> = (0..edges.len()).collect();
            for [a, b] in pairs {
                let (a, b) = (eindex[a], eindex[b]);
                j[a] = b;
                j[b] = a;
            }
            j
        });
        Ok(Graph { raw, vertices, edges, inversion, vindex, eindex })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        Graph::new(Multigraph::from_json(text)?)
    }

    pub fn multigraph(&self) -> &Multigraph {
        &self.raw
    }

    pub fn kind(&self) -> GraphKind {
        self.raw.kind()
    }

    pub fn is_undirected(&self) -> bool {
        self.inversion.is_some()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_id(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edges[e].id
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vindex.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.eindex.get(id).copied()
    }

    pub fn src(&self, e: usize) -> usize {
        self.edges[e].src
    }

    pub fn tgt(&self, e: usize) -> usize {
        self.edges[e].tgt
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.edges[e].src == self.edges[e].tgt
    }

    /// The inversion map j, when the graph is undirected.
    pub fn inversion(&self, e: usize) -> Option<usize> {
        self.inversion.as_ref().map(|j| j[e])
    }

    /// E^i: edges with source i.
    pub fn out_edges(&self, i: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].src == i).collect()
    }

    /// E_j: edges with target j.
    pub fn in_edges(&self, j: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].tgt == j).collect()
    }

    /// V^s, the vertices that are the source of some edge.
    pub fn sources(&self) -> BTreeSet<usize> {
        self.edges.iter().map(|e| e.src).collect()
    }

    /// V^t, the vertices that are the target of some edge.
    pub fn targets(&self) -> BTreeSet<usize> {
        self.edges.iter().map(|e| e.tgt).collect()
    }

    /// Bundles E^k_l keyed by (k,l), each listing its edges in id order.
    pub fn bundles(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (idx, e) in self.edges.iter().enumerate() {
            out.entry((e.src, e.tgt)).or_default().push(idx);
        }
        out
    }

    pub fn adjacency_matrix(&self) -> AdjacencyMatrix {
        let n = self.vertices.len();
        let mut entries = vec![vec![0u64; n]; n];
        for e in &self.edges {
            entries[e.src][e.tgt] += 1;
        }
        AdjacencyMatrix { entries }
    }

    pub fn underlying_weighted_graph(&self) -> WeightedSimpleGraph {
        let w = self.adjacency_matrix();
        let mut arcs = BTreeMap::new();
        for (i, row) in w.entries.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    arcs.insert((i, j), c);
                }
            }
        }
        WeightedSimpleGraph { vertex_count: self.vertices.len(), arcs }
    }

    /// Splits E by bundle size; components come out sorted by degree.
    pub fn uniform_decompose(&self) -> Vec<UniformComponent> {
        let mut by_degree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for bundle in self.bundles().values() {
            by_degree.entry(bundle.len()).or_default().extend(bundle);
        }
        by_degree
            .into_iter()
            .map(|(degree, mut edges)| {
                edges.sort_unstable();
                let sources: BTreeSet<usize> = edges.iter().map(|&e| self.src(e)).collect();
                let targets: BTreeSet<usize> = edges.iter().map(|&e| self.tgt(e)).collect();
                let vertices: BTreeSet<usize> = sources.union(&targets).copied().collect();
                UniformComponent {
                    degree,
                    vertices: vertices.into_iter().collect(),
                    edges,
                    sources: sources.into_iter().collect(),
                    targets: targets.into_iter().collect(),
                }
            })
            .collect()
    }

    pub fn canonical_edge_representation(&self) -> Result<EdgeRepresentation, GraphError> {
        let bundles = self.bundles();
        let mut local = vec![0usize; self.edges.len()];
        match &self.inversion {
            None => {
                for bundle in bundles.values() {
                    for (r, &e) in bundle.iter().enumerate() {
                        local[e] = r + 1;
                    }
                }
            }
            Some(j) => {
                for (&(k, l), bundle) in &bundles {
                    if k > l {
                        continue;
                    }
                    for (r, &e) in bundle.iter().enumerate() {
                        local[e] = r + 1;
                        if k != l {
                            let partner = j[e];
                            if self.src(partner) != l || self.tgt(partner) != k {
                                return Err(GraphError::InconsistentInversion(self.edge_id(e).to_string()));
                            }
                            local[partner] = r + 1;
                        }
                    }
                }
            }
        }
        EdgeRepresentation::from_local_indices(self, local)
    }

    /// The undirected multigraph obtained by giving every non-loop edge a
    /// reversed partner.
    pub fn underlying_undirected_multigraph(&self) -> Result<Multigraph, GraphError> {
        if self.is_undirected() {
            return Err(GraphError::NotDirected);
        }
        let mut taken: BTreeSet<String> = self.edges.iter().map(|e| e.id.clone()).collect();
        let mut edges = self.raw.edges.clone();
        let mut pairs = Vec::new();
        for e in &self.raw.edges {
            if e.src == e.tgt {
                continue;
            }
            let mut fresh = format!("{}~", e.id);
            while taken.contains(&fresh) {
                fresh.push('~');
            }
            taken.insert(fresh.clone());
            edges.push(EdgeRecord { id: fresh.clone(), src: e.tgt.clone(), tgt: e.src.clone() });
            pairs.push([e.id.clone(), fresh]);
        }
        Ok(Multigraph { vertices: self.raw.vertices.clone(), edges, inversion: Some(pairs) })
    }

    /// E^u: the orbits {τ, j(τ)}, each listed in edge order.
    pub fn undirected_edge_classes(&self) -> Result<Vec<Vec<usize>>, GraphError> {
        let j = self.inversion.as_ref().ok_or(GraphError::NotUndirected)?;
        Ok((0..self.edges.len())
            .filter(|&e| j[e] >= e)
            .map(|e| if j[e] == e { vec![e] } else { vec![e, j[e]] })
            .collect())
    }

    /// Vertices of V_m grouped by mutual reachability along edges of E_m.
    pub fn path_classes(&self, component: &UniformComponent) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &e in &component.edges {
            adj[self.src(e)].push(self.tgt(e));
        }
        let reach: Vec<BTreeSet<usize>> = component
            .vertices
            .iter()
            .map(|&v| {
                let mut seen = BTreeSet::from([v]);
                let mut queue = VecDeque::from([v]);
                while let Some(x) = queue.pop_front() {
                    for &y in &adj[x] {
                        if seen.insert(y) {
                            queue.push_back(y);
                        }
                    }
                }
                seen
            })
            .collect();
        let pos: HashMap<usize, usize> =
            component.vertices.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut assigned = BTreeSet::new();
        for &v in &component.vertices {
            if assigned.contains(&v) {
                continue;
            }
            let class: Vec<usize> = component
                .vertices
                .iter()
                .copied()
                .filter(|&w| reach[pos[&v]].contains(&w) && reach[pos[&w]].contains(&v))
                .collect();
            assigned.extend(class.iter().copied());
            classes.push(class);
        }
        classes
    }
}

/// W with W[i][j] = |E^i_j| in sorted vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjacencyMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl AdjacencyMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().flatten().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// The 0/1 matrix of the support of W.
    pub fn support(&self) -> AdjacencyMatrix {
        AdjacencyMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(|&c| u64::from(c != 0)).collect()).collect(),
        }
    }

    /// Level matrices W^c (entries equal to c), one per distinct value c.
    pub fn levels(&self) -> BTreeMap<u64, AdjacencyMatrix> {
        let values: BTreeSet<u64> = self.entries.iter().flatten().copied().collect();
        values
            .into_iter()
            .map(|c| {
                let entries =
                    self.entries.iter().map(|r| r.iter().map(|&x| u64::from(x == c)).collect()).collect();
                (c, AdjacencyMatrix { entries })
            })
            .collect()
    }

    /// Whether the vertex permutation `f` (as a permutation matrix) commutes with W.
    pub fn commutes_with_permutation(&self, f: &[usize]) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[f[i]][f[j]] == self.entries[i][j]))
    }
}

/// Ē = support(W) with weight w = W on Ē.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedSimpleGraph {
    pub vertex_count: usize,
    pub arcs: BTreeMap<(usize, usize), u64>,
}

impl WeightedSimpleGraph {
    pub fn total_weight(&self) -> u64 {
        self.arcs.values().sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.arcs.contains_key(&(i, j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformComponent {
    pub degree: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
}

/// Labels each edge as (k,l)r with 1 ≤ r ≤ |E^k_l|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRepresentation {
    labels: Vec<(usize, usize, usize)>,
    bundles: BTreeMap<(usize, usize), Vec<usize>>,
}

impl EdgeRepresentation {
    /// Builds a representation from a local index per edge (1-based), checking
    /// that each bundle is numbered 1..m and, for undirected graphs, that
    /// j((k,l)r) = (l,k)r.
    pub fn from_local_indices(g: &Graph, local: Vec<usize>) -> Result<Self, GraphError> {
        if local.len() != g.edge_count() {
            return Err(GraphError::BadRepresentation("wrong number of labels".into()));
        }
        let mut bundles: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (&(k, l), edges) in &g.bundles() {
            let mut slots = vec![usize::MAX; edges.len()];
            for &e in edges {
                let r = local[e];
                if r == 0 || r > edges.len() || slots[r - 1] != usize::MAX {
                    return Err(GraphError::BadRepresentation(format!(
                        "bundle ({},{}) is not numbered 1..{}",
                        g.vertex_id(k),
                        g.vertex_id(l),
                        edges.len()
                    )));
                }
                slots[r - 1] = e;
            }
            bundles.insert((k, l), slots);
        }
        if g.is_undirected() {
            for e in 0..g.edge_count() {
                let p = g.inversion(e).expect("undirected graph has an inversion");
                if local[p] != local[e] {
                    return Err(GraphError::InconsistentInversion(g.edge_id(e).to_string()));
                }
            }
        }
        let labels = (0..g.edge_count()).map(|e| (g.src(e), g.tgt(e), local[e])).collect();
        Ok(EdgeRepresentation { labels, bundles })
    }

    /// Builds a representation from an explicit edge-id → local-index map.
    pub fn from_assignment(g: &Graph, map: &BTreeMap<String, usize>) -> Result<Self, GraphError> {
        let mut local = vec![0; g.edge_count()];
        for (id, &r) in map {
            let e = g.edge_index(id).ok_or_else(|| GraphError::UnknownEdge(id.clone()))?;
            local[e] = r;
        }
        Self::from_local_indices(g, local)
    }

    /// (src, tgt, r) for edge `e`, with r 1-based.
    pub fn label(&self, e: usize) -> (usize, usize, usize) {
        self.labels[e]
    }

    /// The edge (k,l)r; r is 1-based.
    pub fn edge_at(&self, k: usize, l: usize, r: usize) -> Option<usize> {
        self.bundles.get(&(k, l)).and_then(|b| b.get(r.checked_sub(1)?)).copied()
    }

    pub fn bundles(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.bundles
    }

    pub fn bundle_size(&self, k: usize, l: usize) -> usize {
        self.bundles.get(&(k, l)).map_or(0, Vec::len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(text: &str) -> Graph {
        Graph::from_json(text).unwrap()
    }

    #[test]
    fn isolated_vertex_is_reported() {
        let g = Multigraph::from_json(
            r#"{"vertices":["a","b","c"],"edges":[{"id":"e1","src":"a","tgt":"b"}]}"#,
        )
        .unwrap();
        let report = g.validate();
        assert_eq!(report.violations, vec![Violation::IsolatedVertex("c".into())]);
        assert_eq!(report.violations[0].to_string(), "isolated vertex c");
    }

    #[test]
    fn minimal_involution_is_undirected() {
        let g = Multigraph::from_json(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"b","tgt":"a"}],"inversion":[["e1","e2"]]}"#,
        )
        .unwrap();
        let report = g.validate();
        assert!(report.is_valid());
        assert_eq!(report.kind, GraphKind::Undirected);
    }

    #[test]
    fn inversion_must_swap_endpoints() {
        let g = Multigraph::from_json(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"a","tgt":"b"}],"inversion":[["e1","e2"]]}"#,
        )
        .unwrap();
        let v = g.validate().violations;
        assert!(v.contains(&Violation::InversionEndpoints("e1".into(), "e2".into())));
        assert!(v.iter().any(|x| matches!(x, Violation::AsymmetricAdjacency(..))));
    }

    #[test]
    fn inversion_may_not_move_loops() {
        let g = Multigraph::from_json(
            r#"{"vertices":["a"],"edges":[{"id":"l1","src":"a","tgt":"a"},{"id":"l2","src":"a","tgt":"a"}],"inversion":[["l1","l2"]]}"#,
        )
        .unwrap();
        assert!(g.validate().violations.iter().any(|x| matches!(x, Violation::InversionMovesLoop(_))));
    }

    #[test]
    fn unpaired_edge_is_reported() {
        let g = Multigraph::from_json(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"b","tgt":"a"}],"inversion":[]}"#,
        )
        .unwrap();
        let v = g.validate().violations;
        assert!(v.contains(&Violation::InversionFixesNonLoop("e1".into())));
        assert!(v.contains(&Violation::InversionFixesNonLoop("e2".into())));
    }

    #[test]
    fn empty_bundle_is_zero() {
        let g = graph(r#"{"vertices":["a","b"],"edges":[{"id":"e","src":"a","tgt":"b"}]}"#);
        assert_eq!(g.adjacency_matrix().entries, vec![vec![0, 1], vec![0, 0]]);
    }

    #[test]
    fn mixed_bundles_give_two_components() {
        let g = graph(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"b","tgt":"a"},{"id":"e3","src":"b","tgt":"a"}]}"#,
        );
        let comps = g.uniform_decompose();
        assert_eq!(comps.iter().map(|c| c.degree).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(comps[0].edges, vec![0]);
        assert_eq!(comps[1].edges, vec![1, 2]);
        assert_eq!(comps[1].sources, vec![1]);
        assert_eq!(comps[1].targets, vec![0]);
    }

    #[test]
    fn undirected_labels_follow_inversion() {
        let g = graph(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"b","tgt":"a"}],"inversion":[["e1","e2"]]}"#,
        );
        let rep = g.canonical_edge_representation().unwrap();
        assert_eq!(rep.label(0), (0, 1, 1));
        assert_eq!(rep.label(1), (1, 0, 1));
    }

    #[test]
    fn underlying_undirected_of_single_edge() {
        let g = graph(r#"{"vertices":["a","b"],"edges":[{"id":"e","src":"a","tgt":"b"}]}"#);
        let u = g.underlying_undirected_multigraph().unwrap();
        assert_eq!(u.edges.len(), 2);
        assert_eq!(u.inversion, Some(vec![["e".to_string(), "e~".to_string()]]));
        assert!(u.validate().is_valid());
    }

    #[test]
    fn fresh_ids_avoid_collisions() {
        let g = graph(
            r#"{"vertices":["a","b"],"edges":[{"id":"e","src":"a","tgt":"b"},{"id":"e~","src":"a","tgt":"b"}]}"#,
        );
        let u = g.underlying_undirected_multigraph().unwrap();
        let ids: BTreeSet<_> = u.edges.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids.len(), 4);
        assert!(Graph::new(u).is_ok());
    }

    #[test]
    fn loop_class_is_singleton() {
        let g = graph(r#"{"vertices":["a"],"edges":[{"id":"l","src":"a","tgt":"a"}],"inversion":[]}"#);
        assert_eq!(g.undirected_edge_classes().unwrap(), vec![vec![0]]);
        let g = graph(r#"{"vertices":["a"],"edges":[{"id":"l","src":"a","tgt":"a"}]}"#);
        assert!(g.undirected_edge_classes().is_err());
    }

    #[test]
    fn single_loop_bundle_has_singleton_path_class() {
        let g = graph(r#"{"vertices":["a"],"edges":[{"id":"l","src":"a","tgt":"a"}]}"#);
        let c = &g.uniform_decompose()[0];
        assert_eq!(g.path_classes(c), vec![vec![0]]);
    }

    #[test]
    fn directed_path_classes_are_strong_components() {
        let g = graph(
            r#"{"vertices":["a","b","c"],"edges":[{"id":"1","src":"a","tgt":"b"},{"id":"2","src":"b","tgt":"a"},{"id":"3","src":"b","tgt":"c"}]}"#,
        );
        let c = &g.uniform_decompose()[0];
        assert_eq!(g.path_classes(c), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn bad_override_is_rejected() {
        let g = graph(
            r#"{"vertices":["a","b"],"edges":[{"id":"e1","src":"a","tgt":"b"},{"id":"e2","src":"a","tgt":"b"}]}"#,
        );
        let map = BTreeMap::from([("e1".to_string(), 1), ("e2".to_string(), 1)]);
        assert!(EdgeRepresentation::from_assignment(&g, &map).is_err());
        let map = BTreeMap::from([("e1".to_string(), 2), ("e2".to_string(), 1)]);
        let rep = EdgeRepresentation::from_assignment(&g, &map).unwrap();
        assert_eq!(rep.edge_at(0, 1, 1), Some(1));
    }
}
