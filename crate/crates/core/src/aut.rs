//! Classical automorphisms of multigraphs, built from a vertex symmetry plus one
//! local permutation per bundle, and a brute-force oracle for cross-checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::AutError;
use crate::graph::{AdjacencyMatrix, EdgeRepresentation, Graph};
use crate::perm::{self, Perm};

/// Which subgroup of G^aut to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    All,
    Source,
    Target,
    Both,
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Flavor::All),
            "source" | "s" => Ok(Flavor::Source),
            "target" | "t" => Ok(Flavor::Target),
            "both" | "st" => Ok(Flavor::Both),
            other => Err(format!("unknown flavor {other}")),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::All => "all",
            Flavor::Source => "source",
            Flavor::Target => "target",
            Flavor::Both => "both",
        })
    }
}

/// Vertex permutations preserving W entrywise, in lexicographic order.
pub fn vertex_symmetries(w: &AdjacencyMatrix) -> Vec<Perm> {
    let n = w.size();
    let w = &w.entries;
    let profile = |i: usize| {
        let mut row: Vec<u64> = w[i].clone();
        let mut col: Vec<u64> = (0..n).map(|j| w[j][i]).collect();
        row.sort_unstable();
        col.sort_unstable();
        (w[i][i], row, col)
    };
    let profiles: Vec<_> = (0..n).map(profile).collect();
    let mut out = Vec::new();
    let mut f = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(
        w: &[Vec<u64>],
        profiles: &[(u64, Vec<u64>, Vec<u64>)],
        f: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Perm>,
    ) {
        let k = f.len();
        if k == w.len() {
            out.push(f.clone());
            return;
        }
        for y in 0..w.len() {
            if used[y] || profiles[y] != profiles[k] {
                continue;
            }
            if (0..k).any(|a| w[f[a]][y] != w[a][k] || w[y][f[a]] != w[k][a]) {
                continue;
            }
            used[y] = true;
            f.push(y);
            rec(w, profiles, f, used, out);
            f.pop();
            used[y] = false;
        }
    }
    rec(w, &profiles, &mut f, &mut used, &mut out);
    out
}

pub fn enumerate_vertex_symmetries(g: &Graph) -> Vec<Perm> {
    vertex_symmetries(&g.adjacency_matrix())
}

/// A vertex permutation together with Γ_{kl} for every nonempty bundle.
///
/// The induced edge map is f_E((k,l)r) = (f(k), f(l))Γ_{kl}(r). Permutations are
/// stored 0-based and printed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultigraphAutomorphism {
    pub f_v: Perm,
    pub gammas: BTreeMap<(usize, usize), Perm>,
}

impl MultigraphAutomorphism {
    pub fn identity(rep: &EdgeRepresentation, vertex_count: usize) -> Self {
        MultigraphAutomorphism {
            f_v: perm::identity(vertex_count),
            gammas: rep.bundles().iter().map(|(&k, b)| (k, perm::identity(b.len()))).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        perm::is_identity(&self.f_v) && self.gammas.values().all(|p| perm::is_identity(p))
    }

    /// The induced edge permutation, indexed by edge position.
    pub fn edge_map(&self, rep: &EdgeRepresentation) -> Perm {
        (0..rep.bundles().values().map(Vec::len).sum())
            .map(|e| {
                let (k, l, r) = rep.label(e);
                let s = self.gammas[&(k, l)][r - 1] + 1;
                rep.edge_at(self.f_v[k], self.f_v[l], s).expect("image bundle exists")
            })
            .collect()
    }

    /// Recovers (f_V, Γ) from an edge bijection; `None` if it is not bundle-compatible.
    pub fn from_edge_map(g: &Graph, rep: &EdgeRepresentation, f_v: &[usize], f_e: &[usize]) -> Option<Self> {
        let mut gammas = BTreeMap::new();
        for (&(k, l), bundle) in rep.bundles() {
            let mut gamma = Vec::with_capacity(bundle.len());
            for &e in bundle {
                let img = f_e[e];
                let (k2, l2, s) = rep.label(img);
                if (k2, l2) != (f_v[k], f_v[l]) || g.src(img) != k2 {
                    return None;
                }
                gamma.push(s - 1);
            }
            gammas.insert((k, l), gamma);
        }
        Some(MultigraphAutomorphism { f_v: f_v.to_vec(), gammas })
    }

    /// Whether Γ is constant on every class of `classes`.
    pub fn respects(&self, classes: &[Vec<(usize, usize)>]) -> bool {
        classes.iter().all(|c| c.iter().all(|b| self.gammas[b] == self.gammas[&c[0]]))
    }

    pub fn to_json(&self, g: &Graph) -> Value {
        let f_v: Map<String, Value> = self
            .f_v
            .iter()
            .enumerate()
            .map(|(i, &j)| (g.vertex_id(i).to_string(), json!(g.vertex_id(j))))
            .collect();
        let gammas: Map<String, Value> = self
            .gammas
            .iter()
            .map(|(&(k, l), p)| {
                let one_based: Vec<usize> = p.iter().map(|x| x + 1).collect();
                (format!("({},{})", g.vertex_id(k), g.vertex_id(l)), json!(one_based))
            })
            .collect();
        json!({ "f_V": f_v, "gammas": gammas })
    }
}

/// `a1 ∘ a2` (apply `a2` first).
pub fn compose(a1: &MultigraphAutomorphism, a2: &MultigraphAutomorphism) -> Result<MultigraphAutomorphism, AutError> {
    check_same_shape(a1, a2)?;
    let f2 = &a2.f_v;
    let mut gammas = BTreeMap::new();
    for (&(k, l), g2) in &a2.gammas {
        let g1 = a1.gammas.get(&(f2[k], f2[l])).ok_or(AutError::GraphMismatch)?;
        if g1.len() != g2.len() {
            return Err(AutError::GraphMismatch);
        }
        gammas.insert((k, l), perm::compose(g1, g2));
    }
    Ok(MultigraphAutomorphism { f_v: perm::compose(&a1.f_v, f2), gammas })
}

pub fn invert(a: &MultigraphAutomorphism) -> Result<MultigraphAutomorphism, AutError> {
    let finv = perm::inverse(&a.f_v);
    let mut gammas = BTreeMap::new();
    for &(k, l) in a.gammas.keys() {
        let pre = a.gammas.get(&(finv[k], finv[l])).ok_or(AutError::GraphMismatch)?;
        gammas.insert((k, l), perm::inverse(pre));
    }
    Ok(MultigraphAutomorphism { f_v: finv, gammas })
}

fn check_same_shape(a1: &MultigraphAutomorphism, a2: &MultigraphAutomorphism) -> Result<(), AutError> {
    let same = a1.f_v.len() == a2.f_v.len()
        && a1.gammas.len() == a2.gammas.len()
        && a1.gammas.iter().zip(&a2.gammas).all(|((k1, p1), (k2, p2))| k1 == k2 && p1.len() == p2.len());
    if same {
        Ok(())
    } else {
        Err(AutError::GraphMismatch)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismGroup {
    pub elements: Vec<MultigraphAutomorphism>,
}

impl AutomorphismGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains_identity(&self) -> bool {
        self.elements.iter().any(MultigraphAutomorphism::is_identity)
    }

    /// The set of induced (vertex, edge) permutation pairs.
    pub fn edge_maps(&self, rep: &EdgeRepresentation) -> BTreeSet<(Perm, Perm)> {
        self.elements.iter().map(|a| (a.f_v.clone(), a.edge_map(rep))).collect()
    }

    /// Checks closure under composition and inverses.
    pub fn is_closed(&self) -> bool {
        let set: BTreeSet<&MultigraphAutomorphism> = self.elements.iter().collect();
        self.elements.iter().all(|a| {
            invert(a).is_ok_and(|i| set.contains(&i))
                && self.elements.iter().all(|b| compose(a, b).is_ok_and(|c| set.contains(&c)))
        })
    }

    pub fn vertex_parts(&self) -> BTreeSet<Perm> {
        self.elements.iter().map(|a| a.f_v.clone()).collect()
    }
}

/// Bundle classes on which Γ must be constant for the given flavor.
pub fn gamma_classes(g: &Graph, rep: &EdgeRepresentation, flavor: Flavor) -> Vec<Vec<(usize, usize)>> {
    let keys: Vec<(usize, usize)> = rep.bundles().keys().copied().collect();
    let pos: BTreeMap<(usize, usize), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut parent: Vec<usize> = (0..keys.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    if g.is_undirected() {
        for (&(k, l), &i) in &pos {
            union(i, pos[&(l, k)]);
        }
    }
    let size = |k: &(usize, usize)| rep.bundle_size(k.0, k.1);
    for (a, ka) in keys.iter().enumerate() {
        for (b, kb) in keys.iter().enumerate().skip(a + 1) {
            if size(ka) != size(kb) {
                continue;
            }
            let by_source = matches!(flavor, Flavor::Source | Flavor::Both) && ka.0 == kb.0;
            let by_target = matches!(flavor, Flavor::Target | Flavor::Both) && ka.1 == kb.1;
            if by_source || by_target {
                union(a, b);
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, &k) in keys.iter().enumerate() {
        let root = find(&mut parent, i);
        classes.entry(root).or_default().push(k);
    }
    classes.into_values().collect()
}

pub fn enumerate_automorphisms(g: &Graph, flavor: Flavor) -> AutomorphismGroup {
    let rep = g.canonical_edge_representation().expect("valid graphs have a canonical representation");
    enumerate_automorphisms_with(g, &rep, flavor)
}

/// Enumeration relative to an explicit edge representation.
pub fn enumerate_automorphisms_with(g: &Graph, rep: &EdgeRepresentation, flavor: Flavor) -> AutomorphismGroup {
    let classes = gamma_classes(g, rep, flavor);
    let choices: Vec<Vec<Perm>> = classes.iter().map(|c| perm::all(rep.bundle_size(c[0].0, c[0].1))).collect();
    let mut elements = Vec::new();
    for f_v in enumerate_vertex_symmetries(g) {
        let mut idx = vec![0usize; classes.len()];
        loop {
            let mut gammas = BTreeMap::new();
            for (c, class) in classes.iter().enumerate() {
                for &b in class {
                    gammas.insert(b, choices[c][idx[c]].clone());
                }
            }
            elements.push(MultigraphAutomorphism { f_v: f_v.clone(), gammas });
            if !advance(&mut idx, &choices) {
                break;
            }
        }
    }
    elements.sort();
    AutomorphismGroup { elements }
}

fn advance<T>(idx: &mut [usize], choices: &[Vec<T>]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < choices[pos].len() {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// Whether `a` lies in the subgroup of the given flavor.
pub fn has_flavor(g: &Graph, rep: &EdgeRepresentation, a: &MultigraphAutomorphism, flavor: Flavor) -> bool {
    a.respects(&gamma_classes(g, rep, flavor))
}

/// The group order predicted by the factorization: vertex symmetries times the
/// bundle factorials (counted once per j-orbit of bundles when undirected).
pub fn predicted_order(g: &Graph) -> u128 {
    let w = g.adjacency_matrix().entries;
    let syms = enumerate_vertex_symmetries(g).len() as u128;
    let mut product = 1u128;
    for (k, row) in w.iter().enumerate() {
        for (l, &c) in row.iter().enumerate() {
            if c == 0 || (g.is_undirected() && l < k) {
                continue;
            }
            product *= perm::factorial(c as usize);
        }
    }
    syms * product
}

pub const ORACLE_EDGE_LIMIT: usize = 8;

/// Enumerates automorphisms straight from the definition: every vertex
/// permutation, every compatible edge bijection, j-equivariance when undirected.
pub fn brute_force_oracle(g: &Graph) -> Result<AutomorphismGroup, AutError> {
    brute_force_oracle_with_limit(g, ORACLE_EDGE_LIMIT)
}

pub fn brute_force_oracle_with_limit(g: &Graph, limit: usize) -> Result<AutomorphismGroup, AutError> {
    let m = g.edge_count();
    if m > limit {
        return Err(AutError::TooLarge { edges: m, limit });
    }
    let rep = g.canonical_edge_representation().map_err(|_| AutError::GraphMismatch)?;
    let mut elements = Vec::new();
    for f_v in perm::all(g.vertex_count()) {
        let mut f_e = vec![usize::MAX; m];
        let mut used = vec![false; m];
        edge_search(g, &f_v, 0, &mut f_e, &mut used, &mut |f_e| {
            let a = MultigraphAutomorphism::from_edge_map(g, &rep, &f_v, f_e)
                .expect("definition-level automorphisms preserve bundles");
            elements.push(a);
        });
    }
    elements.sort();
    Ok(AutomorphismGroup { elements })
}

fn edge_search(
    g: &Graph,
    f_v: &[usize],
    e: usize,
    f_e: &mut Vec<usize>,
    used: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if e == g.edge_count() {
        emit(f_e);
        return;
    }
    for img in 0..g.edge_count() {
        if used[img] || g.src(img) != f_v[g.src(e)] || g.tgt(img) != f_v[g.tgt(e)] {
            continue;
        }
        if let Some(je) = g.inversion(e) {
            let jimg = g.inversion(img).expect("undirected");
            if je < e && f_e[je] != jimg {
                continue;
            }
            if je == e && jimg != img {
                continue;
            }
        }
        used[img] = true;
        f_e[e] = img;
        edge_search(g, f_v, e + 1, f_e, used, emit);
        f_e[e] = usize::MAX;
        used[img] = false;
    }
}
