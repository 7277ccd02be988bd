//! Classical points of a presentation: Boolean commutative solutions, found by
//! generating structured candidates and checking every relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::aut::{vertex_symmetries, AutomorphismGroup, MultigraphAutomorphism};
use crate::error::EnumerationError;
use crate::graph::Graph;
use crate::ncpoly::{CompiledSystem, Family, Generator};
use crate::perm::{self, Perm};
use crate::presentation::{Kind, Presentation};

pub const DEFAULT_CANDIDATE_LIMIT: u128 = 10_000_000;
pub const CANDIDATE_LIMIT_ENV: &str = "MGQ_MAX_CANDIDATES";

/// The candidate limit, honouring the environment override.
pub fn candidate_limit() -> u128 {
    std::env::var(CANDIDATE_LIMIT_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CANDIDATE_LIMIT)
}

/// A 0/1 assignment to every generator of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassicalPoint {
    pub assignment: BTreeMap<Generator, bool>,
}

impl ClassicalPoint {
    pub fn value(&self, g: &Generator) -> Option<bool> {
        self.assignment.get(g).copied()
    }

    /// Generators set to 1.
    pub fn support(&self) -> impl Iterator<Item = &Generator> {
        self.assignment.iter().filter(|(_, &v)| v).map(|(g, _)| g)
    }

    pub fn to_json(&self) -> Value {
        json!(self.support().map(ToString::to_string).collect::<Vec<_>>())
    }
}

/// A square block of generators that classically becomes a permutation matrix:
/// entry [s][r] is 1 iff the permutation sends r to s.
struct PermBlock {
    entries: Vec<Vec<Generator>>,
}

fn bundle_blocks(p: &Presentation) -> Vec<PermBlock> {
    let mut groups: BTreeMap<(Family, Vec<String>), BTreeMap<(usize, usize), Generator>> = BTreeMap::new();
    for gen in &p.generators {
        let idx = gen.indices();
        let (key, pos) = match gen.family() {
            // gamma/nu (m, k, s, r): row s, column r.
            Family::Gamma | Family::Nu => ((gen.family(), idx[..2].to_vec()), (idx[2].clone(), idx[3].clone())),
            // P (i, j, r, s) is P^{(i,j)r}_s: row r, column s.
            Family::P => ((gen.family(), idx[..2].to_vec()), (idx[2].clone(), idx[3].clone())),
            _ => continue,
        };
        let row: usize = pos.0.parse().expect("numeric bundle index");
        let col: usize = pos.1.parse().expect("numeric bundle index");
        groups.entry(key).or_default().insert((row, col), gen.clone());
    }
    groups
        .into_values()
        .map(|cells| {
            let m = cells.keys().map(|k| k.0).max().unwrap_or(0);
            let entries = (1..=m).map(|s| (1..=m).map(|r| cells[&(s, r)].clone()).collect()).collect();
            PermBlock { entries }
        })
        .collect()
}

pub fn classical_points(p: &Presentation, g: &Graph) -> Result<Vec<ClassicalPoint>, EnumerationError> {
    classical_points_with_limit(p, g, candidate_limit())
}

pub fn classical_points_with_limit(
    p: &Presentation,
    g: &Graph,
    limit: u128,
) -> Result<Vec<ClassicalPoint>, EnumerationError> {
    let system = CompiledSystem::new(p.relations.iter().map(|r| &r.relation));
    let position = |gen: &Generator| system.position(gen);
    let mut values = vec![false; system.symbols().len()];
    let mut found = BTreeSet::new();
    let mut check = |ones: &[Generator], found: &mut BTreeSet<ClassicalPoint>| {
        values.iter_mut().for_each(|v| *v = false);
        let set: Vec<usize> = ones.iter().filter_map(position).collect();
        for &i in &set {
            values[i] = true;
        }
        if system.all_hold_boolean_sparse(&values, &set) {
            let on: BTreeSet<&Generator> = ones.iter().collect();
            let assignment = p.generators.iter().map(|x| (x.clone(), on.contains(x))).collect();
            found.insert(ClassicalPoint { assignment });
        }
    };

    if p.kind.uses_edge_generators() {
        let rep = g.canonical_edge_representation().expect("valid graph");
        let syms = vertex_symmetries(&g.adjacency_matrix());
        let bundles: Vec<(usize, usize)> = rep.bundles().keys().copied().collect();
        let choices: Vec<Vec<Perm>> = bundles.iter().map(|&(k, l)| perm::all(rep.bundle_size(k, l))).collect();
        let count = syms.len() as u128 * choices.iter().map(|c| c.len() as u128).product::<u128>();
        guard(count, limit)?;
        for f_v in &syms {
            for_each_choice(&choices, |picked| {
                let gammas = bundles.iter().copied().zip(picked.iter().map(|p| (*p).clone())).collect();
                let a = MultigraphAutomorphism { f_v: f_v.clone(), gammas };
                let f_e = a.edge_map(&rep);
                let ones: Vec<Generator> = (0..g.edge_count())
                    .map(|t| Generator::u(g.edge_id(f_e[t]), g.edge_id(t)))
                    .collect();
                check(&ones, &mut found);
            });
        }
    } else {
        let n = g.vertex_count();
        let vertex_family = if p.kind == Kind::FreeWreath { Generator::x } else { Generator::q };
        let blocks = bundle_blocks(p);
        let choices: Vec<Vec<Perm>> = blocks.iter().map(|b| perm::all(b.entries.len())).collect();
        let count = perm::factorial(n) * choices.iter().map(|c| c.len() as u128).product::<u128>();
        guard(count, limit)?;
        for f_v in perm::all(n) {
            let vertex_ones: Vec<Generator> =
                (0..n).map(|j| vertex_family(g.vertex_id(f_v[j]), g.vertex_id(j))).collect();
            for_each_choice(&choices, |picked| {
                let mut ones = vertex_ones.clone();
                for (block, pi) in blocks.iter().zip(picked) {
                    for (r, &s) in pi.iter().enumerate() {
                        ones.push(block.entries[s][r].clone());
                    }
                }
                check(&ones, &mut found);
            });
        }
    }
    Ok(found.into_iter().collect())
}

fn guard(count: u128, limit: u128) -> Result<(), EnumerationError> {
    if count > limit {
        Err(EnumerationError::TooManyCandidates { candidates: count, limit })
    } else {
        Ok(())
    }
}

fn for_each_choice<T>(choices: &[Vec<T>], mut f: impl FnMut(&[&T])) {
    if choices.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let picked: Vec<&T> = idx.iter().zip(choices).map(|(&i, c)| &c[i]).collect();
        f(&picked);
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The 0/1 matrix u^σ_τ of a point: read directly for edge kinds, otherwise
/// obtained by evaluating the canonical coaction formulas.
pub fn edge_matrix(point: &ClassicalPoint, p: &Presentation, g: &Graph) -> Option<Vec<Vec<u8>>> {
    let e = g.edge_count();
    let mut u = vec![vec![0u8; e]; e];
    if p.kind.uses_edge_generators() {
        for s in 0..e {
            for t in 0..e {
                u[s][t] = u8::from(point.value(&Generator::u(g.edge_id(s), g.edge_id(t)))?);
            }
        }
        return Some(u);
    }
    if p.coaction.is_empty() {
        return None;
    }
    for rel in &p.coaction {
        let lhs = rel.relation.lhs.terms();
        let gen = &lhs.first()?.0 .0.first()?.generator;
        let (s, t) = (g.edge_index(&gen.indices()[0])?, g.edge_index(&gen.indices()[1])?);
        let mut total = 0i64;
        for (m, c) in rel.relation.rhs.terms() {
            if m.0.iter().all(|f| point.value(&f.generator) == Some(true)) {
                total += c.re.to_integer();
            }
        }
        u[s][t] = u8::try_from(total).ok().filter(|&v| v <= 1)?;
    }
    Some(u)
}

/// The vertex permutation of a point, from its q (or x) block.
pub fn vertex_map(point: &ClassicalPoint, g: &Graph, family: Family) -> Option<Perm> {
    let n = g.vertex_count();
    let mut f = vec![usize::MAX; n];
    for j in 0..n {
        for i in 0..n {
            let gen = Generator::new(family, vec![g.vertex_id(i).to_string(), g.vertex_id(j).to_string()]).ok()?;
            if point.value(&gen)? {
                if f[j] != usize::MAX {
                    return None;
                }
                f[j] = i;
            }
        }
    }
    f.iter().all(|&x| x != usize::MAX).then_some(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchReport {
    pub points: usize,
    pub group_order: usize,
    pub mismatch: Option<String>,
}

impl MatchReport {
    pub fn matched(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mismatch {
            None => write!(f, "bijection: {} points <-> {} automorphisms", self.points, self.group_order),
            Some(m) => write!(f, "mismatch ({} points, {} automorphisms): {m}", self.points, self.group_order),
        }
    }
}

/// Pairs each point with the automorphism satisfying u^σ_τ = 1 ⇔ f_E(τ) = σ
/// and checks that this is a bijection onto `group`.
pub fn match_against_aut(points: &[ClassicalPoint], group: &AutomorphismGroup, p: &Presentation, g: &Graph) -> MatchReport {
    let rep = g.canonical_edge_representation().expect("valid graph");
    let mut report = MatchReport { points: points.len(), group_order: group.order(), mismatch: None };
    let vertex_only = matches!(p.kind, Kind::SBan | Kind::SBic);
    let targets: BTreeSet<(Perm, Perm)> = if vertex_only {
        group.vertex_parts().into_iter().map(|f| (f, Vec::new())).collect()
    } else {
        group.edge_maps(&rep)
    };
    let mut hit = BTreeSet::new();
    for (n, point) in points.iter().enumerate() {
        let key = if vertex_only {
            vertex_map(point, g, Family::Q).map(|f| (f, Vec::new()))
        } else {
            edge_matrix(point, p, g).and_then(|u| automorphism_of(&u, g))
        };
        let Some(key) = key else {
            report.mismatch = Some(format!("point {n} does not define an automorphism"));
            return report;
        };
        if !targets.contains(&key) {
            report.mismatch = Some(format!("point {n} maps outside the group"));
            return report;
        }
        if !hit.insert(key) {
            report.mismatch = Some(format!("point {n} repeats an automorphism"));
            return report;
        }
    }
    if hit.len() != targets.len() {
        report.mismatch = Some(format!("{} automorphisms have no point", targets.len() - hit.len()));
    }
    report
}

/// (f_V, f_E) from a permutation matrix u with u^σ_τ = 1 ⇔ f_E(τ) = σ.
fn automorphism_of(u: &[Vec<u8>], g: &Graph) -> Option<(Perm, Perm)> {
    let e = g.edge_count();
    let mut f_e = vec![usize::MAX; e];
    for t in 0..e {
        let images: Vec<usize> = (0..e).filter(|&s| u[s][t] == 1).collect();
        if images.len() != 1 {
            return None;
        }
        f_e[t] = images[0];
    }
    let mut f_v = vec![usize::MAX; g.vertex_count()];
    for t in 0..e {
        for (v, w) in [(g.src(t), g.src(f_e[t])), (g.tgt(t), g.tgt(f_e[t]))] {
            if f_v[v] != usize::MAX && f_v[v] != w {
                return None;
            }
            f_v[v] = w;
        }
    }
    let distinct: BTreeSet<usize> = f_e.iter().copied().collect();
    (distinct.len() == e).then_some((f_v, f_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::emit_presentation;

    #[test]
    fn choices_cover_the_product() {
        let mut seen = Vec::new();
        for_each_choice(&[vec![1, 2], vec![3, 4, 5]], |p| seen.push((*p[0], *p[1])));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], (1, 3));
        let mut empty_calls = 0;
        for_each_choice::<u8>(&[], |_| empty_calls += 1);
        assert_eq!(empty_calls, 1);
    }

    #[test]
    fn guard_refuses_large_searches() {
        let g = Graph::from_json(
            r#"{"vertices":["a"],"edges":[{"id":"1","src":"a","tgt":"a"},{"id":"2","src":"a","tgt":"a"},{"id":"3","src":"a","tgt":"a"}]}"#,
        )
        .unwrap();
        let p = emit_presentation(&g, Kind::QBic).unwrap();
        assert!(matches!(classical_points_with_limit(&p, &g, 5), Err(EnumerationError::TooManyCandidates { .. })));
        assert_eq!(classical_points_with_limit(&p, &g, 6).unwrap().len(), 6);
    }
}
