//! Generator/relation presentations of the quantum automorphism groups of a
//! multigraph, with coproduct tables and canonical coaction formulas.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num::One;
use serde_json::{json, Map, Value};

use crate::error::PresentationError;
use crate::graph::{Graph, UniformComponent};
use crate::ncpoly::{coeff, monomial_to_json, Coeff, Factor, Generator, Monomial, Poly, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    QBan,
    QBic,
    QSym,
    QBicUndirected,
    QS,
    QT,
    QST,
    QSTUndirected,
    SBan,
    SBic,
    FreeWreath,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::QBan,
        Kind::QBic,
        Kind::QSym,
        Kind::QBicUndirected,
        Kind::QS,
        Kind::QT,
        Kind::QST,
        Kind::QSTUndirected,
        Kind::SBan,
        Kind::SBic,
        Kind::FreeWreath,
    ];

    /// Kinds whose generators are the edge symbols u^σ_τ.
    pub fn uses_edge_generators(self) -> bool {
        matches!(self, Kind::QBan | Kind::QBic | Kind::QSym | Kind::QBicUndirected)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::QBan => "QBan",
            Kind::QBic => "QBic",
            Kind::QSym => "QSym",
            Kind::QBicUndirected => "QBicUndirected",
            Kind::QS => "QS",
            Kind::QT => "QT",
            Kind::QST => "QST",
            Kind::QSTUndirected => "QSTUndirected",
            Kind::SBan => "SBan",
            Kind::SBic => "SBic",
            Kind::FreeWreath => "FreeWreath",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Kind::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase() == key || (key == "wreath" && *k == Kind::FreeWreath))
            .ok_or_else(|| PresentationError::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedRelation {
    pub relation: Relation,
    pub notes: Vec<String>,
}

/// One summand a ⊗ b of a coproduct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoproductTerm {
    pub coeff: Coeff,
    pub left: Monomial,
    pub right: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub kind: Kind,
    pub generators: Vec<Generator>,
    pub relations: Vec<PresentedRelation>,
    /// Formulas expressing the edge coefficients u^σ_τ of the canonical
    /// coaction through the generators (empty for edge-generator kinds).
    pub coaction: Vec<PresentedRelation>,
    coproduct: Vec<(Generator, Vec<CoproductTerm>)>,
}

impl Presentation {
    pub fn coproduct_table(&self) -> &[(Generator, Vec<CoproductTerm>)] {
        &self.coproduct
    }

    /// Relations carrying a note that starts with `prefix`.
    pub fn relations_noted(&self, prefix: &str) -> Vec<&PresentedRelation> {
        self.relations.iter().filter(|r| r.notes.iter().any(|n| n.starts_with(prefix))).collect()
    }

    pub fn to_json(&self) -> Value {
        let rel = |r: &PresentedRelation| json!({ "relation": r.relation.to_json(), "notes": r.notes });
        let coproduct: Map<String, Value> = self
            .coproduct
            .iter()
            .map(|(g, terms)| {
                let terms: Vec<Value> = terms
                    .iter()
                    .map(|t| {
                        json!([
                            [format!("{}/{}", t.coeff.re.numer(), t.coeff.re.denom()), format!("{}/{}", t.coeff.im.numer(), t.coeff.im.denom())],
                            monomial_to_json(&t.left),
                            monomial_to_json(&t.right)
                        ])
                    })
                    .collect();
                (g.to_string(), Value::Array(terms))
            })
            .collect();
        json!({
            "kind": self.kind.name(),
            "generators": self.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(rel).collect::<Vec<_>>(),
            "coaction": self.coaction.iter().map(rel).collect::<Vec<_>>(),
            "coproduct": coproduct,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "kind {}\ngenerators {}\nrelations {}\n",
            self.kind,
            self.generators.len(),
            self.relations.len()
        );
        for r in &self.relations {
            out.push_str(&format!("[{}] {}\n", r.notes.join("; "), r.relation));
        }
        if !self.coaction.is_empty() {
            out.push_str("coaction\n");
            for r in &self.coaction {
                out.push_str(&format!("{}\n", r.relation));
            }
        }
        out.push_str("coproduct\n");
        for (g, terms) in &self.coproduct {
            let body: Vec<String> = terms
                .iter()
                .map(|t| {
                    let c = if t.coeff.is_one() { String::new() } else { format!("{} ", t.coeff) };
                    format!("{c}{} (x) {}", t.left, t.right)
                })
                .collect();
            out.push_str(&format!("Delta({g}) = {}\n", body.join(" + ")));
        }
        out
    }
}

/// Accumulates relations, merging syntactic duplicates and their notes.
#[derive(Default)]
struct RelSet {
    list: Vec<PresentedRelation>,
    seen: HashMap<Relation, usize>,
}

impl RelSet {
    fn add(&mut self, relation: Relation, note: &str) {
        if relation.lhs == relation.rhs {
            return;
        }
        match self.seen.get(&relation) {
            Some(&i) => {
                let notes = &mut self.list[i].notes;
                if !notes.iter().any(|n| n == note) {
                    notes.push(note.to_string());
                }
            }
            None => {
                self.seen.insert(relation.clone(), self.list.len());
                self.list.push(PresentedRelation { relation, notes: vec![note.to_string()] });
            }
        }
    }

    /// ab = ba, written with the smaller product on the left.
    fn commute(&mut self, a: &Monomial, b: &Monomial, note: &str) {
        let (ab, ba) = (a.times(b), b.times(a));
        let (l, r) = if ab <= ba { (ab, ba) } else { (ba, ab) };
        self.add(Relation::new(Poly::monomial(l), Poly::monomial(r)), note);
    }

    /// Projection relations plus unit row and column sums for a square matrix of generators.
    fn quantum_permutation(&mut self, m: &[Vec<Generator>], note: &str) {
        for row in m {
            for p in row {
                self.add(Relation::new(Poly::gen(p.clone()), Poly::star(p.clone())), note);
                self.add(Relation::new(Poly::monomial(prod(&[p, p])), Poly::gen(p.clone())), note);
            }
            self.add(Relation::new(Poly::sum(row.iter().cloned().map(Monomial::of)), Poly::one()), note);
        }
        for j in 0..m.len() {
            self.add(Relation::new(Poly::sum(m.iter().map(|row| Monomial::of(row[j].clone()))), Poly::one()), note);
        }
    }

    /// (QW)_{ij} = (WQ)_{ij} for every entry.
    fn commutes_with_weights(&mut self, q: &[Vec<Generator>], w: &[Vec<u64>], note: &str) {
        let n = q.len();
        for i in 0..n {
            for j in 0..n {
                let lhs = Poly::from_terms((0..n).map(|k| (coeff(w[k][j] as i64), Monomial::of(q[i][k].clone()))));
                let rhs = Poly::from_terms((0..n).map(|k| (coeff(w[i][k] as i64), Monomial::of(q[k][j].clone()))));
                self.add(Relation::new(lhs, rhs), note);
            }
        }
    }
}

fn prod(gens: &[&Generator]) -> Monomial {
    Monomial(gens.iter().map(|g| Factor { generator: (*g).clone(), starred: false }).collect())
}

fn gen_star(a: &Generator, a_star: bool, b: &Generator, b_star: bool) -> Monomial {
    Monomial(vec![
        Factor { generator: a.clone(), starred: a_star },
        Factor { generator: b.clone(), starred: b_star },
    ])
}

struct Ctx<'a> {
    g: &'a Graph,
}

impl Ctx<'_> {
    fn u(&self, s: usize, t: usize) -> Generator {
        Generator::u(self.g.edge_id(s), self.g.edge_id(t))
    }

    fn q(&self, i: usize, j: usize) -> Generator {
        Generator::q(self.g.vertex_id(i), self.g.vertex_id(j))
    }

    fn x(&self, i: usize, j: usize) -> Generator {
        Generator::x(self.g.vertex_id(i), self.g.vertex_id(j))
    }

    fn q_matrix(&self) -> Vec<Vec<Generator>> {
        let n = self.g.vertex_count();
        (0..n).map(|i| (0..n).map(|j| self.q(i, j)).collect()).collect()
    }

    fn edges(&self) -> std::ops::Range<usize> {
        0..self.g.edge_count()
    }

    fn sum_u(&self, sigma: usize, taus: &[usize]) -> Poly {
        Poly::sum(taus.iter().map(|&t| Monomial::of(self.u(sigma, t))))
    }

    /// Σ_τ u^{σ1}_τ(*) u^{σ2}_τ(*) with the given star pattern.
    fn sum_pairs(&self, s1: usize, star1: bool, s2: usize, star2: bool, taus: &[usize]) -> Poly {
        Poly::sum(taus.iter().map(|&t| gen_star(&self.u(s1, t), star1, &self.u(s2, t), star2)))
    }
}

fn delta(a: usize, b: usize) -> Poly {
    if a == b {
        Poly::one()
    } else {
        Poly::zero()
    }
}

pub fn emit_presentation(g: &Graph, kind: Kind) -> Result<Presentation, PresentationError> {
    let mismatch = |requirement| Err(PresentationError::KindMismatch { kind: kind.name().to_string(), requirement });
    match kind {
        Kind::QS | Kind::QT | Kind::QST if g.is_undirected() => return mismatch("a directed graph"),
        Kind::QBicUndirected | Kind::QSTUndirected if !g.is_undirected() => return mismatch("an undirected graph"),
        Kind::FreeWreath if g.uniform_decompose().len() != 1 => return mismatch("a uniform graph"),
        _ => {}
    }
    let ctx = Ctx { g };
    let mut rels = RelSet::default();
    let mut coaction = RelSet::default();
    let mut coproduct = Vec::new();
    let generators: Vec<Generator>;
    match kind {
        Kind::QBan | Kind::QSym => {
            banica_relations(&ctx, &mut rels);
            if kind == Kind::QSym {
                restricted_orthogonality(&ctx, &mut rels);
            }
            star_condition(&ctx, &mut rels);
            generators = edge_generators(&ctx);
            coproduct = edge_coproduct(&ctx);
        }
        Kind::QBic | Kind::QBicUndirected => {
            bichon_relations(&ctx, &mut rels);
            star_condition(&ctx, &mut rels);
            generators = edge_generators(&ctx);
            coproduct = edge_coproduct(&ctx);
        }
        Kind::QS | Kind::QT | Kind::QST | Kind::QSTUndirected => {
            rels.quantum_permutation(&ctx.q_matrix(), "vertex quantum permutation");
            rels.commutes_with_weights(&ctx.q_matrix(), &g.adjacency_matrix().entries, "QW = WQ");
            let mut gens: Vec<Generator> = ctx.q_matrix().into_iter().flatten().collect();
            coproduct.extend(matrix_coproduct(&ctx.q_matrix()));
            for comp in g.uniform_decompose() {
                bundle_family(&ctx, kind, &comp, &mut rels, &mut coaction, &mut gens, &mut coproduct);
            }
            cross_component_vanishing(&ctx, &mut coaction);
            generators = gens;
        }
        Kind::SBan | Kind::SBic => {
            let w = g.adjacency_matrix().support();
            rels.quantum_permutation(&ctx.q_matrix(), "vertex quantum permutation");
            rels.commutes_with_weights(&ctx.q_matrix(), &w.entries, "QW = WQ on the simple graph");
            if kind == Kind::SBic {
                arc_commutation(&ctx, &mut rels, |i, j| ctx.q(i, j), "entries over arcs commute");
            }
            generators = ctx.q_matrix().into_iter().flatten().collect();
            coproduct = matrix_coproduct(&ctx.q_matrix());
        }
        Kind::FreeWreath => {
            generators = free_wreath(&ctx, &mut rels, &mut coaction, &mut coproduct);
        }
    }
    Ok(Presentation { kind, generators, relations: rels.list, coaction: coaction.list, coproduct })
}

fn edge_generators(ctx: &Ctx) -> Vec<Generator> {
    ctx.edges().flat_map(|s| ctx.edges().map(move |t| (s, t))).map(|(s, t)| ctx.u(s, t)).collect()
}

fn matrix_coproduct(m: &[Vec<Generator>]) -> Vec<(Generator, Vec<CoproductTerm>)> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let terms = (0..n)
                .map(|k| CoproductTerm { coeff: Coeff::one(), left: Monomial::of(m[i][k].clone()), right: Monomial::of(m[k][j].clone()) })
                .collect();
            out.push((m[i][j].clone(), terms));
        }
    }
    out
}

fn edge_coproduct(ctx: &Ctx) -> Vec<(Generator, Vec<CoproductTerm>)> {
    let e = ctx.g.edge_count();
    let m: Vec<Vec<Generator>> = (0..e).map(|s| (0..e).map(|t| ctx.u(s, t)).collect()).collect();
    matrix_coproduct(&m)
}

fn vanishing(ctx: &Ctx, rels: &mut RelSet, note: &str) {
    let g = ctx.g;
    let (vs, vt) = (g.sources(), g.targets());
    let pure_s: Vec<usize> = vs.difference(&vt).copied().collect();
    let pure_t: Vec<usize> = vt.difference(&vs).copied().collect();
    let both: Vec<usize> = vs.intersection(&vt).copied().collect();
    for &k in &both {
        for &i in &pure_s {
            for s1 in g.out_edges(i) {
                for t1 in g.out_edges(k) {
                    rels.add(Relation::new(Poly::gen(ctx.u(s1, t1)), Poly::zero()), note);
                }
            }
        }
        for &j in &pure_t {
            for s2 in g.in_edges(j) {
                for t2 in g.in_edges(k) {
                    rels.add(Relation::new(Poly::gen(ctx.u(s2, t2)), Poly::zero()), note);
                }
            }
        }
    }
}

fn banica_relations(ctx: &Ctx, rels: &mut RelSet) {
    let g = ctx.g;
    let all: Vec<usize> = ctx.edges().collect();
    for s1 in ctx.edges() {
        for s2 in ctx.edges() {
            let d = delta(s1, s2);
            rels.add(Relation::new(ctx.sum_pairs(s1, false, s2, true, &all), d.clone()), "U unitary");
            let col = Poly::sum(all.iter().map(|&t| gen_star(&ctx.u(t, s1), true, &ctx.u(t, s2), false)));
            rels.add(Relation::new(col, d.clone()), "U unitary");
            rels.add(Relation::new(ctx.sum_pairs(s1, true, s2, false, &all), d.clone()), "conjugate of U unitary");
            let col = Poly::sum(all.iter().map(|&t| gen_star(&ctx.u(t, s1), false, &ctx.u(t, s2), true)));
            rels.add(Relation::new(col, d), "conjugate of U unitary");
        }
    }
    for s in ctx.edges() {
        rels.add(Relation::new(ctx.sum_u(s, &all), Poly::one()), "row sum");
    }
    for k in g.sources() {
        let ek = g.out_edges(k);
        for s1 in ctx.edges() {
            for s2 in ctx.edges() {
                if s1 != s2 {
                    rels.add(Relation::new(ctx.sum_pairs(s1, false, s2, true, &ek), Poly::zero()), "source-block orthogonality");
                    if g.src(s1) == g.src(s2) {
                        rels.add(
                            Relation::new(ctx.sum_pairs(s1, false, s1, true, &ek), ctx.sum_pairs(s2, false, s2, true, &ek)),
                            "source-block agreement",
                        );
                    }
                }
            }
        }
    }
    for l in g.targets() {
        let el = g.in_edges(l);
        for s1 in ctx.edges() {
            for s2 in ctx.edges() {
                if s1 != s2 {
                    rels.add(Relation::new(ctx.sum_pairs(s1, true, s2, false, &el), Poly::zero()), "target-block orthogonality");
                    if g.tgt(s1) == g.tgt(s2) {
                        rels.add(
                            Relation::new(ctx.sum_pairs(s1, true, s1, false, &el), ctx.sum_pairs(s2, true, s2, false, &el)),
                            "target-block agreement",
                        );
                    }
                }
            }
        }
    }
    vanishing(ctx, rels, "pure source/target vanishing");
    let both: Vec<usize> = g.sources().intersection(&g.targets()).copied().collect();
    for &i in &both {
        for &k in &both {
            let (ek, e_k) = (g.out_edges(k), g.in_edges(k));
            for s1 in g.out_edges(i) {
                for s2 in g.in_edges(i) {
                    rels.add(
                        Relation::new(ctx.sum_pairs(s1, false, s1, true, &ek), ctx.sum_pairs(s2, true, s2, false, &e_k)),
                        "source/target block agreement",
                    );
                }
            }
        }
    }
}

fn restricted_orthogonality(ctx: &Ctx, rels: &mut RelSet) {
    let g = ctx.g;
    // Only distinct parallel edges: for σ1 = σ2 the relation would force u = 0.
    for s1 in ctx.edges() {
        for s2 in ctx.edges() {
            if s1 == s2 || (g.src(s1), g.tgt(s1)) != (g.src(s2), g.tgt(s2)) {
                continue;
            }
            for t in ctx.edges() {
                let a = gen_star(&ctx.u(s1, t), false, &ctx.u(s2, t), true);
                let b = gen_star(&ctx.u(s1, t), true, &ctx.u(s2, t), false);
                rels.add(Relation::new(Poly::monomial(a), Poly::zero()), "restricted orthogonality (distinct parallel edges)");
                rels.add(Relation::new(Poly::monomial(b), Poly::zero()), "restricted orthogonality (distinct parallel edges)");
            }
        }
    }
}

fn bichon_relations(ctx: &Ctx, rels: &mut RelSet) {
    let g = ctx.g;
    let all: Vec<usize> = ctx.edges().collect();
    for s in ctx.edges() {
        for t in ctx.edges() {
            let u = ctx.u(s, t);
            rels.add(Relation::new(Poly::gen(u.clone()), Poly::star(u.clone())), "self-adjoint");
            rels.add(Relation::new(Poly::monomial(prod(&[&u, &u])), Poly::gen(u)), "idempotent");
        }
    }
    for s in ctx.edges() {
        rels.add(Relation::new(ctx.sum_u(s, &all), Poly::one()), "row sum");
        rels.add(Relation::new(Poly::sum(all.iter().map(|&t| Monomial::of(ctx.u(t, s)))), Poly::one()), "column sum");
    }
    for k in g.sources() {
        let ek = g.out_edges(k);
        for s1 in ctx.edges() {
            for s2 in (s1 + 1)..g.edge_count() {
                if g.src(s1) == g.src(s2) {
                    rels.add(Relation::new(ctx.sum_u(s1, &ek), ctx.sum_u(s2, &ek)), "source-block sums agree");
                }
            }
        }
    }
    for l in g.targets() {
        let el = g.in_edges(l);
        for s1 in ctx.edges() {
            for s2 in (s1 + 1)..g.edge_count() {
                if g.tgt(s1) == g.tgt(s2) {
                    rels.add(Relation::new(ctx.sum_u(s1, &el), ctx.sum_u(s2, &el)), "target-block sums agree");
                }
            }
        }
    }
    vanishing(ctx, rels, "pure source/target vanishing");
    let both: Vec<usize> = g.sources().intersection(&g.targets()).copied().collect();
    for &i in &both {
        for &k in &both {
            for s1 in g.out_edges(i) {
                for s2 in g.in_edges(i) {
                    rels.add(
                        Relation::new(ctx.sum_u(s1, &g.out_edges(k)), ctx.sum_u(s2, &g.in_edges(k))),
                        "source/target block sums agree",
                    );
                }
            }
        }
    }
}

/// u^σ_τ = (u^{j(σ)}_{j(τ)})* on undirected graphs; nothing otherwise.
fn star_condition(ctx: &Ctx, rels: &mut RelSet) {
    let g = ctx.g;
    if !g.is_undirected() {
        return;
    }
    for s in ctx.edges() {
        for t in ctx.edges() {
            let (js, jt) = (g.inversion(s).unwrap(), g.inversion(t).unwrap());
            rels.add(Relation::new(Poly::gen(ctx.u(s, t)), Poly::star(ctx.u(js, jt))), "inversion compatibility");
        }
    }
}

fn gamma_matrix(ctx: &Ctx, kind: Kind, m: usize, k: usize) -> Vec<Vec<Generator>> {
    let id = ctx.g.vertex_id(k);
    (1..=m)
        .map(|s| (1..=m).map(|r| if kind == Kind::QT { Generator::nu(m, id, s, r) } else { Generator::gamma(m, id, s, r) }).collect())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn bundle_family(
    ctx: &Ctx,
    kind: Kind,
    comp: &UniformComponent,
    rels: &mut RelSet,
    coaction: &mut RelSet,
    gens: &mut Vec<Generator>,
    coproduct: &mut Vec<(Generator, Vec<CoproductTerm>)>,
) {
    let g = ctx.g;
    let m = comp.degree;
    // Vertices carrying a family, and the range of k' in the coproduct.
    let carriers: &[usize] = match kind {
        Kind::QT => &comp.targets,
        Kind::QSTUndirected => &comp.vertices,
        _ => &comp.sources,
    };
    let families: BTreeMap<usize, Vec<Vec<Generator>>> =
        carriers.iter().map(|&k| (k, gamma_matrix(ctx, kind, m, k))).collect();
    for (&k, fam) in &families {
        gens.extend(fam.iter().flatten().cloned());
        let note = if kind == Kind::QT { "nu quantum permutation" } else { "gamma quantum permutation" };
        rels.quantum_permutation(fam, note);
        for s in 0..m {
            for r in 0..m {
                let terms = (0..m)
                    .flat_map(|s2| carriers.iter().map(move |&k2| (s2, k2)))
                    .map(|(s2, k2)| CoproductTerm {
                        coeff: Coeff::one(),
                        left: prod(&[&fam[s][s2], &ctx.q(k, k2)]),
                        right: Monomial::of(families[&k2][s2][r].clone()),
                    })
                    .collect();
                coproduct.push((fam[s][r].clone(), terms));
            }
        }
    }
    let commute_all = |rels: &mut RelSet, fam: &[Vec<Generator>], q: Generator, note: &str| {
        for p in fam.iter().flatten() {
            rels.commute(&Monomial::of(p.clone()), &Monomial::of(q.clone()), note);
        }
    };
    match kind {
        Kind::QS => {
            for &k in carriers {
                for &i in &comp.sources {
                    commute_all(rels, &families[&k], ctx.q(k, i), "gamma commutes with q on sources");
                }
            }
        }
        Kind::QT => {
            for &l in carriers {
                for &j in &comp.targets {
                    commute_all(rels, &families[&l], ctx.q(l, j), "nu commutes with q on targets");
                }
            }
        }
        Kind::QST => {
            let arcs: BTreeSet<(usize, usize)> = comp.edges.iter().map(|&e| (g.src(e), g.tgt(e))).collect();
            for &(k1, l) in &arcs {
                for &(k2, l2) in &arcs {
                    if l2 == l && k1 < k2 {
                        equate(rels, &families[&k1], &families[&k2], "gamma agrees on sources sharing a target");
                    }
                }
                for &i in &comp.sources {
                    commute_all(rels, &families[&k1], ctx.q(k1, i), "gamma commutes with q on sources");
                }
                for &j in &comp.targets {
                    commute_all(rels, &families[&k1], ctx.q(l, j), "gamma commutes with q on targets");
                }
            }
        }
        Kind::QSTUndirected => {
            for class in g.path_classes(comp) {
                for w in class.windows(2) {
                    equate(rels, &families[&w[0]], &families[&w[1]], "gamma constant along paths");
                }
            }
            for &k in carriers {
                for &i in &comp.vertices {
                    commute_all(rels, &families[&k], ctx.q(k, i), "gamma commutes with q");
                }
            }
        }
        _ => unreachable!("bundle families exist only for QS, QT, QST and QSTUndirected"),
    }
    let rep = g.canonical_edge_representation().expect("valid graph");
    for &tau in &comp.edges {
        let (i, j, r) = rep.label(tau);
        for &sigma in &comp.edges {
            let (k, l, s) = rep.label(sigma);
            let (qk, ql) = (ctx.q(k, i), ctx.q(l, j));
            let rhs = match kind {
                Kind::QS => prod(&[&families[&k][s - 1][r - 1], &qk, &ql]),
                Kind::QT => prod(&[&qk, &ql, &families[&l][s - 1][r - 1]]),
                _ => prod(&[&qk, &ql, &families[&k][s - 1][r - 1]]),
            };
            coaction.add(Relation::new(Poly::gen(ctx.u(sigma, tau)), Poly::monomial(rhs)), "canonical coaction");
        }
    }
}

fn equate(rels: &mut RelSet, a: &[Vec<Generator>], b: &[Vec<Generator>], note: &str) {
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            rels.add(Relation::new(Poly::gen(x.clone()), Poly::gen(y.clone())), note);
        }
    }
}

fn cross_component_vanishing(ctx: &Ctx, coaction: &mut RelSet) {
    let g = ctx.g;
    let w = g.adjacency_matrix().entries;
    let degree = |e: usize| w[g.src(e)][g.tgt(e)];
    for s in ctx.edges() {
        for t in ctx.edges() {
            if degree(s) != degree(t) {
                coaction.add(Relation::new(Poly::gen(ctx.u(s, t)), Poly::zero()), "canonical coaction");
            }
        }
    }
}

/// x^i_k x^j_l = x^j_l x^i_k for arcs (i,j), (k,l) of the simple graph.
fn arc_commutation(ctx: &Ctx, rels: &mut RelSet, entry: impl Fn(usize, usize) -> Generator, note: &str) {
    let arcs: Vec<(usize, usize)> = ctx.g.underlying_weighted_graph().arcs.keys().copied().collect();
    for &(i, j) in &arcs {
        for &(k, l) in &arcs {
            rels.commute(&Monomial::of(entry(i, k)), &Monomial::of(entry(j, l)), note);
        }
    }
}

fn free_wreath(
    ctx: &Ctx,
    rels: &mut RelSet,
    coaction: &mut RelSet,
    coproduct: &mut Vec<(Generator, Vec<CoproductTerm>)>,
) -> Vec<Generator> {
    let g = ctx.g;
    let n = g.vertex_count();
    let m = g.uniform_decompose()[0].degree;
    let arcs: Vec<(usize, usize)> = g.underlying_weighted_graph().arcs.keys().copied().collect();
    let x: Vec<Vec<Generator>> = (0..n).map(|i| (0..n).map(|j| ctx.x(i, j)).collect()).collect();
    rels.quantum_permutation(&x, "x quantum permutation");
    rels.commutes_with_weights(&x, &g.adjacency_matrix().support().entries, "XW = WX on the simple graph");
    arc_commutation(ctx, rels, |i, j| ctx.x(i, j), "x entries over arcs commute");
    let p_of = |i: usize, j: usize| -> Vec<Vec<Generator>> {
        (1..=m).map(|r| (1..=m).map(|s| Generator::p(g.vertex_id(i), g.vertex_id(j), r, s)).collect()).collect()
    };
    let mut gens: Vec<Generator> = x.iter().flatten().cloned().collect();
    coproduct.extend(matrix_coproduct(&x));
    for &(i, j) in &arcs {
        let p = p_of(i, j);
        gens.extend(p.iter().flatten().cloned());
        rels.quantum_permutation(&p, "P quantum permutation");
        for &(k, l) in &arcs {
            let xx = prod(&[&x[i][k], &x[j][l]]);
            for entry in p.iter().flatten() {
                rels.commute(&Monomial::of(entry.clone()), &xx, "P commutes with x x");
            }
        }
        if g.is_undirected() && i < j {
            equate(rels, &p, &p_of(j, i), "P symmetric under inversion");
        }
        for r in 0..m {
            for s in 0..m {
                let terms = (0..m)
                    .flat_map(|s2| arcs.iter().map(move |&kl| (s2, kl)))
                    .map(|(s2, (k, l))| CoproductTerm {
                        coeff: Coeff::one(),
                        left: prod(&[&p[r][s2], &x[i][k], &x[j][l]]),
                        right: Monomial::of(p_of(k, l)[s2][s].clone()),
                    })
                    .collect();
                coproduct.push((p[r][s].clone(), terms));
            }
        }
    }
    let rep = g.canonical_edge_representation().expect("valid graph");
    for sigma in ctx.edges() {
        let (i, j, r) = rep.label(sigma);
        for tau in ctx.edges() {
            let (k, l, s) = rep.label(tau);
            let rhs = prod(&[&p_of(i, j)[r - 1][s - 1], &x[i][k], &x[j][l]]);
            coaction.add(Relation::new(Poly::gen(ctx.u(sigma, tau)), Poly::monomial(rhs)), "wreath coaction");
        }
    }
    gens
}

/// q^i_k expressed through u, using the first admissible σ.
///
/// Both endpoints sources: Σ_{τ∈E^k} u^σ_τ with σ∈E^i. Both targets:
/// Σ_{τ∈E_k} u^σ_τ with σ∈E_i. Otherwise 0.
pub fn derived_q(g: &Graph, i: usize, k: usize) -> Poly {
    let ctx = Ctx { g };
    let (vs, vt) = (g.sources(), g.targets());
    if vs.contains(&i) && vs.contains(&k) {
        ctx.sum_u(g.out_edges(i)[0], &g.out_edges(k))
    } else if vt.contains(&i) && vt.contains(&k) {
        ctx.sum_u(g.in_edges(i)[0], &g.in_edges(k))
    } else {
        Poly::zero()
    }
}

/// Auxiliary relations defining q^i_k from the edge generators, one per
/// admissible σ, so a representation can be checked for σ-independence.
pub fn derived_vertex_relations(g: &Graph, kind: Kind) -> Result<Vec<PresentedRelation>, PresentationError> {
    if !kind.uses_edge_generators() {
        return Err(PresentationError::KindMismatch { kind: kind.name().to_string(), requirement: "edge generators" });
    }
    let ctx = Ctx { g };
    let mut rels = RelSet::default();
    let (vs, vt) = (g.sources(), g.targets());
    for i in 0..g.vertex_count() {
        for k in 0..g.vertex_count() {
            let q = Poly::gen(ctx.q(i, k));
            let mut any = false;
            if vs.contains(&i) && vs.contains(&k) {
                any = true;
                for s in g.out_edges(i) {
                    rels.add(Relation::new(q.clone(), ctx.sum_u(s, &g.out_edges(k))), "source form, must be independent of sigma");
                }
            }
            if vt.contains(&i) && vt.contains(&k) {
                any = true;
                for s in g.in_edges(i) {
                    rels.add(Relation::new(q.clone(), ctx.sum_u(s, &g.in_edges(k))), "target form, must be independent of sigma");
                }
            }
            if !any {
                rels.add(Relation::new(q, Poly::zero()), "pure source and pure target vertices are never exchanged");
            }
        }
    }
    Ok(rels.list)
}
