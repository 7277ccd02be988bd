//! Finite-dimensional matrix representations of the presentations: classical
//! points as 1-dimensional reps, wreath-product reps, the square witness, and
//! structural checks on verified reps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::Complex;
use num::complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::aut::MultigraphAutomorphism;
use crate::error::{ParseError, RepError};
use crate::graph::Graph;
use crate::ncpoly::{eval_poly, operator_norm, CMatrix, CompiledSystem, Family, Generator, DEFAULT_TOL};
use crate::presentation::{derived_q, derived_vertex_relations, emit_presentation, Kind, Presentation};

/// An assignment of d×d complex matrices to generator symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct MagicUnitaryRep {
    pub dim: usize,
    pub assign: BTreeMap<Generator, CMatrix>,
    pub tol: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRep {
    dim: usize,
    assign: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl MagicUnitaryRep {
    pub fn new(dim: usize) -> Self {
        MagicUnitaryRep { dim, assign: BTreeMap::new(), tol: DEFAULT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Assigns `m`, rejecting a matrix of the wrong size.
    pub fn insert(&mut self, g: Generator, m: CMatrix) -> Result<(), RepError> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(RepError::InvalidInput(format!(
                "{g} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.dim,
                self.dim
            )));
        }
        self.assign.insert(g, m);
        Ok(())
    }

    pub fn get(&self, g: &Generator) -> Option<&CMatrix> {
        self.assign.get(g)
    }

    pub fn from_json(text: &str) -> Result<Self, RepError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawRep = serde_path_to_error::deserialize(de).map_err(ParseError::from_path_error)?;
        let mut rep = MagicUnitaryRep::new(raw.dim);
        for (name, rows) in raw.assign {
            let path = format!("assign.{name}");
            let g: Generator = name.parse().map_err(|e: crate::error::PolyError| ParseError::at(&path, e.to_string()))?;
            if rows.len() != raw.dim || rows.iter().any(|r| r.len() != raw.dim) {
                return Err(ParseError::at(path, format!("expected a {0}x{0} matrix", raw.dim)).into());
            }
            let m = CMatrix::from_fn(raw.dim, raw.dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
            rep.assign.insert(g, m);
        }
        Ok(rep)
    }

    pub fn to_json(&self) -> Value {
        let assign: Map<String, Value> = self
            .assign
            .iter()
            .map(|(g, m)| {
                let rows: Vec<Vec<[f64; 2]>> =
                    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
                (g.to_string(), json!(rows))
            })
            .collect();
        json!({ "dim": self.dim, "assign": assign })
    }

    /// Every matrix replaced by w a w*.
    pub fn conjugated(&self, w: &CMatrix) -> Self {
        let wa = w.adjoint();
        MagicUnitaryRep { assign: self.assign.iter().map(|(g, a)| (g.clone(), w * a * &wa)).collect(), ..self.clone() }
    }

    /// Assigns u^σ_τ from the presentation's coaction formulas.
    pub fn assign_coaction(&mut self, p: &Presentation) -> Result<(), RepError> {
        let mut new = Vec::new();
        for rel in &p.coaction {
            let gen = rel.relation.lhs.symbols().next().expect("coaction lhs is a generator").clone();
            new.push((gen, eval_poly(&rel.relation.rhs, &self.assign, self.dim)?));
        }
        self.assign.extend(new);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailingRelation {
    pub relation: String,
    pub notes: Vec<String>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub kind: Kind,
    pub checked: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub failing: Vec<FailingRelation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "checked": self.checked,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed(),
            "failing": self.failing.iter().map(|f| json!({"relation": f.relation, "notes": f.notes, "residual": f.residual})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} relations, max residual {:.3e} (tol {:.0e})", self.kind, self.checked, self.max_residual, self.tol)?;
        for r in self.failing.iter().take(20) {
            write!(f, "\n  {:.3e}  {}  [{}]", r.residual, r.relation, r.notes.join("; "))?;
        }
        if self.failing.len() > 20 {
            write!(f, "\n  ... {} more", self.failing.len() - 20)?;
        }
        Ok(())
    }
}

/// Evaluates every relation of `p`, plus each coaction formula whose symbols
/// the rep assigns.
pub fn verify_rep(rep: &MagicUnitaryRep, p: &Presentation) -> Result<VerifyReport, RepError> {
    if let Some(g) = p.generators.iter().find(|g| !rep.assign.contains_key(g)) {
        return Err(RepError::MissingGenerator(g.to_string()));
    }
    for (g, m) in &rep.assign {
        if m.nrows() != rep.dim || m.ncols() != rep.dim {
            return Err(crate::error::PolyError::Dimension { symbol: g.to_string(), expected: rep.dim, got: m.nrows(), got2: m.ncols() }.into());
        }
    }
    let coaction = p.coaction.iter().filter(|r| r.relation.symbols().iter().all(|s| rep.assign.contains_key(s)));
    let checked: Vec<_> = p.relations.iter().chain(coaction).collect();
    let system = CompiledSystem::new(checked.iter().map(|r| &r.relation));
    let mats: Vec<CMatrix> = system.symbols().iter().map(|s| rep.assign[s].clone()).collect();
    let adjoints: Vec<CMatrix> = mats.iter().map(|m| m.adjoint()).collect();
    let mut report = VerifyReport { kind: p.kind, checked: checked.len(), max_residual: 0.0, tol: rep.tol, failing: Vec::new() };
    for (i, r) in checked.iter().enumerate() {
        let res = system.residual(i, &mats, &adjoints);
        report.max_residual = report.max_residual.max(res);
        if res > rep.tol {
            report.failing.push(FailingRelation { relation: r.relation.to_string(), notes: r.notes.clone(), residual: res });
        }
    }
    Ok(report)
}

fn scalar(b: bool) -> CMatrix {
    CMatrix::from_element(1, 1, Complex::new(if b { 1.0 } else { 0.0 }, 0.0))
}

/// The 1-dimensional rep of a classical automorphism: u, q, x, the bundle
/// families γ (read from the first bundle leaving each source) and ν (first
/// bundle entering each target), and P.
pub fn rep_from_automorphism(g: &Graph, a: &MultigraphAutomorphism) -> MagicUnitaryRep {
    let rep = g.canonical_edge_representation().expect("valid graph");
    let f_e = a.edge_map(&rep);
    let n = g.vertex_count();
    let mut out = MagicUnitaryRep::new(1);
    for t in 0..g.edge_count() {
        for s in 0..g.edge_count() {
            out.assign.insert(Generator::u(g.edge_id(s), g.edge_id(t)), scalar(f_e[t] == s));
        }
    }
    for j in 0..n {
        for i in 0..n {
            let on = a.f_v[j] == i;
            out.assign.insert(Generator::q(g.vertex_id(i), g.vertex_id(j)), scalar(on));
            out.assign.insert(Generator::x(g.vertex_id(i), g.vertex_id(j)), scalar(on));
        }
    }
    let finv = crate::perm::inverse(&a.f_v);
    let w = g.adjacency_matrix().entries;
    for comp in g.uniform_decompose() {
        let m = comp.degree;
        let family = |gamma: &[usize], make: &dyn Fn(usize, usize) -> Generator, out: &mut MagicUnitaryRep| {
            for r in 0..m {
                for s in 0..m {
                    out.assign.insert(make(s + 1, r + 1), scalar(gamma[r] == s));
                }
            }
        };
        for &k in &comp.sources {
            let i = finv[k];
            let l = (0..n).find(|&l| w[i][l] as usize == m).expect("source of the component");
            family(&a.gammas[&(i, l)], &|s, r| Generator::gamma(m, g.vertex_id(k), s, r), &mut out);
        }
        for &l in &comp.targets {
            let j = finv[l];
            let k = (0..n).find(|&k| w[k][j] as usize == m).expect("target of the component");
            family(&a.gammas[&(k, j)], &|s, r| Generator::nu(m, g.vertex_id(l), s, r), &mut out);
        }
    }
    for (&(i, j), gamma) in &a.gammas {
        let (fi, fj) = (a.f_v[i], a.f_v[j]);
        for s in 0..gamma.len() {
            for r in 0..gamma.len() {
                out.assign.insert(Generator::p(g.vertex_id(fi), g.vertex_id(fj), r + 1, s + 1), scalar(gamma[s] == r));
            }
        }
    }
    out
}

/// A square matrix of d×d blocks, meant to be a magic unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct MagicMatrix {
    pub entries: Vec<Vec<CMatrix>>,
}

impl MagicMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries.first().and_then(|r| r.first()).map_or(1, |m| m.nrows())
    }

    /// The classical permutation matrix with entry [i][j] = 1 iff perm[j] = i.
    pub fn permutation(perm: &[usize], dim: usize) -> Self {
        let n = perm.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if perm[j] == i { CMatrix::identity(dim, dim) } else { CMatrix::zeros(dim, dim) }).collect())
            .collect();
        MagicMatrix { entries }
    }

    /// Block diagonal with a 2×2 block [[p, 1-p], [1-p, p]] for each given
    /// projection, then identity on the remaining indices.
    pub fn from_projections(m: usize, dim: usize, projections: &[CMatrix]) -> Self {
        let id = CMatrix::identity(dim, dim);
        let zero = CMatrix::zeros(dim, dim);
        let mut entries = vec![vec![zero; m]; m];
        let mut next = 0;
        for p in projections.iter().take(m / 2) {
            let (a, b) = (next, next + 1);
            entries[a][a] = p.clone();
            entries[b][b] = p.clone();
            entries[a][b] = &id - p;
            entries[b][a] = &id - p;
            next += 2;
        }
        for k in next..m {
            entries[k][k] = id.clone();
        }
        MagicMatrix { entries }
    }

    /// Largest deviation from the magic unitary axioms.
    pub fn magic_residual(&self) -> f64 {
        let n = self.size();
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut row = -&id;
            let mut col = -&id;
            for j in 0..n {
                let a = &self.entries[i][j];
                if a.nrows() != d || a.ncols() != d {
                    return f64::INFINITY;
                }
                worst = worst.max(operator_norm(&(a * a - a))).max(operator_norm(&(a - a.adjoint())));
                row += a;
                col += &self.entries[j][i];
            }
            worst = worst.max(operator_norm(&row)).max(operator_norm(&col));
        }
        worst
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// p0 = diag(1,0) and the projection onto span(cos θ, sin θ).
pub fn projection_pair(angle: f64) -> (CMatrix, CMatrix) {
    let (c, s) = (angle.cos(), angle.sin());
    let re = |x: f64| Complex64::new(x, 0.0);
    let p0 = CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(0.0)]);
    let q0 = CMatrix::from_row_slice(2, 2, &[re(c * c), re(c * s), re(c * s), re(s * s)]);
    (p0, q0)
}

/// One S⁺_m magic unitary per ordered arc, built from the projection pair at
/// `angle`. Arcs (i,j) and (j,i) share a matrix; consecutive unordered pairs
/// alternate which projection comes first, so distinct pairs do not commute.
pub fn standard_p_family(g: &Graph, angle: f64) -> Result<BTreeMap<(String, String), MagicMatrix>, RepError> {
    let comps = g.uniform_decompose();
    if comps.len() != 1 {
        return Err(RepError::NotUniform);
    }
    let m = comps[0].degree;
    let (p0, q0) = projection_pair(angle);
    let arcs: Vec<(usize, usize)> = g.underlying_weighted_graph().arcs.keys().copied().collect();
    let pairs: BTreeSet<(usize, usize)> = arcs.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let mut out = BTreeMap::new();
    for (t, &(i, j)) in pairs.iter().enumerate() {
        let order = if t % 2 == 0 { [p0.clone(), q0.clone()] } else { [q0.clone(), p0.clone()] };
        let mm = MagicMatrix::from_projections(m, 2, &order);
        for (a, b) in [(i, j), (j, i)] {
            if arcs.contains(&(a, b)) {
                out.insert((g.vertex_id(a).to_string(), g.vertex_id(b).to_string()), mm.clone());
            }
        }
    }
    Ok(out)
}

/// The wreath-product rep u^{(i,j)r}_{(k,l)s} = P^{(i,j)r}_s x^i_k x^j_l on
/// C^{d2} ⊗ C^{d1}, with the P's on the first factor and x on the second.
pub fn build_wreath_rep(
    g: &Graph,
    x: &MagicMatrix,
    p: &BTreeMap<(String, String), MagicMatrix>,
    tol: f64,
) -> Result<MagicUnitaryRep, RepError> {
    let comps = g.uniform_decompose();
    if comps.len() != 1 {
        return Err(RepError::NotUniform);
    }
    let m = comps[0].degree;
    let n = g.vertex_count();
    if x.size() != n {
        return Err(RepError::InvalidInput(format!("x is {}x{}, graph has {n} vertices", x.size(), x.size())));
    }
    let d1 = x.dim();
    let mut x_rep = MagicUnitaryRep::new(d1).with_tol(tol);
    for i in 0..n {
        for k in 0..n {
            x_rep.insert(Generator::q(g.vertex_id(i), g.vertex_id(k)), x.entries[i][k].clone())?;
        }
    }
    let sbic = verify_rep(&x_rep, &emit_presentation(g, Kind::SBic)?)?;
    if !sbic.passed() {
        return Err(RepError::InvalidInput(format!("x fails SBic (residual {:.3e})", sbic.max_residual)));
    }
    let arcs: Vec<(usize, usize)> = g.underlying_weighted_graph().arcs.keys().copied().collect();
    let mut families = BTreeMap::new();
    let mut d2 = None;
    for &(i, j) in &arcs {
        let key = (g.vertex_id(i).to_string(), g.vertex_id(j).to_string());
        let pm = p.get(&key).ok_or_else(|| RepError::MissingPair(key.0.clone(), key.1.clone()))?;
        if pm.size() != m {
            return Err(RepError::Degree { expected: m, got: pm.size() });
        }
        if *d2.get_or_insert(pm.dim()) != pm.dim() {
            return Err(RepError::InvalidInput("P families have different dimensions".into()));
        }
        let res = pm.magic_residual();
        if res > tol {
            return Err(RepError::InvalidInput(format!("P for ({},{}) is not a magic unitary (residual {res:.3e})", key.0, key.1)));
        }
        families.insert((i, j), pm);
    }
    if g.is_undirected() {
        for (&(i, j), pm) in &families {
            let other = families[&(j, i)];
            let gap = pm.entries.iter().flatten().zip(other.entries.iter().flatten()).map(|(a, b)| operator_norm(&(a - b))).fold(0.0, f64::max);
            if gap > tol {
                return Err(RepError::InvalidInput(format!(
                    "P({0},{1}) differs from P({1},{0})",
                    g.vertex_id(i),
                    g.vertex_id(j)
                )));
            }
        }
    }
    let d2 = d2.unwrap_or(1);
    let (i1, i2) = (CMatrix::identity(d1, d1), CMatrix::identity(d2, d2));
    let mut out = MagicUnitaryRep::new(d2 * d1).with_tol(tol);
    let rep = g.canonical_edge_representation()?;
    for sigma in 0..g.edge_count() {
        let (i, j, r) = rep.label(sigma);
        for tau in 0..g.edge_count() {
            let (k, l, s) = rep.label(tau);
            let xx = &x.entries[i][k] * &x.entries[j][l];
            out.insert(Generator::u(g.edge_id(sigma), g.edge_id(tau)), kron(&families[&(i, j)].entries[r - 1][s - 1], &xx))?;
        }
    }
    for i in 0..n {
        for k in 0..n {
            let lifted = kron(&i2, &x.entries[i][k]);
            out.insert(Generator::x(g.vertex_id(i), g.vertex_id(k)), lifted.clone())?;
            out.insert(Generator::q(g.vertex_id(i), g.vertex_id(k)), lifted)?;
        }
    }
    for (&(i, j), pm) in &families {
        for r in 0..m {
            for s in 0..m {
                out.insert(Generator::p(g.vertex_id(i), g.vertex_id(j), r + 1, s + 1), kron(&pm.entries[r][s], &i1))?;
            }
        }
    }
    Ok(out)
}

/// The wreath rep with trivial x and the standard projection-pair P family.
pub fn default_wreath_rep(g: &Graph, angle: f64, tol: f64) -> Result<MagicUnitaryRep, RepError> {
    let x = MagicMatrix::permutation(&crate::perm::identity(g.vertex_count()), 1);
    build_wreath_rep(g, &x, &standard_p_family(g, angle)?, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub angle: f64,
    pub dim: usize,
    pub tol: f64,
    pub sban_residual: f64,
    pub st_kind: Kind,
    pub st_residual: f64,
    pub sbic_residual: f64,
    pub qsym_residual: f64,
    pub commutator: f64,
    /// The commutator vanishes, so the witness shows nothing.
    pub degenerate: bool,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.sban_residual <= self.tol && self.st_residual <= self.tol && !self.degenerate
    }

    pub fn to_json(&self) -> Value {
        json!({
            "angle": self.angle,
            "dim": self.dim,
            "tol": self.tol,
            "sban_residual": self.sban_residual,
            "st_kind": self.st_kind.name(),
            "st_residual": self.st_residual,
            "sbic_residual": self.sbic_residual,
            "qsym_residual": self.qsym_residual,
            "commutator": self.commutator,
            "degenerate": self.degenerate,
        })
    }
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "witness at angle {} (dim {})", self.angle, self.dim)?;
        writeln!(f, "  SBan residual   {:.3e}", self.sban_residual)?;
        writeln!(f, "  {} residual {:.3e}", self.st_kind, self.st_residual)?;
        writeln!(f, "  QSym residual   {:.3e}", self.qsym_residual)?;
        writeln!(f, "  SBic residual   {:.3e}", self.sbic_residual)?;
        write!(f, "  commutator norm {:.12}", self.commutator)?;
        if self.degenerate {
            write!(f, "\n  degenerate: the q entries commute at this angle")?;
        }
        Ok(())
    }
}

/// Vertex order x1, y1, x2, y2 where {x1,y1} and {x2,y2} are the pairs swapped
/// by the witness: the diagonals of a 4-cycle, or the edges of two disjoint edges.
fn square_pairs(g: &Graph) -> Result<[usize; 4], RepError> {
    if g.vertex_count() != 4 {
        return Err(RepError::NotSquare);
    }
    let w = g.adjacency_matrix();
    let s = w.support().entries;
    if !w.is_symmetric() || (0..4).any(|i| s[i][i] != 0) {
        return Err(RepError::NotSquare);
    }
    let degree: Vec<u64> = s.iter().map(|r| r.iter().sum()).collect();
    let paired = |i: usize, j: usize| match degree[0] {
        1 => s[i][j] == 1,
        _ => i != j && s[i][j] == 0,
    };
    if !(degree.iter().all(|&d| d == 1) || degree.iter().all(|&d| d == 2)) {
        return Err(RepError::NotSquare);
    }
    let partner = (1..4).find(|&j| paired(0, j)).ok_or(RepError::NotSquare)?;
    let rest: Vec<usize> = (1..4).filter(|&j| j != partner).collect();
    if !paired(rest[0], rest[1]) {
        return Err(RepError::NotSquare);
    }
    Ok([0, partner, rest[0], rest[1]])
}

/// The square's non-commutative magic unitary with γ from a bundle family,
/// together with a report of which relation systems it satisfies.
pub fn example5_witness(g: &Graph, angle: f64, gamma_factor: bool, tol: f64) -> Result<(MagicUnitaryRep, WitnessReport), RepError> {
    let order = square_pairs(g)?;
    let (p0, q0) = projection_pair(angle);
    let i2 = CMatrix::identity(2, 2);
    let t0 = projection_pair(0.0).0;
    let extra = if gamma_factor { 2 } else { 1 };
    let ie = CMatrix::identity(extra, extra);
    let lift = |a: &CMatrix| kron(a, &ie);
    let p = lift(&kron(&p0, &i2));
    let q = lift(&kron(&q0, &i2));
    let t = lift(&kron(&i2, &t0));
    let d = 4 * extra;
    let id = CMatrix::identity(d, d);
    let (np, nq, nt) = (&id - &p, &id - &q, &id - &t);
    let rows = [
        [&p * &t, &np * &t, &p * &nt, &np * &nt],
        [&np * &t, &p * &t, &np * &nt, &p * &nt],
        [&q * &nt, &nq * &nt, &q * &t, &nq * &t],
        [&nq * &nt, &q * &nt, &nq * &t, &q * &t],
    ];
    let mut rep = MagicUnitaryRep::new(d).with_tol(tol);
    for (r, row) in rows.iter().enumerate() {
        for (c, m) in row.iter().enumerate() {
            rep.insert(Generator::q(g.vertex_id(order[r]), g.vertex_id(order[c])), m.clone())?;
        }
    }
    let st_kind = if g.is_undirected() { Kind::QSTUndirected } else { Kind::QST };
    let st = emit_presentation(g, st_kind)?;
    let gamma_block = if gamma_factor {
        let g0 = kron(&CMatrix::identity(4, 4), &t0);
        Some(g0)
    } else {
        None
    };
    for gen in st.generators.iter().filter(|x| x.family() == Family::Gamma) {
        let idx = gen.indices();
        let (s, r): (usize, usize) = (idx[2].parse().expect("index"), idx[3].parse().expect("index"));
        let m = match &gamma_block {
            Some(gb) if s <= 2 && r <= 2 => {
                if s == r {
                    gb.clone()
                } else {
                    &id - gb
                }
            }
            _ if s == r => id.clone(),
            _ => CMatrix::zeros(d, d),
        };
        rep.insert(gen.clone(), m)?;
    }
    rep.assign_coaction(&st)?;
    let residual = |kind: Kind| -> Result<f64, RepError> { Ok(verify_rep(&rep, &emit_presentation(g, kind)?)?.max_residual) };
    let (x1, y1, x2, y2) = (order[0], order[1], order[2], order[3]);
    let a = &rep.assign[&Generator::q(g.vertex_id(x1), g.vertex_id(y2))];
    let b = &rep.assign[&Generator::q(g.vertex_id(x2), g.vertex_id(y1))];
    let commutator = operator_norm(&(a * b - b * a));
    let report = WitnessReport {
        angle,
        dim: d,
        tol,
        sban_residual: residual(Kind::SBan)?,
        st_kind,
        st_residual: residual(st_kind)?,
        sbic_residual: residual(Kind::SBic)?,
        qsym_residual: residual(Kind::QSym)?,
        commutator,
        degenerate: commutator <= tol,
    };
    Ok((rep, report))
}

/// Violations found by a structural check, each with its residual.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub checked: usize,
    pub max_residual: f64,
    pub violations: Vec<(String, f64)>,
}

impl CheckReport {
    fn record(&mut self, tol: f64, residual: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.max_residual = self.max_residual.max(residual);
        if residual > tol {
            self.violations.push((what(), residual));
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checked": self.checked,
            "max_residual": self.max_residual,
            "passed": self.passed(),
            "violations": self.violations.iter().map(|(w, r)| json!({"check": w, "residual": r})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict}: {} checks, max residual {:.3e}", self.checked, self.max_residual)?;
        for (w, r) in self.violations.iter().take(20) {
            write!(f, "\n  {r:.3e}  {w}")?;
        }
        if self.violations.len() > 20 {
            write!(f, "\n  ... {} more", self.violations.len() - 20)?;
        }
        Ok(())
    }
}

fn edge_gen(g: &Graph, s: usize, t: usize) -> Generator {
    Generator::u(g.edge_id(s), g.edge_id(t))
}

fn require_u<'a>(rep: &'a MagicUnitaryRep, g: &Graph, s: usize, t: usize) -> Result<&'a CMatrix, RepError> {
    let gen = edge_gen(g, s, t);
    rep.assign.get(&gen).ok_or_else(|| RepError::MissingGenerator(gen.to_string()))
}

/// The q matrix obtained from u, entry [i][k].
pub fn derived_q_matrices(rep: &MagicUnitaryRep, g: &Graph) -> Result<Vec<Vec<CMatrix>>, RepError> {
    let n = g.vertex_count();
    (0..n).map(|i| (0..n).map(|k| Ok(eval_poly(&derived_q(g, i, k), &rep.assign, rep.dim)?)).collect()).collect()
}

/// Component, loop and vertex-level consequences of the edge relations.
pub fn block_invariance_check(rep: &MagicUnitaryRep, g: &Graph) -> Result<CheckReport, RepError> {
    let tol = rep.tol;
    let mut report = CheckReport::default();
    let w = g.adjacency_matrix().entries;
    let degree = |e: usize| w[g.src(e)][g.tgt(e)];
    for s in 0..g.edge_count() {
        for t in 0..g.edge_count() {
            let u = require_u(rep, g, s, t)?;
            let name = || edge_gen(g, s, t).to_string();
            if degree(s) != degree(t) {
                report.record(tol, operator_norm(u), || format!("{} links different uniform components", name()));
            }
            if g.is_loop(t) && !g.is_loop(s) {
                report.record(tol, operator_norm(u), || format!("{} sends a loop to a non-loop", name()));
            }
            if g.is_loop(s) && g.is_loop(t) {
                report.record(tol, operator_norm(&(u * u - u)), || format!("loop entry {} is not idempotent", name()));
                report.record(tol, operator_norm(&(u - u.adjoint())), || format!("loop entry {} is not self-adjoint", name()));
            }
        }
    }
    let q = derived_q_matrices(rep, g)?;
    let mut with_q = rep.clone();
    for (i, row) in q.iter().enumerate() {
        for (k, m) in row.iter().enumerate() {
            with_q.assign.insert(Generator::q(g.vertex_id(i), g.vertex_id(k)), m.clone());
        }
    }
    for rel in derived_vertex_relations(g, Kind::QBan)? {
        let diff = rel.relation.difference();
        let res = operator_norm(&eval_poly(&diff, &with_q.assign, rep.dim)?);
        report.record(tol, res, || format!("derived q depends on sigma: {}", rel.relation));
    }
    let n = g.vertex_count();
    for i in 0..n {
        for k in 0..n {
            let mut acc = CMatrix::zeros(rep.dim, rep.dim);
            for j in 0..n {
                acc += &q[i][j] * Complex64::new(w[j][k] as f64, 0.0);
                acc -= &q[j][k] * Complex64::new(w[i][j] as f64, 0.0);
            }
            report.record(tol, operator_norm(&acc), || format!("(QW - WQ)[{}][{}] is nonzero", g.vertex_id(i), g.vertex_id(k)));
        }
    }
    Ok(report)
}

/// The source and target product forms of u, and γ = ν along arcs when both
/// families are present.
pub fn st_form_check(rep: &MagicUnitaryRep, g: &Graph) -> Result<CheckReport, RepError> {
    let tol = rep.tol;
    let mut report = CheckReport::default();
    let n = g.vertex_count();
    let assigned_q = (0..n).all(|i| (0..n).all(|k| rep.assign.contains_key(&Generator::q(g.vertex_id(i), g.vertex_id(k)))));
    let q: Vec<Vec<CMatrix>> = if assigned_q {
        (0..n).map(|i| (0..n).map(|k| rep.assign[&Generator::q(g.vertex_id(i), g.vertex_id(k))].clone()).collect()).collect()
    } else {
        derived_q_matrices(rep, g)?
    };
    let edge_rep = g.canonical_edge_representation()?;
    let mut any_family = false;
    for comp in g.uniform_decompose() {
        let m = comp.degree;
        let gamma = |k: usize, s: usize, r: usize| rep.assign.get(&Generator::gamma(m, g.vertex_id(k), s, r));
        let nu = |l: usize, s: usize, r: usize| {
            rep.assign.get(&Generator::nu(m, g.vertex_id(l), s, r)).or_else(|| if g.is_undirected() { gamma(l, s, r) } else { None })
        };
        for &tau in &comp.edges {
            let (i, j, r) = edge_rep.label(tau);
            for &sigma in &comp.edges {
                let (k, l, s) = edge_rep.label(sigma);
                let u = require_u(rep, g, sigma, tau)?;
                let qq = &q[k][i] * &q[l][j];
                let name = || edge_gen(g, sigma, tau).to_string();
                if let Some(gm) = gamma(k, s, r) {
                    any_family = true;
                    report.record(tol, operator_norm(&(u - gm * &qq)), || format!("source form fails at {}", name()));
                }
                if let Some(nm) = nu(l, s, r) {
                    any_family = true;
                    report.record(tol, operator_norm(&(u - &qq * nm)), || format!("target form fails at {}", name()));
                }
            }
        }
        let arcs: BTreeSet<(usize, usize)> = comp.edges.iter().map(|&e| (g.src(e), g.tgt(e))).collect();
        for (k, l) in arcs {
            for s in 1..=m {
                for r in 1..=m {
                    if let (Some(gm), Some(nm)) = (gamma(k, s, r), nu(l, s, r)) {
                        report.record(tol, operator_norm(&(gm - nm)), || {
                            format!("gamma at {} differs from nu at {} (entry {s},{r})", g.vertex_id(k), g.vertex_id(l))
                        });
                    }
                }
            }
        }
    }
    if !any_family {
        report.violations.push(("no gamma or nu family assigned".to_string(), f64::INFINITY));
    }
    Ok(report)
}
