//! Finite-dimensional Cuntz–Krieger families of acyclic multigraphs and the
//! coaction induced by a representation of the edge relations.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde_json::{json, Value};

use crate::error::CStarError;
use crate::graph::Graph;
use crate::ncpoly::{operator_norm, CMatrix, Generator};
use crate::reps::{derived_q_matrices, kron, MagicUnitaryRep};

/// Partial isometries s_τ and projections p_i on the path space: the basis is
/// every directed path ending at a sink, ordered by (sink id, edge-id word).
#[derive(Clone, Debug, PartialEq)]
pub struct CKFamily {
    /// (start vertex, edge word) per basis vector.
    pub paths: Vec<(usize, Vec<usize>)>,
    pub s: Vec<DMatrix<i64>>,
    pub p: Vec<DMatrix<i64>>,
}

impl CKFamily {
    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    /// Exact checks of the Cuntz–Krieger relations; returns the failures.
    pub fn violations(&self, g: &Graph) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        for t in 0..g.edge_count() {
            if self.s[t].transpose() * &self.s[t] != self.p[g.tgt(t)] {
                out.push(format!("s*s != p(t) for edge {}", g.edge_id(t)));
            }
        }
        for i in g.sources() {
            let sum = g.out_edges(i).iter().fold(DMatrix::zeros(n, n), |acc, &t| acc + &self.s[t] * self.s[t].transpose());
            if sum != self.p[i] {
                out.push(format!("sum of s s* over edges leaving {} != p", g.vertex_id(i)));
            }
        }
        let total = self.p.iter().fold(DMatrix::zeros(n, n), |acc, p| acc + p);
        if total != DMatrix::identity(n, n) {
            out.push("projections do not sum to 1".to_string());
        }
        for (i, pi) in self.p.iter().enumerate() {
            for (j, pj) in self.p.iter().enumerate() {
                let expected = if i == j { pi.clone() } else { DMatrix::zeros(n, n) };
                if pi * pj != expected {
                    out.push(format!("p({}) p({}) is wrong", g.vertex_id(i), g.vertex_id(j)));
                }
            }
        }
        out
    }
}

/// A directed cycle as an edge-id string, if one exists. Loops count.
fn find_cycle(g: &Graph) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    fn visit(g: &Graph, v: usize, marks: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        marks[v] = Mark::Open;
        for e in g.out_edges(v) {
            let w = g.tgt(e);
            stack.push(e);
            match marks[w] {
                Mark::Open => {
                    let start = stack.iter().position(|&x| g.src(x) == w).expect("open vertex is on the stack");
                    return Some(stack[start..].to_vec());
                }
                Mark::New => {
                    if let Some(c) = visit(g, w, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
            stack.pop();
        }
        marks[v] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; g.vertex_count()];
    for v in 0..g.vertex_count() {
        if marks[v] == Mark::New {
            if let Some(c) = visit(g, v, &mut marks, &mut Vec::new()) {
                return Some(c.iter().map(|&e| g.edge_id(e)).collect::<Vec<_>>().join(" -> "));
            }
        }
    }
    None
}

pub fn build_ck_family(g: &Graph) -> Result<CKFamily, CStarError> {
    if g.is_undirected() {
        return Err(CStarError::Undirected);
    }
    if let Some(cycle) = find_cycle(g) {
        return Err(CStarError::CyclicGraph(cycle));
    }
    // Paths ending at sinks, grown backwards from each sink.
    let mut keyed: Vec<((String, Vec<String>), (usize, Vec<usize>))> = Vec::new();
    let sources = g.sources();
    for sink in (0..g.vertex_count()).filter(|v| !sources.contains(v)) {
        let mut frontier = vec![(sink, Vec::new())];
        while let Some((start, word)) = frontier.pop() {
            for e in g.in_edges(start) {
                let mut longer = vec![e];
                longer.extend(&word);
                frontier.push((g.src(e), longer));
            }
            let key = (g.vertex_id(sink).to_string(), word.iter().map(|&e| g.edge_id(e).to_string()).collect());
            keyed.push((key, (start, word)));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let paths: Vec<(usize, Vec<usize>)> = keyed.into_iter().map(|(_, p)| p).collect();
    let n = paths.len();
    let index: BTreeMap<&Vec<usize>, usize> = paths.iter().enumerate().filter(|(_, p)| !p.1.is_empty()).map(|(i, p)| (&p.1, i)).collect();
    let mut s = vec![DMatrix::<i64>::zeros(n, n); g.edge_count()];
    for (mu, (start, word)) in paths.iter().enumerate() {
        for e in g.in_edges(*start) {
            let mut longer = vec![e];
            longer.extend(word);
            s[e][(index[&longer], mu)] = 1;
        }
    }
    let mut p = vec![DMatrix::<i64>::zeros(n, n); g.vertex_count()];
    for (mu, (start, _)) in paths.iter().enumerate() {
        p[*start][(mu, mu)] = 1;
    }
    Ok(CKFamily { paths, s, p })
}

/// The images S_τ = Σ_σ s_σ ⊗ u^σ_τ and P_i = Σ_k p_k ⊗ q^k_i, with q derived from u.
#[derive(Clone, Debug, PartialEq)]
pub struct Coaction {
    pub s: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
}

fn to_complex(m: &DMatrix<i64>) -> CMatrix {
    m.map(|x| Complex64::new(x as f64, 0.0))
}

fn edge_matrix<'a>(g: &Graph, rep: &'a MagicUnitaryRep, s: usize, t: usize) -> Result<&'a CMatrix, CStarError> {
    let gen = Generator::u(g.edge_id(s), g.edge_id(t));
    rep.assign.get(&gen).ok_or_else(|| CStarError::GraphMismatch(format!("no matrix for {gen}")))
}

pub fn coaction_matrices(ck: &CKFamily, g: &Graph, rep: &MagicUnitaryRep) -> Result<Coaction, CStarError> {
    if ck.s.len() != g.edge_count() || ck.p.len() != g.vertex_count() {
        return Err(CStarError::GraphMismatch("family was built for another graph".into()));
    }
    let big = ck.dim() * rep.dim;
    let mut s = Vec::with_capacity(g.edge_count());
    for t in 0..g.edge_count() {
        let mut acc = CMatrix::zeros(big, big);
        for sigma in 0..g.edge_count() {
            acc += kron(&to_complex(&ck.s[sigma]), edge_matrix(g, rep, sigma, t)?);
        }
        s.push(acc);
    }
    let q = derived_q_matrices(rep, g).map_err(|e| CStarError::GraphMismatch(e.to_string()))?;
    let p = (0..g.vertex_count())
        .map(|i| (0..g.vertex_count()).fold(CMatrix::zeros(big, big), |acc, k| acc + kron(&to_complex(&ck.p[k]), &q[k][i])))
        .collect();
    Ok(Coaction { s, p })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualReport {
    pub checked: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub failures: Vec<(String, f64)>,
}

impl ResidualReport {
    fn new(tol: f64) -> Self {
        ResidualReport { tol, ..Default::default() }
    }

    fn record(&mut self, residual: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.max_residual = self.max_residual.max(residual);
        if residual > self.tol {
            self.failures.push((what(), residual));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checked": self.checked,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed(),
            "failures": self.failures.iter().map(|(w, r)| json!({"check": w, "residual": r})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict}: {} checks, max residual {:.3e} (tol {:.0e})", self.checked, self.max_residual, self.tol)?;
        for (w, r) in self.failures.iter().take(20) {
            write!(f, "\n  {r:.3e}  {w}")?;
        }
        Ok(())
    }
}

/// Checks that S_τ, P_i again satisfy the Cuntz–Krieger relations.
pub fn verify_ck_coaction(ck: &CKFamily, g: &Graph, rep: &MagicUnitaryRep) -> Result<ResidualReport, CStarError> {
    let co = coaction_matrices(ck, g, rep)?;
    let big = ck.dim() * rep.dim;
    let mut report = ResidualReport::new(rep.tol);
    for t in 0..g.edge_count() {
        let res = operator_norm(&(co.s[t].adjoint() * &co.s[t] - &co.p[g.tgt(t)]));
        report.record(res, || format!("S*S = P(t) at edge {}", g.edge_id(t)));
    }
    for i in g.sources() {
        let sum = g.out_edges(i).iter().fold(CMatrix::zeros(big, big), |acc, &t| acc + &co.s[t] * co.s[t].adjoint());
        report.record(operator_norm(&(sum - &co.p[i])), || format!("sum of S S* = P at {}", g.vertex_id(i)));
    }
    for i in 0..g.vertex_count() {
        for j in 0..g.vertex_count() {
            let prod = &co.p[i] * &co.p[j];
            let res = if i == j { operator_norm(&(prod - &co.p[i])) } else { operator_norm(&prod) };
            report.record(res, || format!("P({}) P({}) orthogonality", g.vertex_id(i), g.vertex_id(j)));
        }
    }
    let total = co.p.iter().fold(CMatrix::zeros(big, big), |acc, p| acc + p);
    report.record(operator_norm(&(total - CMatrix::identity(big, big))), || "sum of P = 1".to_string());
    Ok(report)
}

/// Σ_{σ∈E_j} (u^σ_{τ1})* u^σ_{τ2} = δ_{τ1,τ2} q^j_{t(τ1)} for every target j.
pub fn verify_correspondence_covariance(g: &Graph, rep: &MagicUnitaryRep) -> Result<ResidualReport, CStarError> {
    let q = derived_q_matrices(rep, g).map_err(|e| CStarError::GraphMismatch(e.to_string()))?;
    let mut report = ResidualReport::new(rep.tol);
    let d = rep.dim;
    for j in g.targets() {
        let into = g.in_edges(j);
        for t1 in 0..g.edge_count() {
            for t2 in 0..g.edge_count() {
                let mut acc = CMatrix::zeros(d, d);
                for &s in &into {
                    acc += edge_matrix(g, rep, s, t1)?.adjoint() * edge_matrix(g, rep, s, t2)?;
                }
                if t1 == t2 {
                    acc -= &q[j][g.tgt(t1)];
                }
                report.record(operator_norm(&acc), || {
                    format!("covariance at ({}, {}, {})", g.edge_id(t1), g.edge_id(t2), g.vertex_id(j))
                });
            }
        }
    }
    Ok(report)
}
