//! Noncommutative ∗-polynomials with exact Gaussian-rational coefficients, and
//! their evaluation on Boolean commutative points or on complex matrices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::rational::Rational64;
use num::{Complex, One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::PolyError;

pub type Coeff = Complex<Rational64>;
pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_TOL: f64 = 1e-9;

pub fn coeff(re: i64) -> Coeff {
    Complex::new(Rational64::from_integer(re), Rational64::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    U,
    Q,
    P,
    Gamma,
    Nu,
    X,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::U => "u",
            Family::Q => "q",
            Family::P => "P",
            Family::Gamma => "gamma",
            Family::Nu => "nu",
            Family::X => "x",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Family::U | Family::Q | Family::X => 2,
            Family::P | Family::Gamma | Family::Nu => 4,
        }
    }
}

impl FromStr for Family {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "u" => Family::U,
            "q" => Family::Q,
            "P" => Family::P,
            "gamma" => Family::Gamma,
            "nu" => Family::Nu,
            "x" => Family::X,
            other => return Err(PolyError::UnknownFamily(other.to_string())),
        })
    }
}

/// A generator symbol such as u^σ_τ or ᵐγ^{ks}_r.
///
/// Index layout: u (σ,τ); q and x (i,j); P (i,j,r,s) for P^{(i,j)r}_s;
/// gamma (m,k,s,r) for ᵐγ^{ks}_r; nu (m,l,s,r) for ᵐν^{ls}_r.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    family: Family,
    indices: Vec<String>,
}

impl Generator {
    pub fn new(family: Family, indices: Vec<String>) -> Result<Self, PolyError> {
        if indices.len() != family.arity() {
            return Err(PolyError::Arity {
                family: family.name().to_string(),
                expected: family.arity(),
                got: indices.len(),
            });
        }
        Ok(Generator { family, indices })
    }

    fn of(family: Family, indices: &[&dyn fmt::Display]) -> Self {
        Generator { family, indices: indices.iter().map(|x| x.to_string()).collect() }
    }

    pub fn u(sigma: &str, tau: &str) -> Self {
        Self::of(Family::U, &[&sigma, &tau])
    }

    pub fn q(i: &str, j: &str) -> Self {
        Self::of(Family::Q, &[&i, &j])
    }

    pub fn x(i: &str, j: &str) -> Self {
        Self::of(Family::X, &[&i, &j])
    }

    pub fn p(i: &str, j: &str, r: usize, s: usize) -> Self {
        Self::of(Family::P, &[&i, &j, &r, &s])
    }

    pub fn gamma(m: usize, k: &str, s: usize, r: usize) -> Self {
        Self::of(Family::Gamma, &[&m, &k, &s, &r])
    }

    pub fn nu(m: usize, l: &str, s: usize, r: usize) -> Self {
        Self::of(Family::Nu, &[&m, &l, &s, &r])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn indices(&self) -> &[String] {
        &self.indices
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        for i in &self.indices {
            write!(f, "[{i}]")?;
        }
        Ok(())
    }
}

impl FromStr for Generator {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || PolyError::Malformed(s.to_string());
        let open = s.find('[').ok_or_else(malformed)?;
        let family: Family = s[..open].parse()?;
        let mut indices = Vec::new();
        let mut rest = &s[open..];
        while !rest.is_empty() {
            let body = rest.strip_prefix('[').ok_or_else(malformed)?;
            let close = body.find(']').ok_or_else(malformed)?;
            indices.push(body[..close].to_string());
            rest = &body[close + 1..];
        }
        Generator::new(family, indices)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub generator: Generator,
    pub starred: bool,
}

/// An ordered product of possibly starred generators; empty means 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<Factor>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn of(generator: Generator) -> Self {
        Monomial(vec![Factor { generator, starred: false }])
    }

    pub fn star_of(generator: Generator) -> Self {
        Monomial(vec![Factor { generator, starred: true }])
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial(
            self.0
                .iter()
                .rev()
                .map(|f| Factor { generator: f.generator.clone(), starred: !f.starred })
                .collect(),
        )
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (n, factor) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", factor.generator)?;
            if factor.starred {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

/// A formal sum of monomials, kept sorted with merged, nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: Vec<(Monomial, Coeff)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(Monomial::unit())
    }

    pub fn monomial(m: Monomial) -> Self {
        Poly { terms: vec![(m, Coeff::one())] }
    }

    pub fn gen(g: Generator) -> Self {
        Poly::monomial(Monomial::of(g))
    }

    pub fn star(g: Generator) -> Self {
        Poly::monomial(Monomial::star_of(g))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Coeff, Monomial)>) -> Self {
        let mut acc: BTreeMap<Monomial, Coeff> = BTreeMap::new();
        for (c, m) in terms {
            *acc.entry(m).or_insert_with(Coeff::zero) += c;
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Σ of the given monomials with coefficient 1.
    pub fn sum(monomials: impl IntoIterator<Item = Monomial>) -> Self {
        Poly::from_terms(monomials.into_iter().map(|m| (Coeff::one(), m)))
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        Poly::from_terms(self.terms.iter().chain(&other.terms).map(|(m, c)| (*c, m.clone())))
    }

    pub fn scale(&self, k: Coeff) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (*c * k, m.clone())))
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(coeff(-1)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .flat_map(|(m1, c1)| other.terms.iter().map(move |(m2, c2)| (*c1 * *c2, m1.times(m2)))),
        )
    }

    pub fn adjoint(&self) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (c.conj(), m.adjoint())))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Generator> {
        self.terms.iter().flat_map(|(m, _)| m.0.iter().map(|f| &f.generator))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.im.is_zero() && c.re.is_negative();
            let magnitude = if negative { -*c } else { *c };
            match (n, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}", format_coeff(&magnitude))?;
                if !m.is_unit() {
                    write!(f, " {m}")?;
                }
            }
        }
        Ok(())
    }
}

fn format_coeff(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => c.re.to_string(),
        (true, false) => format!("{}i", c.im),
        (false, false) => format!("({}{}{}i)", c.re, if c.im.is_negative() { "" } else { "+" }, c.im),
    }
}

/// The relation `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub lhs: Poly,
    pub rhs: Poly,
}

impl Relation {
    pub fn new(lhs: Poly, rhs: Poly) -> Self {
        Relation { lhs, rhs }
    }

    /// `lhs − rhs` as a single formal sum.
    pub fn difference(&self) -> Poly {
        self.lhs.sub(&self.rhs)
    }

    pub fn symbols(&self) -> Vec<Generator> {
        let mut out: Vec<Generator> = self.lhs.symbols().chain(self.rhs.symbols()).cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "lhs": poly_to_json(&self.lhs), "rhs": poly_to_json(&self.rhs) })
    }

    pub fn from_json(v: &Value) -> Result<Self, PolyError> {
        let side = |k: &str| {
            v.get(k).ok_or_else(|| PolyError::Malformed(format!("relation lacks {k}"))).and_then(poly_from_json)
        };
        Ok(Relation::new(side("lhs")?, side("rhs")?))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

fn ratio_string(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_ratio(s: &str) -> Result<Rational64, PolyError> {
    let bad = || PolyError::Coefficient(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n.trim().parse().map_err(|_| bad())?, d))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

pub fn monomial_to_json(m: &Monomial) -> Value {
    Value::Array(
        m.0.iter()
            .map(|f| json!([f.generator.family.name(), f.generator.indices, f.starred]))
            .collect(),
    )
}

pub fn poly_to_json(p: &Poly) -> Value {
    Value::Array(
        p.terms
            .iter()
            .map(|(m, c)| json!([[ratio_string(&c.re), ratio_string(&c.im)], monomial_to_json(m)]))
            .collect(),
    )
}

pub fn monomial_from_json(v: &Value) -> Result<Monomial, PolyError> {
    let bad = || PolyError::Malformed(v.to_string());
    let factors = v.as_array().ok_or_else(bad)?;
    let mut out = Vec::new();
    for f in factors {
        let parts = f.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
        let family: Family = parts[0].as_str().ok_or_else(bad)?.parse()?;
        let indices = parts[1]
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        let starred = parts[2].as_bool().ok_or_else(bad)?;
        out.push(Factor { generator: Generator::new(family, indices)?, starred });
    }
    Ok(Monomial(out))
}

pub fn poly_from_json(v: &Value) -> Result<Poly, PolyError> {
    let bad = || PolyError::Malformed(v.to_string());
    let mut terms = Vec::new();
    for t in v.as_array().ok_or_else(bad)? {
        let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        let c = pair[0].as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        let re = parse_ratio(c[0].as_str().ok_or_else(bad)?)?;
        let im = parse_ratio(c[1].as_str().ok_or_else(bad)?)?;
        terms.push((Complex::new(re, im), monomial_from_json(&pair[1])?));
    }
    Ok(Poly::from_terms(terms))
}

/// Evaluates in the commutative Boolean shadow: stars are ignored and every
/// generator is 0 or 1.
pub fn eval_boolean_commutative(rel: &Relation, assignment: &BTreeMap<Generator, bool>) -> Result<bool, PolyError> {
    let mut total = Coeff::zero();
    for (m, c) in rel.difference().terms() {
        let mut on = true;
        for f in &m.0 {
            let v = assignment.get(&f.generator).ok_or_else(|| PolyError::MissingSymbol(f.generator.to_string()))?;
            on &= *v;
        }
        if on {
            total += *c;
        }
    }
    Ok(total.is_zero())
}

/// Operator norm of `lhs − rhs` under the assignment; star is the conjugate transpose.
pub fn eval_matrix(rel: &Relation, assignment: &BTreeMap<Generator, CMatrix>) -> Result<f64, PolyError> {
    let dim = dimension_of(assignment)?;
    Ok(operator_norm(&eval_poly(&rel.difference(), assignment, dim)?))
}

/// The matrix of a polynomial; the constant term is a multiple of the identity.
pub fn eval_poly(p: &Poly, assignment: &BTreeMap<Generator, CMatrix>, dim: usize) -> Result<CMatrix, PolyError> {
    let mut acc = CMatrix::zeros(dim, dim);
    for (m, c) in p.terms() {
        let mut prod = CMatrix::identity(dim, dim);
        for f in &m.0 {
            let a = assignment.get(&f.generator).ok_or_else(|| PolyError::MissingSymbol(f.generator.to_string()))?;
            if a.nrows() != dim || a.ncols() != dim {
                return Err(PolyError::Dimension { symbol: f.generator.to_string(), expected: dim, got: a.nrows(), got2: a.ncols() });
            }
            prod = if f.starred { prod * a.adjoint() } else { prod * a };
        }
        acc += prod * to_complex(c);
    }
    Ok(acc)
}

fn dimension_of(assignment: &BTreeMap<Generator, CMatrix>) -> Result<usize, PolyError> {
    let mut dim = None;
    for (g, a) in assignment {
        let d = *dim.get_or_insert(a.nrows());
        if a.nrows() != d || a.ncols() != d {
            return Err(PolyError::Dimension { symbol: g.to_string(), expected: d, got: a.nrows(), got2: a.ncols() });
        }
    }
    Ok(dim.unwrap_or(1))
}

pub fn to_complex(c: &Coeff) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Replaces each mapped generator by a formal sum; starred occurrences receive
/// the adjoint. Unmapped generators are left as they are.
pub fn substitute(rel: &Relation, map: &BTreeMap<Generator, Poly>) -> Relation {
    let side = |p: &Poly| {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let mut prod = Poly::from_terms([(*c, Monomial::unit())]);
            for f in &m.0 {
                let image = match map.get(&f.generator) {
                    Some(q) if f.starred => q.adjoint(),
                    Some(q) => q.clone(),
                    None => Poly::monomial(Monomial(vec![f.clone()])),
                };
                prod = prod.mul(&image);
            }
            out = out.add(&prod);
        }
        out
    };
    Relation::new(side(&rel.lhs), side(&rel.rhs))
}

struct CompiledTerm {
    exact: (i64, i64),
    numeric: Complex64,
    factors: Vec<(usize, bool)>,
}

/// A relation list with generators interned to positions, for repeated evaluation.
pub struct CompiledSystem {
    symbols: Vec<Generator>,
    index: HashMap<Generator, usize>,
    relations: Vec<Vec<CompiledTerm>>,
    /// (relation, term) pairs keyed by the term's smallest symbol position.
    by_min_symbol: Vec<Vec<(usize, usize)>>,
    /// Exact constant part of each relation that has one.
    constants: Vec<(usize, (i64, i64))>,
}

impl CompiledSystem {
    pub fn new<'a>(relations: impl IntoIterator<Item = &'a Relation>) -> Self {
        let mut symbols = Vec::new();
        let mut index = HashMap::new();
        let mut compiled = Vec::new();
        for rel in relations {
            let diff = rel.difference();
            // Clear denominators so Boolean evaluation stays in Gaussian integers.
            let lcm = diff.terms().iter().fold(1i64, |acc, (_, c)| {
                num::integer::lcm(num::integer::lcm(acc, *c.re.denom()), *c.im.denom())
            });
            let terms: Vec<CompiledTerm> = diff
                .terms()
                .iter()
                .map(|(m, c)| {
                    let factors = m
                        .0
                        .iter()
                        .map(|f| {
                            let pos = *index.entry(f.generator.clone()).or_insert_with(|| {
                                symbols.push(f.generator.clone());
                                symbols.len() - 1
                            });
                            (pos, f.starred)
                        })
                        .collect();
                    let scaled = *c * Rational64::from_integer(lcm);
                    CompiledTerm { exact: (scaled.re.to_integer(), scaled.im.to_integer()), numeric: to_complex(c), factors }
                })
                .collect();
            compiled.push(terms);
        }
        let mut by_min_symbol = vec![Vec::new(); symbols.len()];
        let mut constants = Vec::new();
        for (r, terms) in compiled.iter().enumerate() {
            for (t, term) in terms.iter().enumerate() {
                match term.factors.iter().map(|f| f.0).min() {
                    Some(p) => by_min_symbol[p].push((r, t)),
                    None => constants.push((r, term.exact)),
                }
            }
        }
        CompiledSystem { symbols, index, relations: compiled, by_min_symbol, constants }
    }

    pub fn symbols(&self) -> &[Generator] {
        &self.symbols
    }

    pub fn position(&self, g: &Generator) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Boolean evaluation with `values` indexed like `symbols()`.
    pub fn holds_boolean(&self, rel: usize, values: &[bool]) -> bool {
        let (mut re, mut im) = (0i64, 0i64);
        for t in &self.relations[rel] {
            if t.factors.iter().all(|&(p, _)| values[p]) {
                re += t.exact.0;
                im += t.exact.1;
            }
        }
        re == 0 && im == 0
    }

    pub fn all_hold_boolean(&self, values: &[bool]) -> bool {
        (0..self.relations.len()).all(|r| self.holds_boolean(r, values))
    }

    /// Same verdict as [`all_hold_boolean`](Self::all_hold_boolean), visiting
    /// only terms whose symbols are all set; `ones` lists the set positions.
    pub fn all_hold_boolean_sparse(&self, values: &[bool], ones: &[usize]) -> bool {
        let mut sums: HashMap<usize, (i64, i64)> = HashMap::new();
        for &(r, c) in &self.constants {
            let e = sums.entry(r).or_default();
            e.0 += c.0;
            e.1 += c.1;
        }
        for &p in ones {
            for &(r, t) in &self.by_min_symbol[p] {
                let term = &self.relations[r][t];
                if term.factors.iter().all(|&(q, _)| values[q]) {
                    let e = sums.entry(r).or_default();
                    e.0 += term.exact.0;
                    e.1 += term.exact.1;
                }
            }
        }
        sums.values().all(|&(re, im)| re == 0 && im == 0)
    }

    /// Operator-norm residual with `mats` indexed like `symbols()`; `adjoints`
    /// must hold the conjugate transposes.
    pub fn residual(&self, rel: usize, mats: &[CMatrix], adjoints: &[CMatrix]) -> f64 {
        let dim = mats.first().map_or(1, |m| m.nrows());
        let mut acc = CMatrix::zeros(dim, dim);
        for t in &self.relations[rel] {
            let mut prod: Option<CMatrix> = None;
            for &(p, starred) in &t.factors {
                let a = if starred { &adjoints[p] } else { &mats[p] };
                prod = Some(match prod {
                    None => a.clone(),
                    Some(x) => x * a,
                });
            }
            match prod {
                Some(x) => acc += x * t.numeric,
                None => {
                    for i in 0..dim {
                        acc[(i, i)] += t.numeric;
                    }
                }
            }
        }
        operator_norm(&acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: &[&[f64]]) -> CMatrix {
        let n = rows.len();
        CMatrix::from_fn(n, n, |i, j| c(rows[i][j], 0.0))
    }

    fn p() -> Generator {
        Generator::q("a", "a")
    }

    fn idempotent() -> Relation {
        Relation::new(Poly::monomial(Monomial(vec![Factor { generator: p(), starred: false }; 2])), Poly::gen(p()))
    }

    #[test]
    fn generator_text_round_trip() {
        for s in ["u[e1][e2]", "q[a][b]", "gamma[2][k][1][2]", "P[a][b][1][3]", "nu[1][l][1][1]", "x[i][j]"] {
            assert_eq!(s.parse::<Generator>().unwrap().to_string(), s);
        }
        assert!("u[e1]".parse::<Generator>().is_err());
        assert!("w[a][b]".parse::<Generator>().is_err());
    }

    #[test]
    fn self_adjointness_holds_on_booleans() {
        let g = Generator::u("e1", "e2");
        let rel = Relation::new(Poly::gen(g.clone()), Poly::star(g.clone()));
        for v in [false, true] {
            assert!(eval_boolean_commutative(&rel, &BTreeMap::from([(g.clone(), v)])).unwrap());
        }
    }

    #[test]
    fn row_sum_on_booleans() {
        let gens: Vec<Generator> = ["e1", "e2", "e3"].iter().map(|t| Generator::u("e1", t)).collect();
        let rel = Relation::new(Poly::sum(gens.iter().cloned().map(Monomial::of)), Poly::one());
        let one_hot: BTreeMap<_, _> = gens.iter().cloned().zip([false, true, false]).collect();
        let two_hot: BTreeMap<_, _> = gens.iter().cloned().zip([true, true, false]).collect();
        assert!(eval_boolean_commutative(&rel, &one_hot).unwrap());
        assert!(!eval_boolean_commutative(&rel, &two_hot).unwrap());
        assert!(matches!(eval_boolean_commutative(&rel, &BTreeMap::new()), Err(PolyError::MissingSymbol(_))));
    }

    #[test]
    fn idempotent_residuals() {
        let rel = idempotent();
        let proj = BTreeMap::from([(p(), real(&[&[1.0, 0.0], &[0.0, 0.0]]))]);
        assert!(eval_matrix(&rel, &proj).unwrap() < 1e-14);
        let half = BTreeMap::from([(p(), real(&[&[0.5]]))]);
        assert!((eval_matrix(&rel, &half).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn commutator_of_projections_at_45_degrees() {
        let a = Generator::q("a", "a");
        let b = Generator::q("b", "b");
        let ab = Monomial(vec![Factor { generator: a.clone(), starred: false }, Factor { generator: b.clone(), starred: false }]);
        let ba = Monomial(vec![Factor { generator: b.clone(), starred: false }, Factor { generator: a.clone(), starred: false }]);
        let rel = Relation::new(Poly::monomial(ab), Poly::monomial(ba));
        let h = std::f64::consts::FRAC_PI_4;
        let (cs, sn) = (h.cos(), h.sin());
        let assign = BTreeMap::from([
            (a, real(&[&[1.0, 0.0], &[0.0, 0.0]])),
            (b, real(&[&[cs * cs, cs * sn], &[cs * sn, sn * sn]])),
        ]);
        assert!((eval_matrix(&rel, &assign).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let rel = idempotent();
        let assign = BTreeMap::from([(p(), real(&[&[1.0]])), (Generator::q("z", "z"), real(&[&[1.0, 0.0], &[0.0, 1.0]]))]);
        assert!(matches!(eval_matrix(&rel, &assign), Err(PolyError::Dimension { .. })));
    }

    #[test]
    fn json_round_trip_keeps_exact_coefficients() {
        let g = Generator::u("e1", "e2");
        let lhs = Poly::from_terms([(Complex::new(Rational64::new(1, 2), Rational64::new(-3, 4)), Monomial::star_of(g.clone()))]);
        let rel = Relation::new(lhs, Poly::one());
        let v = rel.to_json();
        assert_eq!(v["lhs"][0][0], json!(["1/2", "-3/4"]));
        assert_eq!(v["lhs"][0][1], json!([["u", ["e1", "e2"], true]]));
        assert_eq!(Relation::from_json(&v).unwrap(), rel);
    }

    #[test]
    fn display_is_readable() {
        let g = Generator::u("e1", "e2");
        let h = Generator::u("e1", "e3");
        let rel = Relation::new(Poly::gen(g.clone()).add(&Poly::star(h)), Poly::one());
        assert_eq!(rel.to_string(), "u[e1][e2] + u[e1][e3]* = 1");
        let rel = Relation::new(Poly::gen(g).scale(coeff(-2)), Poly::zero());
        assert_eq!(rel.to_string(), "-2 u[e1][e2] = 0");
    }

    #[test]
    fn substitute_expands_wreath_products() {
        let u = Generator::u("e", "f");
        let (pp, x, y) = (Generator::p("a", "b", 1, 1), Generator::x("a", "a"), Generator::x("b", "b"));
        let rel = Relation::new(Poly::gen(u.clone()), Poly::star(u.clone()));
        let image = Poly::gen(pp.clone()).mul(&Poly::gen(x.clone())).mul(&Poly::gen(y.clone()));
        let out = substitute(&rel, &BTreeMap::from([(u, image.clone())]));
        assert_eq!(out, Relation::new(image.clone(), image.adjoint()));
        assert_eq!(substitute(&rel, &BTreeMap::new()), rel);
    }

    #[test]
    fn compiled_matches_direct_evaluation() {
        let rel = idempotent();
        let sys = CompiledSystem::new([&rel]);
        assert!(sys.holds_boolean(0, &[true]));
        let m = real(&[&[0.5]]);
        assert!((sys.residual(0, std::slice::from_ref(&m), &[m.adjoint()]) - 0.25).abs() < 1e-15);
    }
}
