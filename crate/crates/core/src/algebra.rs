//! Graded *-algebra presentations.
//!
//! Letters carry a family name, an optional index, a star flag and an integer
//! degree. Polynomials are finite maps from letter words to [`Scalar`]s with
//! no zero coefficients; words compare lexicographically so equal polynomials
//! have identical term maps.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalars::{Scalar, ScalarError, ZetaSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("entry ({i},{j}) is not homogeneous of degree {expected}")]
    DegreeMismatch { i: usize, j: usize, expected: i64 },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownLetter(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Short inline name of a letter family (at most 8 ASCII bytes).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    bytes: [u8; 8],
}

impl Symbol {
    pub fn new(name: &str) -> Self {
        assert!(
            !name.is_empty() && name.len() <= 8 && name.is_ascii(),
            "family names are 1..=8 ASCII bytes: {name:?}"
        );
        let mut bytes = [0u8; 8];
        bytes[..name.len()].copy_from_slice(name.as_bytes());
        Symbol { bytes }
    }

    pub fn as_str(&self) -> &str {
        let len = self.bytes.iter().position(|&b| b == 0).unwrap_or(8);
        std::str::from_utf8(&self.bytes[..len]).unwrap()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

/// One-based generator index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Index {
    None,
    One(u32),
    Two(u32, u32),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::None => Ok(()),
            Index::One(i) => write!(f, "[{i}]"),
            Index::Two(i, j) => write!(f, "[{i},{j}]"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub family: Symbol,
    pub index: Index,
    pub starred: bool,
    pub degree: i64,
}

impl Letter {
    pub fn new(family: &str, index: Index, degree: i64) -> Self {
        Letter {
            family: Symbol::new(family),
            index,
            starred: false,
            degree,
        }
    }

    pub fn star(&self) -> Self {
        Letter {
            starred: !self.starred,
            degree: -self.degree,
            ..*self
        }
    }

    /// The unstarred partner.
    pub fn base(&self) -> Self {
        if self.starred {
            self.star()
        } else {
            *self
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.starred, self.index) {
            (false, idx) => write!(f, "{}{}", self.family, idx),
            (true, Index::None) => write!(f, "{}^*", self.family),
            (true, idx) => write!(f, "{}*{}", self.family, idx),
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}<{}>", self.degree)
    }
}

/// Alphabet element of a polynomial ring with a star and a degree.
pub trait Atom: Clone + Ord + Eq + Hash + fmt::Debug + Send + Sync {
    fn star(&self) -> Self;
    fn degree(&self) -> i64;
}

impl Atom for Letter {
    fn star(&self) -> Self {
        Letter::star(self)
    }

    fn degree(&self) -> i64 {
        self.degree
    }
}

/// Degree of a polynomial. The zero polynomial is homogeneous of every degree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Degree {
    Zero,
    Homogeneous(i64),
    NotHomogeneous,
}

impl Degree {
    pub fn is(&self, k: i64) -> bool {
        matches!(self, Degree::Zero) || *self == Degree::Homogeneous(k)
    }
}

/// Degree of a product.
impl std::ops::Add for Degree {
    type Output = Degree;

    fn add(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Zero, _) | (_, Degree::Zero) => Degree::Zero,
            (Degree::Homogeneous(a), Degree::Homogeneous(b)) => Degree::Homogeneous(a + b),
            _ => Degree::NotHomogeneous,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Zero => write!(f, "any (zero)"),
            Degree::Homogeneous(k) => write!(f, "{k}"),
            Degree::NotHomogeneous => write!(f, "NotHomogeneous"),
        }
    }
}

/// Noncommutative polynomial over [`Scalar`] in the atoms `A`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly<A: Atom> {
    terms: BTreeMap<Vec<A>, Scalar>,
}

impl<A: Atom> Poly<A> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::term(Vec::new(), c)
    }

    pub fn term(word: Vec<A>, c: Scalar) -> Self {
        let mut p = Poly::zero();
        p.add_term(word, c);
        p
    }

    pub fn atom(a: A) -> Self {
        Poly::term(vec![a], Scalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<A>, &Scalar)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Vec<A>, Scalar)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, word: &[A]) -> Option<&Scalar> {
        self.terms.get(word)
    }

    /// Coefficient of the empty word.
    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, word: Vec<A>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Poly<A>, c: &Scalar) {
        for (w, k) in &other.terms {
            self.add_term(w.clone(), k * c);
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Poly::zero();
        for (w, k) in &self.terms {
            out.add_term(w.clone(), k * c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Scalar::one());
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Scalar::from_int(-1));
        out
    }

    /// Product by word concatenation, without any reordering.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Poly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = Vec::with_capacity(w1.len() + w2.len());
                w.extend_from_slice(w1);
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }

    /// Antimultiplicative star on words, coefficients conjugated.
    pub fn star_words(&self) -> Self {
        let mut out = Poly::zero();
        for (w, c) in &self.terms {
            let sw: Vec<A> = w.iter().rev().map(Atom::star).collect();
            out.add_term(sw, c.star());
        }
        out
    }

    pub fn degree(&self) -> Degree {
        let mut deg = None;
        for w in self.terms.keys() {
            let d: i64 = w.iter().map(Atom::degree).sum();
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return Degree::NotHomogeneous,
                _ => {}
            }
        }
        deg.map_or(Degree::Zero, Degree::Homogeneous)
    }

    pub fn map_coefficients(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut out = Poly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    pub fn specialize(&self, spec: ZetaSpec) -> Self {
        match spec {
            ZetaSpec::Formal => self.clone(),
            _ => self.map_coefficients(|c| c.specialize(spec)),
        }
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }
}

impl<A: Atom> fmt::Debug for Poly<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Renders `coefficient * word` pairs with the polynomial text grammar.
pub(crate) fn render_terms<'a, W: 'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a W, &'a Scalar)>,
    render_word: impl Fn(&W) -> Option<String>,
) -> fmt::Result {
    let mut first = true;
    for (w, c) in terms {
        let (neg, mag) = match c.terms().next() {
            Some((_, q)) if c.num_terms() == 1 && num_traits::Signed::is_negative(q) => (true, -c),
            _ => (false, c.clone()),
        };
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        }
        first = false;
        let word = render_word(w);
        let coeff = if mag.is_one() {
            None
        } else if mag.as_rational().is_some() {
            Some(mag.to_string())
        } else {
            Some(format!("{{{mag}}}"))
        };
        match (coeff, word) {
            (None, None) => write!(f, "1")?,
            (Some(c), None) => write!(f, "{c}")?,
            (None, Some(w)) => write!(f, "{w}")?,
            (Some(c), Some(w)) => write!(f, "{c}*{w}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

pub type GradedPoly = Poly<Letter>;

impl Poly<Letter> {
    pub fn letter(l: Letter) -> Self {
        Poly::atom(l)
    }

    /// `(ab)* = b* a*`.
    pub fn star(&self) -> Self {
        self.star_words()
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.concat(other)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

impl fmt::Display for Poly<Letter> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_terms(f, self.terms(), |w: &Vec<Letter>| {
            if w.is_empty() {
                None
            } else {
                Some(render_word(w))
            }
        })
    }
}

pub fn render_word(w: &[Letter]) -> String {
    w.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join("*")
}

pub fn degree_of(p: &GradedPoly) -> Degree {
    p.degree()
}

pub fn poly_star(p: &GradedPoly) -> GradedPoly {
    p.star()
}

/// The generator matrix `u` with `deg u[i,j] = d_j - d_i`.
pub fn generator_matrix(family: &str, d: &[i64]) -> Matrix<GradedPoly> {
    let n = d.len();
    Matrix::from_fn(n, n, |i, j| {
        GradedPoly::letter(Letter::new(
            family,
            Index::Two(i as u32 + 1, j as u32 + 1),
            d[j] - d[i],
        ))
    })
}

/// Entry `(i,j)` is `z^{d_i(d_j - d_i)} u*[i,j]`.
pub fn conjugate_matrix(
    u: &Matrix<GradedPoly>,
    d: &[i64],
) -> Result<Matrix<GradedPoly>, AlgebraError> {
    let n = d.len();
    if u.rows() != n || u.cols() != n {
        return Err(AlgebraError::Parse {
            pos: 0,
            msg: format!(
                "matrix is {}x{}, degree tuple has {n} entries",
                u.rows(),
                u.cols()
            ),
        });
    }
    for (i, j, x) in u.entries() {
        let expected = d[j] - d[i];
        if !x.degree().is(expected) {
            return Err(AlgebraError::DegreeMismatch { i, j, expected });
        }
    }
    Ok(u.map(|i, j, x| x.star().scale(&Scalar::zeta_pow(d[i] * (d[j] - d[i])))))
}

/// Product of a scalar matrix and a polynomial matrix (either side).
pub fn scalar_times_poly(a: &Matrix<Scalar>, m: &Matrix<GradedPoly>) -> Matrix<GradedPoly> {
    Matrix::from_fn(a.rows(), m.cols(), |i, j| {
        let mut acc = GradedPoly::zero();
        for k in 0..a.cols() {
            if !a.get(i, k).is_zero() {
                acc.add_assign_scaled(m.get(k, j), a.get(i, k));
            }
        }
        acc
    })
}

pub fn poly_times_scalar(m: &Matrix<GradedPoly>, a: &Matrix<Scalar>) -> Matrix<GradedPoly> {
    Matrix::from_fn(m.rows(), a.cols(), |i, j| {
        let mut acc = GradedPoly::zero();
        for k in 0..m.cols() {
            if !a.get(k, j).is_zero() {
                acc.add_assign_scaled(m.get(i, k), a.get(k, j));
            }
        }
        acc
    })
}

pub fn poly_matrix_mul(a: &Matrix<GradedPoly>, b: &Matrix<GradedPoly>) -> Matrix<GradedPoly> {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut acc = GradedPoly::zero();
        for k in 0..a.cols() {
            acc = acc.plus(&a.get(i, k).mul(b.get(k, j)));
        }
        acc
    })
}

/// Entrywise star followed by transpose.
pub fn poly_adjoint(m: &Matrix<GradedPoly>) -> Matrix<GradedPoly> {
    Matrix::from_fn(m.cols(), m.rows(), |i, j| m.get(j, i).star())
}

/// One scalar relation `poly = constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRelation {
    pub name: String,
    pub poly: GradedPoly,
    pub constant: Scalar,
}

/// The relations `V*V = 1` (`col`) and `VV* = 1` (`row`) entrywise.
pub fn unitarity_relations(name: &str, v: &Matrix<GradedPoly>) -> Vec<NamedRelation> {
    let n = v.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut col = GradedPoly::zero();
            let mut row = GradedPoly::zero();
            for k in 0..n {
                col = col.plus(&v.get(k, i).star().mul(v.get(k, j)));
                row = row.plus(&v.get(i, k).mul(&v.get(j, k).star()));
            }
            let delta = if i == j {
                Scalar::one()
            } else {
                Scalar::zero()
            };
            out.push(NamedRelation {
                name: format!("{name}:col({},{})", i + 1, j + 1),
                poly: col,
                constant: delta.clone(),
            });
            out.push(NamedRelation {
                name: format!("{name}:row({},{})", i + 1, j + 1),
                poly: row,
                constant: delta,
            });
        }
    }
    out
}

/// Declared relation families of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationDecl {
    UnitaryMatrix {
        name: String,
        matrix: Matrix<GradedPoly>,
    },
    /// Isometries `S[1..=n]` with `S*[i] S[j] = delta_ij` and `sum S S* = 1`.
    CuntzFamily {
        family: Symbol,
        degrees: Vec<i64>,
    },
    ExplicitPoly {
        name: String,
        poly: GradedPoly,
    },
    /// Each pair `(x, y, c)` reads `x*y = c * y*x`.
    PhaseCommutation {
        name: String,
        pairs: Vec<(Letter, Letter, Scalar)>,
    },
}

impl RelationDecl {
    pub fn name(&self) -> String {
        match self {
            RelationDecl::UnitaryMatrix { name, .. }
            | RelationDecl::ExplicitPoly { name, .. }
            | RelationDecl::PhaseCommutation { name, .. } => name.clone(),
            RelationDecl::CuntzFamily { family, .. } => format!("cuntz {family}"),
        }
    }

    /// Every relation as `poly = constant`.
    pub fn expand(&self) -> Vec<NamedRelation> {
        match self {
            RelationDecl::UnitaryMatrix { name, matrix } => unitarity_relations(name, matrix),
            RelationDecl::CuntzFamily { family, degrees } => {
                let n = degrees.len();
                let s =
                    |i: usize| Letter::new(family.as_str(), Index::One(i as u32 + 1), degrees[i]);
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        out.push(NamedRelation {
                            name: format!("{family}:iso({},{})", i + 1, j + 1),
                            poly: GradedPoly::term(vec![s(i).star(), s(j)], Scalar::one()),
                            constant: if i == j {
                                Scalar::one()
                            } else {
                                Scalar::zero()
                            },
                        });
                    }
                }
                let mut sum = GradedPoly::zero();
                for i in 0..n {
                    sum.add_term(vec![s(i), s(i).star()], Scalar::one());
                }
                out.push(NamedRelation {
                    name: format!("{family}:sum"),
                    poly: sum,
                    constant: Scalar::one(),
                });
                out
            }
            RelationDecl::ExplicitPoly { name, poly } => vec![NamedRelation {
                name: name.clone(),
                poly: poly.clone(),
                constant: Scalar::zero(),
            }],
            RelationDecl::PhaseCommutation { name, pairs } => pairs
                .iter()
                .map(|(x, y, c)| NamedRelation {
                    name: format!("{name}({x},{y})"),
                    poly: GradedPoly::term(vec![*x, *y], Scalar::one())
                        .minus(&GradedPoly::term(vec![*y, *x], c.clone())),
                    constant: Scalar::zero(),
                })
                .collect(),
        }
    }
}

/// Generators, degree data and relations of a graded *-algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<Letter>,
    pub d: Vec<i64>,
    pub d_prime: Option<Vec<i64>>,
    pub d0: Option<i64>,
    pub relations: Vec<RelationDecl>,
}

impl Presentation {
    pub fn degree_lookup(&self) -> impl Fn(&str, &Index) -> Option<i64> + '_ {
        move |name: &str, idx: &Index| {
            self.generators
                .iter()
                .find(|l| l.family.as_str() == name && l.index == *idx)
                .map(|l| l.degree)
        }
    }

    /// Relations whose polynomial minus constant is not homogeneous of degree 0.
    pub fn inhomogeneous_relations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for decl in &self.relations {
            for r in decl.expand() {
                let full = r.poly.minus(&GradedPoly::constant(r.constant.clone()));
                if !full.degree().is(0) {
                    bad.push(r.name);
                }
            }
        }
        bad
    }

    /// Sectioned text dump; stable across runs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.name));
        out.push_str("[generators]\n");
        let gens: Vec<String> = self.generators.iter().map(|l| l.to_string()).collect();
        out.push_str(&gens.join(" "));
        out.push('\n');
        out.push_str("[degrees]\n");
        out.push_str(&format!("d = {}\n", join_ints(&self.d)));
        if let Some(dp) = &self.d_prime {
            out.push_str(&format!("d' = {}\n", join_ints(dp)));
        }
        if let Some(d0) = self.d0 {
            out.push_str(&format!("d0 = {d0}\n"));
        }
        for l in &self.generators {
            out.push_str(&format!("deg {l} = {}\n", l.degree));
        }
        out.push_str("[relations]\n");
        for decl in &self.relations {
            match decl {
                RelationDecl::UnitaryMatrix { name, matrix } => {
                    out.push_str(&format!("unitary {name}\n"));
                    for (i, j, x) in matrix.entries() {
                        out.push_str(&format!("  {name}[{},{}] := {x}\n", i + 1, j + 1));
                    }
                }
                RelationDecl::CuntzFamily { family, degrees } => {
                    out.push_str(&format!(
                        "cuntz {family} n={} degrees={}\n",
                        degrees.len(),
                        join_ints(degrees)
                    ));
                }
                RelationDecl::ExplicitPoly { name, .. } => {
                    out.push_str(&format!("explicit {name}\n"));
                }
                RelationDecl::PhaseCommutation { name, .. } => {
                    out.push_str(&format!("commutation {name}\n"));
                }
            }
            for r in decl.expand() {
                out.push_str(&format!("  {}: {} = {}\n", r.name, r.poly, r.constant));
            }
        }
        out
    }
}

pub fn join_ints(v: &[i64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parsed polynomial expression before evaluation in a concrete algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Scalar(Scalar),
    Letter(Letter),
    Leg(usize, Box<Expr>),
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
}

impl Expr {
    /// Evaluates in the graded algebra; leg markers are rejected.
    pub fn to_graded(&self) -> Result<GradedPoly, AlgebraError> {
        Ok(match self {
            Expr::Scalar(c) => GradedPoly::constant(c.clone()),
            Expr::Letter(l) => GradedPoly::letter(*l),
            Expr::Leg(..) => {
                return Err(AlgebraError::Parse {
                    pos: 0,
                    msg: "leg marker in a single-leg expression".into(),
                })
            }
            Expr::Sum(parts) => {
                let mut acc = GradedPoly::zero();
                for (neg, e) in parts {
                    let p = e.to_graded()?;
                    acc = if *neg { acc.minus(&p) } else { acc.plus(&p) };
                }
                acc
            }
            Expr::Product(parts) => {
                let mut acc = GradedPoly::one();
                for e in parts {
                    acc = acc.mul(&e.to_graded()?);
                }
                acc
            }
        })
    }
}

struct ExprParser<'a, 'f> {
    src: &'a [u8],
    pos: usize,
    degree: &'f dyn Fn(&str, &Index) -> Option<i64>,
}

impl<'a, 'f> ExprParser<'a, 'f> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, AlgebraError> {
        Err(AlgebraError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u32, AlgebraError> {
        self.peek();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err("expected an index"))
    }

    fn sum(&mut self) -> Result<Expr, AlgebraError> {
        let mut parts = Vec::new();
        let mut neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        loop {
            parts.push((neg, self.product()?));
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    neg = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    neg = true;
                }
                _ => break,
            }
        }
        Ok(if parts.len() == 1 && !parts[0].0 {
            parts.pop().unwrap().1
        } else {
            Expr::Sum(parts)
        })
    }

    fn product(&mut self) -> Result<Expr, AlgebraError> {
        let mut parts = vec![self.factor()?];
        while self.eat(b'*') {
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Product(parts)
        })
    }

    fn factor(&mut self) -> Result<Expr, AlgebraError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(b'{') => {
                self.pos += 1;
                let start = self.pos;
                let end = self.src[start..]
                    .iter()
                    .position(|&b| b == b'}')
                    .map(|k| start + k)
                    .ok_or_else(|| AlgebraError::Parse {
                        pos: start,
                        msg: "unclosed `{`".into(),
                    })?;
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let c: Scalar = text.parse().map_err(|e| match e {
                    ScalarError::Parse { pos, msg } => AlgebraError::Parse {
                        pos: start + pos,
                        msg,
                    },
                    other => AlgebraError::Scalar(other),
                })?;
                self.pos = end + 1;
                Ok(Expr::Scalar(c))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'/')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let c: Scalar = text.parse().map_err(|_| AlgebraError::Parse {
                    pos: start,
                    msg: format!("bad rational `{text}`"),
                })?;
                Ok(Expr::Scalar(c))
            }
            Some(c) if c.is_ascii_alphabetic() => self.letter_or_leg(),
            Some(_) => self.err("unexpected character"),
        }
    }

    fn letter_or_leg(&mut self) -> Result<Expr, AlgebraError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        let leg = name
            .strip_prefix('j')
            .filter(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()));
        if let Some(k) = leg {
            if self.src.get(self.pos) == Some(&b'(') {
                let k: usize = k.parse().unwrap();
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected `)` closing leg");
                }
                return Ok(Expr::Leg(k, Box::new(inner)));
            }
        }
        if name.len() > 8 {
            return self.err(format!("family name `{name}` longer than 8 bytes"));
        }
        let mut starred = false;
        if self.src[self.pos..].starts_with(b"^*") {
            starred = true;
            self.pos += 2;
        } else if self.src[self.pos..].starts_with(b"*[") {
            starred = true;
            self.pos += 1;
        }
        let index = if self.src.get(self.pos) == Some(&b'[') {
            self.pos += 1;
            let i = self.number()?;
            let idx = if self.eat(b',') {
                Index::Two(i, self.number()?)
            } else {
                Index::One(i)
            };
            if !self.eat(b']') {
                return self.err("expected `]`");
            }
            idx
        } else {
            Index::None
        };
        let deg = (self.degree)(&name, &index)
            .ok_or_else(|| AlgebraError::UnknownLetter(format!("{name}{index}")))?;
        let l = Letter::new(&name, index, deg);
        Ok(Expr::Letter(if starred { l.star() } else { l }))
    }
}

/// Parses the polynomial text grammar; `degree` resolves unstarred letters.
pub fn parse_expr(
    text: &str,
    degree: &dyn Fn(&str, &Index) -> Option<i64>,
) -> Result<Expr, AlgebraError> {
    let mut p = ExprParser {
        src: text.as_bytes(),
        pos: 0,
        degree,
    };
    let e = p.sum()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

pub fn parse_graded(
    text: &str,
    degree: &dyn Fn(&str, &Index) -> Option<i64>,
) -> Result<GradedPoly, AlgebraError> {
    parse_expr(text, degree)?.to_graded()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: u32, j: u32, d: &[i64]) -> Letter {
        Letter::new("u", Index::Two(i, j), d[j as usize - 1] - d[i as usize - 1])
    }

    #[test]
    fn star_examples() {
        let d = [0, 0];
        let p = GradedPoly::letter(u(1, 2, &d));
        assert_eq!(p.star(), GradedPoly::letter(u(1, 2, &d).star()));
        let q = GradedPoly::term(vec![u(1, 1, &d), u(2, 2, &d)], Scalar::one());
        assert_eq!(
            q.star(),
            GradedPoly::term(vec![u(2, 2, &d).star(), u(1, 1, &d).star()], Scalar::one())
        );
        let r = GradedPoly::term(vec![u(1, 2, &d)], Scalar::zeta_pow(1));
        assert_eq!(
            r.star(),
            GradedPoly::term(vec![u(1, 2, &d).star()], Scalar::zeta_pow(-1))
        );
    }

    #[test]
    fn degree_examples() {
        let d = [1, 3];
        assert_eq!(
            GradedPoly::letter(u(1, 2, &d)).degree(),
            Degree::Homogeneous(2)
        );
        assert_eq!(
            GradedPoly::letter(u(1, 2, &d).star()).degree(),
            Degree::Homogeneous(-2)
        );
        let mixed = GradedPoly::letter(u(1, 2, &d)).plus(&GradedPoly::letter(u(2, 1, &d)));
        assert_eq!(mixed.degree(), Degree::NotHomogeneous);
    }

    #[test]
    fn conjugate_examples() {
        let d = [0, 1];
        let um = generator_matrix("u", &d);
        let c = conjugate_matrix(&um, &d).unwrap();
        assert_eq!(*c.get(0, 1), GradedPoly::letter(u(1, 2, &d).star()));
        assert_eq!(
            *c.get(1, 0),
            GradedPoly::term(vec![u(2, 1, &d).star()], Scalar::zeta_pow(-1))
        );
        let one = [5];
        let c1 = conjugate_matrix(&generator_matrix("u", &one), &one).unwrap();
        assert_eq!(*c1.get(0, 0), GradedPoly::letter(u(1, 1, &one).star()));
        let zero = [0, 0];
        let c0 = conjugate_matrix(&generator_matrix("u", &zero), &zero).unwrap();
        for (i, j, x) in c0.entries() {
            assert_eq!(
                *x,
                GradedPoly::letter(u(i as u32 + 1, j as u32 + 1, &zero).star())
            );
        }
    }

    #[test]
    fn conjugate_twice_picks_up_phase() {
        let d = [0i64, 1];
        let um = generator_matrix("u", &d);
        let once = conjugate_matrix(&um, &d).unwrap();
        let neg: Vec<i64> = d.iter().map(|x| -x).collect();
        let twice = conjugate_matrix(&once, &neg).unwrap();
        // z^{-d_i(d_j-d_i)} from the star cancels z^{d_i(d_j-d_i)} from -d.
        for (i, j, x) in twice.entries() {
            let phase = Scalar::zeta_pow(-d[i] * (d[j] - d[i]) + d[i] * (d[j] - d[i]));
            assert_eq!(*x, um.get(i, j).scale(&phase));
        }
        assert_eq!(twice, um);
    }

    #[test]
    fn conjugate_rejects_bad_degrees() {
        let um = generator_matrix("u", &[0, 1]);
        assert!(matches!(
            conjugate_matrix(&um, &[0, 2]),
            Err(AlgebraError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let d = [0i64, 1];
        let lookup = |name: &str, idx: &Index| match (name, idx) {
            ("u", Index::Two(i, j)) => Some(d[*j as usize - 1] - d[*i as usize - 1]),
            ("z", Index::None) => Some(1),
            _ => None,
        };
        let text = "u[1,2]*u*[2,1] - {z^-1 + 2}*u[1,1] + 3/2*z^**u[2,2] + 1";
        let p = parse_graded(text, &lookup).unwrap();
        let again = parse_graded(&p.to_string(), &lookup).unwrap();
        assert_eq!(p, again);
        assert!(parse_graded("v[1,1]", &lookup).is_err());
        assert!(parse_graded("u[1,1", &lookup).is_err());
    }
}
