//! Irreducible representations `(x, w)`, `x ∈ ℤ`, `w` a word in the free
//! monoid on two letters, and their fusion rules for diagonal `F`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::braided::LegLayout;
use crate::simplify::SuiteReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FusionError {
    #[error("bad irrep `{0}`: expected `(x; word)` with word over a, b or `e`")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    /// The fundamental representation.
    A,
    /// Its conjugate.
    B,
}

impl Gen {
    pub fn bar(self) -> Gen {
        match self {
            Gen::A => Gen::B,
            Gen::B => Gen::A,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// All words of length exactly `len`, lexicographic with `a < b`.
    pub fn all_of_len(len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    [Gen::A, Gen::B].map(|g| {
                        let mut v = w.0.clone();
                        v.push(g);
                        Word(v)
                    })
                })
                .collect();
        }
        out
    }

    /// All words of length at most `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(Word::all_of_len).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for g in &self.0 {
            f.write_str(match g {
                Gen::A => "a",
                Gen::B => "b",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(FusionError::Parse(s.into()));
        }
        s.chars()
            .map(|c| match c {
                'a' | 'A' => Ok(Gen::A),
                'b' | 'B' => Ok(Gen::B),
                _ => Err(FusionError::Parse(s.into())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// Reverse and swap the two letters.
pub fn word_bar(w: &Word) -> Word {
    Word(w.0.iter().rev().map(|g| g.bar()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Irrep {
    pub x: i64,
    pub w: Word,
}

impl Irrep {
    pub fn new(x: i64, w: Word) -> Self {
        Irrep { x, w }
    }

    pub fn trivial() -> Self {
        Irrep::new(0, Word::empty())
    }
}

/// `x` ascending, then longer words first, then lexicographic.
impl Ord for Irrep {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x
            .cmp(&other.x)
            .then(other.w.len().cmp(&self.w.len()))
            .then(self.w.cmp(&other.w))
    }
}

impl PartialOrd for Irrep {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", self.x, self.w)
    }
}

impl FromStr for Irrep {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FusionError::Parse(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(err)?;
        let (x, w) = inner.split_once(';').ok_or_else(err)?;
        let x = x.trim().parse().map_err(|_| err())?;
        let w = w.parse().map_err(|_| err())?;
        Ok(Irrep { x, w })
    }
}

/// Multiset of irreps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FusionResult(pub BTreeMap<Irrep, u64>);

impl FusionResult {
    pub fn single(r: Irrep) -> Self {
        FusionResult(BTreeMap::from([(r, 1)]))
    }

    pub fn add(&mut self, r: Irrep, mult: u64) {
        *self.0.entry(r).or_insert(0) += mult;
    }

    pub fn multiplicity(&self, r: &Irrep) -> u64 {
        self.0.get(r).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Irrep, &u64)> {
        self.0.iter()
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// `Σ mult · dim`.
    pub fn dimension(&self, n: u64) -> u128 {
        self.0
            .iter()
            .map(|(r, &m)| m as u128 * dimension(&r.w, n))
            .sum()
    }

    pub fn map(&self, f: impl Fn(&Irrep) -> Irrep) -> Self {
        let mut out = FusionResult::default();
        for (r, &m) in &self.0 {
            out.add(f(r), m);
        }
        out
    }

    /// Extends `⊗` bilinearly.
    pub fn fuse_with(&self, other: &FusionResult) -> Self {
        let mut out = FusionResult::default();
        for (r, &m) in &self.0 {
            for (s, &k) in &other.0 {
                for (t, &j) in &fuse(r, s).0 {
                    out.add(t.clone(), m * k * j);
                }
            }
        }
        out
    }
}

impl fmt::Display for FusionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, m) in &self.0 {
            writeln!(f, "{m} × {r}")?;
        }
        Ok(())
    }
}

/// `r ⊗ s = ⊕ (r.x + s.x, a·b)` over `r.w = a·g`, `s.w = bar(g)·b`.
pub fn fuse(r: &Irrep, s: &Irrep) -> FusionResult {
    let mut out = FusionResult::default();
    let x = r.x + s.x;
    let rw = &r.w.0;
    let sw = &s.w.0;
    for k in 0..=rw.len().min(sw.len()) {
        let (a, g) = rw.split_at(rw.len() - k);
        let matches = g.iter().rev().zip(sw).all(|(gl, sl)| gl.bar() == *sl);
        if matches {
            let w: Vec<Gen> = a.iter().chain(&sw[k..]).copied().collect();
            out.add(Irrep::new(x, Word(w)), 1);
        }
    }
    out
}

pub fn conjugate_irrep(r: &Irrep) -> Irrep {
    Irrep::new(-r.x, word_bar(&r.w))
}

/// Dimension of the irrep with word `w` when the fundamental one has
/// dimension `n`: `dim(vA) = n dim(v) - [v = v'B] dim(v')` and its mirror.
///
/// For `n = 1` every irrep is one-dimensional.
///
/// # Panics
/// On overflow of `u128`.
pub fn dimension(w: &Word, n: u64) -> u128 {
    if n <= 1 {
        return 1;
    }
    let n = n as u128;
    let l = &w.0;
    let mut dims: Vec<u128> = Vec::with_capacity(l.len() + 1);
    dims.push(1);
    for k in 1..=l.len() {
        let mut v = n
            .checked_mul(dims[k - 1])
            .expect("dimension overflows u128");
        if k >= 2 && l[k - 2] != l[k - 1] {
            v -= dims[k - 2];
        }
        dims.push(v);
    }
    dims[l.len()]
}

/// Exhaustive consistency of the fusion rules over words of length at most
/// `max_len`.
pub fn check_fusion_ring(n: u64, max_len: usize) -> SuiteReport {
    let lay = LegLayout::braided(1);
    let words = Word::all_up_to(max_len);
    let irreps: Vec<Irrep> = words.iter().map(|w| Irrep::new(0, w.clone())).collect();
    let mut rep = SuiteReport::new(format!("fusion ring n={n} max_len={max_len}"));

    let mut assoc = 0usize;
    let mut bad_assoc = Vec::new();
    for r in &irreps {
        for s in &irreps {
            let rs = fuse(r, s);
            for t in &irreps {
                let left = rs.fuse_with(&FusionResult::single(t.clone()));
                let right = FusionResult::single(r.clone()).fuse_with(&fuse(s, t));
                assoc += 1;
                if left != right {
                    bad_assoc.push(format!("{r} {s} {t}"));
                }
            }
        }
    }
    rep.push_bool(
        format!("associativity ({assoc} triples)"),
        bad_assoc.is_empty(),
        &lay,
    );

    let mut pairs = 0usize;
    let (mut bad_dim, mut bad_conj) = (0usize, 0usize);
    for r in &irreps {
        for s in &irreps {
            pairs += 1;
            let rs = fuse(r, s);
            if rs.dimension(n) != dimension(&r.w, n) * dimension(&s.w, n) {
                bad_dim += 1;
            }
            if rs.map(conjugate_irrep) != fuse(&conjugate_irrep(s), &conjugate_irrep(r)) {
                bad_conj += 1;
            }
        }
    }
    rep.push_bool(
        format!("dimension multiplicativity ({pairs} pairs)"),
        bad_dim == 0,
        &lay,
    );
    rep.push_bool(
        format!("conjugation reverses products ({pairs} pairs)"),
        bad_conj == 0,
        &lay,
    );

    let frob = irreps
        .iter()
        .all(|r| fuse(r, &conjugate_irrep(r)).multiplicity(&Irrep::trivial()) == 1);
    rep.push_bool(
        format!("trivial summand of r ⊗ conj(r) ({} irreps)", irreps.len()),
        frob,
        &lay,
    );

    let unit = irreps.iter().all(|r| {
        fuse(r, &Irrep::trivial()) == FusionResult::single(r.clone())
            && fuse(&Irrep::trivial(), r) == FusionResult::single(r.clone())
    });
    rep.push_bool("unit", unit, &lay);

    let shifts = [-1i64, 0, 2];
    let additive = irreps.iter().all(|r| {
        irreps.iter().all(|s| {
            shifts.iter().all(|&x| {
                shifts.iter().all(|&y| {
                    let a = Irrep::new(x, r.w.clone());
                    let b = Irrep::new(y, s.w.clone());
                    fuse(&a, &b).iter().all(|(t, _)| t.x == x + y)
                })
            })
        })
    });
    rep.push_bool("z-degree additivity", additive, &lay);
    rep
}

/// `word<TAB>dim` for all words up to `max_len`.
pub fn dims_table(n: u64, max_len: usize) -> String {
    let mut out = String::from("word\tdim\n");
    for w in Word::all_up_to(max_len) {
        out.push_str(&format!("{w}\t{}\n", dimension(&w, n)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ir(s: &str) -> Irrep {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn bar_examples() {
        assert_eq!(word_bar(&w("e")), w("e"));
        assert_eq!(word_bar(&w("a")), w("b"));
        assert_eq!(word_bar(&w("ab")), w("ab"));
        assert_eq!(word_bar(&w("aab")), w("abb"));
    }

    #[test]
    fn fuse_examples() {
        assert_eq!(
            fuse(&ir("(0;e)"), &ir("(4;abba)")),
            FusionResult::single(ir("(4;abba)"))
        );
        let r = fuse(&ir("(0;a)"), &ir("(0;b)"));
        assert_eq!(r.to_string(), "1 × (0; ab)\n1 × (0; e)\n");
        let r = fuse(&ir("(1;aa)"), &ir("(2;bb)"));
        assert_eq!(r.to_string(), "1 × (3; aabb)\n1 × (3; ab)\n1 × (3; e)\n");
        // a ⊗ a has no cancellation.
        assert_eq!(
            fuse(&ir("(0;a)"), &ir("(0;a)")),
            FusionResult::single(ir("(0;aa)"))
        );
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_irrep(&ir("(0;e)")), ir("(0;e)"));
        assert_eq!(conjugate_irrep(&ir("(1;a)")), ir("(-1;b)"));
        assert_eq!(conjugate_irrep(&ir("(-2;ab)")), ir("(2;ab)"));
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(&w("e"), 5), 1);
        assert_eq!(dimension(&w("a"), 2), 2);
        assert_eq!(dimension(&w("ab"), 2), 3);
        assert_eq!(dimension(&w("ab"), 3), 8);
        assert_eq!(dimension(&w("aa"), 3), 9);
        assert_eq!(fuse(&ir("(0;a)"), &ir("(0;b)")).dimension(3), 9);
    }

    #[test]
    fn ring_checks_small() {
        let rep = check_fusion_ring(2, 2);
        assert!(rep.is_verified(), "{}", rep.render(false));
    }

    #[test]
    fn parsing() {
        assert_eq!(ir(" ( -3 ; AbB ) "), Irrep::new(-3, w("abb")));
        assert!("(1;c)".parse::<Irrep>().is_err());
        assert!("1;a".parse::<Irrep>().is_err());
        assert!("(x;a)".parse::<Irrep>().is_err());
        assert!("(1;)".parse::<Irrep>().is_err());
    }
}
