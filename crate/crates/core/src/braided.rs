//! Iterated braided tensor products as leg-tagged words.
//!
//! A word is in normal form when its legs are nondecreasing. Moving a letter
//! `y` on leg `s` to the right of a letter `x` on leg `r < s` costs the phase
//! `z^{deg y * deg x}`. Legs in different tensor blocks (plain `⊗`, used for
//! the output of [`psi_flatten`]) commute with phase 1.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{
    parse_expr, render_terms, AlgebraError, Atom, Degree, Expr, GradedPoly, Index, Letter, Poly,
};
use crate::scalars::{Scalar, ZetaSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidedError {
    #[error("leg {leg} out of range 1..={num_legs}")]
    BadLeg { leg: usize, num_legs: usize },
    #[error("leg layouts differ: {0} vs {1}")]
    LegMismatch(String, String),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeggedLetter {
    /// One-based leg.
    pub leg: u8,
    pub letter: Letter,
}

impl LeggedLetter {
    pub fn new(leg: usize, letter: Letter) -> Self {
        LeggedLetter {
            leg: leg as u8,
            letter,
        }
    }
}

impl Atom for LeggedLetter {
    fn star(&self) -> Self {
        LeggedLetter {
            leg: self.leg,
            letter: self.letter.star(),
        }
    }

    fn degree(&self) -> i64 {
        self.letter.degree
    }
}

impl fmt::Debug for LeggedLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}({:?})", self.leg, self.letter)
    }
}

/// Which legs braid with each other: legs braid iff they share a block.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LegLayout {
    blocks: Vec<u8>,
}

impl LegLayout {
    /// `n` legs, all braided.
    pub fn braided(n: usize) -> Self {
        assert!(n >= 1, "at least one leg");
        LegLayout { blocks: vec![0; n] }
    }

    /// Plain tensor product of braided factors with the given leg counts.
    pub fn tensor(factors: &[usize]) -> Self {
        let mut blocks = Vec::new();
        for (b, &k) in factors.iter().enumerate() {
            blocks.extend(std::iter::repeat_n(b as u8, k));
        }
        LegLayout { blocks }
    }

    pub fn num_legs(&self) -> usize {
        self.blocks.len()
    }

    /// Whether legs `r` and `s` (one-based) pick up phases when exchanged.
    pub fn braids(&self, r: u8, s: u8) -> bool {
        self.blocks[r as usize - 1] == self.blocks[s as usize - 1]
    }

    pub fn block_of(&self, leg: u8) -> u8 {
        self.blocks[leg as usize - 1]
    }
}

impl fmt::Debug for LegLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LegLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.blocks.len() {
            let b = self.blocks[i];
            let mut k = 0;
            while i < self.blocks.len() && self.blocks[i] == b {
                k += 1;
                i += 1;
            }
            parts.push(k.to_string());
        }
        write!(f, "legs[{}]", parts.join("|"))
    }
}

/// Sorts a word by leg (stable) by insertion, returning the total phase exponent.
pub fn sort_word(word: &mut [LeggedLetter], layout: &LegLayout) -> i64 {
    let mut phase = 0i64;
    for i in 1..word.len() {
        let mut k = i;
        while k > 0 && word[k - 1].leg > word[k].leg {
            let (y, x) = (word[k - 1], word[k]);
            if layout.braids(y.leg, x.leg) {
                phase += y.letter.degree * x.letter.degree;
            }
            word.swap(k - 1, k);
            k -= 1;
        }
    }
    phase
}

/// Bubble-sort variant of [`sort_word`], also returning the swap sequence.
pub fn sort_word_bubble(word: &mut [LeggedLetter], layout: &LegLayout) -> (i64, Vec<usize>) {
    let mut phase = 0i64;
    let mut swaps = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for k in 1..word.len() {
            if word[k - 1].leg > word[k].leg {
                let (y, x) = (word[k - 1], word[k]);
                if layout.braids(y.leg, x.leg) {
                    phase += y.letter.degree * x.letter.degree;
                }
                word.swap(k - 1, k);
                swaps.push(k - 1);
                changed = true;
            }
        }
    }
    (phase, swaps)
}

/// Polynomial in the braided product of `num_legs` algebras, in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LeggedPoly {
    poly: Poly<LeggedLetter>,
    layout: LegLayout,
}

impl LeggedPoly {
    pub fn zero(layout: &LegLayout) -> Self {
        LeggedPoly {
            poly: Poly::zero(),
            layout: layout.clone(),
        }
    }

    pub fn one(layout: &LegLayout) -> Self {
        LeggedPoly::constant(Scalar::one(), layout)
    }

    pub fn constant(c: Scalar, layout: &LegLayout) -> Self {
        LeggedPoly {
            poly: Poly::constant(c),
            layout: layout.clone(),
        }
    }

    /// Adds `c * word` after sorting `word`.
    pub fn add_word(&mut self, mut word: Vec<LeggedLetter>, c: Scalar) {
        let phase = sort_word(&mut word, &self.layout);
        let c = if phase == 0 { c } else { c.shift(phase) };
        self.poly.add_term(word, c);
    }

    /// Adds a word the caller guarantees is already sorted.
    pub fn add_sorted_word(&mut self, word: Vec<LeggedLetter>, c: Scalar) {
        debug_assert!(word.windows(2).all(|w| w[0].leg <= w[1].leg));
        self.poly.add_term(word, c);
    }

    pub fn from_words(
        layout: &LegLayout,
        words: impl IntoIterator<Item = (Vec<LeggedLetter>, Scalar)>,
    ) -> Self {
        let mut out = LeggedPoly::zero(layout);
        for (w, c) in words {
            out.add_word(w, c);
        }
        out
    }

    /// `j_k(p)` inside an all-braided product of `num_legs` factors.
    pub fn embed(k: usize, p: &GradedPoly, num_legs: usize) -> Result<Self, BraidedError> {
        LeggedPoly::embed_in(k, p, &LegLayout::braided(num_legs.max(1)))
    }

    pub fn embed_in(k: usize, p: &GradedPoly, layout: &LegLayout) -> Result<Self, BraidedError> {
        if k == 0 || k > layout.num_legs() {
            return Err(BraidedError::BadLeg {
                leg: k,
                num_legs: layout.num_legs(),
            });
        }
        let mut out = LeggedPoly::zero(layout);
        for (w, c) in p.terms() {
            let lw = w.iter().map(|l| LeggedLetter::new(k, *l)).collect();
            out.poly.add_term(lw, c.clone());
        }
        Ok(out)
    }

    /// Single letter on leg `k`.
    pub fn letter(k: usize, l: Letter, layout: &LegLayout) -> Self {
        let mut out = LeggedPoly::zero(layout);
        out.poly
            .add_term(vec![LeggedLetter::new(k, l)], Scalar::one());
        out
    }

    pub fn layout(&self) -> &LegLayout {
        &self.layout
    }

    pub fn num_legs(&self) -> usize {
        self.layout.num_legs()
    }

    pub fn poly(&self) -> &Poly<LeggedLetter> {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn len(&self) -> usize {
        self.poly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<LeggedLetter>, &Scalar)> {
        self.poly.terms()
    }

    pub fn coefficient(&self, word: &[LeggedLetter]) -> Option<&Scalar> {
        self.poly.coefficient(word)
    }

    fn check_layout(&self, other: &Self) -> Result<(), BraidedError> {
        if self.layout != other.layout {
            return Err(BraidedError::LegMismatch(
                self.layout.to_string(),
                other.layout.to_string(),
            ));
        }
        Ok(())
    }

    /// Concatenation followed by leg sorting.
    pub fn braided_mul(&self, other: &Self) -> Result<Self, BraidedError> {
        self.check_layout(other)?;
        let mut out = LeggedPoly::zero(&self.layout);
        for (w1, c1) in self.poly.terms() {
            for (w2, c2) in other.poly.terms() {
                let mut w = Vec::with_capacity(w1.len() + w2.len());
                w.extend_from_slice(w1);
                w.extend_from_slice(w2);
                out.add_word(w, c1 * c2);
            }
        }
        Ok(out)
    }

    /// [`braided_mul`](Self::braided_mul) for operands known to share a layout.
    ///
    /// # Panics
    /// If the layouts differ.
    pub fn mul(&self, other: &Self) -> Self {
        self.braided_mul(other).expect("layout mismatch")
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout, "layout mismatch");
        LeggedPoly {
            poly: self.poly.plus(&other.poly),
            layout: self.layout.clone(),
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout, "layout mismatch");
        LeggedPoly {
            poly: self.poly.minus(&other.poly),
            layout: self.layout.clone(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, c: &Scalar) {
        assert_eq!(self.layout, other.layout, "layout mismatch");
        self.poly.add_assign_scaled(&other.poly, c);
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        LeggedPoly {
            poly: self.poly.scale(c),
            layout: self.layout.clone(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = LeggedPoly::one(&self.layout);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Reverse, star each letter, conjugate coefficients, re-sort.
    pub fn star(&self) -> Self {
        let mut out = LeggedPoly::zero(&self.layout);
        for (w, c) in self.poly.terms() {
            let sw: Vec<LeggedLetter> = w.iter().rev().map(Atom::star).collect();
            out.add_word(sw, c.star());
        }
        out
    }

    pub fn degree(&self) -> Degree {
        self.poly.degree()
    }

    pub fn specialize(&self, spec: ZetaSpec) -> Self {
        LeggedPoly {
            poly: self.poly.specialize(spec),
            layout: self.layout.clone(),
        }
    }

    /// Applies the algebra map sending each unstarred letter to `image(letter)`;
    /// starred letters go to the star of the image.
    pub fn substitute(
        &self,
        target: &LegLayout,
        image: impl Fn(&LeggedLetter) -> Result<LeggedPoly, BraidedError>,
    ) -> Result<LeggedPoly, BraidedError> {
        let mut cache: HashMap<LeggedLetter, LeggedPoly> = HashMap::new();
        let mut out = LeggedPoly::zero(target);
        for (w, c) in self.poly.terms() {
            let mut acc = LeggedPoly::constant(c.clone(), target);
            for l in w {
                if !cache.contains_key(l) {
                    let img = if l.letter.starred {
                        image(&l.star())?.star()
                    } else {
                        image(l)?
                    };
                    if img.layout != *target {
                        return Err(BraidedError::LegMismatch(
                            img.layout.to_string(),
                            target.to_string(),
                        ));
                    }
                    cache.insert(*l, img);
                }
                acc = acc.mul(&cache[l]);
            }
            out.poly.add_assign_scaled(&acc.poly, &Scalar::one());
        }
        Ok(out)
    }

    /// Applies a linear functional to the leg-1 part of every monomial and
    /// drops leg 1; the remaining legs are renumbered from 1.
    ///
    /// `f` receives the leg-1 letters (the normal-form prefix).
    pub fn apply_leg1_functional(
        &self,
        f: impl Fn(&[Letter]) -> Scalar,
    ) -> Result<LeggedPoly, BraidedError> {
        if self.num_legs() < 2 {
            return Err(BraidedError::BadShape(
                "functional on leg 1 needs at least two legs".into(),
            ));
        }
        let layout = LegLayout {
            blocks: self.layout.blocks[1..].to_vec(),
        };
        let mut out = LeggedPoly::zero(&layout);
        let mut memo: HashMap<Vec<Letter>, Scalar> = HashMap::new();
        for (w, c) in self.poly.terms() {
            let split = w.iter().position(|l| l.leg != 1).unwrap_or(w.len());
            let head: Vec<Letter> = w[..split].iter().map(|l| l.letter).collect();
            let val = memo.entry(head.clone()).or_insert_with(|| f(&head)).clone();
            if val.is_zero() {
                continue;
            }
            let rest: Vec<LeggedLetter> = w[split..]
                .iter()
                .map(|l| LeggedLetter::new(l.leg as usize - 1, l.letter))
                .collect();
            out.poly.add_term(rest, c * &val);
        }
        Ok(out)
    }

    /// Letters of one leg, as a graded polynomial, when only that leg is used.
    pub fn as_single_leg(&self, leg: u8) -> Option<GradedPoly> {
        let mut out = GradedPoly::zero();
        for (w, c) in self.poly.terms() {
            if w.iter().any(|l| l.leg != leg) {
                return None;
            }
            out.add_term(w.iter().map(|l| l.letter).collect(), c.clone());
        }
        Some(out)
    }
}

pub fn braided_mul(p: &LeggedPoly, q: &LeggedPoly) -> Result<LeggedPoly, BraidedError> {
    p.braided_mul(q)
}

pub fn degree_of_legged(p: &LeggedPoly) -> Degree {
    p.degree()
}

pub fn render_legged_word(w: &[LeggedLetter]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let leg = w[i].leg;
        let mut group = Vec::new();
        while i < w.len() && w[i].leg == leg {
            group.push(w[i].letter.to_string());
            i += 1;
        }
        parts.push(format!("j{leg}({})", group.join("*")));
    }
    parts.join("*")
}

impl fmt::Display for LeggedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_terms(f, self.poly.terms(), |w: &Vec<LeggedLetter>| {
            if w.is_empty() {
                None
            } else {
                Some(render_legged_word(w))
            }
        })
    }
}

impl fmt::Debug for LeggedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: {}", self, self.layout)
    }
}

/// `z^k` in the circle alphabet, with `z^-k` written via `z^*`.
pub fn zeta_letter_power(k: i64) -> GradedPoly {
    let z = circle_letter();
    let base = if k >= 0 { z } else { z.star() };
    GradedPoly::term(vec![base; k.unsigned_abs() as usize], Scalar::one())
}

/// The generator `z` of the circle algebra, degree 1.
pub fn circle_letter() -> Letter {
    Letter::new("z", Index::None, 1)
}

/// The map from the three-leg product (circle, X, Y) into the tensor product
/// of two two-leg products: `z ↦ z ⊗ z`, `a ↦ a ⊗ z^{deg a}`, `b ↦ 1 ⊗ b`.
pub fn psi_flatten(p: &LeggedPoly) -> Result<LeggedPoly, BraidedError> {
    if p.num_legs() != 3 {
        return Err(BraidedError::BadShape(format!(
            "expected three legs, got {}",
            p.num_legs()
        )));
    }
    let target = LegLayout::tensor(&[2, 2]);
    p.substitute(&target, |l| match l.leg {
        1 => {
            if l.letter.base() != circle_letter() {
                return Err(BraidedError::BadShape(format!(
                    "leg 1 carries `{}`, not the circle generator",
                    l.letter
                )));
            }
            let z = LeggedPoly::letter(1, l.letter, &target);
            Ok(z.mul(&LeggedPoly::letter(3, l.letter, &target)))
        }
        2 => {
            let a = LeggedPoly::letter(2, l.letter, &target);
            let zk = LeggedPoly::embed_in(3, &zeta_letter_power(l.letter.degree), &target)?;
            Ok(a.mul(&zk))
        }
        _ => Ok(LeggedPoly::letter(4, l.letter, &target)),
    })
}

impl Expr {
    /// Evaluates in a legged algebra; bare letters go to leg 1 of a one-leg layout.
    pub fn to_legged(&self, layout: &LegLayout) -> Result<LeggedPoly, BraidedError> {
        Ok(match self {
            Expr::Scalar(c) => LeggedPoly::constant(c.clone(), layout),
            Expr::Letter(l) => {
                if layout.num_legs() != 1 {
                    return Err(BraidedError::BadShape(format!(
                        "letter `{l}` needs a leg marker"
                    )));
                }
                LeggedPoly::letter(1, *l, layout)
            }
            Expr::Leg(k, inner) => LeggedPoly::embed_in(*k, &inner.to_graded()?, layout)?,
            Expr::Sum(parts) => {
                let mut acc = LeggedPoly::zero(layout);
                for (neg, e) in parts {
                    let p = e.to_legged(layout)?;
                    acc = if *neg { acc.minus(&p) } else { acc.plus(&p) };
                }
                acc
            }
            Expr::Product(parts) => {
                let mut acc = LeggedPoly::one(layout);
                for e in parts {
                    acc = acc.mul(&e.to_legged(layout)?);
                }
                acc
            }
        })
    }
}

pub fn parse_legged(
    text: &str,
    degree: &dyn Fn(&str, &Index) -> Option<i64>,
    layout: &LegLayout,
) -> Result<LeggedPoly, BraidedError> {
    parse_expr(text, degree)?.to_legged(layout)
}
