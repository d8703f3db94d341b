//! Exact coefficients.
//!
//! A [`Scalar`] is a Laurent polynomial in a formal unit-modulus phase `z`
//! whose coefficients live in the rationals extended by square roots of
//! positive rationals. Terms are keyed by `(exponent of z, square-free radical)`.
//! [`ZetaSpec::RootOfUnity`] reduces modulo the cyclotomic polynomial so that
//! zero tests stay exact after specialization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("square root of a negative rational")]
    NegativeRadicand,
    #[error("radicand {0} does not fit in 64 bits")]
    RadicalOverflow(String),
}

/// How the phase `z` is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ZetaSpec {
    /// `z` is an invertible indeterminate.
    #[default]
    Formal,
    /// `z` is a primitive N-th root of unity.
    RootOfUnity(u32),
}

impl fmt::Display for ZetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaSpec::Formal => write!(f, "formal"),
            ZetaSpec::RootOfUnity(n) => write!(f, "root:{n}"),
        }
    }
}

impl FromStr for ZetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "formal" {
            return Ok(ZetaSpec::Formal);
        }
        if let Some(rest) = s.strip_prefix("root:") {
            let n: u32 = rest
                .trim()
                .parse()
                .map_err(|_| format!("bad root order `{rest}`"))?;
            if n == 0 {
                return Err("root order must be positive".into());
            }
            return Ok(ZetaSpec::RootOfUnity(n));
        }
        Err(format!("expected `formal` or `root:N`, got `{s}`"))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Scalar {
    terms: BTreeMap<(i64, u64), BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Splits `n = s^2 * r` with `r` square-free.
pub fn square_free_split(mut n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 1);
    }
    let mut s = 1u64;
    let mut r = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= p;
        }
        if e % 2 == 1 {
            r *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, r * n)
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    n
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar::monomial(q, 0, 1)
    }

    /// `z^k`.
    pub fn zeta_pow(k: i64) -> Self {
        Scalar::monomial(BigRational::one(), k, 1)
    }

    /// `coef * sqrt(radical) * z^exp`; `radical` is made square-free.
    pub fn monomial(coef: BigRational, exp: i64, radical: u64) -> Self {
        let mut terms = BTreeMap::new();
        if !coef.is_zero() && radical != 0 {
            let (s, r) = square_free_split(radical);
            terms.insert((exp, r), coef * BigRational::from_integer(BigInt::from(s)));
        }
        Scalar { terms }
    }

    /// Square root of a nonnegative rational, as `(1/q) * s * sqrt(r)`.
    pub fn sqrt_rational(q: &BigRational) -> Result<Self, ScalarError> {
        if q.is_negative() {
            return Err(ScalarError::NegativeRadicand);
        }
        if q.is_zero() {
            return Ok(Scalar::zero());
        }
        let pq = q.numer() * q.denom();
        let pq = pq
            .to_u64()
            .ok_or_else(|| ScalarError::RadicalOverflow(pq.to_string()))?;
        let inv_den = BigRational::new(BigInt::one(), q.denom().clone());
        Ok(Scalar::monomial(inv_den, 0, pq))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 1)).map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `((exponent, radical), coefficient)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&(i64, u64), &BigRational)> {
        self.terms.iter()
    }

    /// The rational value when no phase or radical occurs.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&(0, 1)).cloned(),
            _ => None,
        }
    }

    pub fn is_zeta_free(&self) -> bool {
        self.terms.keys().all(|&(e, _)| e == 0)
    }

    /// Complex conjugation: `z^k -> z^-k`, real parts fixed.
    pub fn star(&self) -> Self {
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(&(e, r), c)| ((-e, r), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(&(e, r), c)| ((e + k, r), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(&k, c)| (k, c * q)).collect(),
        }
    }

    fn add_term(&mut self, key: (i64, u64), c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Reduces to the canonical residue for `spec`; identity in formal mode.
    pub fn specialize(&self, spec: ZetaSpec) -> Self {
        let n = match spec {
            ZetaSpec::Formal => return self.clone(),
            ZetaSpec::RootOfUnity(n) => n as i64,
        };
        let phi = cyclotomic(n as u32);
        let deg = phi.len() - 1;
        let mut by_radical: BTreeMap<u64, Vec<BigRational>> = BTreeMap::new();
        for (&(e, r), c) in &self.terms {
            let slot = by_radical
                .entry(r)
                .or_insert_with(|| vec![BigRational::zero(); n as usize]);
            slot[e.rem_euclid(n) as usize] += c;
        }
        let mut out = Scalar::zero();
        for (r, mut coeffs) in by_radical {
            for top in (deg..coeffs.len()).rev() {
                if coeffs[top].is_zero() {
                    continue;
                }
                let lead = coeffs[top].clone();
                for (i, &p) in phi.iter().enumerate() {
                    if p != 0 {
                        coeffs[top - deg + i] -= &lead * BigRational::from_integer(BigInt::from(p));
                    }
                }
            }
            for (e, c) in coeffs.into_iter().enumerate().take(deg) {
                out.add_term((e as i64, r), c);
            }
        }
        out
    }

    /// Multiplicative inverse when it exists in the ring: nonzero elements of
    /// the radical field times a single power of `z`.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let exps: Vec<i64> = self.terms.keys().map(|&(e, _)| e).collect();
        let e0 = exps[0];
        if exps.iter().any(|&e| e != e0) {
            return None;
        }
        let base = self.shift(-e0);
        // Multiply by Galois conjugates until the product is rational.
        let mut numer = Scalar::one();
        let mut cur = base;
        loop {
            if let Some(q) = cur.as_rational() {
                let inv = q.recip();
                return Some(numer.scale(&inv).shift(-e0));
            }
            let r = cur
                .terms
                .keys()
                .map(|&(_, r)| r)
                .find(|&r| r > 1)
                .expect("non-rational element carries a radical");
            let p = smallest_prime_factor(r);
            let conj = Scalar {
                terms: cur
                    .terms
                    .iter()
                    .map(|(&(e, r), c)| {
                        let c = if r % p == 0 { -c.clone() } else { c.clone() };
                        ((e, r), c)
                    })
                    .collect(),
            };
            numer = &numer * &conj;
            cur = &cur * &conj;
        }
    }

    /// Exact quotient `self / d` when `d` is invertible.
    pub fn checked_div(&self, d: &Scalar) -> Option<Self> {
        d.inverse().map(|inv| self * &inv)
    }

    /// Sign of a real, phase-free element; `None` if a phase is present.
    pub fn real_sign(&self) -> Option<std::cmp::Ordering> {
        if !self.is_zeta_free() {
            return None;
        }
        let v: f64 = self
            .terms
            .iter()
            .map(|(&(_, r), c)| c.to_f64().unwrap_or(0.0) * (r as f64).sqrt())
            .sum();
        if self.is_zero() {
            return Some(std::cmp::Ordering::Equal);
        }
        Some(if v < 0.0 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        })
    }
}

fn mul_radicals(a: u64, b: u64) -> (u64, u64) {
    let g = a.gcd(&b);
    let r = (a / g)
        .checked_mul(b / g)
        .expect("radical product overflows 64 bits");
    (g, r)
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &'a Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (&(e1, r1), c1) in &self.terms {
            for (&(e2, r2), c2) in &rhs.terms {
                let (g, r) = mul_radicals(r1, r2);
                let mut c = c1 * c2;
                if g != 1 {
                    c *= BigRational::from_integer(BigInt::from(g));
                }
                out.add_term((e1 + e2, r), c);
            }
        }
        out
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn add(self, rhs: &'a Scalar) -> Scalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &'a Scalar) -> Scalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> AddAssign<&'a Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &'a Scalar) {
        for (&k, c) in &rhs.terms {
            self.add_term(k, c.clone());
        }
    }
}

impl<'a> SubAssign<&'a Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &'a Scalar) {
        for (&k, c) in &rhs.terms {
            self.add_term(k, -c.clone());
        }
    }
}

impl<'a> MulAssign<&'a Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &'a Scalar) {
        *self = &*self * rhs;
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::from_rational(q)
    }
}

/// Integer coefficients of the N-th cyclotomic polynomial, constant term first.
pub fn cyclotomic(n: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    assert!(n > 0, "cyclotomic order must be positive");
    // x^n - 1 divided by every lower-order divisor's polynomial.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    let p = Arc::new(num);
    cache.lock().unwrap().insert(n, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    debug_assert!(lead == 1);
    let qlen = rem.len() - dd;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd] / lead;
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&(e, r), c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let abs = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if r == 1 && e == 0 {
                parts.push(fmt_rational(&abs));
            } else if !abs.is_one() {
                if !abs.is_integer() && r != 1 {
                    parts.push(format!("({})", fmt_rational(&abs)));
                } else {
                    parts.push(fmt_rational(&abs));
                }
            }
            if r != 1 {
                parts.push(format!("sqrt({r})"));
            }
            if e == 1 {
                parts.push("z".into());
            } else if e != 0 {
                parts.push(format!("z^{e}"));
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

struct ScalarParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> ScalarParser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ScalarError> {
        Err(ScalarError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
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

    fn integer(&mut self) -> Result<BigInt, ScalarError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn signed_integer(&mut self) -> Result<i64, ScalarError> {
        let neg = self.eat(b'-');
        let n = self.integer()?;
        let n = n
            .to_i64()
            .map_or_else(|| self.err("exponent too large"), Ok)?;
        Ok(if neg { -n } else { n })
    }

    fn rational_literal(&mut self) -> Result<BigRational, ScalarError> {
        let p = self.integer()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let q = self.integer()?;
            if q.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(BigRational::new(p, q));
        }
        Ok(BigRational::from_integer(p))
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = Scalar::zero();
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc -= &t;
            } else {
                acc += &t;
            }
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(c) if c.is_ascii_digit() => Ok(Scalar::from_rational(self.rational_literal()?)),
            Some(b'z') => {
                self.pos += 1;
                let e = if self.eat(b'^') {
                    self.signed_integer()?
                } else {
                    1
                };
                Ok(Scalar::zeta_pow(e))
            }
            Some(b's') if self.src[self.pos..].starts_with(b"sqrt") => {
                self.pos += 4;
                if !self.eat(b'(') {
                    return self.err("expected `(` after sqrt");
                }
                let q = self.rational_literal()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Scalar::sqrt_rational(&q)
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ScalarParser {
            src: s.as_bytes(),
            pos: 0,
        };
        let v = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(
            &Scalar::zeta_pow(2) * &Scalar::zeta_pow(3),
            Scalar::zeta_pow(5)
        );
        assert_eq!(&s("z + 1") * &s("z^-1 + 1"), s("z + z^-1 + 2"));
        assert_eq!(&s("sqrt(2)") * &s("sqrt(6)"), s("2*sqrt(3)"));
        assert_eq!(&s("sqrt(2)") * &s("sqrt(2)"), Scalar::from_int(2));
    }

    #[test]
    fn star_examples() {
        assert_eq!(s("z^3").star(), s("z^-3"));
        assert_eq!(s("2 + sqrt(3)").star(), s("2 + sqrt(3)"));
        assert_eq!(s("z + z^-1").star(), s("z + z^-1"));
    }

    #[test]
    fn specialization_examples() {
        assert_eq!(
            s("z^2").specialize(ZetaSpec::RootOfUnity(4)),
            Scalar::from_int(-1)
        );
        assert!(s("1 + z + z^2")
            .specialize(ZetaSpec::RootOfUnity(3))
            .is_zero());
        assert_eq!(s("z^5").specialize(ZetaSpec::RootOfUnity(4)), s("z"));
        assert_eq!(
            s("z^-1").specialize(ZetaSpec::RootOfUnity(2)),
            Scalar::from_int(-1)
        );
        assert_eq!(s("z^7").specialize(ZetaSpec::RootOfUnity(1)), Scalar::one());
    }

    #[test]
    fn cyclotomic_table() {
        assert_eq!(*cyclotomic(1), vec![-1, 1]);
        assert_eq!(*cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(*cyclotomic(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn text_form() {
        let x = &Scalar::monomial(rat(3, 2), -1, 1) + &Scalar::monomial(rat(1, 3), 4, 2);
        assert_eq!(x.to_string(), "3/2*z^-1 + (1/3)*sqrt(2)*z^4");
        assert_eq!(s(&x.to_string()), x);
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(s("-z").to_string(), "-z");
        assert_eq!(s("sqrt(1/2)"), Scalar::monomial(rat(1, 2), 0, 2));
    }

    #[test]
    fn inverses() {
        let a = s("1 + sqrt(2)");
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).is_one());
        let b = s("2*z^3 + sqrt(6)*z^3 - sqrt(3)*z^3");
        assert!((&b * &b.inverse().unwrap()).is_one());
        assert!(s("1 + z").inverse().is_none());
        assert!(Scalar::zero().inverse().is_none());
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("sqrt(-2)".parse::<Scalar>().is_err());
        assert!("2 *".parse::<Scalar>().is_err());
        assert!("q".parse::<Scalar>().is_err());
    }
}
