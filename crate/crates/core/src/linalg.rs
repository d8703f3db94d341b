//! Exact rational linear algebra for Perron certification.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel; basis vector `k` has a 1 at the `k`-th free
/// column and 0 at the other free columns.
pub fn nullspace(m: &[Vec<Q>]) -> (Vec<usize>, Vec<Vec<Q>>) {
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect();
    (free, basis)
}

/// Characteristic polynomial `det(xI - A)`, constant term first (Faddeev-LeVerrier).
pub fn char_poly(a: &[Vec<Q>]) -> Vec<Q> {
    let n = a.len();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut m = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Q::zero();
                for l in 0..n {
                    if !a[i][l].is_zero() && !m[l][j].is_zero() {
                        acc += &a[i][l] * &m[l][j];
                    }
                }
                if i == j {
                    acc += &coeffs[n - k + 1];
                }
                next[i][j] = acc;
            }
        }
        m = next;
        let mut tr = Q::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &m[l][i];
            }
        }
        coeffs[n - k] = -tr / q(k as i64);
    }
    coeffs
}

fn trim(p: &mut Vec<Q>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub fn poly_eval(p: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Quotient and remainder of polynomial division.
pub fn poly_divmod(num: &[Q], den: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut den = den.to_vec();
    trim(&mut den);
    let mut rem = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    assert!(!den[dd].is_zero(), "division by the zero polynomial");
    if rem.len() < den.len() {
        return (vec![Q::zero()], rem);
    }
    let mut quo = vec![Q::zero(); rem.len() - dd];
    for i in (0..quo.len()).rev() {
        let c = &rem[i + dd] / &den[dd];
        for (j, dj) in den.iter().enumerate() {
            let t = &c * dj;
            rem[i + j] -= t;
        }
        quo[i] = c;
    }
    rem.truncate(dd.max(1));
    trim(&mut rem);
    (quo, rem)
}

fn derivative(p: &[Q]) -> Vec<Q> {
    if p.len() <= 1 {
        return vec![Q::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * q(i as i64))
        .collect()
}

fn is_zero_poly(p: &[Q]) -> bool {
    p.iter().all(Zero::is_zero)
}

fn sign_changes(values: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for s in values.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

fn sgn(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots of `p` in `(a, +inf)`; `p(a)` must be nonzero.
pub fn roots_above(p: &[Q], a: &Q) -> usize {
    let mut p = p.to_vec();
    trim(&mut p);
    if p.len() <= 1 {
        return 0;
    }
    let mut seq = vec![p.clone(), derivative(&p)];
    loop {
        let k = seq.len();
        if is_zero_poly(&seq[k - 1]) {
            seq.pop();
            break;
        }
        let (_, r) = poly_divmod(&seq[k - 2], &seq[k - 1]);
        if is_zero_poly(&r) {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let at_a = sign_changes(seq.iter().map(|s| sgn(&poly_eval(s, a))));
    let at_inf = sign_changes(seq.iter().map(|s| {
        let mut s = s.clone();
        trim(&mut s);
        sgn(s.last().unwrap())
    }));
    at_a - at_inf
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> Q {
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Q::zero();
    }
    let r = Q::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| q(x)).collect())
            .collect()
    }

    #[test]
    fn char_poly_small() {
        // x^2 - x - 1
        assert_eq!(char_poly(&m(&[&[1, 1], &[1, 0]])), vec![q(-1), q(-1), q(1)]);
        // (x-2)(x-1)
        assert_eq!(char_poly(&m(&[&[2, 0], &[0, 1]])), vec![q(2), q(-3), q(1)]);
    }

    #[test]
    fn kernel_of_cycle() {
        let (_, basis) = nullspace(&m(&[&[-1, 1], &[1, -1]]));
        assert_eq!(basis, vec![vec![q(1), q(1)]]);
    }

    #[test]
    fn sturm_counts() {
        // (x-1)(x-2)(x+3)
        let p = vec![q(6), q(-7), q(0), q(1)];
        assert_eq!(roots_above(&p, &q(0)), 2);
        assert_eq!(roots_above(&p, &Q::new(3.into(), 2.into())), 1);
        assert_eq!(roots_above(&p, &q(5)), 0);
        // double root at 2: (x-2)^2
        assert_eq!(roots_above(&[q(4), q(-4), q(1)], &q(0)), 1);
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(rationalize(0.5, 100), Q::new(1.into(), 2.into()));
        assert_eq!(rationalize(1.0 / 3.0, 1000), Q::new(1.into(), 3.into()));
        assert_eq!(rationalize(-2.0, 10), q(-2));
    }
}
