//! Rational scalars and the handful of dense vector routines the rest of the
//! crate needs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational number.
pub type Rational = num_rational::BigRational;

/// A vector of the underlying space `E`, in fixed coordinates.
pub type Vector = Vec<Rational>;

/// `n / d` as a rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds a vector from `(numerator, denominator)` pairs.
pub fn vec_of(entries: &[(i64, i64)]) -> Vector {
    entries.iter().map(|&(n, d)| rat(n, d)).collect()
}

/// Builds an integer vector.
pub fn ivec(entries: &[i64]) -> Vector {
    entries.iter().map(|&n| int(n)).collect()
}

/// Parses `"p/q"`, `"p"` (optionally signed) into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Formats as `"p/q"`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}/{}", r.numer(), r.denom());
    s
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn zeros(n: usize) -> Vector {
    (0..n).map(|_| Rational::zero()).collect()
}

pub fn add_assign(acc: &mut [Rational], v: &[Rational]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// `acc += s * v`
pub fn axpy(acc: &mut [Rational], s: &Rational, v: &[Rational]) {
    if s.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

pub fn scale(s: &Rational, v: &[Rational]) -> Vector {
    v.iter().map(|x| s * x).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Whether `a = c * b` for some `c > 0` (both nonzero).
pub fn positively_proportional(a: &[Rational], b: &[Rational]) -> bool {
    proportionality_factor(a, b).is_some_and(|c| c.is_positive())
}

/// The `c` with `a = c * b`, if one exists and `b != 0`. Uses exact
/// cross-ratio comparison.
pub fn proportionality_factor(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    let pivot = b.iter().position(|x| !x.is_zero())?;
    let c = &a[pivot] / &b[pivot];
    if a.iter().zip(b).all(|(x, y)| *x == &c * y) {
        Some(c)
    } else {
        None
    }
}

/// Rank of a list of row vectors via fraction-exact Gaussian elimination.
pub fn rank(rows: &[Vector]) -> usize {
    let mut m: Vec<Vector> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][col].clone();
        for i in r + 1..m.len() {
            if m[i][col].is_zero() {
                continue;
            }
            let f = &m[i][col] / &pivot;
            for j in col..ncols {
                let t = &f * &m[r][j];
                m[i][j] -= t;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solves `sum_i coeffs[i] * basis[i] = v` for linearly independent `basis`
/// spanning the whole space (square system). Returns `None` if singular.
pub fn solve_in_basis(basis: &[Vector], v: &[Rational]) -> Option<Vector> {
    let n = v.len();
    if basis.len() != n {
        return None;
    }
    // Augmented matrix with basis vectors as columns.
    let mut m: Vec<Vector> = (0..n)
        .map(|i| {
            let mut row: Vector = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        let pivot = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in col..=n {
                let t = &f * &m[col][j];
                m[i][j] -= t;
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Least `2^k` (k any integer) with `2^k >= x`, for `x > 0`.
pub fn ceil_power_of_two(x: &Rational) -> Rational {
    debug_assert!(x.is_positive());
    let two = int(2);
    let mut p = Rational::one();
    if *x > p {
        while p < *x {
            p *= &two;
        }
    } else {
        while &p / &two >= *x {
            p /= &two;
        }
    }
    p
}

/// Primitive integer vector positively proportional to `v` (gcd 1).
pub fn primitive(v: &[Rational]) -> Vector {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}
