//! Dense univariate polynomials over the rationals, coefficients in ascending
//! order of powers. A polynomial is always kept trimmed: the last coefficient
//! is nonzero, and the zero polynomial is the empty vector.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub(crate) type Poly = Vec<BigRational>;

pub(crate) fn trim(p: &mut Poly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub(crate) fn constant(c: BigRational) -> Poly {
    let mut p = vec![c];
    trim(&mut p);
    p
}

/// Degree of a nonzero polynomial; `None` for the zero polynomial.
pub(crate) fn degree(p: &[BigRational]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub(crate) fn add(a: &[BigRational], b: &[BigRational]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
        let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
        out.push(x + y);
    }
    trim(&mut out);
    out
}

pub(crate) fn neg(a: &[BigRational]) -> Poly {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn mul(a: &[BigRational], b: &[BigRational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn scale(a: &[BigRational], c: &BigRational) -> Poly {
    let mut out: Poly = a.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

/// Euclidean division `a = q*b + r` with `deg r < deg b`.
///
/// Panics if `b` is the zero polynomial.
pub(crate) fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead = &b[db];
    let mut rem: Poly = a.to_vec();
    trim(&mut rem);
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let factor = &rem[dr] / lead;
        let shift = dr - db;
        for (k, c) in b.iter().enumerate() {
            rem[shift + k] -= &factor * c;
        }
        quot[shift] = factor;
        // the leading term cancels exactly; trim guards any lower zeros too
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

/// Monic greatest common divisor. `gcd(0, 0)` is the zero polynomial.
pub(crate) fn gcd(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut x: Poly = a.to_vec();
    let mut y: Poly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = div_rem(&x, &y);
        x = y;
        y = r;
    }
    make_monic(&x)
}

pub(crate) fn make_monic(p: &[BigRational]) -> Poly {
    match p.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = lead.recip();
            scale(p, &inv)
        }
    }
}

pub(crate) fn is_one(p: &[BigRational]) -> bool {
    p.len() == 1 && p[0].is_one()
}

/// Substitute `c*x` for `x`.
pub(crate) fn compose_scaled(p: &[BigRational], c: &BigRational) -> Poly {
    let mut power = BigRational::one();
    let mut out = Vec::with_capacity(p.len());
    for coef in p {
        out.push(coef * &power);
        power *= c;
    }
    trim(&mut out);
    out
}

pub(crate) fn to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Horner evaluation in `f64`.
pub(crate) fn eval(p: &[BigRational], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
}

/// Evaluates `x^(-deg p) * p(x)` as a polynomial in `1/x`, which stays bounded
/// for large `x`.
pub(crate) fn eval_reversed(p: &[BigRational], x: f64) -> f64 {
    let inv = x.recip();
    p.iter().fold(0.0, |acc, c| acc * inv + to_f64(c))
}

/// Renders a coefficient so that the expression grammar reads it back exactly.
pub(crate) fn format_coefficient(c: &BigRational) -> String {
    if c.denom() == &BigInt::one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn format_poly(p: &[BigRational]) -> String {
    let mut out = String::new();
    for (k, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let powers = vec!["lambda"; k].join("*");
        if k == 0 {
            out.push_str(&format_coefficient(&mag));
        } else if mag.is_one() {
            out.push_str(&powers);
        } else {
            out.push_str(&format_coefficient(&mag));
            out.push('*');
            out.push_str(&powers);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
