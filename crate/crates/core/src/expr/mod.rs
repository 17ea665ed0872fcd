//! Rate expressions: rational functions of the scale parameter `lambda` with
//! exact rational coefficients.

mod parser;
mod poly;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use poly::Poly;

/// A rational function `num(lambda) / den(lambda)` kept in canonical form:
/// numerator and denominator are coprime and the denominator is monic.
/// The zero function is `0 / 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    num: Poly,
    den: Poly,
}

/// Limit of an eventually nonnegative rate expression as `lambda -> inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitValue {
    Finite(BigRational),
    PlusInfinity,
}

impl LimitValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, LimitValue::PlusInfinity)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            LimitValue::Finite(v) => Some(v),
            LimitValue::PlusInfinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LimitValue::Finite(v) => poly::to_f64(v),
            LimitValue::PlusInfinity => f64::INFINITY,
        }
    }
}

impl RationalExpr {
    fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_empty() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_empty() {
            return Ok(Self::zero());
        }
        let g = poly::gcd(&num, &den);
        let (mut num, mut den) = if poly::is_one(&g) {
            (num, den)
        } else {
            (poly::div_rem(&num, &g).0, poly::div_rem(&den, &g).0)
        };
        let lead = den.last().expect("nonzero denominator").recip();
        num = poly::scale(&num, &lead);
        den = poly::scale(&den, &lead);
        Ok(Self { num, den })
    }

    pub fn zero() -> Self {
        Self {
            num: Vec::new(),
            den: vec![BigRational::one()],
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self {
            num: poly::constant(c),
            den: vec![BigRational::one()],
        }
    }

    pub fn lambda() -> Self {
        Self {
            num: vec![BigRational::zero(), BigRational::one()],
            den: vec![BigRational::one()],
        }
    }

    /// Parses expression text into canonical form.
    pub fn parse(text: &str) -> Result<Self> {
        parser::parse(text)
    }

    /// Numerator coefficients, ascending powers of `lambda`.
    pub fn numerator(&self) -> &[BigRational] {
        &self.num
    }

    /// Denominator coefficients, ascending powers of `lambda`; monic.
    pub fn denominator(&self) -> &[BigRational] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Self::from_parts(poly::mul(&self.num, &rhs.den), poly::mul(&self.den, &rhs.num))
    }

    /// The same function with `c*lambda` substituted for `lambda`.
    pub fn rescale_lambda(&self, c: &BigRational) -> Self {
        Self::from_parts(poly::compose_scaled(&self.num, c), poly::compose_scaled(&self.den, c))
            .expect("substitution keeps the denominator nonzero")
    }

    pub fn evaluate(&self, lambda: f64) -> Result<f64> {
        let (num, den) = if lambda.abs() > 1.0 {
            // evaluate in 1/lambda to keep high powers bounded
            let shift = self.num.len() as i32 - self.den.len() as i32;
            (
                poly::eval_reversed(&self.num, lambda) * lambda.powi(shift),
                poly::eval_reversed(&self.den, lambda),
            )
        } else {
            (poly::eval(&self.num, lambda), poly::eval(&self.den, lambda))
        };
        if den == 0.0 || !den.is_finite() {
            return Err(Error::PoleAtLambda { lambda });
        }
        Ok(num / den)
    }

    pub fn limit_at_infinity(&self) -> Result<LimitValue> {
        let Some(dn) = poly::degree(&self.num) else {
            return Ok(LimitValue::Finite(BigRational::zero()));
        };
        let dd = poly::degree(&self.den).expect("nonzero denominator");
        // the denominator is monic, so the sign at infinity is the numerator's
        let lead = &self.num[dn];
        if lead.is_negative() {
            return Err(Error::EventuallyNegative);
        }
        Ok(match dn.cmp(&dd) {
            std::cmp::Ordering::Less => LimitValue::Finite(BigRational::zero()),
            std::cmp::Ordering::Equal => LimitValue::Finite(lead / &self.den[dd]),
            std::cmp::Ordering::Greater => LimitValue::PlusInfinity,
        })
    }

    /// `(a, b)` with `self == a*lambda + b`, if the expression is affine.
    pub fn affine_decompose(&self) -> Option<(BigRational, BigRational)> {
        if !poly::is_one(&self.den) || self.num.len() > 2 {
            return None;
        }
        let b = self.num.first().cloned().unwrap_or_else(BigRational::zero);
        let a = self.num.get(1).cloned().unwrap_or_else(BigRational::zero);
        Some((a, b))
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if poly::is_one(&self.den) {
            f.write_str(&poly::format_poly(&self.num))
        } else {
            write!(
                f,
                "({})/({})",
                poly::format_poly(&self.num),
                poly::format_poly(&self.den)
            )
        }
    }
}

impl std::str::FromStr for RationalExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Add for &RationalExpr {
    type Output = RationalExpr;

    fn add(self, rhs: &RationalExpr) -> RationalExpr {
        let num = poly::add(&poly::mul(&self.num, &rhs.den), &poly::mul(&rhs.num, &self.den));
        RationalExpr::from_parts(num, poly::mul(&self.den, &rhs.den)).expect("product of nonzero denominators")
    }
}

impl Sub for &RationalExpr {
    type Output = RationalExpr;

    fn sub(self, rhs: &RationalExpr) -> RationalExpr {
        self + &(-rhs)
    }
}

impl Mul for &RationalExpr {
    type Output = RationalExpr;

    fn mul(self, rhs: &RationalExpr) -> RationalExpr {
        RationalExpr::from_parts(poly::mul(&self.num, &rhs.num), poly::mul(&self.den, &rhs.den))
            .expect("product of nonzero denominators")
    }
}

impl Neg for &RationalExpr {
    type Output = RationalExpr;

    fn neg(self) -> RationalExpr {
        RationalExpr {
            num: poly::neg(&self.num),
            den: self.den.clone(),
        }
    }
}

impl<'a> std::iter::Sum<&'a RationalExpr> for RationalExpr {
    fn sum<I: Iterator<Item = &'a RationalExpr>>(iter: I) -> Self {
        iter.fold(RationalExpr::zero(), |acc, e| &acc + e)
    }
}
