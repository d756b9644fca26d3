//! Dense univariate polynomials in the error rate ε.
//!
//! The same container serves three coefficient rings: `i128` (checked, used
//! inside elimination where overflow falls back to big integers), `BigInt`
//! and `BigRational`. Coefficient `k` multiplies ε^k.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient ring for [`Poly`]. Arithmetic is checked so that fixed-width
/// rings can report overflow instead of wrapping.
pub trait Coeff: Zero + One + Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    /// -1, 0 or 1.
    fn sign(&self) -> i32;
    fn checked_add(&self, rhs: &Self) -> Option<Self>;
    fn checked_sub(&self, rhs: &Self) -> Option<Self>;
    fn checked_mul(&self, rhs: &Self) -> Option<Self>;
    fn checked_neg(&self) -> Option<Self>;
    /// `self / rhs` when the quotient is exact in this ring.
    fn exact_div(&self, rhs: &Self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> BigRational;
}

/// Coefficient rings without overflow; these get the std operator impls.
pub trait Unbounded: Coeff {}

impl Coeff for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn sign(&self) -> i32 {
        i128::signum(*self) as i32
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        i128::checked_add(*self, *rhs)
    }
    fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        i128::checked_sub(*self, *rhs)
    }
    fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        i128::checked_mul(*self, *rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        i128::checked_neg(*self)
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if *rhs == 0 || self % rhs != 0 {
            return None;
        }
        i128::checked_div(*self, *rhs)
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }
}

impl Coeff for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn sign(&self) -> i32 {
        if Signed::is_positive(self) {
            1
        } else if Signed::is_negative(self) {
            -1
        } else {
            0
        }
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        Some(self - rhs)
    }
    fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        Some(self * rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            return None;
        }
        let (q, r) = self.div_rem(rhs);
        Zero::is_zero(&r).then_some(q)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
}

impl Unbounded for BigInt {}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn sign(&self) -> i32 {
        if Signed::is_positive(self) {
            1
        } else if Signed::is_negative(self) {
            -1
        } else {
            0
        }
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        Some(self - rhs)
    }
    fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        Some(self * rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        (!Zero::is_zero(rhs)).then(|| self / rhs)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

impl Unbounded for BigRational {}

/// Polynomial in ε with trailing zero coefficients trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    /// `c · ε^k`
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    /// The polynomial ε.
    pub fn eps() -> Self {
        Self::monomial(C::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(C::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        Self::from_coeffs(values.iter().map(|&v| C::from_i64(v)).collect())
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of ε^k (zero past the degree).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Smallest power with a nonzero coefficient, and that coefficient.
    pub fn lowest_order(&self) -> Option<(usize, &C)> {
        self.coeffs.iter().enumerate().find(|(_, c)| !c.is_zero())
    }

    pub fn valuation(&self) -> Option<usize> {
        self.lowest_order().map(|(k, _)| k)
    }

    pub fn checked_add(&self, rhs: &Self) -> Option<Self> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let v = match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.checked_add(b)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            };
            out.push(v);
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let v = match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.checked_sub(b)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.checked_neg()?,
                (None, None) => unreachable!(),
            };
            out.push(v);
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_neg(&self) -> Option<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(C::checked_neg)
            .collect::<Option<Vec<_>>>()?;
        Some(Self { coeffs })
    }

    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        if self.is_zero() || rhs.is_zero() {
            return Some(Self::zero());
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].checked_add(&a.checked_mul(b)?)?;
            }
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_scale(&self, c: &C) -> Option<Self> {
        if c.is_zero() {
            return Some(Self::zero());
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(c))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_coeffs(coeffs))
    }

    /// `self · a − other · b`, the cross-multiplication step of elimination.
    pub fn checked_cross(&self, a: &Self, other: &Self, b: &Self) -> Option<Self> {
        self.checked_mul(a)?.checked_sub(&other.checked_mul(b)?)
    }

    /// Quotient when `divisor` divides `self` exactly over the coefficient ring.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let dd = divisor.degree()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        let nd = self.degree()?;
        if nd < dd {
            return None;
        }
        let lead = &divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        let mut quot = vec![C::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let qk = top.exact_div(lead)?;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                if dc.is_zero() {
                    continue;
                }
                rem[k + j] = rem[k + j].checked_sub(&qk.checked_mul(dc)?)?;
            }
            quot[k] = qk;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::from_coeffs(quot))
    }

    /// Divide by ε^k; the low coefficients must be zero.
    pub fn shift_down(&self, k: usize) -> Self {
        debug_assert!(self.coeffs.iter().take(k).all(C::is_zero));
        Self::from_coeffs(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// Multiply by ε^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn to_rational(&self) -> Poly<BigRational> {
        Poly {
            coeffs: self.coeffs.iter().map(C::to_rational).collect(),
        }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> Option<D>) -> Option<Poly<D>> {
        let coeffs = self.coeffs.iter().map(f).collect::<Option<Vec<_>>>()?;
        Some(Poly::from_coeffs(coeffs))
    }
}

impl Poly<BigRational> {
    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(<BigRational as Zero>::zero(), |acc, c| acc * x + c)
    }
}

impl Poly<BigInt> {
    /// Gcd of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(<BigInt as Zero>::zero(), |acc, c| acc.gcd(c))
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(<BigRational as Zero>::zero(), |acc, c| {
                acc * x + BigRational::from_integer(c.clone())
            })
    }

    pub fn to_i128(&self) -> Option<Poly<i128>> {
        self.map(|c| c.to_i128())
    }
}

impl Poly<i128> {
    pub fn to_bigint(&self) -> Poly<BigInt> {
        Poly {
            coeffs: self.coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }
}

impl<C: Unbounded> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        self.checked_add(rhs).expect("unbounded ring")
    }
}

impl<C: Unbounded> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        self.checked_sub(rhs).expect("unbounded ring")
    }
}

impl<C: Unbounded> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        self.checked_mul(rhs).expect("unbounded ring")
    }
}

impl<C: Unbounded> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.checked_neg().expect("unbounded ring")
    }
}

impl<C: Unbounded> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        &self + &rhs
    }
}

impl<C: Unbounded> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        &self - &rhs
    }
}

impl<C: Unbounded> Mul for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        &self * &rhs
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = magnitude == "1";
            match k {
                0 => f.write_str(&magnitude)?,
                _ => {
                    if !unit {
                        write!(f, "{magnitude}*")?;
                    }
                    if k == 1 {
                        f.write_str("ε")?;
                    } else {
                        write!(f, "ε^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Poly<BigRational>;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn add_and_multiply() {
        let e = Q::eps();
        let e2 = Q::monomial(BigRational::one(), 2);
        assert_eq!(&e + &e2, Q::from_i64s(&[0, 1, 1]));
        let one_minus = Q::from_i64s(&[1, -1]);
        assert_eq!(&one_minus * &one_minus, Q::from_i64s(&[1, -2, 1]));
        let p = Q::from_i64s(&[3, 0, -7, 2]);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Poly::<i128>::from_coeffs(vec![1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::<i128>::from_coeffs(vec![0, 0]).degree(), None);
    }

    #[test]
    fn lowest_order_respects_cancellation() {
        let a = Q::from_i64s(&[0, 0, 1, 0, 1]);
        let b = Q::from_i64s(&[0, 0, 1]);
        let diff = &a - &b;
        assert_eq!(diff.lowest_order(), Some((4, &BigRational::one())));
        assert_eq!(Q::zero().lowest_order(), None);
    }

    #[test]
    fn exact_division_over_integers() {
        let a = Poly::<BigInt>::from_i64s(&[1, -1]);
        let b = Poly::<BigInt>::from_i64s(&[2, 3, 1]);
        let prod = &a * &b;
        assert_eq!(prod.exact_div(&a), Some(b.clone()));
        assert_eq!(prod.exact_div(&b), Some(a));
        // 2ε + 1 does not divide ε^2 + 1 over Z
        let c = Poly::<BigInt>::from_i64s(&[1, 0, 1]);
        assert_eq!(c.exact_div(&Poly::from_i64s(&[1, 2])), None);
    }

    #[test]
    fn i128_overflow_reported() {
        let big = Poly::<i128>::constant(i128::MAX / 2 + 1);
        assert!(big.checked_add(&big).is_none());
        assert!(big.checked_mul(&Poly::constant(4)).is_none());
    }

    #[test]
    fn display_reads_naturally() {
        let p = Q::from_coeffs(vec![q(1, 2), q(-3, 1), BigRational::zero(), q(1, 4)]);
        assert_eq!(p.to_string(), "1/2 - 3*ε + 1/4*ε^3");
        assert_eq!(Q::zero().to_string(), "0");
        assert_eq!(Q::from_i64s(&[0, -1]).to_string(), "-ε");
    }

    #[test]
    fn rational_eval() {
        let p = Q::from_i64s(&[1, -2, 1]);
        assert_eq!(p.eval(&q(1, 3)), q(4, 9));
    }
}
