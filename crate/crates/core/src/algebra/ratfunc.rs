use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Coeff;
use super::EpsPolynomial;
use crate::error::{Error, Result};

/// Sign of a function of ε on a right neighbourhood of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_i32(v: i32) -> Self {
        match v.cmp(&0) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn as_ordering(self) -> Ordering {
        match self {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }
}

/// Lowest power of ε with a nonzero coefficient; `None` for the zero polynomial.
pub fn lowest_order(p: &EpsPolynomial) -> Option<(usize, BigRational)> {
    p.lowest_order().map(|(k, c)| (k, c.clone()))
}

/// Ratio of two polynomials in ε.
///
/// Normal form: common powers of ε are cancelled and the denominator's
/// lowest-order coefficient is 1, so the sign near ε = 0⁺ is read off the
/// numerator alone.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EpsRationalFunction {
    num: EpsPolynomial,
    den: EpsPolynomial,
}

impl EpsRationalFunction {
    pub fn new(num: EpsPolynomial, den: EpsPolynomial) -> Result<Self> {
        let Some((dv, dc)) = den.lowest_order() else {
            return Err(Error::ZeroDenominator);
        };
        let dc = dc.clone();
        let shift = match num.valuation() {
            Some(nv) => nv.min(dv),
            None => dv,
        };
        let num = num.shift_down(shift);
        let den = den.shift_down(shift);
        let inv = <BigRational as One>::one() / dc;
        Ok(Self {
            num: num.checked_scale(&inv).expect("unbounded"),
            den: den.checked_scale(&inv).expect("unbounded"),
        })
    }

    pub fn from_poly(p: EpsPolynomial) -> Self {
        Self::new(p, EpsPolynomial::one()).expect("unit denominator")
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(EpsPolynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(EpsPolynomial::zero())
    }

    pub fn numerator(&self) -> &EpsPolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &EpsPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        Self::new(num, &self.den * &rhs.den).expect("nonzero product")
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        Self::new(num, &self.den * &rhs.den).expect("nonzero product")
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero product")
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(
            self.num.checked_scale(c).expect("unbounded"),
            self.den.clone(),
        )
        .expect("denominator unchanged")
    }

    /// Sign for all sufficiently small ε > 0.
    pub fn sign_near_zero(&self) -> Sign {
        match self.num.lowest_order() {
            None => Sign::Zero,
            Some((_, c)) => Sign::of_i32(c.sign()),
        }
    }

    /// Same function of ε (cross-multiplied numerators agree).
    pub fn same_function(&self, rhs: &Self) -> bool {
        &self.num * &rhs.den == &rhs.num * &self.den
    }

    /// Series coefficients c₀..c_order of the expansion around ε = 0.
    pub fn taylor(&self, order: usize) -> Result<Vec<BigRational>> {
        let d0 = self.den.coeff(0);
        if Zero::is_zero(&d0) {
            return Err(Error::PoleAtZero);
        }
        let mut out: Vec<BigRational> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = self.num.coeff(k);
            for j in 1..=k {
                let dj = self.den.coeff(j);
                if !Zero::is_zero(&dj) {
                    acc -= dj * &out[k - j];
                }
            }
            out.push(acc / &d0);
        }
        Ok(out)
    }

    /// Value at ε = 0.
    pub fn limit_at_zero(&self) -> Result<BigRational> {
        Ok(self.taylor(0)?.remove(0))
    }

    pub fn eval(&self, eps: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(eps);
        (!Zero::is_zero(&d)).then(|| self.num.eval(eps) / d)
    }

    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.num.eval_f64(eps) / self.den.eval_f64(eps)
    }
}

/// Order of `a` and `b` for all sufficiently small ε > 0.
pub fn compare_small_eps(a: &EpsRationalFunction, b: &EpsRationalFunction) -> Ordering {
    a.sub(b).sign_near_zero().as_ordering()
}

impl fmt::Display for EpsRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == EpsPolynomial::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// Sign of a rational as [`Sign`].
pub fn sign_of(r: &BigRational) -> Sign {
    if r.is_positive() {
        Sign::Positive
    } else if r.is_negative() {
        Sign::Negative
    } else {
        Sign::Zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(v: &[i64]) -> EpsPolynomial {
        EpsPolynomial::from_i64s(v)
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            EpsRationalFunction::new(p(&[1]), EpsPolynomial::zero()),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn self_difference_is_zero() {
        let a = EpsRationalFunction::new(p(&[1, 2]), p(&[3, 0, 1])).unwrap();
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.sub(&a).sign_near_zero(), Sign::Zero);
        assert_eq!(compare_small_eps(&a, &a), Ordering::Equal);
    }

    #[test]
    fn geometric_minus_one() {
        let g = EpsRationalFunction::new(p(&[1]), p(&[1, -1])).unwrap();
        let diff = g.sub(&EpsRationalFunction::constant(BigRational::one()));
        let want = EpsRationalFunction::new(p(&[0, 1]), p(&[1, -1])).unwrap();
        assert!(diff.same_function(&want));
        assert_eq!(diff, want);
    }

    #[test]
    fn first_order_beats_second_order() {
        // ε/(1+ε) − ε²/(2−ε): lowest order of the difference is +ε
        let a = EpsRationalFunction::new(p(&[0, 1]), p(&[1, 1])).unwrap();
        let b = EpsRationalFunction::new(p(&[0, 0, 1]), p(&[2, -1])).unwrap();
        assert_eq!(a.sub(&b).sign_near_zero(), Sign::Positive);
    }

    #[test]
    fn sign_reads_lowest_order() {
        // −qε² + ε³ at q = 1/2
        let f = EpsRationalFunction::from_poly(EpsPolynomial::from_coeffs(vec![
            q(0, 1),
            q(0, 1),
            q(-1, 2),
            q(1, 1),
        ]));
        assert_eq!(f.sign_near_zero(), Sign::Negative);
        // (1/2)qε + O(ε²) over a positive denominator, q = 1/5
        let g = EpsRationalFunction::new(
            EpsPolynomial::from_coeffs(vec![q(0, 1), q(1, 10), q(-7, 1)]),
            p(&[3, 5]),
        )
        .unwrap();
        assert_eq!(g.sign_near_zero(), Sign::Positive);
    }

    #[test]
    fn negative_denominator_normalised() {
        let f = EpsRationalFunction::new(p(&[0, 1]), p(&[-2, 1])).unwrap();
        assert_eq!(f.denominator().coeff(0), BigRational::one());
        assert_eq!(f.sign_near_zero(), Sign::Negative);
    }

    #[test]
    fn common_eps_power_cancelled() {
        let f = EpsRationalFunction::new(p(&[0, 0, 3]), p(&[0, 2, 1])).unwrap();
        assert_eq!(
            f.numerator(),
            &EpsPolynomial::from_coeffs(vec![q(0, 1), q(3, 2)])
        );
        assert_eq!(f.limit_at_zero().unwrap(), q(0, 1));
    }

    #[test]
    fn taylor_geometric_series() {
        let g = EpsRationalFunction::new(p(&[1]), p(&[1, -1])).unwrap();
        let one = BigRational::one();
        assert_eq!(
            g.taylor(3).unwrap(),
            vec![one.clone(), one.clone(), one.clone(), one]
        );
    }

    #[test]
    fn taylor_of_polynomial_is_identity() {
        let f = EpsRationalFunction::from_poly(p(&[2, -3, 0, 5]));
        assert_eq!(
            f.taylor(4).unwrap(),
            vec![q(2, 1), q(-3, 1), q(0, 1), q(5, 1), q(0, 1)]
        );
    }

    #[test]
    fn taylor_rejects_pole() {
        let f = EpsRationalFunction::new(p(&[1]), p(&[0, 1])).unwrap();
        assert!(matches!(f.taylor(2), Err(Error::PoleAtZero)));
    }

    #[test]
    fn exact_eval() {
        let f = EpsRationalFunction::new(p(&[1, 1]), p(&[2, -1])).unwrap();
        assert_eq!(f.eval(&q(1, 2)), Some(q(1, 1)));
    }
}
