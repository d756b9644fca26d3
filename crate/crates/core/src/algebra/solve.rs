//! Fraction-free linear solving over ℤ[ε].
//!
//! Gauss–Jordan with Bareiss division: every intermediate entry is a minor of
//! the input, so each division by the previous pivot is exact and no rational
//! coefficients appear. The i128 path handles the common case; overflow falls
//! back to big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{Coeff, Poly};
use super::{EpsPolynomial, EpsRationalFunction};
use crate::error::{Error, Result};

pub type IntPoly = Poly<BigInt>;

/// `x = numerators / denominator` with integer-coefficient polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySolution<C> {
    pub numerators: Vec<Poly<C>>,
    pub denominator: Poly<C>,
}

pub type IntegerSolution = PolySolution<BigInt>;

/// Solution over i128 coefficients.
pub type SmallSolution = PolySolution<i128>;

impl<C: Coeff + Integer + Signed> PolySolution<C> {
    /// Strip common integer content and common powers of ε, and make the
    /// denominator's lowest-order coefficient positive.
    pub fn normalize(mut self) -> Self {
        let mut shift = self.denominator.valuation().unwrap_or(0);
        for n in &self.numerators {
            if let Some(v) = n.valuation() {
                shift = shift.min(v);
            }
        }
        let mut g = C::zero();
        for p in self
            .numerators
            .iter()
            .chain(std::iter::once(&self.denominator))
        {
            for c in p.coeffs() {
                g = g.gcd(c);
            }
        }
        let (_, lead) = self
            .denominator
            .lowest_order()
            .expect("nonzero denominator");
        if lead.is_negative() {
            g = C::zero() - g;
        }
        let fix = |p: &Poly<C>| -> Poly<C> {
            p.shift_down(shift)
                .map(|c| c.exact_div(&g))
                .expect("content divides")
        };
        self.denominator = fix(&self.denominator);
        self.numerators = self.numerators.iter().map(fix).collect();
        self
    }
}

impl SmallSolution {
    pub fn to_bigint(&self) -> IntegerSolution {
        IntegerSolution {
            numerators: self.numerators.iter().map(Poly::to_bigint).collect(),
            denominator: self.denominator.to_bigint(),
        }
    }
}

impl IntegerSolution {
    pub fn to_ratfuncs(&self) -> Vec<EpsRationalFunction> {
        let den = self.denominator.to_rational();
        self.numerators
            .iter()
            .map(|n| EpsRationalFunction::new(n.to_rational(), den.clone()).expect("nonzero"))
            .collect()
    }
}

/// Gauss–Jordan on an n × (n+1) augmented matrix. `None` signals coefficient
/// overflow; `Some(Err)` a system singular as polynomials.
fn gauss_jordan<C: Coeff>(mut a: Vec<Vec<Poly<C>>>) -> Option<Result<PolySolution<C>>> {
    let n = a.len();
    let mut prev = Poly::<C>::one();
    for k in 0..n {
        let Some(pivot_row) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Some(Err(Error::SingularSystem));
        };
        a.swap(k, pivot_row);
        let pivot_line = a[k].clone();
        let p = &pivot_line[k];
        for (i, row) in a.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let f = row[k].clone();
            for j in 0..=n {
                if j == k {
                    continue;
                }
                let cross = if f.is_zero() {
                    row[j].checked_mul(p)?
                } else {
                    row[j].checked_cross(p, &f, &pivot_line[j])?
                };
                // Exact by the Bareiss identity; `None` is i128 overflow.
                row[j] = if prev == Poly::one() {
                    cross
                } else {
                    cross.exact_div(&prev)?
                };
            }
            row[k] = Poly::zero();
        }
        prev = pivot_line[k].clone();
    }
    let det = a[0][0].clone();
    let numerators = a.iter().map(|row| row[n].clone()).collect();
    Some(Ok(PolySolution {
        numerators,
        denominator: det,
    }))
}

/// Solve `A x = b` over ℤ[ε], `A` given as an n × (n+1) augmented matrix.
pub fn solve_integer_system(augmented: &[Vec<IntPoly>]) -> Result<IntegerSolution> {
    let narrow: Option<Vec<Vec<Poly<i128>>>> = augmented
        .iter()
        .map(|row| row.iter().map(IntPoly::to_i128).collect())
        .collect();
    if let Some(res) = narrow.and_then(gauss_jordan) {
        return Ok(res?.normalize().to_bigint());
    }
    match gauss_jordan(augmented.to_vec()) {
        Some(res) => Ok(res?.normalize()),
        None => Err(Error::Internal(
            "inexact division in fraction-free elimination",
        )),
    }
}

/// i128-only solve; `None` on coefficient overflow.
pub fn solve_small_system(augmented: Vec<Vec<Poly<i128>>>) -> Option<Result<SmallSolution>> {
    gauss_jordan(augmented).map(|r| r.map(PolySolution::normalize))
}

fn stationary_system<C: Coeff>(t: &[Vec<Poly<C>>]) -> Option<Vec<Vec<Poly<C>>>> {
    let n = t.len();
    let mut aug: Vec<Vec<Poly<C>>> = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let mut row = Vec::with_capacity(n + 1);
        for j in 0..n {
            let e = &t[j][i];
            row.push(if i == j {
                e.checked_sub(&Poly::one())?
            } else {
                e.clone()
            });
        }
        row.push(Poly::zero());
        aug.push(row);
    }
    let mut last = vec![Poly::one(); n];
    last.push(Poly::one());
    aug.push(last);
    Some(aug)
}

/// Stationary vector over i128 coefficients; `None` on overflow.
pub fn stationary_small(t: &[Vec<Poly<i128>>]) -> Option<Result<SmallSolution>> {
    solve_small_system(stationary_system(t)?)
}

/// Stationary vector of a row-stochastic matrix with integer-coefficient
/// entries: solves xᵀT = xᵀ, Σx = 1.
pub fn stationary_integer(t: &[Vec<IntPoly>]) -> Result<IntegerSolution> {
    solve_integer_system(&stationary_system(t).expect("unbounded"))
}

/// Exact stationary distribution of a row-stochastic matrix of polynomials
/// in ε, as rational functions of ε.
pub fn solve_stationary_exact(t: &[Vec<EpsPolynomial>]) -> Result<Vec<EpsRationalFunction>> {
    let n = t.len();
    if n == 0 || t.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension);
    }
    for row in t {
        let sum = row.iter().fold(EpsPolynomial::zero(), |acc, e| &acc + e);
        if sum != EpsPolynomial::one() {
            return Err(Error::NotStochastic);
        }
    }
    // Scale each equation (a column of T) to integer coefficients.
    let mut aug: Vec<Vec<IntPoly>> = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let mut col: Vec<EpsPolynomial> = (0..n).map(|j| t[j][i].clone()).collect();
        col[i] = &col[i] - &EpsPolynomial::one();
        let lcm = col
            .iter()
            .flat_map(|p| p.coeffs().iter())
            .fold(<BigInt as One>::one(), |acc, c| acc.lcm(c.denom()));
        let scale = BigRational::from_integer(lcm);
        let mut row: Vec<IntPoly> = col
            .iter()
            .map(|p| {
                p.map(|c| {
                    let v = c * &scale;
                    debug_assert!(v.is_integer());
                    Some(v.to_integer())
                })
                .expect("integral after scaling")
            })
            .collect();
        row.push(IntPoly::zero());
        aug.push(row);
    }
    let mut last = vec![IntPoly::one(); n];
    last.push(IntPoly::one());
    aug.push(last);
    Ok(solve_integer_system(&aug)?.to_ratfuncs())
}

/// Check of `xᵀT = xᵀ` and `Σx = 1` as polynomial identities after clearing
/// the common denominator.
pub fn is_exact_stationary(t: &[Vec<IntPoly>], sol: &IntegerSolution) -> bool {
    let n = t.len();
    let total = sol
        .numerators
        .iter()
        .fold(IntPoly::zero(), |acc, p| &acc + p);
    if total != sol.denominator {
        return false;
    }
    (0..n).all(|j| {
        let flow = (0..n).fold(IntPoly::zero(), |acc, i| {
            &acc + &(&sol.numerators[i] * &t[i][j])
        });
        flow == sol.numerators[j]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn ip(v: &[i64]) -> IntPoly {
        IntPoly::from_i64s(v)
    }

    #[test]
    fn two_state_chain() {
        // P = [[1-ε, ε], [2ε, 1-2ε]] → x = (2/3, 1/3) for every ε
        let t = vec![
            vec![ip(&[1, -1]), ip(&[0, 1])],
            vec![ip(&[0, 2]), ip(&[1, -2])],
        ];
        let sol = stationary_integer(&t).unwrap();
        assert!(is_exact_stationary(&t, &sol));
        let x = sol.to_ratfuncs();
        assert_eq!(
            x[0].limit_at_zero().unwrap(),
            BigRational::new(2.into(), 3.into())
        );
        assert!(
            x[0].same_function(&EpsRationalFunction::constant(BigRational::new(
                2.into(),
                3.into()
            )))
        );
    }

    #[test]
    fn absorbing_limit() {
        // state 1 is absorbing at ε = 0 and left with probability ε²
        let t = vec![
            vec![ip(&[0, 1]), ip(&[1, -1])],
            vec![ip(&[0, 0, 1]), ip(&[1, 0, -1])],
        ];
        let sol = stationary_integer(&t).unwrap();
        assert!(is_exact_stationary(&t, &sol));
        let x = sol.to_ratfuncs();
        assert_eq!(x[1].limit_at_zero().unwrap(), BigRational::one());
        assert_eq!(x[0].limit_at_zero().unwrap(), BigRational::zero());
    }

    #[test]
    fn rational_entries_accepted() {
        let half = BigRational::new(1.into(), 2.into());
        let t = vec![
            vec![
                EpsPolynomial::constant(half.clone()),
                EpsPolynomial::constant(half.clone()),
            ],
            vec![EpsPolynomial::eps(), EpsPolynomial::from_i64s(&[1, -1])],
        ];
        let x = solve_stationary_exact(&t).unwrap();
        // x0 = 2ε/(1+2ε)
        let want = EpsRationalFunction::new(
            EpsPolynomial::from_i64s(&[0, 2]),
            EpsPolynomial::from_i64s(&[1, 2]),
        )
        .unwrap();
        assert!(x[0].same_function(&want));
    }

    #[test]
    fn non_stochastic_rejected() {
        let t = vec![vec![ip(&[1]).to_rational(), ip(&[1]).to_rational()]; 2];
        assert!(matches!(
            solve_stationary_exact(&t),
            Err(Error::NotStochastic)
        ));
    }

    #[test]
    fn bigint_fallback_matches_narrow_path() {
        // force the wide path with a large scale that overflows i128 products
        let big = BigInt::from(10).pow(30);
        let a = vec![
            vec![
                IntPoly::from_coeffs(vec![big.clone(), BigInt::from(1)]),
                ip(&[1]),
                ip(&[1]),
            ],
            vec![ip(&[2]), IntPoly::from_coeffs(vec![big.clone()]), ip(&[0])],
        ];
        let sol = solve_integer_system(&a).unwrap();
        // verify A x = b by substitution
        for row in &a {
            let lhs = &(&row[0] * &sol.numerators[0]) + &(&row[1] * &sol.numerators[1]);
            assert_eq!(lhs, &row[2] * &sol.denominator);
        }
    }
}
