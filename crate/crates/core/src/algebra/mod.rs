//! Exact arithmetic in the error rate ε: polynomials, rational functions,
//! lowest-order sign queries and fraction-free stationary solves.

pub mod poly;
pub mod ratfunc;
pub mod solve;

use num_rational::BigRational;

pub use poly::{Coeff, Poly};
pub use ratfunc::{compare_small_eps, lowest_order, sign_of, EpsRationalFunction, Sign};
pub use solve::{
    is_exact_stationary, solve_integer_system, solve_small_system, solve_stationary_exact,
    stationary_integer, stationary_small, IntPoly, IntegerSolution, PolySolution, SmallSolution,
};

pub type Rational = BigRational;
pub type EpsPolynomial = Poly<BigRational>;
/// Integer polynomial with machine-width coefficients.
pub type SmallPoly = Poly<i128>;

#[cfg(test)]
mod ring_props {
    use super::*;
    use proptest::prelude::*;

    fn small_poly() -> impl Strategy<Value = EpsPolynomial> {
        proptest::collection::vec((-6i64..=6, 1i64..=4), 0..6).prop_map(|cs| {
            EpsPolynomial::from_coeffs(
                cs.into_iter()
                    .map(|(n, d)| Rational::new(n.into(), d.into()))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn associativity_and_distributivity(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn exact_division_inverts_multiplication(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).exact_div(&b), Some(a));
        }
    }
}
