//! Payoff comparisons at a fixed (d, q) in the limit ε → 0⁺, and the
//! two-tier invasion test built on them.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::algebra::{Coeff, IntPoly, Poly};
use crate::error::Result;
use crate::game::Params;
use crate::markov::SymbolicPayoff;

/// The point's scaled basis `L·(1, d, d², q)`, with an i128 copy when it fits.
#[derive(Clone, Debug)]
pub struct PointWeights {
    big: [BigInt; 4],
    small: Option<[i128; 4]>,
}

impl PointWeights {
    pub fn new(p: &Params) -> Self {
        let big = p.scaled_basis();
        let small = big
            .iter()
            .map(|w| w.to_i128())
            .collect::<Option<Vec<_>>>()
            .map(|v| [v[0], v[1], v[2], v[3]]);
        Self { big, small }
    }

    pub fn big(&self) -> &[BigInt; 4] {
        &self.big
    }
}

fn lowest_sign<C: Coeff>(p: &Poly<C>) -> Ordering {
    match p.lowest_order() {
        None => Ordering::Equal,
        Some((_, c)) => c.sign().cmp(&0),
    }
}

fn compare_small(a: &SymbolicPayoff, b: &SymbolicPayoff, w: &[i128; 4]) -> Option<Ordering> {
    let na = a.scaled_numerator_small(w)?;
    let nb = b.scaled_numerator_small(w)?;
    let diff = na.checked_cross(b.den(), &nb, a.den())?;
    Some(lowest_sign(&diff))
}

fn compare_big(a: &SymbolicPayoff, b: &SymbolicPayoff, w: &[BigInt; 4]) -> Ordering {
    let na = a.scaled_numerator(w);
    let nb = b.scaled_numerator(w);
    let diff: IntPoly = &(&na * &b.den().to_bigint()) - &(&nb * &a.den().to_bigint());
    lowest_sign(&diff)
}

/// Order of `π_a` and `π_b` for every sufficiently small ε > 0 at the point
/// whose weights are `w`. Both denominators must have a positive
/// lowest-order coefficient, which holds for every payoff this crate builds.
pub fn compare_payoffs(a: &SymbolicPayoff, b: &SymbolicPayoff, w: &PointWeights) -> Ordering {
    debug_assert!(lowest_sign(a.den()) == Ordering::Greater);
    debug_assert!(lowest_sign(b.den()) == Ordering::Greater);
    if let Some(ws) = &w.small {
        if let Some(o) = compare_small(a, b, ws) {
            return o;
        }
    }
    compare_big(a, b, &w.big)
}

/// Outcome of putting a resident against one mutant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Strict advantage at the first tier, or a tie there and a strict
    /// advantage at the second.
    Resists,
    Invaded,
    /// Tied at both tiers.
    NeutrallyInvaded,
}

/// Verdict of one resident/mutant contest. `degenerate` is set when a tie
/// used by the verdict holds at this (d, q) only, not as a function of
/// (d, q, ε).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contest {
    pub outcome: Stability,
    pub degenerate: bool,
}

/// Two-tier test of resident `n` against mutant `m`: `n` resists when
/// `π_nn > π_mn`, or when they are equal and `π_nm > π_mm`. Equality means
/// equality as functions of ε at the point. `mm` is fetched only on a
/// first-tier tie.
pub fn contest(
    nn: &SymbolicPayoff,
    nm: &SymbolicPayoff,
    mn: &SymbolicPayoff,
    mm: impl FnOnce() -> Result<SymbolicPayoff>,
    w: &PointWeights,
) -> Result<Contest> {
    Ok(match compare_payoffs(nn, mn, w) {
        Ordering::Greater => Contest {
            outcome: Stability::Resists,
            degenerate: false,
        },
        Ordering::Less => Contest {
            outcome: Stability::Invaded,
            degenerate: false,
        },
        Ordering::Equal => {
            let mut degenerate = !nn.identical(mn);
            let mm = mm()?;
            let outcome = match compare_payoffs(nm, &mm, w) {
                Ordering::Greater => Stability::Resists,
                Ordering::Less => Stability::Invaded,
                Ordering::Equal => {
                    degenerate |= !nm.identical(&mm);
                    Stability::NeutrallyInvaded
                }
            };
            Contest {
                outcome,
                degenerate,
            }
        }
    })
}
