//! Closed-form parameter regions (A)–(L) of the (d, q) plane.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::game::Params;
use crate::strategy::{StrategyIndex, CATALOG};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    L1,
    L2,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 14] = [
        Self::A,
        Self::B,
        Self::C,
        Self::D,
        Self::E,
        Self::F,
        Self::G,
        Self::H,
        Self::I,
        Self::J,
        Self::K,
        Self::L,
        Self::L1,
        Self::L2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
            Self::E => "E",
            Self::F => "F",
            Self::G => "G",
            Self::H => "H",
            Self::I => "I",
            Self::J => "J",
            Self::K => "K",
            Self::L => "L",
            Self::L1 => "L1",
            Self::L2 => "L2",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(Error::Precondition("unknown region label"))
    }
}

/// Regions containing a point, plus whether it lies on some region's edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSet {
    pub labels: Vec<RegionLabel>,
    pub on_boundary: bool,
}

impl RegionSet {
    pub fn contains(&self, r: RegionLabel) -> bool {
        self.labels.contains(&r)
    }

    /// Compact form, e.g. `A,F,K` (sub-labels included).
    pub fn joined(&self) -> String {
        self.labels
            .iter()
            .map(|r| r.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Each region is a conjunction of strict inequalities `lhs < rhs`.
fn region_constraints(p: &Params) -> Vec<(RegionLabel, Vec<(Rational, Rational)>)> {
    let d = p.d().clone();
    let q = p.q().clone();
    let one = Rational::one();
    let half = r(1, 2);
    let h = &d * (r(2, 1) - &d) / r(2, 1);
    let two_d_minus_one = r(2, 1) * &d - &one;
    let one_minus_two_d = &one - r(2, 1) * &d;
    let half_minus_d = &half - &d;
    let d_minus_half = &d - &half;
    let e_lower = r(3, 2) * &two_d_minus_one;
    let j_lower = r(2, 5) * (&one + r(2, 1) * &d - &d * &d);
    let j_upper = r(1, 2) * (-&one + r(6, 1) * &d - r(3, 1) * &d * &d);
    let max = |a: &Rational, b: &Rational| if a > b { a.clone() } else { b.clone() };
    let min = |a: &Rational, b: &Rational| if a < b { a.clone() } else { b.clone() };

    use RegionLabel::*;
    let l_core = vec![
        (d.clone(), half.clone()),
        (half_minus_d.clone(), q.clone()),
        (q.clone(), h.clone()),
    ];
    let mut l1 = l_core.clone();
    l1.push((q.clone(), one_minus_two_d.clone()));
    let mut l2 = l_core.clone();
    l2.push((one_minus_two_d.clone(), q.clone()));
    vec![
        (A, vec![(d.clone(), half.clone()), (q.clone(), h.clone())]),
        (B, vec![(h.clone(), q.clone())]),
        (C, vec![(half.clone(), d.clone()), (q.clone(), d.clone())]),
        (
            D,
            vec![
                (half.clone(), d.clone()),
                (h.clone(), q.clone()),
                (q.clone(), d.clone()),
            ],
        ),
        (
            E,
            vec![
                (half.clone(), d.clone()),
                (max(&h, &e_lower), q.clone()),
                (q.clone(), d.clone()),
            ],
        ),
        (F, vec![(q.clone(), min(&h, &one_minus_two_d))]),
        (
            G,
            vec![
                (half.clone(), d.clone()),
                (two_d_minus_one.clone(), q.clone()),
                (q.clone(), h.clone()),
            ],
        ),
        (
            H,
            vec![
                (max(&half_minus_d, &d_minus_half), q.clone()),
                (q.clone(), h.clone()),
            ],
        ),
        (I, vec![(max(&d, &half), q.clone()), (q.clone(), r(3, 4))]),
        (
            J,
            vec![
                (max(&j_lower, &d), q.clone()),
                (q.clone(), min(&j_upper, &r(6, 7))),
            ],
        ),
        (K, vec![(q.clone(), min(&h, &half_minus_d))]),
        (L, l_core),
        (L1, l1),
        (L2, l2),
    ]
}

/// All region labels whose defining predicate holds at `p`.
pub fn region_labels(p: &Params) -> RegionSet {
    let mut labels = Vec::new();
    let mut on_boundary = false;
    for (label, ineqs) in region_constraints(p) {
        if ineqs.iter().all(|(a, b)| a < b) {
            labels.push(label);
        } else if ineqs.iter().all(|(a, b)| a <= b) {
            on_boundary = true;
        }
    }
    RegionSet {
        labels,
        on_boundary,
    }
}

/// Catalog strategies whose ESS region contains the point.
pub fn expected_ess(regions: &RegionSet) -> Vec<StrategyIndex> {
    let mut v: Vec<_> = CATALOG
        .iter()
        .filter(|e| regions.contains(e.ess_region))
        .map(|e| e.index())
        .collect();
    v.sort();
    v
}

/// Catalog strategies whose efficiency region contains the point.
pub fn expected_efficient(regions: &RegionSet) -> Vec<StrategyIndex> {
    let mut v: Vec<_> = CATALOG
        .iter()
        .filter(|e| e.efficiency_region.is_some_and(|r| regions.contains(r)))
        .map(|e| e.index())
        .collect();
    v.sort();
    v
}

/// In region (A) the one-round game between strategy 14 and uncond-CA has
/// the ordering of a prisoner's dilemma: 1−d > 1/2 > 1/2−q > d−q and
/// 2·(1/2) > (1−d) + (d−q).
pub fn pd_reduction_check(p: &Params) -> Result<bool> {
    if !region_labels(p).contains(RegionLabel::A) {
        return Err(Error::OutsideRegionA {
            d: p.d().to_string(),
            q: p.q().to_string(),
        });
    }
    let (d, q) = (p.d(), p.q());
    let one = Rational::one();
    let half = r(1, 2);
    let temptation = &one - d;
    let reward = half.clone();
    let punishment = &half - q;
    let sucker = d - q;
    Ok(temptation > reward
        && reward > punishment
        && punishment > sucker
        && r(2, 1) * &half > &temptation + &sucker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RegionLabel::*;

    fn labels(dn: i64, dd: i64, qn: i64, qd: i64) -> RegionSet {
        region_labels(&Params::ratio(dn, dd, qn, qd).unwrap())
    }

    #[test]
    fn region_examples() {
        assert_eq!(labels(1, 5, 1, 20).labels, vec![A, F, K]);
        assert_eq!(labels(3, 5, 3, 10).labels, vec![C, G, H]);
        assert_eq!(labels(2, 5, 1, 4).labels, vec![A, H, L, L2]);
        assert_eq!(labels(1, 5, 1, 2).labels, vec![B]);
        assert_eq!(labels(4, 5, 3, 5).labels, vec![B, C, D]);
        assert_eq!(labels(21, 50, 13, 100).labels, vec![A, F, H, L, L1]);
    }

    #[test]
    fn boundary_flagged() {
        // q = 1 − 2d inside (L): the L1/L2 split
        let s = labels(2, 5, 1, 5);
        assert!(s.on_boundary);
        // q = (1/2)d(2−d) at d = 1/5 is 9/50
        assert!(labels(1, 5, 9, 50).on_boundary);
        assert!(!labels(1, 5, 1, 20).on_boundary);
    }

    #[test]
    fn regions_a_b_c_cover_plane() {
        for i in 1..40 {
            for j in 1..40 {
                let s = labels(2 * i + 1, 82, 2 * j + 1, 82);
                if s.on_boundary {
                    continue;
                }
                let n = [A, B, C].iter().filter(|&&r| s.contains(r)).count();
                assert!(n >= 1, "{i},{j}");
                assert_eq!(s.contains(D), s.contains(B) && s.contains(C));
                assert_eq!(s.contains(A), s.contains(K) || s.contains(L));
            }
        }
    }

    #[test]
    fn expected_sets() {
        let s = labels(3, 5, 3, 10);
        let idx: Vec<u16> = expected_ess(&s).iter().map(|i| i.get()).collect();
        let want: Vec<u16> = {
            let mut v = vec![
                crate::strategy::catalog(3).index().get(),
                crate::strategy::catalog(13).index().get(),
                crate::strategy::catalog(14).index().get(),
            ];
            v.sort();
            v
        };
        assert_eq!(idx, want);
        assert_eq!(
            expected_efficient(&s),
            vec![crate::strategy::catalog(3).index()]
        );
    }

    #[test]
    fn pd_reduction() {
        assert_eq!(
            pd_reduction_check(&Params::ratio(1, 5, 1, 20).unwrap()),
            Ok(true)
        );
        assert_eq!(
            pd_reduction_check(&Params::ratio(2, 5, 1, 4).unwrap()),
            Ok(true)
        );
        assert!(pd_reduction_check(&Params::ratio(3, 5, 3, 10).unwrap()).is_err());
        for i in 1..25 {
            for j in 1..25 {
                let p = Params::ratio(i, 50, j, 50).unwrap();
                if region_labels(&p).contains(A) {
                    assert_eq!(pd_reduction_check(&p), Ok(true));
                }
            }
        }
    }
}
