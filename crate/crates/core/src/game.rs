//! One round of the crowdsourcing dilemma: actions, realization, stage
//! payoffs and the implementation-error model.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{EpsPolynomial, Rational};
use crate::error::{Error, Result};

/// Parse `p/q`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::BadRational(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let v = BigRational::new(whole * &scale + f, scale);
        return Ok(if negative { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact game parameters: attack damage `d` and attack cost `q`, both in (0,1).
///
/// ε is not part of this type; exact paths keep it symbolic and float paths
/// take it as a separate argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    d: Rational,
    q: Rational,
}

impl Params {
    pub fn new(d: Rational, q: Rational) -> Result<Self> {
        let in_unit = |v: &Rational| v.is_positive() && v < &Rational::one();
        if !in_unit(&d) {
            return Err(Error::ParamOutOfRange {
                name: "d",
                value: d.to_string(),
                range: "(0,1)",
            });
        }
        if !in_unit(&q) {
            return Err(Error::ParamOutOfRange {
                name: "q",
                value: q.to_string(),
                range: "(0,1)",
            });
        }
        Ok(Self { d, q })
    }

    pub fn parse(d: &str, q: &str) -> Result<Self> {
        Self::new(parse_rational(d)?, parse_rational(q)?)
    }

    /// Shorthand for small literal fractions.
    pub fn ratio(dn: i64, dd: i64, qn: i64, qd: i64) -> Result<Self> {
        Self::new(
            Rational::new(dn.into(), dd.into()),
            Rational::new(qn.into(), qd.into()),
        )
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn d_f64(&self) -> f64 {
        rational_to_f64(&self.d)
    }

    pub fn q_f64(&self) -> f64 {
        rational_to_f64(&self.q)
    }

    /// `(1, d, d², q)`, the basis in which every stage payoff is linear.
    pub fn basis(&self) -> [Rational; 4] {
        [
            Rational::one(),
            self.d.clone(),
            &self.d * &self.d,
            self.q.clone(),
        ]
    }

    /// `L · (1, d, d², q)` as integers, with `L = den(d)² · den(q) > 0`.
    pub fn scaled_basis(&self) -> [BigInt; 4] {
        let (a, b) = (self.d.numer(), self.d.denom());
        let (c, e) = (self.q.numer(), self.q.denom());
        [b * b * e, a * b * e, a * a * e, c * b * b]
    }

    pub fn float(&self, epsilon: f64) -> Result<FloatParams> {
        FloatParams::new(self.d_f64(), self.q_f64(), epsilon)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}, q={}", self.d, self.q)
    }
}

/// Parameters for floating-point evaluation at a fixed error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatParams {
    pub d: f64,
    pub q: f64,
    pub epsilon: f64,
}

impl FloatParams {
    pub fn new(d: f64, q: f64, epsilon: f64) -> Result<Self> {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "d",
                value: d.to_string(),
                range: "(0,1)",
            });
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "q",
                value: q.to_string(),
                range: "(0,1)",
            });
        }
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::ParamOutOfRange {
                name: "epsilon",
                value: epsilon.to_string(),
                range: "[0,1/2)",
            });
        }
        Ok(Self { d, q, epsilon })
    }
}

/// Action a player intends at the start of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelectedAction {
    CA = 0,
    CN = 1,
    SA = 2,
    SN = 3,
}

impl SelectedAction {
    pub const ALL: [SelectedAction; 4] = [Self::CA, Self::CN, Self::SA, Self::SN];

    pub fn from_bits(crowdsource: bool, attack: bool) -> Self {
        match (crowdsource, attack) {
            (true, true) => Self::CA,
            (true, false) => Self::CN,
            (false, true) => Self::SA,
            (false, false) => Self::SN,
        }
    }

    pub fn from_digit(d: usize) -> Self {
        Self::ALL[d]
    }

    pub fn digit(self) -> usize {
        self as usize
    }

    pub fn crowdsources(self) -> bool {
        matches!(self, Self::CA | Self::CN)
    }

    pub fn attacks(self) -> bool {
        matches!(self, Self::CA | Self::SA)
    }

    /// Number of decision bits on which two actions differ.
    pub fn bit_distance(self, other: Self) -> usize {
        usize::from(self.crowdsources() != other.crowdsources())
            + usize::from(self.attacks() != other.attacks())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CA => "CA",
            Self::CN => "CN",
            Self::SA => "SA",
            Self::SN => "SN",
        }
    }
}

impl fmt::Display for SelectedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectedAction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CA" => Ok(Self::CA),
            "CN" => Ok(Self::CN),
            "SA" => Ok(Self::SA),
            "SN" => Ok(Self::SN),
            _ => Err(Error::BadAction(s.to_string())),
        }
    }
}

/// What the opponent observes of a player's round. Starred actions hide
/// the attack intent because there was nothing to attack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RealizedAction {
    CA = 0,
    CN = 1,
    CStar = 2,
    SA = 3,
    SN = 4,
    SStar = 5,
}

impl RealizedAction {
    pub const ALL: [RealizedAction; 6] = [
        Self::CA,
        Self::CN,
        Self::CStar,
        Self::SA,
        Self::SN,
        Self::SStar,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn crowdsourced(self) -> bool {
        matches!(self, Self::CA | Self::CN | Self::CStar)
    }

    /// An attack was carried out (only possible against a crowdsourcer).
    pub fn attacked(self) -> bool {
        matches!(self, Self::CA | Self::SA)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CA => "CA",
            Self::CN => "CN",
            Self::CStar => "C*",
            Self::SA => "SA",
            Self::SN => "SN",
            Self::SStar => "S*",
        }
    }

    fn revealed(a: SelectedAction) -> Self {
        match a {
            SelectedAction::CA => Self::CA,
            SelectedAction::CN => Self::CN,
            SelectedAction::SA => Self::SA,
            SelectedAction::SN => Self::SN,
        }
    }
}

impl fmt::Display for RealizedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RealizedAction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CA" => Ok(Self::CA),
            "CN" => Ok(Self::CN),
            "C*" | "CS" => Ok(Self::CStar),
            "SA" => Ok(Self::SA),
            "SN" => Ok(Self::SN),
            "S*" | "SS" => Ok(Self::SStar),
            _ => Err(Error::BadAction(s.to_string())),
        }
    }
}

/// Pair of realized actions (player 1, player 2); only 9 pairs can occur.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChainState {
    CaCa = 0,
    CaCn = 1,
    CnCa = 2,
    CnCn = 3,
    CsSa = 4,
    CsSn = 5,
    SaCs = 6,
    SnCs = 7,
    SsSs = 8,
}

impl ChainState {
    pub const COUNT: usize = 9;
    pub const ALL: [ChainState; 9] = [
        Self::CaCa,
        Self::CaCn,
        Self::CnCa,
        Self::CnCn,
        Self::CsSa,
        Self::CsSn,
        Self::SaCs,
        Self::SnCs,
        Self::SsSs,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn new(p1: RealizedAction, p2: RealizedAction) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.pair() == (p1, p2))
    }

    pub fn pair(self) -> (RealizedAction, RealizedAction) {
        use RealizedAction::*;
        match self {
            Self::CaCa => (CA, CA),
            Self::CaCn => (CA, CN),
            Self::CnCa => (CN, CA),
            Self::CnCn => (CN, CN),
            Self::CsSa => (CStar, SA),
            Self::CsSn => (CStar, SN),
            Self::SaCs => (SA, CStar),
            Self::SnCs => (SN, CStar),
            Self::SsSs => (SStar, SStar),
        }
    }

    pub fn player1(self) -> RealizedAction {
        self.pair().0
    }

    pub fn player2(self) -> RealizedAction {
        self.pair().1
    }

    /// Same round seen from player 2's seat.
    pub fn mirror(self) -> Self {
        let (a, b) = self.pair();
        Self::new(b, a).expect("realizable pairs are closed under swap")
    }

    /// Number of attacks executed in the round.
    pub fn attackers(self) -> usize {
        let (a, b) = self.pair();
        usize::from(a.attacked()) + usize::from(b.attacked())
    }
}

impl fmt::Display for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.pair();
        write!(f, "({a},{b})")
    }
}

/// Realized pair for a pair of executed actions.
pub fn realize(a1: SelectedAction, a2: SelectedAction) -> ChainState {
    use RealizedAction::*;
    let (t1, t2) = match (a1.crowdsources(), a2.crowdsources()) {
        (true, true) => (RealizedAction::revealed(a1), RealizedAction::revealed(a2)),
        (true, false) => (CStar, RealizedAction::revealed(a2)),
        (false, true) => (RealizedAction::revealed(a1), CStar),
        (false, false) => (SStar, SStar),
    };
    ChainState::new(t1, t2).expect("realization yields a chain state")
}

/// Expected stage payoff to player 1, as integer coefficients of
/// `2·π₁ = c₀ + c₁·d + c₂·d² + c₃·q`, indexed by [`ChainState::index`].
///
/// | state     | π₁                  |
/// |-----------|---------------------|
/// | (CA,CA)   | 1/2 − q             |
/// | (CA,CN)   | 1 − (1−d)²/2 − q    |
/// | (CN,CA)   | (1−d)²/2            |
/// | (CN,CN)   | 1/2                 |
/// | (C*,SA)   | 1 − d               |
/// | (C*,SN)   | 1                   |
/// | (SA,C*)   | d − q               |
/// | (SN,C*)   | 0                   |
/// | (S*,S*)   | 1/2                 |
pub const STAGE_PAYOFF_FORMS: [[i64; 4]; 9] = [
    [1, 0, 0, -2],
    [1, 2, -1, -2],
    [1, -2, 1, 0],
    [1, 0, 0, 0],
    [2, -2, 0, 0],
    [2, 0, 0, 0],
    [0, 2, 0, -2],
    [0, 0, 0, 0],
    [1, 0, 0, 0],
];

/// Exact expected payoff to player 1 in one round with realized pair `s`.
pub fn stage_payoff(s: ChainState, p: &Params) -> Rational {
    let basis = p.basis();
    let form = &STAGE_PAYOFF_FORMS[s.index()];
    let twice = form
        .iter()
        .zip(basis.iter())
        .fold(Rational::zero(), |acc, (&c, b)| {
            acc + b * Rational::from_integer(c.into())
        });
    twice / Rational::from_integer(2.into())
}

/// All nine stage payoffs at a parameter point, exact and converted.
#[derive(Clone, Debug)]
pub struct StagePayoffs {
    pub exact: [Rational; 9],
    pub float: [f64; 9],
}

impl StagePayoffs {
    pub fn new(p: &Params) -> Self {
        let exact = ChainState::ALL.map(|s| stage_payoff(s, p));
        let float = exact.clone().map(|v| rational_to_f64(&v));
        Self { exact, float }
    }

    /// Float payoffs for float-only parameters, from the same table.
    pub fn float_only(d: f64, q: f64) -> [f64; 9] {
        let basis = [1.0, d, d * d, q];
        STAGE_PAYOFF_FORMS.map(|form| {
            0.5 * form
                .iter()
                .zip(basis.iter())
                .map(|(&c, b)| c as f64 * b)
                .sum::<f64>()
        })
    }
}

/// Monte Carlo estimate of the stage payoff of `s` to player 1.
///
/// Crowdsourcers draw productivity uniformly on (0,1), others have 0; an
/// attacked crowdsourcer loses `d`; the strictly higher productivity wins 1,
/// ties split 1/2 each; each executed attack costs its attacker `q`.
pub fn stage_payoff_oracle(s: ChainState, d: f64, q: f64, samples: u64, seed: u64) -> f64 {
    assert!(samples >= 1, "at least one sample");
    let (t1, t2) = s.pair();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let mut p1 = if t1.crowdsourced() {
            rng.gen::<f64>()
        } else {
            0.0
        };
        let mut p2 = if t2.crowdsourced() {
            rng.gen::<f64>()
        } else {
            0.0
        };
        if t2.attacked() {
            p1 -= d;
        }
        if t1.attacked() {
            p2 -= d;
        }
        let mut win = if p1 > p2 {
            1.0
        } else if p1 == p2 {
            0.5
        } else {
            0.0
        };
        if t1.attacked() {
            win -= q;
        }
        total += win;
    }
    total / samples as f64
}

/// Probability that intending `intended` executes `actual`, as coefficients
/// of a polynomial in ε: each of the two decision bits flips independently
/// with probability ε.
pub fn error_weights(intended: SelectedAction, actual: SelectedAction) -> [i64; 3] {
    match intended.bit_distance(actual) {
        0 => [1, -2, 1],
        1 => [0, 1, -1],
        _ => [0, 0, 1],
    }
}

/// Distribution over executed actions, exact in ε, indexed by digit.
pub fn error_distribution_exact(intended: SelectedAction) -> [EpsPolynomial; 4] {
    SelectedAction::ALL.map(|a| EpsPolynomial::from_i64s(&error_weights(intended, a)))
}

/// Distribution over executed actions at a fixed ε, indexed by digit.
pub fn error_distribution(intended: SelectedAction, epsilon: f64) -> [f64; 4] {
    SelectedAction::ALL.map(|a| {
        let [c0, c1, c2] = error_weights(intended, a);
        c0 as f64 + epsilon * (c1 as f64 + epsilon * c2 as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use RealizedAction as R;
    use SelectedAction as S;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn realization_table() {
        assert_eq!(realize(S::CA, S::SA), ChainState::CsSa);
        assert_eq!(realize(S::SN, S::SN), ChainState::SsSs);
        assert_eq!(realize(S::CA, S::CN), ChainState::CaCn);
        assert_eq!(realize(S::SA, S::CN), ChainState::SaCs);
        assert_eq!(realize(S::CN, S::SN), ChainState::CsSn);
        assert_eq!(realize(S::SA, S::SN), ChainState::SsSs);
    }

    #[test]
    fn realization_hides_attack_intent() {
        for a in S::ALL {
            for b in S::ALL {
                let (t1, t2) = realize(a, b).pair();
                let starred = |t: R| matches!(t, R::CStar | R::SStar);
                let any_solo = !a.crowdsources() || !b.crowdsources();
                assert_eq!(starred(t1) || starred(t2), any_solo);
                let both_solo = !a.crowdsources() && !b.crowdsources();
                assert_eq!(starred(t1) && starred(t2), both_solo);
            }
        }
    }

    #[test]
    fn stage_payoffs_match_closed_forms() {
        // Table entries written out independently of the coefficient table.
        for (dn, qn) in [(1, 1), (3, 7), (9, 2), (5, 5)] {
            let (d, qq) = (q(dn, 10), q(qn, 10));
            let p = Params::new(d.clone(), qq.clone()).unwrap();
            let one = Rational::one();
            let half = q(1, 2);
            let sq = (&one - &d) * (&one - &d);
            let want = [
                &half - &qq,
                &one - &half * &sq - &qq,
                &half * &sq,
                half.clone(),
                &one - &d,
                one.clone(),
                &d - &qq,
                Rational::zero(),
                half.clone(),
            ];
            for s in ChainState::ALL {
                assert_eq!(stage_payoff(s, &p), want[s.index()], "{s}");
            }
        }
    }

    #[test]
    fn stage_payoff_examples() {
        let p = Params::ratio(1, 2, 1, 10).unwrap();
        assert_eq!(stage_payoff(ChainState::CaCn, &p), q(31, 40));
        assert_eq!(stage_payoff(ChainState::CsSn, &p), q(1, 1));
        assert_eq!(stage_payoff(ChainState::SsSs, &p), q(1, 2));
    }

    #[test]
    fn payoff_conservation() {
        let p = Params::ratio(2, 7, 3, 11).unwrap();
        for s in ChainState::ALL {
            let total = stage_payoff(s, &p) + stage_payoff(s.mirror(), &p);
            let cost = p.q() * Rational::from_integer((s.attackers() as i64).into());
            assert_eq!(total, Rational::one() - cost, "{s}");
        }
    }

    #[test]
    fn mirror_is_involution() {
        for s in ChainState::ALL {
            assert_eq!(s.mirror().mirror(), s);
        }
        assert_eq!(ChainState::CsSa.mirror(), ChainState::SaCs);
    }

    #[test]
    fn oracle_is_exact_for_deterministic_states() {
        assert_eq!(
            stage_payoff_oracle(ChainState::SsSs, 0.3, 0.4, 1000, 1),
            0.5
        );
        assert_eq!(
            stage_payoff_oracle(ChainState::SnCs, 0.3, 0.4, 1000, 1),
            0.0
        );
        assert_eq!(
            stage_payoff_oracle(ChainState::CsSn, 0.3, 0.4, 1000, 1),
            1.0
        );
    }

    #[test]
    fn oracle_is_seeded() {
        let a = stage_payoff_oracle(ChainState::CaCn, 0.5, 0.1, 10_000, 42);
        let b = stage_payoff_oracle(ChainState::CaCn, 0.5, 0.1, 10_000, 42);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn oracle_matches_closed_form_examples() {
        let est = stage_payoff_oracle(ChainState::CaCn, 0.5, 0.1, 1_000_000, 7);
        assert!((est - 0.775).abs() < 0.002, "{est}");
        let est = stage_payoff_oracle(ChainState::CsSa, 0.3, 0.2, 1_000_000, 7);
        assert!((est - 0.7).abs() < 0.002, "{est}");
    }

    #[test]
    fn error_distribution_examples() {
        let e = 0.01_f64;
        let close = |a: [f64; 4], b: [f64; 4]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        let (stay, one, two) = ((1.0 - e) * (1.0 - e), e * (1.0 - e), e * e);
        // indexed CA, CN, SA, SN
        assert!(close(error_distribution(S::CA, e), [stay, one, one, two]));
        assert!(close(error_distribution(S::CN, e), [one, stay, two, one]));
        assert_eq!(error_distribution(S::SN, 0.0), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn error_distribution_sums_to_one_exactly() {
        for a in S::ALL {
            let total = error_distribution_exact(a)
                .iter()
                .fold(EpsPolynomial::zero(), |acc, p| &acc + p);
            assert_eq!(total, EpsPolynomial::one());
        }
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/5").unwrap(), q(3, 5));
        assert_eq!(parse_rational("0.42").unwrap(), q(21, 50));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn params_validated() {
        assert!(Params::ratio(0, 1, 1, 2).is_err());
        assert!(Params::ratio(1, 2, 1, 1).is_err());
        assert!(FloatParams::new(0.5, 0.5, 0.5).is_err());
        assert!(FloatParams::new(0.5, 0.5, 0.0).is_ok());
    }

    #[test]
    fn scaled_basis_is_positive_multiple() {
        let p = Params::ratio(3, 7, 2, 9).unwrap();
        let scaled = p.scaled_basis();
        let basis = p.basis();
        let l = Rational::from_integer(scaled[0].clone());
        for (s, b) in scaled.iter().zip(basis.iter()) {
            assert_eq!(Rational::from_integer(s.clone()), &l * b);
        }
    }
}
