//! The nine-state chain on realized action pairs for an ordered strategy
//! pair, its stationary distribution (exact in ε or at a fixed ε), and the
//! long-run average payoffs.

use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    stationary_integer, stationary_small, EpsPolynomial, EpsRationalFunction, IntPoly,
    IntegerSolution, Rational, SmallPoly, SmallSolution,
};
use crate::error::{Error, Result};
use crate::game::{
    error_weights, realize, ChainState, Params, SelectedAction, StagePayoffs, STAGE_PAYOFF_FORMS,
};
use crate::strategy::{ReactiveStrategy, StrategyIndex};

const N: usize = ChainState::COUNT;

/// Residual above which a float stationary solve is rejected.
pub const FLOAT_RESIDUAL_TOL: f64 = 1e-8;

/// Coefficients (degree ≤ 4) of the transition probabilities out of a state
/// whose intended next actions are `(i1, i2)`.
type IntentRow = [[i64; 5]; N];

fn intent_rows() -> &'static [[IntentRow; 4]; 4] {
    static ROWS: OnceLock<[[IntentRow; 4]; 4]> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut rows = [[[[0i64; 5]; N]; 4]; 4];
        for i1 in SelectedAction::ALL {
            for i2 in SelectedAction::ALL {
                let row = &mut rows[i1.digit()][i2.digit()];
                for a1 in SelectedAction::ALL {
                    for a2 in SelectedAction::ALL {
                        let w1 = error_weights(i1, a1);
                        let w2 = error_weights(i2, a2);
                        let cell = &mut row[realize(a1, a2).index()];
                        for (j, c1) in w1.iter().enumerate() {
                            for (k, c2) in w2.iter().enumerate() {
                                cell[j + k] += c1 * c2;
                            }
                        }
                    }
                }
            }
        }
        rows
    })
}

/// Actions the two players intend after observing state `s`: each reacts
/// to the other's realized action only.
pub fn intended_pair(
    n: &ReactiveStrategy,
    m: &ReactiveStrategy,
    s: ChainState,
) -> (SelectedAction, SelectedAction) {
    (n.respond(s.player2()), m.respond(s.player1()))
}

/// Row-stochastic 9 × 9 matrix over the canonical [`ChainState`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<E> {
    pub entries: [[E; N]; N],
}

impl<E> TransitionMatrix<E> {
    pub fn get(&self, from: ChainState, to: ChainState) -> &E {
        &self.entries[from.index()][to.index()]
    }
}

fn exact_rows(n: &ReactiveStrategy, m: &ReactiveStrategy) -> [&'static IntentRow; N] {
    let rows = intent_rows();
    ChainState::ALL.map(|s| {
        let (i1, i2) = intended_pair(n, m, s);
        &rows[i1.digit()][i2.digit()]
    })
}

/// Transition matrix with entries exact in ε.
pub fn build_transition_exact(
    n: StrategyIndex,
    m: StrategyIndex,
) -> TransitionMatrix<EpsPolynomial> {
    let rows = exact_rows(&n.strategy(), &m.strategy());
    TransitionMatrix {
        entries: std::array::from_fn(|i| {
            std::array::from_fn(|j| EpsPolynomial::from_i64s(&rows[i][j]))
        }),
    }
}

fn integer_transition(n: &ReactiveStrategy, m: &ReactiveStrategy) -> Vec<Vec<IntPoly>> {
    exact_rows(n, m)
        .iter()
        .map(|row| row.iter().map(|c| IntPoly::from_i64s(c)).collect())
        .collect()
}

fn small_transition(n: &ReactiveStrategy, m: &ReactiveStrategy) -> Vec<Vec<SmallPoly>> {
    exact_rows(n, m)
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| SmallPoly::from_coeffs(c.iter().map(|&v| v as i128).collect()))
                .collect()
        })
        .collect()
}

/// Stationary solution with i128 coefficients.
///
/// Every row of `Tᵀ − I` has coefficient 1-norm at most 82 and the row of
/// ones has 9, so every minor met during elimination stays below 2⁵⁵ and
/// products of two minors fit in i128. The big-integer path is kept as a
/// guard.
pub fn stationary_exact_small(n: StrategyIndex, m: StrategyIndex) -> Result<SmallSolution> {
    let (sn, sm) = (n.strategy(), m.strategy());
    if let Some(res) = stationary_small(&small_transition(&sn, &sm)) {
        return res;
    }
    let big = stationary_integer(&integer_transition(&sn, &sm))?;
    let narrow = |p: &IntPoly| {
        p.to_i128()
            .ok_or(Error::Internal("stationary coefficients exceed i128"))
    };
    Ok(SmallSolution {
        numerators: big.numerators.iter().map(narrow).collect::<Result<_>>()?,
        denominator: narrow(&big.denominator)?,
    })
}

/// Transition probabilities at a fixed ε, for all 16 intended pairs.
#[derive(Clone, Debug)]
pub struct FloatKernel {
    epsilon: f64,
    rows: [[[f64; N]; 4]; 4],
}

impl FloatKernel {
    pub fn new(epsilon: f64) -> Self {
        let exact = intent_rows();
        let rows = std::array::from_fn(|i1| {
            std::array::from_fn(|i2| {
                std::array::from_fn(|s| {
                    let c = &exact[i1][i2][s];
                    c.iter().rev().fold(0.0, |acc, &v| acc * epsilon + v as f64)
                })
            })
        });
        Self { epsilon, rows }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn transition(&self, n: &ReactiveStrategy, m: &ReactiveStrategy) -> TransitionMatrix<f64> {
        TransitionMatrix {
            entries: ChainState::ALL.map(|s| {
                let (i1, i2) = intended_pair(n, m, s);
                self.rows[i1.digit()][i2.digit()]
            }),
        }
    }

    pub fn stationary(&self, n: &ReactiveStrategy, m: &ReactiveStrategy) -> Result<[f64; N]> {
        solve_stationary_f64(&self.transition(n, m))
    }
}

pub fn build_transition_float(
    n: StrategyIndex,
    m: StrategyIndex,
    epsilon: f64,
) -> TransitionMatrix<f64> {
    FloatKernel::new(epsilon).transition(&n.strategy(), &m.strategy())
}

/// Direct dense solve of (Tᵀ − I)x = 0 with the last equation replaced by Σx = 1.
pub fn solve_stationary_f64(t: &TransitionMatrix<f64>) -> Result<[f64; N]> {
    let mut a = [[0.0f64; N + 1]; N];
    for (i, row) in a.iter_mut().enumerate().take(N - 1) {
        for (j, cell) in row.iter_mut().enumerate().take(N) {
            *cell = t.entries[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[N - 1] = [1.0; N + 1];
    for k in 0..N {
        let (p, _) = (k..N).fold((k, 0.0f64), |(bi, bv), r| {
            let v = a[r][k].abs();
            if v > bv {
                (r, v)
            } else {
                (bi, bv)
            }
        });
        if a[p][k].abs() < 1e-300 {
            return Err(Error::SingularSystem);
        }
        a.swap(k, p);
        let pivot = a[k];
        for row in a.iter_mut().skip(k + 1) {
            let f = row[k] / pivot[k];
            if f != 0.0 {
                for j in k..=N {
                    row[j] -= f * pivot[j];
                }
            }
        }
    }
    let mut x = [0.0f64; N];
    for i in (0..N).rev() {
        let s: f64 = ((i + 1)..N).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][N] - s) / a[i][i];
    }
    let residual = stationary_residual(t, &x);
    if !residual.is_finite() || residual > FLOAT_RESIDUAL_TOL {
        return Err(Error::Residual(residual));
    }
    Ok(x)
}

/// max |xᵀT − xᵀ| together with |Σx − 1|.
pub fn stationary_residual(t: &TransitionMatrix<f64>, x: &[f64; N]) -> f64 {
    let mut worst = (x.iter().sum::<f64>() - 1.0).abs();
    for j in 0..N {
        let flow: f64 = (0..N).map(|i| x[i] * t.entries[i][j]).sum();
        worst = worst.max((flow - x[j]).abs());
    }
    worst
}

/// Exact stationary distribution: `numerators[s] / denominator` with
/// integer-coefficient polynomials in ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactStationary {
    pub solution: IntegerSolution,
}

impl ExactStationary {
    pub fn numerator(&self, s: ChainState) -> &IntPoly {
        &self.solution.numerators[s.index()]
    }

    pub fn denominator(&self) -> &IntPoly {
        &self.solution.denominator
    }

    pub fn distribution(&self) -> Vec<EpsRationalFunction> {
        self.solution.to_ratfuncs()
    }

    /// Mass on each state in the limit ε → 0⁺.
    pub fn limit(&self) -> [Rational; N] {
        let d0 = self.denominator().coeff(0);
        debug_assert!(!d0.is_zero(), "normalised denominator is nonzero at 0");
        ChainState::ALL.map(|s| Rational::new(self.numerator(s).coeff(0), d0.clone()))
    }

    pub fn eval_f64(&self, epsilon: f64) -> [f64; N] {
        let d = self.denominator().eval_f64(epsilon);
        ChainState::ALL.map(|s| self.numerator(s).eval_f64(epsilon) / d)
    }
}

pub fn stationary_exact(n: StrategyIndex, m: StrategyIndex) -> Result<ExactStationary> {
    Ok(ExactStationary {
        solution: stationary_exact_small(n, m)?.to_bigint(),
    })
}

/// Exact transition matrix with integer coefficients, for identity checks.
pub fn transition_integer(n: StrategyIndex, m: StrategyIndex) -> Vec<Vec<IntPoly>> {
    integer_transition(&n.strategy(), &m.strategy())
}

/// Probability that both players select the same action, per action, in the
/// limit ε → 0⁺. Index by [`SelectedAction::digit`]; the full joint
/// distribution is in the second value.
pub fn selected_action_limit(
    n: StrategyIndex,
    m: StrategyIndex,
) -> Result<([Rational; 4], [[Rational; 4]; 4])> {
    let st = stationary_exact(n, m)?;
    let limit = st.limit();
    let (sn, sm) = (n.strategy(), m.strategy());
    let mut joint: [[Rational; 4]; 4] = Default::default();
    for s in ChainState::ALL {
        let (i1, i2) = intended_pair(&sn, &sm, s);
        joint[i1.digit()][i2.digit()] += &limit[s.index()];
    }
    let diag = std::array::from_fn(|k| joint[k][k].clone());
    Ok((diag, joint))
}

/// Long-run payoff of one player as a function of (d, q, ε):
/// `π = (T₀ + d·T₁ + d²·T₂ + q·T₃) / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicPayoff {
    terms: [SmallPoly; 4],
    den: SmallPoly,
}

impl SymbolicPayoff {
    /// Payoff of player 1 (or of player 2 when `mirrored`).
    pub fn from_solution(st: &SmallSolution, mirrored: bool) -> Self {
        let terms = std::array::from_fn(|b| {
            ChainState::ALL.iter().fold(SmallPoly::zero(), |acc, &s| {
                let seat = if mirrored { s.mirror() } else { s };
                let c = STAGE_PAYOFF_FORMS[seat.index()][b];
                if c == 0 {
                    return acc;
                }
                st.numerators[s.index()]
                    .checked_scale(&(c as i128))
                    .and_then(|t| acc.checked_add(&t))
                    .expect("bounded by the stationary coefficients")
            })
        });
        let den = st.denominator.checked_scale(&2).expect("bounded");
        Self { terms, den }
    }

    pub fn from_stationary(st: &ExactStationary, mirrored: bool) -> Result<Self> {
        let narrow = |p: &IntPoly| {
            p.to_i128()
                .ok_or(Error::Internal("coefficients exceed i128"))
        };
        let small = SmallSolution {
            numerators: st
                .solution
                .numerators
                .iter()
                .map(narrow)
                .collect::<Result<_>>()?,
            denominator: narrow(&st.solution.denominator)?,
        };
        Ok(Self::from_solution(&small, mirrored))
    }

    /// Build from explicit terms (used by the one-round game).
    pub fn from_parts(terms: [SmallPoly; 4], den: SmallPoly) -> Self {
        Self { terms, den }
    }

    pub fn terms(&self) -> &[SmallPoly; 4] {
        &self.terms
    }

    pub fn den(&self) -> &SmallPoly {
        &self.den
    }

    /// Numerator at a point, scaled by the point's positive basis factor L:
    /// `π(d,q,ε) = scaled_numerator / (L · den)`.
    pub fn scaled_numerator(&self, weights: &[BigInt; 4]) -> IntPoly {
        self.terms
            .iter()
            .zip(weights.iter())
            .fold(IntPoly::zero(), |acc, (t, w)| {
                &acc + &t.to_bigint().checked_scale(w).expect("unbounded")
            })
    }

    /// Same as [`Self::scaled_numerator`] when everything fits in i128.
    pub fn scaled_numerator_small(&self, weights: &[i128; 4]) -> Option<SmallPoly> {
        self.terms
            .iter()
            .zip(weights.iter())
            .try_fold(SmallPoly::zero(), |acc, (t, w)| {
                acc.checked_add(&t.checked_scale(w)?)
            })
    }

    /// Exact payoff at `(d, q)` as a rational function of ε.
    pub fn at(&self, p: &Params) -> EpsRationalFunction {
        let basis = p.basis();
        let num = self
            .terms
            .iter()
            .zip(basis.iter())
            .fold(EpsPolynomial::zero(), |acc, (t, b)| {
                &acc + &t.to_rational().checked_scale(b).expect("unbounded")
            });
        EpsRationalFunction::new(num, self.den.to_rational()).expect("nonzero denominator")
    }

    /// Identical as functions of d, q and ε.
    pub fn identical(&self, other: &Self) -> bool {
        self.terms.iter().zip(other.terms.iter()).all(|(a, b)| {
            match a.checked_cross(&other.den, b, &self.den) {
                Some(diff) => diff.is_zero(),
                None => {
                    let (a, b) = (a.to_bigint(), b.to_bigint());
                    &a * &other.den.to_bigint() == &b * &self.den.to_bigint()
                }
            }
        })
    }

    pub fn eval_f64(&self, d: f64, q: f64, epsilon: f64) -> f64 {
        let basis = [1.0, d, d * d, q];
        let num: f64 = self
            .terms
            .iter()
            .zip(basis)
            .map(|(t, b)| t.eval_f64(epsilon) * b)
            .sum();
        num / self.den.eval_f64(epsilon)
    }
}

/// Both players' payoffs from one solve of the ordered pair (n, m).
#[derive(Clone, Debug)]
pub struct PairPayoffs {
    /// π_nm, payoff of the player using `n`.
    pub first: SymbolicPayoff,
    /// π_mn, payoff of the player using `m`.
    pub second: SymbolicPayoff,
}

impl PairPayoffs {
    pub fn compute(n: StrategyIndex, m: StrategyIndex) -> Result<Self> {
        let st = stationary_exact_small(n, m)?;
        Ok(Self {
            first: SymbolicPayoff::from_solution(&st, false),
            second: SymbolicPayoff::from_solution(&st, true),
        })
    }
}

/// Oriented view into a cached pair.
#[derive(Clone, Debug)]
pub struct PairView {
    pair: Arc<PairPayoffs>,
    swapped: bool,
}

impl PairView {
    /// π_nm for the requested orientation.
    pub fn nm(&self) -> &SymbolicPayoff {
        if self.swapped {
            &self.pair.second
        } else {
            &self.pair.first
        }
    }

    /// π_mn for the requested orientation.
    pub fn mn(&self) -> &SymbolicPayoff {
        if self.swapped {
            &self.pair.first
        } else {
            &self.pair.second
        }
    }
}

/// Exact pair payoffs keyed by the unordered strategy pair. The chain does
/// not depend on (d, q), so entries stay valid across parameter points.
/// Concurrent inserts of the same key are idempotent.
#[derive(Debug, Default)]
pub struct PayoffCache {
    pairs: DashMap<(u16, u16), Arc<PairPayoffs>>,
}

impl PayoffCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pair(&self, n: StrategyIndex, m: StrategyIndex) -> Result<PairView> {
        let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
        let key = (lo.get(), hi.get());
        let pair = match self.pairs.get(&key) {
            Some(p) => Arc::clone(&p),
            None => {
                let p = Arc::new(PairPayoffs::compute(lo, hi)?);
                self.pairs.insert(key, Arc::clone(&p));
                p
            }
        };
        Ok(PairView {
            pair,
            swapped: n > m,
        })
    }

    /// π_nn.
    pub fn homogeneous(&self, n: StrategyIndex) -> Result<SymbolicPayoff> {
        Ok(self.pair(n, n)?.nm().clone())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&self) {
        self.pairs.clear();
    }

    /// Drop entries not involving any of `keep`.
    pub fn retain_involving(&self, keep: &[StrategyIndex]) {
        self.pairs
            .retain(|&(a, b), _| keep.iter().any(|k| k.get() == a || k.get() == b));
    }
}

/// Exact or float evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum PayoffValue {
    Exact(EpsRationalFunction),
    Float(f64),
}

/// Average payoff π_nm of the player using `n` against `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffResult {
    pub n: StrategyIndex,
    pub m: StrategyIndex,
    pub value: PayoffValue,
}

/// π_nm as an exact rational function of ε at (d, q).
pub fn average_payoff_exact(
    n: StrategyIndex,
    m: StrategyIndex,
    p: &Params,
) -> Result<PayoffResult> {
    let pair = PairPayoffs::compute(n, m)?;
    Ok(PayoffResult {
        n,
        m,
        value: PayoffValue::Exact(pair.first.at(p)),
    })
}

/// π_nm at a fixed ε from the float stationary solve.
pub fn average_payoff_float(
    n: StrategyIndex,
    m: StrategyIndex,
    p: &Params,
    epsilon: f64,
) -> Result<PayoffResult> {
    let pay = StagePayoffs::new(p).float;
    let x = FloatKernel::new(epsilon).stationary(&n.strategy(), &m.strategy())?;
    Ok(PayoffResult {
        n,
        m,
        value: PayoffValue::Float(dot(&x, &pay)),
    })
}

pub fn dot(x: &[f64; N], pay: &[f64; N]) -> f64 {
    x.iter().zip(pay.iter()).map(|(a, b)| a * b).sum()
}

/// Both payoffs of a float solve: (π_nm, π_mn).
pub fn float_pair_payoffs(
    kernel: &FloatKernel,
    n: &ReactiveStrategy,
    m: &ReactiveStrategy,
    pay: &[f64; N],
) -> Result<(f64, f64)> {
    let x = kernel.stationary(n, m)?;
    let mut first = 0.0;
    let mut second = 0.0;
    for s in ChainState::ALL {
        first += x[s.index()] * pay[s.index()];
        second += x[s.index()] * pay[s.mirror().index()];
    }
    Ok((first, second))
}

/// Series coefficients of π_nm in ε up to `order`.
pub fn payoff_series(
    n: StrategyIndex,
    m: StrategyIndex,
    p: &Params,
    order: usize,
) -> Result<Vec<Rational>> {
    let pair = PairPayoffs::compute(n, m)?;
    pair.first.at(p).taylor(order)
}

/// Round-by-round simulation of the chain; returns visit counts per state.
pub fn simulate_chain(
    n: StrategyIndex,
    m: StrategyIndex,
    epsilon: f64,
    rounds: u64,
    seed: u64,
) -> [u64; N] {
    let (sn, sm) = (n.strategy(), m.strategy());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flip = |a: SelectedAction, rng: &mut ChaCha8Rng| {
        let c = a.crowdsources() ^ (rng.gen::<f64>() < epsilon);
        let k = a.attacks() ^ (rng.gen::<f64>() < epsilon);
        SelectedAction::from_bits(c, k)
    };
    let mut state = ChainState::SsSs;
    let mut counts = [0u64; N];
    for _ in 0..rounds {
        let (i1, i2) = intended_pair(&sn, &sm, state);
        let a1 = flip(i1, &mut rng);
        let a2 = flip(i2, &mut rng);
        state = realize(a1, a2);
        counts[state.index()] += 1;
    }
    counts
}

/// Sum of each row, exact.
pub fn row_sums_exact(t: &TransitionMatrix<EpsPolynomial>) -> [EpsPolynomial; N] {
    t.entries
        .each_ref()
        .map(|row| row.iter().fold(EpsPolynomial::zero(), |acc, e| &acc + e))
}

pub fn is_row_stochastic_exact(t: &TransitionMatrix<EpsPolynomial>) -> bool {
    row_sums_exact(t).iter().all(|s| *s == EpsPolynomial::one())
}
