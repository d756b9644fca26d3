//! ESS test for one strategy and the exhaustive scan over all 4096.

use std::cmp::Ordering;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compare::{compare_payoffs, contest, Contest, PointWeights, Stability};
use super::regions::{region_labels, RegionSet};
use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::game::{Params, StagePayoffs};
use crate::markov::{float_pair_payoffs, FloatKernel, PairPayoffs, PayoffCache, SymbolicPayoff};
use crate::strategy::{StrategyIndex, CATALOG, STRATEGY_COUNT};

/// How pairwise verdicts are reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every contest in exact arithmetic.
    Exact,
    /// Floating point only, at the smallest screening ε. Approximate.
    Float,
    /// Floating-point screen, with every verdict that matters confirmed
    /// exactly. The result equals [`Mode::Exact`].
    Screen,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            "screen" | "screen+confirm" => Ok(Mode::Screen),
            _ => Err(Error::Precondition("mode must be exact, float or screen")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub mode: Mode,
    pub screen_epsilons: Vec<f64>,
    pub margin: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Screen,
            screen_epsilons: vec![1e-3, 1e-4],
            margin: 1e-7,
        }
    }
}

impl ScanConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "by", rename_all = "kebab-case")]
pub enum Outcome {
    Ess,
    InvadedBy(StrategyIndex),
    NeutrallyInvadedBy(StrategyIndex),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssVerdict {
    pub candidate: StrategyIndex,
    pub outcome: Outcome,
    /// Mutants whose exact contest relied on a tie that holds only at this
    /// (d, q).
    pub degenerate: Vec<StrategyIndex>,
}

impl EssVerdict {
    pub fn is_ess(&self) -> bool {
        self.outcome == Outcome::Ess
    }
}

/// Float data for one screening ε.
struct Layer {
    kernel: FloatKernel,
    pay: [f64; 9],
    homogeneous: Vec<f64>,
}

enum Screened {
    Invades,
    Resists,
    Unclear,
}

/// Everything needed to test strategies at one (d, q).
pub struct Scanner<'a> {
    params: Params,
    weights: PointWeights,
    cache: &'a PayoffCache,
    config: ScanConfig,
    layers: Vec<Layer>,
    probe_order: Vec<StrategyIndex>,
    hot: Vec<bool>,
}

/// Invaders tried first: the catalog, then all-SN, then the rest ascending.
fn probe_order() -> Vec<StrategyIndex> {
    let mut order: Vec<StrategyIndex> = CATALOG.iter().map(|e| e.index()).collect();
    let last = StrategyIndex::new(STRATEGY_COUNT as u32 - 1).expect("in range");
    order.push(last);
    let mut seen = vec![false; STRATEGY_COUNT];
    for s in &order {
        seen[s.usize()] = true;
    }
    order.extend(StrategyIndex::all().filter(|s| !seen[s.usize()]));
    order
}

impl<'a> Scanner<'a> {
    pub fn new(params: &Params, cache: &'a PayoffCache, config: ScanConfig) -> Result<Self> {
        if config.mode != Mode::Exact && config.screen_epsilons.is_empty() {
            return Err(Error::Precondition("float screening needs at least one ε"));
        }
        let layers = if config.mode == Mode::Exact {
            Vec::new()
        } else {
            let pay = StagePayoffs::new(params).float;
            config
                .screen_epsilons
                .iter()
                .map(|&eps| {
                    let kernel = FloatKernel::new(eps);
                    let homogeneous = StrategyIndex::all()
                        .collect::<Vec<_>>()
                        .par_iter()
                        .map(|n| {
                            let s = n.strategy();
                            float_pair_payoffs(&kernel, &s, &s, &pay)
                                .map(|(a, _)| a)
                                .unwrap_or(f64::NAN)
                        })
                        .collect();
                    Layer {
                        kernel,
                        pay,
                        homogeneous,
                    }
                })
                .collect()
        };
        let order = probe_order();
        let mut hot = vec![false; STRATEGY_COUNT];
        for s in &order[..CATALOG.len() + 1] {
            hot[s.usize()] = true;
        }
        Ok(Self {
            params: params.clone(),
            weights: PointWeights::new(params),
            cache,
            config,
            layers,
            probe_order: order,
            hot,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn weights(&self) -> &PointWeights {
        &self.weights
    }

    /// Exact contest. Pairs touching the catalog are cached; other pairs
    /// are solved on demand so that memory stays bounded across points.
    pub fn exact_contest(&self, n: StrategyIndex, m: StrategyIndex) -> Result<Contest> {
        let nn = self.cache.homogeneous(n)?;
        let mm = || self.cache.homogeneous(m);
        if self.hot[n.usize()] || self.hot[m.usize()] {
            let view = self.cache.pair(n, m)?;
            contest(&nn, view.nm(), view.mn(), mm, &self.weights)
        } else {
            let pair = PairPayoffs::compute(n, m)?;
            contest(&nn, &pair.first, &pair.second, mm, &self.weights)
        }
    }

    fn screen(&self, n: StrategyIndex, m: StrategyIndex) -> Screened {
        let margin = self.config.margin;
        let (sn, sm) = (n.strategy(), m.strategy());
        let mut votes = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let Ok((nm, mn)) = float_pair_payoffs(&layer.kernel, &sn, &sm, &layer.pay) else {
                return Screened::Unclear;
            };
            let nn = layer.homogeneous[n.usize()];
            let mm = layer.homogeneous[m.usize()];
            let first = nn - mn;
            let vote = if first > margin {
                Screened::Resists
            } else if first < -margin {
                Screened::Invades
            } else {
                let second = nm - mm;
                if second < -margin {
                    Screened::Invades
                } else {
                    Screened::Unclear
                }
            };
            votes.push(vote);
        }
        if votes.iter().all(|v| matches!(v, Screened::Invades)) {
            Screened::Invades
        } else if votes.iter().all(|v| matches!(v, Screened::Resists)) {
            Screened::Resists
        } else {
            Screened::Unclear
        }
    }

    /// Float-only verdict at the smallest screening ε.
    fn float_stability(&self, n: StrategyIndex, m: StrategyIndex) -> Result<Stability> {
        let layer = self
            .layers
            .iter()
            .min_by(|a, b| a.kernel.epsilon().total_cmp(&b.kernel.epsilon()))
            .expect("layers present in float mode");
        let (nm, mn) = float_pair_payoffs(&layer.kernel, &n.strategy(), &m.strategy(), &layer.pay)?;
        let (nn, mm) = (layer.homogeneous[n.usize()], layer.homogeneous[m.usize()]);
        let margin = self.config.margin;
        let tier = |x: f64| {
            if x > margin {
                Some(Stability::Resists)
            } else if x < -margin {
                Some(Stability::Invaded)
            } else {
                None
            }
        };
        Ok(tier(nn - mn)
            .or_else(|| tier(nm - mm))
            .unwrap_or(Stability::NeutrallyInvaded))
    }

    /// ESS test of `n` against all 4095 alternatives.
    pub fn is_ess(&self, n: StrategyIndex) -> Result<EssVerdict> {
        let mut degenerate = Vec::new();
        let mut verdict = |m: StrategyIndex, c: Contest| -> Option<Outcome> {
            if c.degenerate {
                degenerate.push(m);
            }
            match c.outcome {
                Stability::Resists => None,
                Stability::Invaded => Some(Outcome::InvadedBy(m)),
                Stability::NeutrallyInvaded => Some(Outcome::NeutrallyInvadedBy(m)),
            }
        };
        let others = self.probe_order.iter().copied().filter(|&m| m != n);
        let outcome = match self.config.mode {
            Mode::Exact => {
                let mut out = Outcome::Ess;
                for m in others {
                    if let Some(o) = verdict(m, self.exact_contest(n, m)?) {
                        out = o;
                        break;
                    }
                }
                out
            }
            Mode::Float => {
                let mut out = Outcome::Ess;
                for m in others {
                    match self.float_stability(n, m)? {
                        Stability::Resists => {}
                        Stability::Invaded => {
                            out = Outcome::InvadedBy(m);
                            break;
                        }
                        Stability::NeutrallyInvaded => {
                            out = Outcome::NeutrallyInvadedBy(m);
                            break;
                        }
                    }
                }
                out
            }
            Mode::Screen => self.screen_then_confirm(n, others, &mut verdict)?,
        };
        degenerate.sort();
        degenerate.dedup();
        Ok(EssVerdict {
            candidate: n,
            outcome,
            degenerate,
        })
    }

    fn screen_then_confirm(
        &self,
        n: StrategyIndex,
        others: impl Iterator<Item = StrategyIndex> + Clone,
        verdict: &mut impl FnMut(StrategyIndex, Contest) -> Option<Outcome>,
    ) -> Result<Outcome> {
        let mut checked = vec![false; STRATEGY_COUNT];
        let mut unclear = Vec::new();
        for m in others.clone() {
            match self.screen(n, m) {
                Screened::Resists => {}
                Screened::Unclear => unclear.push(m),
                Screened::Invades => {
                    checked[m.usize()] = true;
                    if let Some(o) = verdict(m, self.exact_contest(n, m)?) {
                        return Ok(o);
                    }
                }
            }
        }
        for m in unclear {
            checked[m.usize()] = true;
            if let Some(o) = verdict(m, self.exact_contest(n, m)?) {
                return Ok(o);
            }
        }
        // Survived the screen: confirm the remaining contests exactly.
        for m in others.filter(|m| !checked[m.usize()]) {
            if let Some(o) = verdict(m, self.exact_contest(n, m)?) {
                return Ok(o);
            }
        }
        Ok(Outcome::Ess)
    }

    /// Homogeneous payoff of `n`, exact.
    pub fn homogeneous(&self, n: StrategyIndex) -> Result<SymbolicPayoff> {
        self.cache.homogeneous(n)
    }

    /// ESSs whose homogeneous payoff is maximal among `ess`, ties included.
    pub fn efficient_subset(&self, ess: &[StrategyIndex]) -> Result<Vec<StrategyIndex>> {
        let pay: Vec<SymbolicPayoff> = ess
            .iter()
            .map(|&n| self.homogeneous(n))
            .collect::<Result<_>>()?;
        Ok(ess
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                pay.iter()
                    .all(|other| compare_payoffs(&pay[i], other, &self.weights) != Ordering::Less)
            })
            .map(|(_, &n)| n)
            .collect())
    }

    /// Series of π_nn in ε at this point, coefficients of ε⁰..ε^order.
    pub fn homogeneous_series(&self, n: StrategyIndex, order: usize) -> Result<Vec<Rational>> {
        self.homogeneous(n)?.at(&self.params).taylor(order)
    }
}

/// Result of a full scan at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct EssReport {
    pub params: Params,
    pub mode: Mode,
    pub ess: Vec<StrategyIndex>,
    pub efficient: Vec<StrategyIndex>,
    /// `series[k]` belongs to `ess[k]`: coefficients of ε⁰..ε³ of π_nn.
    pub series: Vec<Vec<Rational>>,
    pub regions: RegionSet,
    /// (resident, mutant) pairs whose verdict used a pointwise-only tie.
    pub degenerate: Vec<(StrategyIndex, StrategyIndex)>,
}

/// Serializable form of [`EssReport`] with rationals as `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssRecord {
    pub d: String,
    pub q: String,
    pub mode: Mode,
    pub ess: Vec<StrategyIndex>,
    pub efficient: Vec<StrategyIndex>,
    pub series: Vec<SeriesRecord>,
    pub regions: Vec<String>,
    pub on_boundary: bool,
    pub degenerate: Vec<(StrategyIndex, StrategyIndex)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub strategy: StrategyIndex,
    pub coefficients: Vec<String>,
}

impl EssReport {
    pub fn to_record(&self) -> EssRecord {
        EssRecord {
            d: self.params.d().to_string(),
            q: self.params.q().to_string(),
            mode: self.mode,
            ess: self.ess.clone(),
            efficient: self.efficient.clone(),
            series: self
                .ess
                .iter()
                .zip(&self.series)
                .map(|(&strategy, c)| SeriesRecord {
                    strategy,
                    coefficients: c.iter().map(|r| r.to_string()).collect(),
                })
                .collect(),
            regions: self.regions.labels.iter().map(|r| r.to_string()).collect(),
            on_boundary: self.regions.on_boundary,
            degenerate: self.degenerate.clone(),
        }
    }
}

/// Verdicts for a list of candidates, in the given order.
pub fn verdicts(scanner: &Scanner<'_>, candidates: &[StrategyIndex]) -> Result<Vec<EssVerdict>> {
    candidates.par_iter().map(|&n| scanner.is_ess(n)).collect()
}

/// Test every strategy at `params`.
pub fn scan_all_ess(params: &Params, cache: &PayoffCache, config: ScanConfig) -> Result<EssReport> {
    let mode = config.mode;
    let scanner = Scanner::new(params, cache, config)?;
    let all: Vec<StrategyIndex> = StrategyIndex::all().collect();
    let found = verdicts(&scanner, &all)?;
    let ess: Vec<StrategyIndex> = found
        .iter()
        .filter(|v| v.is_ess())
        .map(|v| v.candidate)
        .collect();
    let efficient = scanner.efficient_subset(&ess)?;
    let series = ess
        .iter()
        .map(|&n| scanner.homogeneous_series(n, 3))
        .collect::<Result<_>>()?;
    let degenerate = found
        .iter()
        .flat_map(|v| v.degenerate.iter().map(move |&m| (v.candidate, m)))
        .collect();
    Ok(EssReport {
        params: params.clone(),
        mode,
        ess,
        efficient,
        series,
        regions: region_labels(params),
        degenerate,
    })
}

/// Single-strategy test with a private cache.
pub fn is_ess(n: StrategyIndex, params: &Params, mode: Mode) -> Result<EssVerdict> {
    let cache = PayoffCache::new();
    Scanner::new(params, &cache, ScanConfig::with_mode(mode))?.is_ess(n)
}
