//! The verification suite behind `crowdgame verify` and the acceptance
//! binary. Each check is tied to one acceptance criterion and to the table
//! or figure whose content it reproduces.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{EpsRationalFunction, Rational};
use crate::error::{Error, Result};
use crate::ess::{
    expected_efficient, expected_ess, region_labels, scan_all_ess, single_shot_ess_with, verdicts,
    Mode, RegionLabel, ScanConfig, Scanner, SingleShotGame, Stability,
};
use crate::game::{
    stage_payoff_oracle, ChainState, FloatParams, Params, SelectedAction, StagePayoffs,
    STAGE_PAYOFF_FORMS,
};
use crate::markov::{
    build_transition_exact, is_row_stochastic_exact, selected_action_limit, stationary_exact,
    FloatKernel, PairPayoffs, PayoffCache,
};
use crate::replicator::{
    basin_point, basin_three, basin_two, basin_two_from_matrix, integrate_to_absorption,
    payoff_matrix, replicator_rhs, rk4_step, time_step, Absorption, BasinResult, IntegratorConfig,
    GRID_DIVISIONS,
};
use crate::strategy::{catalog, uncond_ca, StrategyIndex, CATALOG, STRATEGY_COUNT};

/// Static description of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CheckInfo {
    pub id: &'static str,
    pub criterion: u8,
    /// Table or figure the check reproduces; named in failure reports.
    pub anchor: &'static str,
    pub title: &'static str,
    /// Wall-clock budget; exceeding it fails the check.
    pub budget: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub const CHECKS: [CheckInfo; 10] = [
    CheckInfo {
        id: "table2",
        criterion: 1,
        anchor: "Table 2",
        title: "Monte Carlo stage payoffs match the closed forms",
        budget: secs(60),
    },
    CheckInfo {
        id: "table4",
        criterion: 2,
        anchor: "Table 4",
        title: "homogeneous payoff series to third order",
        budget: secs(60),
    },
    CheckInfo {
        id: "table4-limits",
        criterion: 3,
        anchor: "Table 4",
        title: "selected-action probabilities as noise vanishes",
        budget: None,
    },
    CheckInfo {
        id: "table3",
        criterion: 4,
        anchor: "Table 3 / Fig 3",
        title: "full ESS scan at one interior point per region",
        budget: secs(12 * 600),
    },
    CheckInfo {
        id: "fig2",
        criterion: 5,
        anchor: "Fig 2",
        title: "single-shot ESS regimes on a 19x19 grid",
        budget: secs(10),
    },
    CheckInfo {
        id: "gaps",
        criterion: 6,
        anchor: "Results: payoff gaps of strategies 12 and 14",
        title: "payoff gaps against uncond-CA",
        budget: None,
    },
    CheckInfo {
        id: "dwell",
        criterion: 7,
        anchor: "Results: strategy 12 dwell in (S*,S*)",
        title: "strategy 12 stationary mass on (S*,S*)",
        budget: None,
    },
    CheckInfo {
        id: "basins-two",
        criterion: 8,
        anchor: "Fig 4",
        title: "two-strategy basins",
        budget: None,
    },
    CheckInfo {
        id: "basins-three",
        criterion: 9,
        anchor: "Fig 4",
        title: "three-strategy basins at an (L1) point",
        budget: None,
    },
    CheckInfo {
        id: "properties",
        criterion: 10,
        anchor: "Markov chain and replicator invariants",
        title: "property suite",
        budget: None,
    },
];

pub fn info(id: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.id == id)
}

/// What a check found, before timing is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub passed: bool,
    pub detail: String,
}

impl Finding {
    fn from_failures(failures: Vec<String>, ok: String) -> Self {
        if failures.is_empty() {
            Finding {
                passed: true,
                detail: ok,
            }
        } else {
            let shown: Vec<_> = failures.iter().take(8).cloned().collect();
            let more = failures.len().saturating_sub(shown.len());
            let mut detail = shown.join("; ");
            if more > 0 {
                detail.push_str(&format!("; and {more} more"));
            }
            Finding {
                passed: false,
                detail,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub criterion: u8,
    pub anchor: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckOutcome {
    /// One report line: status, criterion, id, timing and detail. Failures
    /// name the anchor they contradict.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let against = if self.passed {
            String::new()
        } else {
            format!(" [contradicts {}]", self.anchor)
        };
        format!(
            "{status} criterion {:>2} {:<14} {:>9.2}s{against} {}",
            self.criterion,
            self.id,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Run one check by id.
pub fn run_check(id: &str) -> Result<CheckOutcome> {
    let info = info(id).ok_or(Error::Precondition("unknown check id"))?;
    let start = Instant::now();
    let found = match id {
        "table2" => Ok(table2_with(&STAGE_PAYOFF_FORMS)),
        "table4" => table4_series(),
        "table4-limits" => table4_limits(),
        "table3" => table3_scan(),
        "fig2" => fig2_single_shot(),
        "gaps" => key_gaps(),
        "dwell" => strategy12_dwell(),
        "basins-two" => basins_two(),
        "basins-three" => basins_three_check(),
        "properties" => properties(),
        _ => unreachable!("ids come from CHECKS"),
    };
    Ok(conclude(info, start, found))
}

/// The stage-payoff check against a caller-supplied table of forms.
pub fn run_table2_with(forms: &[[i64; 4]; 9]) -> CheckOutcome {
    let start = Instant::now();
    conclude(&CHECKS[0], start, Ok(table2_with(forms)))
}

fn conclude(info: &CheckInfo, start: Instant, found: Result<Finding>) -> CheckOutcome {
    let elapsed = start.elapsed();
    let mut finding = found.unwrap_or_else(|e| Finding {
        passed: false,
        detail: format!("error: {e}"),
    });
    if let Some(budget) = info.budget {
        if elapsed > budget {
            finding.passed = false;
            finding.detail = format!("over the {}s budget; {}", budget.as_secs(), finding.detail);
        }
    }
    CheckOutcome {
        id: info.id,
        criterion: info.criterion,
        anchor: info.anchor,
        passed: finding.passed,
        detail: finding.detail,
        elapsed,
    }
}

/// Run the named checks, or all of them, in criterion order.
pub fn run_checks(only: &[String]) -> Result<Vec<CheckOutcome>> {
    for id in only {
        if info(id).is_none() {
            return Err(Error::Precondition("unknown check id"));
        }
    }
    CHECKS
        .iter()
        .filter(|c| only.is_empty() || only.iter().any(|o| o == c.id))
        .map(|c| run_check(c.id))
        .collect()
}

fn q_of(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

// ---------------------------------------------------------------- table 2

pub const TABLE2_SAMPLES: u64 = 1_000_000;
pub const TABLE2_TOLERANCE: f64 = 3e-3;

/// The 3 × 3 grid of (d, q) points used by the stage-payoff check.
pub fn table2_points() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for d in [0.2, 0.5, 0.8] {
        for q in [0.1, 0.3, 0.6] {
            v.push((d, q));
        }
    }
    v
}

/// Compare the Monte Carlo oracle against the closed forms given by
/// `forms` (twice the payoff, in the basis 1, d, d², q).
pub fn table2_with(forms: &[[i64; 4]; 9]) -> Finding {
    let points = table2_points();
    let jobs: Vec<(usize, (f64, f64), ChainState)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, &pt)| ChainState::ALL.into_iter().map(move |s| (i, pt, s)))
        .collect();
    let results: Vec<(String, f64)> = jobs
        .par_iter()
        .map(|&(i, (d, q), s)| {
            let form = forms[s.index()];
            let closed = 0.5
                * (form[0] as f64
                    + form[1] as f64 * d
                    + form[2] as f64 * d * d
                    + form[3] as f64 * q);
            let seed = 0x7AB1E2 + (i * 9 + s.index()) as u64;
            let mc = stage_payoff_oracle(s, d, q, TABLE2_SAMPLES, seed);
            (format!("{s} at d={d} q={q}"), (mc - closed).abs())
        })
        .collect();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let failures = results
        .iter()
        .filter(|r| r.1 > TABLE2_TOLERANCE)
        .map(|(what, err)| format!("{what}: |oracle - closed form| = {err:.2e}"))
        .collect();
    Finding::from_failures(
        failures,
        format!(
            "{} states x {} points, worst deviation {worst:.2e}",
            9,
            points.len()
        ),
    )
}

// ---------------------------------------------------------------- table 4

/// Third-order series of π_nn for catalog strategy `number`, each
/// coefficient written as `(a, b)` meaning `a + b·q`.
pub fn table4_expected(number: u8, q: &Rational) -> Vec<Rational> {
    // Each coefficient is [a_num, a_den, b_num, b_den] for a + b·q.
    const Z: [i64; 4] = [0, 1, 0, 1];
    let c = |b_num: i64, b_den: i64| [0, 1, b_num, b_den];
    let rows: [[i64; 4]; 4] = match number {
        1 => [[1, 2, -1, 1], c(2, 1), c(-1, 1), Z],
        2..=9 => [[1, 2, 0, 1], c(-1, 1), c(1, 1), Z],
        10 => [[1, 2, 0, 1], c(-1, 1), c(1, 1), c(-2, 1)],
        11 => [[1, 2, 0, 1], c(-1, 1), c(-1, 1), c(8, 1)],
        12 => [[1, 2, -1, 1], c(5, 2), c(-5, 2), c(1, 1)],
        13 => [[1, 2, -1, 2], Z, c(3, 2), c(-1, 1)],
        14 => [[1, 2, 0, 1], c(-3, 1), c(9, 1), c(-10, 1)],
        15 => [[1, 2, 0, 1], c(-2, 1), Z, c(20, 1)],
        16 => [[1, 2, 0, 1], c(-2, 1), c(1, 4), c(399, 16)],
        _ => panic!("catalog numbers run from 1 to 16"),
    };
    rows.iter()
        .map(|[an, ad, bn, bd]| q_of(*an, *ad) + q_of(*bn, *bd) * q)
        .collect()
}

/// Five seeded random rational points with d, q in (0, 1).
pub fn table4_points() -> Vec<Params> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7AB1E4);
    (0..5)
        .map(|_| {
            let mut draw = || {
                let den: i64 = rng.gen_range(3..=97);
                let num: i64 = rng.gen_range(1..den);
                (num, den)
            };
            let (dn, dd) = draw();
            let (qn, qd) = draw();
            Params::ratio(dn, dd, qn, qd).expect("inside the unit square")
        })
        .collect()
}

fn table4_series() -> Result<Finding> {
    let points = table4_points();
    let rows: Vec<(u8, Vec<String>)> = CATALOG
        .par_iter()
        .map(|e| -> Result<(u8, Vec<String>)> {
            let pair = PairPayoffs::compute(e.index(), e.index())?;
            let mut bad = Vec::new();
            for p in &points {
                let got = pair.first.at(p).taylor(3)?;
                let want = table4_expected(e.number, p.q());
                if got != want {
                    bad.push(format!(
                        "strategy {} at {p}: got [{}], expected [{}]",
                        e.number,
                        join(&got),
                        join(&want)
                    ));
                }
            }
            Ok((e.number, bad))
        })
        .collect::<Result<_>>()?;
    let failures: Vec<String> = rows.into_iter().flat_map(|r| r.1).collect();
    Ok(Finding::from_failures(
        failures,
        format!("16 strategies x {} points, exact", points.len()),
    ))
}

fn join(v: &[Rational]) -> String {
    v.iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// P(CA), P(CN), P(SA), P(SN) for catalog strategy `number`.
pub fn table4_limit_expected(number: u8) -> [Rational; 4] {
    let (z, h, o) = (q_of(0, 1), q_of(1, 2), q_of(1, 1));
    match number {
        1 | 12 => [o, z.clone(), z.clone(), z],
        2 | 4 | 5 => [z.clone(), o, z.clone(), z],
        3 | 6 | 8 | 10 | 11 | 14 => [z.clone(), z.clone(), o, z],
        7 | 9 => [z.clone(), h.clone(), h, z],
        13 => [h.clone(), z.clone(), h, z],
        15 | 16 => [z.clone(), z.clone(), z, o],
        _ => panic!("catalog numbers run from 1 to 16"),
    }
}

fn table4_limits() -> Result<Finding> {
    let mut failures = Vec::new();
    for e in &CATALOG {
        let (diag, joint) = selected_action_limit(e.index(), e.index())?;
        let want = table4_limit_expected(e.number);
        if diag != want {
            failures.push(format!(
                "strategy {}: got [{}], expected [{}]",
                e.number,
                join(&diag),
                join(&want)
            ));
        }
        let mass: Rational = joint.iter().flatten().sum();
        if mass != q_of(1, 1) {
            failures.push(format!("strategy {}: joint mass {mass}", e.number));
        }
    }
    Ok(Finding::from_failures(
        failures,
        "16 strategies, exact limits including the 1/2-1/2 splits of 7, 9 and 13".into(),
    ))
}

// ---------------------------------------------------------------- table 3

/// One interior point per region (A) through (L).
pub fn table3_points() -> Vec<(RegionLabel, Params)> {
    use RegionLabel::*;
    let pts = [
        (A, (1, 5, 1, 20)),
        (B, (1, 5, 2, 5)),
        (C, (3, 5, 3, 10)),
        (D, (4, 5, 3, 5)),
        (E, (3, 5, 1, 2)),
        (F, (21, 50, 13, 100)),
        (G, (7, 10, 43, 100)),
        (H, (2, 5, 1, 4)),
        (I, (1, 5, 3, 5)),
        (J, (4, 5, 83, 100)),
        (K, (1, 10, 1, 20)),
        (L, (7, 20, 1, 4)),
    ];
    pts.iter()
        .map(|&(r, (a, b, c, d))| (r, Params::ratio(a, b, c, d).expect("valid point")))
        .collect()
}

fn table3_scan() -> Result<Finding> {
    let cache = PayoffCache::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (label, p) in table3_points() {
        let regions = region_labels(&p);
        if !regions.contains(label) || regions.on_boundary {
            failures.push(format!("{p} is not interior to region {label}"));
            continue;
        }
        let t = Instant::now();
        let report = scan_all_ess(&p, &cache, ScanConfig::with_mode(Mode::Screen))?;
        timings.push(format!("{label} {:.0}s", t.elapsed().as_secs_f64()));
        let (want_ess, want_eff) = (expected_ess(&regions), expected_efficient(&regions));
        if report.ess != want_ess {
            failures.push(format!(
                "region {label} at {p}: ESS {:?}, expected {:?}",
                report.ess, want_ess
            ));
        }
        if report.efficient != want_eff {
            failures.push(format!(
                "region {label} at {p}: efficient {:?}, expected {:?}",
                report.efficient, want_eff
            ));
        }
        if t.elapsed() > Duration::from_secs(600) {
            failures.push(format!("region {label} took over 10 minutes"));
        }
    }
    Ok(Finding::from_failures(
        failures,
        format!("12 regions match ({})", timings.join(", ")),
    ))
}

// ---------------------------------------------------------------- fig 2

/// Single-shot regime predicted at a point, or `None` on a boundary curve.
pub fn fig2_expected(p: &Params) -> Option<Vec<SelectedAction>> {
    let (d, q) = (p.d().clone(), p.q().clone());
    let half = q_of(1, 2);
    let h = &d * (q_of(2, 1) - &d) / q_of(2, 1);
    if d == half || q == h || (d > half && q == d) {
        return None;
    }
    use SelectedAction::*;
    Some(if q < h {
        if d < half {
            vec![CA]
        } else {
            vec![SA]
        }
    } else if d > half && q < d {
        vec![CN, SA]
    } else {
        vec![CN]
    })
}

fn fig2_single_shot() -> Result<Finding> {
    let game = SingleShotGame::new();
    let mut failures = Vec::new();
    let (mut checked, mut skipped) = (0, 0);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for i in 1..20 {
        for j in 1..20 {
            let p = Params::ratio(i, 20, j, 20)?;
            let Some(want) = fig2_expected(&p) else {
                skipped += 1;
                continue;
            };
            checked += 1;
            let got = single_shot_ess_with(&game, &p)?;
            *seen
                .entry(got.iter().map(|a| a.as_str()).collect::<Vec<_>>().join("+"))
                .or_default() += 1;
            if got != want {
                failures.push(format!("{p}: got {got:?}, expected {want:?}"));
            }
        }
    }
    let regimes: Vec<String> = seen.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    Ok(Finding::from_failures(
        failures,
        format!(
            "{checked} points match, {skipped} on boundary curves skipped ({})",
            regimes.join(" ")
        ),
    ))
}

// ---------------------------------------------------------------- gaps

fn homogeneous_gap(a: StrategyIndex, b: StrategyIndex, p: &Params) -> Result<EpsRationalFunction> {
    let pa = PairPayoffs::compute(a, a)?.first.at(p);
    let pb = PairPayoffs::compute(b, b)?.first.at(p);
    Ok(pa.sub(&pb))
}

/// Points straddling the curve q = 1/2 − d by ±1/100.
pub fn straddle_points() -> Vec<(Params, bool)> {
    let mut v = Vec::new();
    for (dn, dd) in [(1, 10), (1, 5), (3, 10), (7, 20), (2, 5), (9, 20)] {
        let d = q_of(dn, dd);
        let curve = q_of(1, 2) - &d;
        for (off, above) in [(q_of(1, 100), true), (q_of(-1, 100), false)] {
            let p = Params::new(d.clone(), &curve + off).expect("inside the unit square");
            v.push((p, above));
        }
    }
    v
}

fn key_gaps() -> Result<Finding> {
    let mut failures = Vec::new();
    let (ca, s12, s14) = (uncond_ca(), catalog(12).index(), catalog(14).index());

    let k = Params::ratio(1, 10, 1, 20)?;
    let gap12 = homogeneous_gap(s12, ca, &k)?.taylor(1)?;
    let want12 = vec![q_of(0, 1), k.q() / q_of(2, 1)];
    if gap12 != want12 {
        failures.push(format!(
            "region (K) {k}: pi(12,12) - pi(CA,CA) starts [{}], expected [{}]",
            join(&gap12),
            join(&want12)
        ));
    }

    let l = Params::ratio(7, 20, 1, 4)?;
    let gap14 = homogeneous_gap(s14, ca, &l)?.limit_at_zero()?;
    if &gap14 != l.q() {
        failures.push(format!(
            "region (L) {l}: pi(14,14) - pi(CA,CA) tends to {gap14}, expected {}",
            l.q()
        ));
    }

    let cache = PayoffCache::new();
    let points = straddle_points();
    for (p, above) in &points {
        let scanner = Scanner::new(p, &cache, ScanConfig::with_mode(Mode::Exact))?;
        let resists = scanner.exact_contest(s14, ca)?.outcome == Stability::Resists;
        if resists != *above {
            failures.push(format!(
                "{p}: strategy 14 {} uncond-CA",
                if resists {
                    "resists"
                } else {
                    "does not resist"
                }
            ));
        }
    }
    Ok(Finding::from_failures(
        failures,
        format!(
            "(K) gap q/2 eps, (L) gap -> q, 14 vs CA flips across q = 1/2 - d at {} points",
            points.len()
        ),
    ))
}

// ---------------------------------------------------------------- dwell

fn strategy12_dwell() -> Result<Finding> {
    let s12 = catalog(12).index();
    let st = stationary_exact(s12, s12)?;
    let mass = &st.distribution()[ChainState::SsSs.index()];
    let series = mass.taylor(1)?;
    let mut failures = Vec::new();
    if series != vec![q_of(0, 1), q_of(1, 2)] {
        failures.push(format!("series of (S*,S*) mass is [{}]", join(&series)));
    }
    let eps = 1e-4;
    let x = FloatKernel::new(eps).stationary(&s12.strategy(), &s12.strategy())?;
    let float = x[ChainState::SsSs.index()];
    let rel = (float - 5e-5).abs() / 5e-5;
    if rel > 0.05 {
        failures.push(format!(
            "float mass {float:.4e} is {:.1}% from 5e-5",
            rel * 100.0
        ));
    }
    Ok(Finding::from_failures(
        failures,
        format!(
            "series [0, 1/2]; float mass {float:.5e} at eps = 1e-4 ({:.2}% off)",
            rel * 100.0
        ),
    ))
}

// ---------------------------------------------------------------- basins

pub const BASIN_EPSILON: f64 = 1e-3;
pub const BASIN_OFFSET: f64 = 1e-3;
pub const BISTABLE_PAIRS: usize = 20;

/// A bistable pair drawn for the two-strategy consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct BistableSample {
    pub point: Params,
    pub pair: [StrategyIndex; 2],
    pub share: f64,
}

/// Seeded draw of bistable pairs at random rational points of region (A).
/// A pair qualifies when both vertices of its 2 × 2 game are stable at
/// ε = 10⁻³ and the boundary sits at least twice the offset from either end.
pub fn bistable_samples(count: usize, seed: u64) -> Result<Vec<BistableSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Params::ratio(rng.gen_range(1..500), 1000, rng.gen_range(1..400), 1000)?;
        let regions = region_labels(&p);
        if !regions.contains(RegionLabel::A) || regions.on_boundary {
            continue;
        }
        let fp = p.float(BASIN_EPSILON)?;
        let pick = |rng: &mut ChaCha8Rng| {
            StrategyIndex::new(rng.gen_range(0..STRATEGY_COUNT as u32)).expect("in range")
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        if a == b {
            continue;
        }
        let Ok(share) = basin_two(a, b, &fp) else {
            continue;
        };
        if !(2.0 * BASIN_OFFSET..=1.0 - 2.0 * BASIN_OFFSET).contains(&share) {
            continue;
        }
        out.push(BistableSample {
            point: p,
            pair: [a, b],
            share,
        });
    }
    Ok(out)
}

/// Where strategy 14's share against uncond-CA is tested along (L2):
/// d from 0.36 to 0.46, q halfway across the region.
pub fn l2_line() -> Vec<Params> {
    (0..6)
        .map(|k| {
            let d = q_of(36 + 2 * k, 100);
            let one = q_of(1, 1);
            let h = &d * (q_of(2, 1) - &d) / q_of(2, 1);
            let lower = std::cmp::max(&one - q_of(2, 1) * &d, q_of(1, 2) - &d);
            let q = (lower + h) / q_of(2, 1);
            Params::new(d, q).expect("inside the unit square")
        })
        .collect()
}

/// Points well inside (K).
pub fn deep_k_points() -> Vec<Params> {
    [
        (1, 20, 1, 100),
        (1, 10, 1, 40),
        (1, 5, 1, 20),
        (1, 4, 1, 10),
        (3, 10, 1, 10),
    ]
    .iter()
    .map(|&(a, b, c, d)| Params::ratio(a, b, c, d).expect("valid point"))
    .collect()
}

fn basins_two() -> Result<Finding> {
    let cfg = IntegratorConfig::default();
    let mut failures = Vec::new();

    let samples = bistable_samples(BISTABLE_PAIRS, 0xBA5175)?;
    let verdicts: Vec<Option<String>> = samples
        .par_iter()
        .map(|s| -> Result<Option<String>> {
            let fp = s.point.float(BASIN_EPSILON)?;
            let pi = payoff_matrix(&s.pair, &fp)?;
            let boundary = 1.0 - s.share;
            let above = integrate_to_absorption(
                &[boundary + BASIN_OFFSET, 1.0 - boundary - BASIN_OFFSET],
                &pi,
                &cfg,
            )?;
            let below = integrate_to_absorption(
                &[boundary - BASIN_OFFSET, 1.0 - boundary + BASIN_OFFSET],
                &pi,
                &cfg,
            )?;
            Ok(
                if above == Absorption::Vertex(0) && below == Absorption::Vertex(1) {
                    None
                } else {
                    Some(format!(
                        "pair {}/{} at {}: share {:.6}, ends {above:?} above and {below:?} below",
                        s.pair[0], s.pair[1], s.point, s.share
                    ))
                },
            )
        })
        .collect::<Result<_>>()?;
    let disagreements = verdicts.iter().flatten().count();
    failures.extend(verdicts.into_iter().flatten());

    let (ca, s14) = (uncond_ca(), catalog(14).index());
    let mut line14 = Vec::new();
    for p in l2_line() {
        let regions = region_labels(&p);
        if !regions.contains(RegionLabel::L2) || regions.on_boundary {
            failures.push(format!("{p} is not interior to (L2)"));
            continue;
        }
        let b = basin_point(&p, BASIN_EPSILON, GRID_DIVISIONS, &cfg)?;
        let (share12, share14) = (b.shares[1], b.shares[2]);
        line14.push(share14);
        if share14 <= 0.5 {
            failures.push(format!("(L2) {p}: strategy 14 share {share14:.4}"));
        }
        if share12 != 0.0 {
            failures.push(format!("(L2) {p}: strategy 12 share {share12} is not 0"));
        }
        if basin_two(ca, s14, &p.float(BASIN_EPSILON)?)? + share14 != 1.0 {
            failures.push(format!("(L2) {p}: shares do not complement"));
        }
    }
    let mut deep12 = Vec::new();
    for p in deep_k_points() {
        let regions = region_labels(&p);
        if !regions.contains(RegionLabel::K) || regions.on_boundary {
            failures.push(format!("{p} is not interior to (K)"));
            continue;
        }
        let b = basin_point(&p, BASIN_EPSILON, GRID_DIVISIONS, &cfg)?;
        deep12.push(b.shares[1]);
        if b.shares[1] <= 0.5 {
            failures.push(format!("(K) {p}: strategy 12 share {:.4}", b.shares[1]));
        }
        if b.shares[2] != 0.0 {
            failures.push(format!(
                "(K) {p}: strategy 14 share {} is not 0",
                b.shares[2]
            ));
        }
    }
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Finding::from_failures(
        failures,
        format!(
            "{} bistable pairs agree on both sides ({disagreements} disagree); \
             min share of 14 along (L2) {:.4}; min share of 12 deep in (K) {:.4}; \
             12 and 14 absent where not ESS",
            samples.len(),
            min(&line14),
            min(&deep12)
        ),
    ))
}

/// The (L1) point of the three-strategy baseline.
pub fn l1_point() -> Params {
    Params::ratio(21, 50, 13, 100).expect("valid point")
}

/// Pinned result of the first exact run at [`l1_point`] with ε = 10⁻³:
/// counts for uncond-CA, 12 and 14, then the unresolved count.
pub const L1_BASELINE: [u64; 4] = [0, 13423, 5625, 653];

/// Run the (L1) three-strategy basin computation on a pool of `threads`.
pub fn l1_basins(threads: usize) -> Result<BasinResult> {
    let p = l1_point();
    let strategies = [uncond_ca(), catalog(12).index(), catalog(14).index()];
    let fp = p.float(BASIN_EPSILON)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|_| Error::Internal("thread pool"))?;
    pool.install(|| {
        basin_three(
            strategies,
            &fp,
            GRID_DIVISIONS,
            &IntegratorConfig::default(),
        )
    })
}

fn basins_three_check() -> Result<Finding> {
    let p = l1_point();
    let regions = region_labels(&p);
    let mut failures = Vec::new();
    if !regions.contains(RegionLabel::L1) || regions.on_boundary {
        failures.push(format!("{p} is not interior to (L1)"));
    }
    let first = l1_basins(rayon::current_num_threads())?;
    let second = l1_basins(1)?;
    let summary = format!(
        "{} trajectories: counts {:?}, unresolved {}",
        first.trajectories, first.counts, first.unresolved
    );
    if first.unresolved > 0 {
        failures.push(format!(
            "{} of {} trajectories unresolved after {} steps ({summary})",
            first.unresolved,
            first.trajectories,
            IntegratorConfig::default().max_steps
        ));
    }
    let total: f64 = first.shares.iter().sum();
    if first.unresolved == 0 && (total - 1.0).abs() > 1e-12 {
        failures.push(format!("shares sum to {total}"));
    }
    if first != second {
        failures.push("rerun on one thread differs".into());
    }
    let pinned = [
        first.counts[0],
        first.counts[1],
        first.counts[2],
        first.unresolved,
    ];
    if pinned != L1_BASELINE {
        failures.push(format!(
            "counts {pinned:?} differ from baseline {L1_BASELINE:?}"
        ));
    }
    Ok(Finding::from_failures(
        failures,
        format!("{summary}; rerun bit-identical; matches pinned baseline"),
    ))
}

// ---------------------------------------------------------------- properties

/// ESS flags, three-strategy grid tallies and a two-strategy share.
type RunSnapshot = (Vec<bool>, (Vec<u64>, u64, u64), f64);

fn properties() -> Result<Finding> {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9809E7);
    let catalog_ids: Vec<StrategyIndex> = CATALOG.iter().map(|e| e.index()).collect();
    let mut pairs: Vec<(StrategyIndex, StrategyIndex)> = catalog_ids
        .iter()
        .flat_map(|&a| catalog_ids.iter().map(move |&b| (a, b)))
        .collect();
    for _ in 0..200 {
        let a = StrategyIndex::new(rng.gen_range(0..STRATEGY_COUNT as u32))?;
        let b = StrategyIndex::new(rng.gen_range(0..STRATEGY_COUNT as u32))?;
        pairs.push((a, b));
    }

    let not_stochastic = pairs
        .par_iter()
        .filter(|(a, b)| !is_row_stochastic_exact(&build_transition_exact(*a, *b)))
        .count();
    if not_stochastic > 0 {
        failures.push(format!(
            "{not_stochastic} transition matrices not row-stochastic"
        ));
    }

    // Stage-level conservation at a grid of rational points.
    for i in 1..10 {
        for j in 1..10 {
            let p = Params::ratio(i, 10, j, 10)?;
            let pay = StagePayoffs::new(&p);
            for s in ChainState::ALL {
                let sum = &pay.exact[s.index()] + &pay.exact[s.mirror().index()];
                let want =
                    q_of(1, 1) - p.q() * Rational::from_integer((s.attackers() as i64).into());
                if sum != want {
                    failures.push(format!("stage conservation fails at {s}, {p}"));
                }
            }
        }
    }

    // Long-run conservation: π_nm + π_mn = 1 − q·E[attackers], exactly.
    let p = Params::ratio(3, 7, 2, 11)?;
    let conservation_bad = pairs
        .par_iter()
        .take(120)
        .map(|&(a, b)| -> Result<bool> {
            let pair = PairPayoffs::compute(a, b)?;
            let total = pair.first.at(&p).add(&pair.second.at(&p));
            let dist = stationary_exact(a, b)?.distribution();
            let mut attackers = EpsRationalFunction::zero();
            for s in ChainState::ALL {
                let k = Rational::from_integer((s.attackers() as i64).into());
                attackers = attackers.add(&dist[s.index()].scale(&k));
            }
            let want = EpsRationalFunction::constant(q_of(1, 1)).sub(&attackers.scale(p.q()));
            Ok(!total.same_function(&want))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&bad| bad)
        .count();
    if conservation_bad > 0 {
        failures.push(format!(
            "{conservation_bad} pairs break long-run conservation"
        ));
    }

    // Simplex invariance: the vector field is tangent and trajectories keep
    // Σx = 1.
    let fp = FloatParams::new(0.42, 0.13, BASIN_EPSILON)?;
    let trio = [uncond_ca(), catalog(12).index(), catalog(14).index()];
    let pi = payoff_matrix(&trio, &fp)?;
    let dt = time_step(&pi, &IntegratorConfig::default());
    let mut worst_drift: f64 = 0.0;
    for _ in 0..50 {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen::<f64>() * (1.0 - a);
        let mut x = vec![a, b, 1.0 - a - b];
        let tangent: f64 = replicator_rhs(&x, &pi).iter().sum();
        worst_drift = worst_drift.max(tangent.abs());
        for _ in 0..1000 {
            rk4_step(&mut x, &pi, dt)?;
            worst_drift = worst_drift.max((x.iter().sum::<f64>() - 1.0).abs());
            if x.iter().any(|&v| v < 0.0) {
                failures.push("negative share after a step".into());
            }
        }
    }
    if worst_drift > 1e-10 {
        failures.push(format!("simplex drift {worst_drift:.2e}"));
    }

    // Determinism across worker counts.
    let with_pool = |threads: usize| -> Result<RunSnapshot> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|_| Error::Internal("thread pool"))?;
        pool.install(|| {
            let cache = PayoffCache::new();
            let p = Params::ratio(3, 5, 3, 10)?;
            let scanner = Scanner::new(&p, &cache, ScanConfig::default())?;
            let ids: Vec<StrategyIndex> = StrategyIndex::all().step_by(37).collect();
            let v = verdicts(&scanner, &ids)?
                .iter()
                .map(|v| v.is_ess())
                .collect();
            let grid =
                crate::replicator::basin_three_from_matrix(&pi, 24, &IntegratorConfig::default())?;
            let two = basin_two_from_matrix(&payoff_matrix(&trio[..2], &fp)?)?;
            Ok((v, grid, two))
        })
    };
    if with_pool(1)? != with_pool(4)? {
        failures.push("results differ between 1 and 4 workers".into());
    }

    Ok(Finding::from_failures(
        failures,
        format!(
            "{} transition matrices row-stochastic; conservation exact; simplex drift {worst_drift:.1e}; \
             identical on 1 and 4 workers",
            pairs.len()
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_ordered() {
        for w in CHECKS.windows(2) {
            assert!(w[0].criterion < w[1].criterion);
        }
        assert!(run_checks(&["nope".to_string()]).is_err());
    }

    #[test]
    fn fig2_expectation_covers_all_regimes() {
        use SelectedAction::*;
        let at = |a, b, c, d| fig2_expected(&Params::ratio(a, b, c, d).unwrap());
        assert_eq!(at(1, 5, 1, 20), Some(vec![CA]));
        assert_eq!(at(1, 5, 1, 2), Some(vec![CN]));
        assert_eq!(at(4, 5, 3, 5), Some(vec![CN, SA]));
        assert_eq!(at(4, 5, 1, 5), Some(vec![SA]));
        assert_eq!(at(1, 2, 1, 5), None);
    }

    #[test]
    fn sample_points_are_interior() {
        for p in l2_line() {
            let r = region_labels(&p);
            assert!(r.contains(RegionLabel::L2) && !r.on_boundary, "{p}");
        }
        for p in deep_k_points() {
            let r = region_labels(&p);
            assert!(r.contains(RegionLabel::K) && !r.on_boundary, "{p}");
        }
        let r = region_labels(&l1_point());
        assert!(r.contains(RegionLabel::L1) && !r.on_boundary);
    }

    #[test]
    fn dwell_and_limits() {
        assert!(strategy12_dwell().unwrap().passed);
        assert!(table4_limits().unwrap().passed);
    }
}
