//! Replicator dynamics among a few strategies with float payoffs at a fixed
//! ε, and the sizes of their basins of attraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::{region_labels, RegionLabel};
use crate::game::{FloatParams, Params, StagePayoffs};
use crate::markov::{float_pair_payoffs, FloatKernel};
use crate::strategy::{catalog, uncond_ca, StrategyIndex};

/// Absorption threshold: a trajectory is resolved once some share reaches
/// `1 − ABSORPTION_GAP`.
pub const ABSORPTION_GAP: f64 = 1e-6;
pub const MAX_STEPS: u64 = 1_000_000;
/// Step size measured in units of the payoff range of the matrix.
pub const STEP_ON_PAYOFF_SCALE: f64 = 0.1;
/// Grid spacing for three-strategy initial conditions.
pub const GRID_DIVISIONS: u32 = 200;

/// `Π[i][j]`: float payoff of strategy `i` against strategy `j`.
pub type PayoffMatrix = Vec<Vec<f64>>;

/// Float payoff matrix among `strategies` at a fixed (d, q, ε).
pub fn payoff_matrix(strategies: &[StrategyIndex], p: &FloatParams) -> Result<PayoffMatrix> {
    let kernel = FloatKernel::new(p.epsilon);
    let pay = StagePayoffs::float_only(p.d, p.q);
    let k = strategies.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (a, b) = float_pair_payoffs(
                &kernel,
                &strategies[i].strategy(),
                &strategies[j].strategy(),
                &pay,
            )?;
            m[i][j] = a;
            m[j][i] = b;
        }
    }
    Ok(m)
}

fn check_square(x: &[f64], pi: &PayoffMatrix) -> Result<()> {
    if x.is_empty()
        || x.len() > MAX_STRATEGIES
        || pi.len() != x.len()
        || pi.iter().any(|r| r.len() != x.len())
    {
        return Err(Error::Dimension);
    }
    Ok(())
}

/// `ẋₙ = xₙ(πₙ − π̄)` with `πₙ = Σₘ Π[n][m]·xₘ`.
pub fn replicator_rhs(x: &[f64], pi: &PayoffMatrix) -> Vec<f64> {
    let fitness: Vec<f64> = pi
        .iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect();
    let mean: f64 = x.iter().zip(&fitness).map(|(a, b)| a * b).sum();
    x.iter()
        .zip(&fitness)
        .map(|(xi, fi)| xi * (fi - mean))
        .collect()
}

/// Where a trajectory ends up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Absorption {
    /// Position in the strategy list of the vertex reached.
    Vertex(usize),
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step_on_payoff_scale: f64,
    pub absorption_gap: f64,
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_on_payoff_scale: STEP_ON_PAYOFF_SCALE,
            absorption_gap: ABSORPTION_GAP,
            max_steps: MAX_STEPS,
        }
    }
}

/// Time step for `Π`: the configured step divided by the payoff range.
pub fn time_step(pi: &PayoffMatrix, cfg: &IntegratorConfig) -> f64 {
    let (lo, hi) = pi
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if range > 0.0 && range.is_finite() {
        cfg.step_on_payoff_scale / range
    } else {
        cfg.step_on_payoff_scale
    }
}

/// Largest strategy set the integrator accepts.
pub const MAX_STRATEGIES: usize = 8;

type Mat<const K: usize> = [[f64; K]; K];

fn rhs_fixed<const K: usize>(x: &[f64; K], pi: &Mat<K>) -> [f64; K] {
    let mut fitness = [0.0; K];
    let mut mean = 0.0;
    for i in 0..K {
        let mut f = 0.0;
        for j in 0..K {
            f += pi[i][j] * x[j];
        }
        fitness[i] = f;
        mean += x[i] * f;
    }
    let mut out = [0.0; K];
    for i in 0..K {
        out[i] = x[i] * (fitness[i] - mean);
    }
    out
}

/// Clip to the simplex: negative and subnormal shares become 0, then the
/// vector is rescaled to sum to 1.
fn renormalize(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < f64::MIN_POSITIVE {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v /= s;
    }
}

fn winner(x: &[f64], gap: f64) -> Option<usize> {
    x.iter().position(|&v| v >= 1.0 - gap)
}

fn step_fixed<const K: usize>(x: &mut [f64; K], pi: &Mat<K>, dt: f64) {
    let k1 = rhs_fixed(x, pi);
    let mut tmp = [0.0; K];
    for i in 0..K {
        tmp[i] = x[i] + dt / 2.0 * k1[i];
    }
    let k2 = rhs_fixed(&tmp, pi);
    for i in 0..K {
        tmp[i] = x[i] + dt / 2.0 * k2[i];
    }
    let k3 = rhs_fixed(&tmp, pi);
    for i in 0..K {
        tmp[i] = x[i] + dt * k3[i];
    }
    let k4 = rhs_fixed(&tmp, pi);
    for i in 0..K {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    renormalize(x);
}

fn to_fixed<const K: usize>(x: &[f64], pi: &PayoffMatrix) -> ([f64; K], Mat<K>) {
    let mut xs = [0.0; K];
    xs.copy_from_slice(x);
    let mut m = [[0.0; K]; K];
    for (row, src) in m.iter_mut().zip(pi) {
        row.copy_from_slice(src);
    }
    (xs, m)
}

fn rk4_fixed<const K: usize>(x: &mut [f64], pi: &PayoffMatrix, dt: f64) {
    let (mut xs, m) = to_fixed::<K>(x, pi);
    step_fixed(&mut xs, &m, dt);
    x.copy_from_slice(&xs);
}

fn integrate_fixed<const K: usize>(
    x0: &[f64],
    pi: &PayoffMatrix,
    dt: f64,
    cfg: &IntegratorConfig,
) -> (Absorption, u64) {
    let (mut x, m) = to_fixed::<K>(x0, pi);
    for step in 0..cfg.max_steps {
        if let Some(w) = winner(&x, cfg.absorption_gap) {
            return (Absorption::Vertex(w), step);
        }
        step_fixed(&mut x, &m, dt);
    }
    let end = winner(&x, cfg.absorption_gap).map_or(Absorption::Unresolved, Absorption::Vertex);
    (end, cfg.max_steps)
}

/// Runs `$f::<K>` for the runtime size `$k`, 1 ≤ k ≤ MAX_STRATEGIES.
macro_rules! by_size {
    ($k:expr, $f:ident ( $($arg:expr),* )) => {
        match $k {
            1 => $f::<1>($($arg),*),
            2 => $f::<2>($($arg),*),
            3 => $f::<3>($($arg),*),
            4 => $f::<4>($($arg),*),
            5 => $f::<5>($($arg),*),
            6 => $f::<6>($($arg),*),
            7 => $f::<7>($($arg),*),
            8 => $f::<8>($($arg),*),
            _ => unreachable!("size checked by check_square"),
        }
    };
}

/// One classical fourth-order step followed by projection onto the simplex.
pub fn rk4_step(x: &mut [f64], pi: &PayoffMatrix, dt: f64) -> Result<()> {
    check_square(x, pi)?;
    by_size!(x.len(), rk4_fixed(x, pi, dt));
    Ok(())
}

/// Integrate from `x0` until a vertex is reached or the step budget runs
/// out. Returns the outcome and the number of steps taken.
pub fn integrate_counting(
    x0: &[f64],
    pi: &PayoffMatrix,
    cfg: &IntegratorConfig,
) -> Result<(Absorption, u64)> {
    check_square(x0, pi)?;
    if x0.iter().any(|v| !(0.0..=1.0).contains(v)) || (x0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition("initial state must lie on the simplex"));
    }
    let dt = time_step(pi, cfg);
    Ok(by_size!(x0.len(), integrate_fixed(x0, pi, dt, cfg)))
}

pub fn integrate_to_absorption(
    x0: &[f64],
    pi: &PayoffMatrix,
    cfg: &IntegratorConfig,
) -> Result<Absorption> {
    integrate_counting(x0, pi, cfg).map(|(a, _)| a)
}

/// Share of the simplex edge drawn to strategy 1 in a bistable pair:
/// `(π11 − π21) / (π11 + π22 − π12 − π21)`.
pub fn basin_two_from_matrix(pi: &PayoffMatrix) -> Result<f64> {
    if pi.len() != 2 || pi.iter().any(|r| r.len() != 2) {
        return Err(Error::Dimension);
    }
    let (p11, p12, p21, p22) = (pi[0][0], pi[0][1], pi[1][0], pi[1][1]);
    let den = p11 + p22 - p12 - p21;
    if !(den > 0.0) {
        return Err(Error::NotBistable(format!(
            "denominator {den:e} is not positive"
        )));
    }
    let share = (p11 - p21) / den;
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::NotBistable(format!("share {share} outside (0, 1)")));
    }
    Ok(share)
}

/// Basin share of `n1` against `n2` at (d, q, ε).
pub fn basin_two(n1: StrategyIndex, n2: StrategyIndex, p: &FloatParams) -> Result<f64> {
    basin_two_from_matrix(&payoff_matrix(&[n1, n2], p)?)
}

/// Basin shares from a grid of initial conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinResult {
    pub strategies: Vec<StrategyIndex>,
    pub d: f64,
    pub q: f64,
    pub epsilon: f64,
    pub divisions: u32,
    pub trajectories: u64,
    /// Fraction of initial conditions absorbed at each strategy's vertex.
    pub shares: Vec<f64>,
    pub counts: Vec<u64>,
    pub unresolved: u64,
}

impl BasinResult {
    pub fn unresolved_fraction(&self) -> f64 {
        self.unresolved as f64 / self.trajectories as f64
    }
}

/// Interior initial conditions `(ℓ₁, ℓ₂, ℓ₃)/divisions` with positive ℓ.
pub fn simplex_grid(divisions: u32) -> Vec<[f64; 3]> {
    let n = divisions;
    let step = 1.0 / n as f64;
    let mut out = Vec::new();
    for l1 in 1..n {
        for l2 in 1..(n - l1) {
            let l3 = n - l1 - l2;
            out.push([l1 as f64 * step, l2 as f64 * step, l3 as f64 * step]);
        }
    }
    out
}

/// Classify every grid initial condition for a 3 × 3 payoff matrix.
pub fn basin_three_from_matrix(
    pi: &PayoffMatrix,
    divisions: u32,
    cfg: &IntegratorConfig,
) -> Result<(Vec<u64>, u64, u64)> {
    if pi.len() != 3 {
        return Err(Error::Dimension);
    }
    let grid = simplex_grid(divisions);
    let ends: Vec<Absorption> = grid
        .par_iter()
        .map(|x0| integrate_to_absorption(x0, pi, cfg))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; 3];
    let mut unresolved = 0;
    for e in ends {
        match e {
            Absorption::Vertex(k) => counts[k] += 1,
            Absorption::Unresolved => unresolved += 1,
        }
    }
    Ok((counts, unresolved, grid.len() as u64))
}

/// Basin shares of three strategies from the grid with spacing `1/divisions`.
pub fn basin_three(
    strategies: [StrategyIndex; 3],
    p: &FloatParams,
    divisions: u32,
    cfg: &IntegratorConfig,
) -> Result<BasinResult> {
    let pi = payoff_matrix(&strategies, p)?;
    let (counts, unresolved, total) = basin_three_from_matrix(&pi, divisions, cfg)?;
    Ok(BasinResult {
        strategies: strategies.to_vec(),
        d: p.d,
        q: p.q,
        epsilon: p.epsilon,
        divisions,
        trajectories: total,
        shares: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        counts,
        unresolved,
    })
}

/// How a basin point was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasinMethod {
    ClosedForm,
    Grid,
}

/// Basin shares of uncond-CA, strategy 12 and strategy 14 at a point of
/// region (A). A strategy that is not an ESS at the point gets share 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinPoint {
    pub d: String,
    pub q: String,
    pub epsilon: f64,
    pub strategies: Vec<StrategyIndex>,
    pub shares: Vec<f64>,
    pub unresolved_fraction: f64,
    pub method: BasinMethod,
}

/// The ESS set of region (A) at `p`: {CA, 12} in (K), {CA, 12, 14} in (L1),
/// {CA, 14} in (L2).
pub fn region_a_strategies(p: &Params) -> Result<Vec<StrategyIndex>> {
    let regions = region_labels(p);
    if !regions.contains(RegionLabel::A) {
        return Err(Error::OutsideRegionA {
            d: p.d().to_string(),
            q: p.q().to_string(),
        });
    }
    if regions.on_boundary {
        return Err(Error::Precondition("point lies on a region boundary"));
    }
    let (ca, s12, s14) = (uncond_ca(), catalog(12).index(), catalog(14).index());
    if regions.contains(RegionLabel::K) {
        Ok(vec![ca, s12])
    } else if regions.contains(RegionLabel::L1) {
        Ok(vec![ca, s12, s14])
    } else if regions.contains(RegionLabel::L2) {
        Ok(vec![ca, s14])
    } else {
        Err(Error::Internal(
            "region (A) point outside (K), (L1) and (L2)",
        ))
    }
}

/// Basin shares at one point: closed form for two ESSs, grid integration
/// for three.
pub fn basin_point(
    p: &Params,
    epsilon: f64,
    divisions: u32,
    cfg: &IntegratorConfig,
) -> Result<BasinPoint> {
    let present = region_a_strategies(p)?;
    let fp = p.float(epsilon)?;
    let all = [uncond_ca(), catalog(12).index(), catalog(14).index()];
    let mut shares = vec![0.0; 3];
    let place = |s: StrategyIndex| all.iter().position(|&a| a == s).expect("one of three");
    let (unresolved_fraction, method) = if present.len() == 2 {
        let share = basin_two(present[0], present[1], &fp)?;
        shares[place(present[0])] = share;
        shares[place(present[1])] = 1.0 - share;
        (0.0, BasinMethod::ClosedForm)
    } else {
        let r = basin_three([present[0], present[1], present[2]], &fp, divisions, cfg)?;
        for (s, v) in present.iter().zip(&r.shares) {
            shares[place(*s)] = *v;
        }
        (r.unresolved_fraction(), BasinMethod::Grid)
    };
    Ok(BasinPoint {
        d: p.d().to_string(),
        q: p.q().to_string(),
        epsilon,
        strategies: all.to_vec(),
        shares,
        unresolved_fraction,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_count() {
        assert_eq!(simplex_grid(200).len(), 19701);
        assert_eq!(simplex_grid(3).len(), 1);
    }

    #[test]
    fn vertices_are_fixed() {
        let pi = vec![
            vec![1.0, 0.2, 0.3],
            vec![0.5, 0.7, 0.1],
            vec![0.0, 0.9, 0.4],
        ];
        for k in 0..3 {
            let mut x = vec![0.0; 3];
            x[k] = 1.0;
            assert!(replicator_rhs(&x, &pi).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rates_are_tangent() {
        let pi = vec![
            vec![1.0, 0.2, 0.3],
            vec![0.5, 0.7, 0.1],
            vec![0.0, 0.9, 0.4],
        ];
        let r = replicator_rhs(&[0.2, 0.5, 0.3], &pi);
        assert!(r.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let pi = vec![vec![1.0, 0.2], vec![0.2, 1.0]];
        assert!((basin_two_from_matrix(&pi).unwrap() - 0.5).abs() < 1e-15);
        assert!(basin_two_from_matrix(&vec![vec![1.0, 1.0], vec![0.0, 0.5]]).is_err());
    }

    #[test]
    fn dominance_takes_everything() {
        let pi = vec![
            vec![1.0, 1.0, 1.0],
            vec![0.5, 0.5, 0.5],
            vec![0.2, 0.2, 0.2],
        ];
        let (counts, unresolved, total) =
            basin_three_from_matrix(&pi, 20, &IntegratorConfig::default()).unwrap();
        assert_eq!(counts, vec![total, 0, 0]);
        assert_eq!(unresolved, 0);
    }

    #[test]
    fn near_vertex_start_is_absorbed_there() {
        let pi = vec![
            vec![1.0, 0.3, 0.3],
            vec![0.2, 0.8, 0.1],
            vec![0.2, 0.1, 0.8],
        ];
        let end = integrate_to_absorption(&[0.98, 0.01, 0.01], &pi, &IntegratorConfig::default())
            .unwrap();
        assert_eq!(end, Absorption::Vertex(0));
    }
}
