//! The one-round game between the four selected actions, with each decision
//! bit flipped with probability ε, and its ESSs as ε → 0⁺.

use serde::{Deserialize, Serialize};

use super::compare::{contest, PointWeights, Stability};
use crate::algebra::SmallPoly;
use crate::error::Result;
use crate::game::{error_weights, realize, Params, SelectedAction, STAGE_PAYOFF_FORMS};
use crate::markov::SymbolicPayoff;

/// `matrix[a][b]`: expected payoff of intending `a` against `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleShotGame {
    pub matrix: [[SymbolicPayoff; 4]; 4],
}

impl SingleShotGame {
    pub fn new() -> Self {
        let entry = |a: SelectedAction, b: SelectedAction| {
            let mut terms = [[0i128; 5]; 4];
            for x in SelectedAction::ALL {
                for y in SelectedAction::ALL {
                    let form = STAGE_PAYOFF_FORMS[realize(x, y).index()];
                    let (wx, wy) = (error_weights(a, x), error_weights(b, y));
                    for (i, cx) in wx.iter().enumerate() {
                        for (j, cy) in wy.iter().enumerate() {
                            for (k, f) in form.iter().enumerate() {
                                terms[k][i + j] += (cx * cy * f) as i128;
                            }
                        }
                    }
                }
            }
            SymbolicPayoff::from_parts(
                terms.map(|t| SmallPoly::from_coeffs(t.to_vec())),
                SmallPoly::constant(2),
            )
        };
        Self {
            matrix: SelectedAction::ALL.map(|a| SelectedAction::ALL.map(|b| entry(a, b))),
        }
    }

    pub fn payoff(&self, a: SelectedAction, b: SelectedAction) -> &SymbolicPayoff {
        &self.matrix[a.digit()][b.digit()]
    }
}

impl Default for SingleShotGame {
    fn default() -> Self {
        Self::new()
    }
}

/// Actions that are ESSs of the one-round game at `p`, in digit order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleShotReport {
    pub d: String,
    pub q: String,
    pub ess: Vec<SelectedAction>,
}

pub fn single_shot_ess_with(game: &SingleShotGame, p: &Params) -> Result<Vec<SelectedAction>> {
    let w = PointWeights::new(p);
    let mut out = Vec::new();
    'candidates: for a in SelectedAction::ALL {
        for b in SelectedAction::ALL.into_iter().filter(|&b| b != a) {
            let c = contest(
                game.payoff(a, a),
                game.payoff(a, b),
                game.payoff(b, a),
                || Ok(game.payoff(b, b).clone()),
                &w,
            )?;
            if c.outcome != Stability::Resists {
                continue 'candidates;
            }
        }
        out.push(a);
    }
    Ok(out)
}

pub fn single_shot_ess(p: &Params) -> Result<Vec<SelectedAction>> {
    single_shot_ess_with(&SingleShotGame::new(), p)
}

pub fn single_shot_report(p: &Params) -> Result<SingleShotReport> {
    Ok(SingleShotReport {
        d: p.d().to_string(),
        q: p.q().to_string(),
        ess: single_shot_ess(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{stage_payoff, ChainState};
    use SelectedAction::*;

    #[test]
    fn zero_noise_entries_are_stage_payoffs() {
        let g = SingleShotGame::new();
        let p = Params::ratio(1, 5, 1, 20).unwrap();
        for a in SelectedAction::ALL {
            for b in SelectedAction::ALL {
                let v = g.payoff(a, b).at(&p).limit_at_zero().unwrap();
                assert_eq!(v, stage_payoff(realize(a, b), &p), "{a} {b}");
            }
        }
        assert_eq!(realize(SA, CN), ChainState::SaCs);
    }

    #[test]
    fn examples() {
        let at = |dn, dd, qn, qd| single_shot_ess(&Params::ratio(dn, dd, qn, qd).unwrap()).unwrap();
        assert_eq!(at(1, 5, 1, 20), vec![CA]);
        assert_eq!(at(4, 5, 3, 5), vec![CN, SA]);
        assert_eq!(at(1, 5, 1, 2), vec![CN]);
        assert_eq!(at(4, 5, 1, 5), vec![SA]);
    }
}
