use crowdgame_core::algebra::is_exact_stationary;
use crowdgame_core::game::{ChainState, Params, StagePayoffs};
use crowdgame_core::markov::{
    build_transition_exact, dot, is_row_stochastic_exact, simulate_chain, stationary_exact,
    transition_integer, FloatKernel, PairPayoffs,
};
use crowdgame_core::strategy::{catalog, uncond_ca, uncond_cn, uncond_sa, StrategyIndex};
use proptest::prelude::*;

fn idx() -> impl Strategy<Value = StrategyIndex> {
    (0u32..4096).prop_map(|i| StrategyIndex::new(i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transitions_are_row_stochastic(a in idx(), b in idx()) {
        prop_assert!(is_row_stochastic_exact(&build_transition_exact(a, b)));
    }

    #[test]
    fn exact_solution_solves_the_chain(a in idx(), b in idx()) {
        let st = stationary_exact(a, b).unwrap();
        prop_assert!(is_exact_stationary(&transition_integer(a, b), &st.solution));
    }

    #[test]
    fn float_solve_matches_exact(a in idx(), b in idx()) {
        let exact = stationary_exact(a, b).unwrap().eval_f64(1e-3);
        let float = FloatKernel::new(1e-3).stationary(&a.strategy(), &b.strategy()).unwrap();
        for (x, y) in exact.iter().zip(float.iter()) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn swapping_players_mirrors_payoffs(a in idx(), b in idx()) {
        let p = Params::ratio(2, 7, 1, 9).unwrap();
        let ab = PairPayoffs::compute(a, b).unwrap();
        let ba = PairPayoffs::compute(b, a).unwrap();
        prop_assert!(ab.first.at(&p).same_function(&ba.second.at(&p)));
        prop_assert!(ab.second.at(&p).same_function(&ba.first.at(&p)));
    }
}

#[test]
fn simulation_agrees_with_stationary_distribution() {
    let eps = 0.05;
    let rounds = 2_000_000;
    for (a, b) in [
        (catalog(12).index(), catalog(14).index()),
        (catalog(16).index(), uncond_ca()),
        (
            StrategyIndex::new(3001).unwrap(),
            StrategyIndex::new(77).unwrap(),
        ),
    ] {
        let counts = simulate_chain(a, b, eps, rounds, 17);
        let x = FloatKernel::new(eps)
            .stationary(&a.strategy(), &b.strategy())
            .unwrap();
        for s in ChainState::ALL {
            let freq = counts[s.index()] as f64 / rounds as f64;
            assert!(
                (freq - x[s.index()]).abs() < 5e-3,
                "{a} {b} {s}: {freq} vs {}",
                x[s.index()]
            );
        }
    }
}

#[test]
fn unconditional_pairs_have_closed_forms() {
    let p = Params::ratio(1, 5, 1, 20).unwrap();
    // uncond-SA against uncond-CN sits in (SA,C*) as noise vanishes: d - q.
    let v = PairPayoffs::compute(uncond_sa(), uncond_cn())
        .unwrap()
        .first
        .at(&p);
    assert_eq!(v.limit_at_zero().unwrap().to_string(), "3/20");
    let pay = StagePayoffs::new(&p).float;
    let x = FloatKernel::new(1e-6)
        .stationary(&uncond_sa().strategy(), &uncond_cn().strategy())
        .unwrap();
    assert!((dot(&x, &pay) - 0.15).abs() < 1e-5);
}
