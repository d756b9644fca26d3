use crowdgame_core::checks::{bistable_samples, run_table2_with};
use crowdgame_core::error::Error;
use crowdgame_core::game::{FloatParams, Params, STAGE_PAYOFF_FORMS};
use crowdgame_core::replicator::{
    basin_point, basin_three_from_matrix, basin_two, basin_two_from_matrix, BasinMethod,
    IntegratorConfig,
};
use crowdgame_core::strategy::{catalog, uncond_ca};

#[test]
fn symmetric_pair_is_even() {
    let pi = vec![vec![1.0, 0.2], vec![0.2, 1.0]];
    assert_eq!(basin_two_from_matrix(&pi).unwrap(), 0.5);
}

#[test]
fn non_bistable_pair_is_rejected() {
    let pi = vec![vec![1.0, 2.0], vec![0.5, 0.7]];
    assert!(matches!(
        basin_two_from_matrix(&pi),
        Err(Error::NotBistable(_))
    ));
}

#[test]
fn strategy_14_dominates_the_ca_edge_in_l2() {
    let fp = FloatParams::new(0.4, 0.25, 1e-3).unwrap();
    let share_ca = basin_two(uncond_ca(), catalog(14).index(), &fp).unwrap();
    assert!(share_ca > 0.0 && share_ca < 0.5, "{share_ca}");
}

#[test]
fn strategy_12_dominates_the_ca_edge_in_k() {
    let fp = FloatParams::new(0.2, 0.05, 1e-3).unwrap();
    let share_ca = basin_two(uncond_ca(), catalog(12).index(), &fp).unwrap();
    assert!(share_ca > 0.0 && share_ca < 0.5, "{share_ca}");
}

#[test]
fn basins_need_region_a() {
    let cfg = IntegratorConfig::default();
    let b = Params::ratio(1, 5, 1, 2).unwrap();
    let err = basin_point(&b, 1e-3, 200, &cfg).unwrap_err();
    assert!(err.to_string().contains("outside region (A)"), "{err}");

    let l2 = Params::ratio(2, 5, 1, 4).unwrap();
    let r = basin_point(&l2, 1e-3, 200, &cfg).unwrap();
    assert_eq!(r.method, BasinMethod::ClosedForm);
    assert_eq!(r.shares[1], 0.0);
    assert!(r.shares[2] > 0.5);
    assert!((r.shares.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn dominant_strategy_takes_the_whole_grid() {
    let pi = vec![
        vec![2.0, 2.0, 2.0],
        vec![1.0, 1.5, 1.0],
        vec![1.0, 1.0, 1.5],
    ];
    let (counts, unresolved, total) =
        basin_three_from_matrix(&pi, 40, &IntegratorConfig::default()).unwrap();
    assert_eq!(unresolved, 0);
    assert_eq!(counts, vec![total, 0, 0]);
    assert_eq!(total, 39 * 38 / 2);
}

#[test]
fn bistable_draw_is_reproducible() {
    let a = bistable_samples(5, 9).unwrap();
    let b = bistable_samples(5, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|s| s.share > 0.0 && s.share < 1.0));
}

#[test]
fn perturbed_stage_table_fails_naming_table_2() {
    let mut forms = STAGE_PAYOFF_FORMS;
    forms[4][1] += 1;
    let outcome = run_table2_with(&forms);
    assert!(!outcome.passed);
    assert!(outcome.line().contains("Table 2"), "{}", outcome.line());
    assert!(run_table2_with(&STAGE_PAYOFF_FORMS).passed);
}
