use crowdgame_core::ess::{
    expected_ess, is_ess, region_labels, scan_all_ess, single_shot_ess, Mode, Outcome, RegionLabel,
    ScanConfig,
};
use crowdgame_core::game::{Params, SelectedAction};
use crowdgame_core::markov::PayoffCache;
use crowdgame_core::strategy::{catalog, uncond_ca, uncond_cn, uncond_sa};

#[test]
fn scan_in_regions_c_g_h() {
    let p = Params::ratio(3, 5, 3, 10).unwrap();
    let report = scan_all_ess(&p, &PayoffCache::new(), ScanConfig::default()).unwrap();
    let want = vec![catalog(13).index(), catalog(14).index(), uncond_sa()];
    assert_eq!(report.ess, want);
    assert_eq!(report.efficient, vec![uncond_sa()]);
    assert_eq!(report.ess, expected_ess(&report.regions));
}

#[test]
fn scan_in_region_b() {
    let p = Params::ratio(1, 5, 1, 2).unwrap();
    let report = scan_all_ess(&p, &PayoffCache::new(), ScanConfig::default()).unwrap();
    assert_eq!(report.ess, vec![uncond_cn()]);
    assert_eq!(report.efficient, vec![uncond_cn()]);
}

#[test]
fn single_candidates_in_every_mode() {
    let p = Params::ratio(1, 5, 1, 20).unwrap();
    for mode in [Mode::Exact, Mode::Screen] {
        assert!(is_ess(uncond_ca(), &p, mode).unwrap().is_ess());
        assert!(is_ess(catalog(12).index(), &p, mode).unwrap().is_ess());
        let v = is_ess(uncond_cn(), &p, mode).unwrap();
        assert!(matches!(v.outcome, Outcome::InvadedBy(_)), "{v:?}");
    }
}

#[test]
fn strategy_ten_is_ess_but_not_efficient_in_d() {
    let p = Params::ratio(4, 5, 3, 5).unwrap();
    assert!(region_labels(&p).contains(RegionLabel::D));
    assert!(is_ess(catalog(10).index(), &p, Mode::Exact)
        .unwrap()
        .is_ess());
}

#[test]
fn single_shot_regimes() {
    use SelectedAction::*;
    let at = |a, b, c, d| single_shot_ess(&Params::ratio(a, b, c, d).unwrap()).unwrap();
    assert_eq!(at(3, 10, 1, 10), vec![CA]);
    assert_eq!(at(3, 10, 7, 10), vec![CN]);
    assert_eq!(at(7, 10, 4, 5), vec![CN]);
    assert_eq!(at(7, 10, 3, 5), vec![CN, SA]);
    assert_eq!(at(7, 10, 1, 5), vec![SA]);
}
