//! Evolutionary stability in the limit ε → 0⁺ and the parameter regions.

pub mod compare;
pub mod regions;
pub mod scan;
pub mod single_shot;

pub use compare::{compare_payoffs, contest, Contest, PointWeights, Stability};
pub use regions::{
    expected_efficient, expected_ess, pd_reduction_check, region_labels, RegionLabel, RegionSet,
};
pub use scan::{
    is_ess, scan_all_ess, verdicts, EssRecord, EssReport, EssVerdict, Mode, Outcome, ScanConfig,
    Scanner, SeriesRecord,
};
pub use single_shot::{
    single_shot_ess, single_shot_ess_with, single_shot_report, SingleShotGame, SingleShotReport,
};
