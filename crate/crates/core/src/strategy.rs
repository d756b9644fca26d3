//! Reactive strategies: a response for each of the six realized actions the
//! opponent can show, 4⁶ = 4096 in total.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::RegionLabel;
use crate::game::{RealizedAction, SelectedAction};

pub const STRATEGY_COUNT: usize = 4096;

/// Canonical strategy number: base-4 digits CA=0, CN=1, SA=2, SN=3, with
/// the response to CA most significant and the response to S* least.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyIndex(u16);

impl StrategyIndex {
    pub fn new(i: u32) -> Result<Self> {
        if (i as usize) < STRATEGY_COUNT {
            Ok(Self(i as u16))
        } else {
            Err(Error::IndexOutOfRange(i))
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }

    pub fn usize(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = StrategyIndex> + Clone {
        (0..STRATEGY_COUNT as u16).map(StrategyIndex)
    }

    pub fn strategy(self) -> ReactiveStrategy {
        decode(self)
    }
}

impl fmt::Display for StrategyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Response table in the column order CA, CN, C*, SA, SN, S*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReactiveStrategy {
    table: [SelectedAction; 6],
}

impl ReactiveStrategy {
    pub const fn new(table: [SelectedAction; 6]) -> Self {
        Self { table }
    }

    pub const fn constant(a: SelectedAction) -> Self {
        Self { table: [a; 6] }
    }

    pub fn table(&self) -> &[SelectedAction; 6] {
        &self.table
    }

    pub fn respond(&self, opponent: RealizedAction) -> SelectedAction {
        self.table[opponent.index()]
    }

    pub fn index(&self) -> StrategyIndex {
        encode(self)
    }

    pub fn is_unconditional(&self) -> bool {
        self.table.iter().all(|&a| a == self.table[0])
    }
}

pub fn encode(s: &ReactiveStrategy) -> StrategyIndex {
    let v = s
        .table
        .iter()
        .fold(0u16, |acc, a| acc * 4 + a.digit() as u16);
    StrategyIndex(v)
}

pub fn decode(i: StrategyIndex) -> ReactiveStrategy {
    let mut table = [SelectedAction::CA; 6];
    let mut v = i.0 as usize;
    for slot in table.iter_mut().rev() {
        *slot = SelectedAction::from_digit(v % 4);
        v /= 4;
    }
    ReactiveStrategy { table }
}

impl fmt::Display for ReactiveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.table.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str(a.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for ReactiveStrategy {
    type Err = Error;

    /// Accepts the six-action form `CA,CA,CA,CA,CA,SA` or a bare index.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(i) = t.parse::<u32>() {
            return Ok(decode(StrategyIndex::new(i)?));
        }
        let parts: Vec<&str> = t.split(',').collect();
        if parts.len() != 6 {
            return Err(Error::BadStrategy(s.to_string()));
        }
        let mut table = [SelectedAction::CA; 6];
        for (slot, p) in table.iter_mut().zip(parts) {
            *slot = p.parse().map_err(|_| Error::BadStrategy(s.to_string()))?;
        }
        Ok(Self { table })
    }
}

/// One of the sixteen strategies that are ESSs somewhere in the (d,q) plane.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    /// Position 1..=16 in the catalog.
    pub number: u8,
    pub name: &'static str,
    pub strategy: ReactiveStrategy,
    pub ess_region: RegionLabel,
    pub efficiency_region: Option<RegionLabel>,
}

impl CatalogEntry {
    pub fn index(&self) -> StrategyIndex {
        self.strategy.index()
    }
}

const fn row(
    number: u8,
    name: &'static str,
    table: [SelectedAction; 6],
    ess_region: RegionLabel,
    efficiency_region: Option<RegionLabel>,
) -> CatalogEntry {
    CatalogEntry {
        number,
        name,
        strategy: ReactiveStrategy::new(table),
        ess_region,
        efficiency_region,
    }
}

use RegionLabel as Rg;
use SelectedAction::{CA, CN, SA, SN};

pub const CATALOG: [CatalogEntry; 16] = [
    row(1, "uncond-CA", [CA, CA, CA, CA, CA, CA], Rg::A, None),
    row(2, "uncond-CN", [CN, CN, CN, CN, CN, CN], Rg::B, Some(Rg::B)),
    row(3, "uncond-SA", [SA, SA, SA, SA, SA, SA], Rg::C, Some(Rg::C)),
    row(
        4,
        "strategy 4",
        [CN, CN, CN, CN, CN, SA],
        Rg::D,
        Some(Rg::D),
    ),
    row(
        5,
        "strategy 5",
        [CN, CN, SA, SA, SA, CN],
        Rg::D,
        Some(Rg::D),
    ),
    row(
        6,
        "strategy 6",
        [CN, CN, SA, SA, SA, SA],
        Rg::D,
        Some(Rg::D),
    ),
    row(
        7,
        "strategy 7",
        [SA, SA, CN, CN, CN, CN],
        Rg::D,
        Some(Rg::D),
    ),
    row(
        8,
        "strategy 8",
        [SA, SA, CN, CN, CN, SA],
        Rg::D,
        Some(Rg::D),
    ),
    row(
        9,
        "strategy 9",
        [SA, SA, SA, SA, SA, CN],
        Rg::D,
        Some(Rg::D),
    ),
    row(10, "strategy 10", [CN, SA, SA, SA, SA, SA], Rg::D, None),
    row(11, "strategy 11", [CN, SA, CN, CN, CN, SA], Rg::E, None),
    row(
        12,
        "strategy 12",
        [CA, CA, CA, CA, CA, SA],
        Rg::F,
        Some(Rg::K),
    ),
    row(13, "strategy 13", [SA, SA, CA, CA, CA, CA], Rg::G, None),
    row(
        14,
        "strategy 14",
        [SA, SA, CA, CA, CA, SA],
        Rg::H,
        Some(Rg::L),
    ),
    row(15, "strategy 15", [SN, CA, CA, CA, CA, SN], Rg::I, None),
    row(16, "strategy 16", [SN, CN, CA, CA, CA, SN], Rg::J, None),
];

/// Catalog entry by its 1-based number.
pub fn catalog(number: u8) -> &'static CatalogEntry {
    &CATALOG[number as usize - 1]
}

/// Catalog entry for a strategy index, if it is one of the sixteen.
pub fn catalog_lookup(i: StrategyIndex) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.index() == i)
}

pub fn uncond_ca() -> StrategyIndex {
    catalog(1).index()
}

pub fn uncond_cn() -> StrategyIndex {
    catalog(2).index()
}

pub fn uncond_sa() -> StrategyIndex {
    catalog(3).index()
}

#[cfg(test)]
mod tests {
    use super::*;
    use RealizedAction as R;

    #[test]
    fn encode_examples() {
        assert_eq!(encode(&ReactiveStrategy::constant(CA)).get(), 0);
        assert_eq!(catalog(12).index().get(), 2);
        assert_eq!(encode(&ReactiveStrategy::constant(SN)).get(), 4095);
        assert_eq!(uncond_sa().get(), 2730);
        assert_eq!(uncond_cn().get(), 1365);
    }

    #[test]
    fn round_trip_all() {
        for i in StrategyIndex::all() {
            assert_eq!(encode(&decode(i)), i);
        }
        assert!(StrategyIndex::new(4096).is_err());
    }

    #[test]
    fn respond_examples() {
        let s14 = catalog(14).strategy;
        assert_eq!(s14.respond(R::CA), SA);
        assert_eq!(s14.respond(R::SStar), SA);
        assert_eq!(s14.respond(R::CStar), CA);
        for r in R::ALL {
            assert_eq!(catalog(2).strategy.respond(r), CN);
        }
    }

    #[test]
    fn string_forms() {
        let s: ReactiveStrategy = "CA,CA,CA,CA,CA,SA".parse().unwrap();
        assert_eq!(s, catalog(12).strategy);
        assert_eq!(s.to_string(), "CA,CA,CA,CA,CA,SA");
        assert_eq!(
            "2730".parse::<ReactiveStrategy>().unwrap(),
            catalog(3).strategy
        );
        assert!("CA,CA".parse::<ReactiveStrategy>().is_err());
        assert!("5000".parse::<ReactiveStrategy>().is_err());
    }

    #[test]
    fn catalog_shape() {
        assert_eq!(CATALOG.len(), 16);
        for (k, e) in CATALOG.iter().enumerate() {
            assert_eq!(e.number as usize, k + 1);
            assert_eq!(e.strategy.is_unconditional(), k < 3, "{}", e.name);
        }
        let mut idx: Vec<_> = CATALOG.iter().map(|e| e.index()).collect();
        idx.sort();
        idx.dedup();
        assert_eq!(idx.len(), 16);
    }

    #[test]
    fn distinct_tables_differ_somewhere() {
        // with noise every realized action is observed, so any table
        // difference is a behavioural difference
        for (a, b) in [(0u32, 1u32), (2, 3), (4094, 4095)] {
            let (sa, sb) = (
                decode(StrategyIndex::new(a).unwrap()),
                decode(StrategyIndex::new(b).unwrap()),
            );
            assert!(R::ALL.iter().any(|&r| sa.respond(r) != sb.respond(r)));
        }
    }
}
