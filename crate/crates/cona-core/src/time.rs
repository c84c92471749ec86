//! Calendar month arithmetic for monthly panels.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A calendar year-month, the time key of every panel in this crate.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        if (1..=12).contains(&month) {
            Some(YearMonth { year, month })
        } else {
            None
        }
    }

    /// Number of months since year 0, month 1. Total order and difference key.
    pub fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_index(idx: i64) -> Self {
        YearMonth {
            year: idx.div_euclid(12) as i32,
            month: (idx.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    /// Months elapsed from `earlier` to `self` (positive when `self` is later).
    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.index() - earlier.index()
    }

    /// Inclusive range iterator, empty when `start > end`.
    pub fn range(start: YearMonth, end: YearMonth) -> impl Iterator<Item = YearMonth> {
        (start.index()..=end.index()).map(Self::from_index)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl std::str::FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| format!("expected YYYY-MM, got {s:?}"))?;
        let year: i32 = y.trim().parse().map_err(|_| format!("bad year in {s:?}"))?;
        let month: u8 = m.trim().parse().map_err(|_| format!("bad month in {s:?}"))?;
        YearMonth::new(year, month).ok_or_else(|| format!("month out of range in {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for y in [-1, 0, 1999, 2013, 2017] {
            for m in 1..=12 {
                let ym = YearMonth::new(y, m).unwrap();
                assert_eq!(YearMonth::from_index(ym.index()), ym);
            }
        }
    }

    #[test]
    fn range_covers_horizon() {
        let start = YearMonth::new(2013, 1).unwrap();
        let end = YearMonth::new(2017, 7).unwrap();
        assert_eq!(YearMonth::range(start, end).count(), 55);
    }

    #[test]
    fn parse_and_display() {
        let ym: YearMonth = "2016-01".parse().unwrap();
        assert_eq!(ym, YearMonth::new(2016, 1).unwrap());
        assert_eq!(ym.to_string(), "2016-01");
        assert!("2016-13".parse::<YearMonth>().is_err());
    }
}
