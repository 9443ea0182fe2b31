//! MMWR epidemic weeks and influenza seasons.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// First epidemic week of a season.
pub const SEASON_START_WEEK: u32 = 40;
/// Last epidemic week of a season, in the following calendar year.
pub const SEASON_END_WEEK: u32 = 20;

/// An MMWR epidemic week, written `YYYY-EWww`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpiWeek {
    pub year: i32,
    pub week: u32,
}

impl EpiWeek {
    pub fn new(year: i32, week: u32) -> Result<Self> {
        if week == 0 || week > weeks_in_year(year) {
            return Err(Error::OutOfRange(format!("{year}-EW{week:02}")));
        }
        Ok(Self { year, week })
    }

    /// The week `n` weeks later (or earlier, for negative `n`).
    pub fn shift(self, n: i64) -> Self {
        let mut year = self.year;
        let mut week = self.week as i64 + n;
        while week > weeks_in_year(year) as i64 {
            week -= weeks_in_year(year) as i64;
            year += 1;
        }
        while week < 1 {
            year -= 1;
            week += weeks_in_year(year) as i64;
        }
        Self {
            year,
            week: week as u32,
        }
    }

    /// Season this week belongs to, taking weeks 1..=39 as the second half
    /// of the season started the previous year.
    pub fn season(self) -> Season {
        if self.week >= 30 {
            Season::new(self.year)
        } else {
            Season::new(self.year - 1)
        }
    }
}

impl fmt::Display for EpiWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-EW{:02}", self.year, self.week)
    }
}

impl FromStr for EpiWeek {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::OutOfRange(s.to_string());
        let (year, week) = s.trim().split_once("-EW").ok_or_else(bad)?;
        let year = year.parse().map_err(|_| bad())?;
        let week = week.parse().map_err(|_| bad())?;
        Self::new(year, week)
    }
}

/// Sunday starting MMWR week 1: the Sunday-to-Saturday week holding Jan 4.
fn week_one_start(year: i32) -> NaiveDate {
    let jan4 = NaiveDate::from_ymd_opt(year, 1, 4).expect("valid date");
    let back = jan4.weekday().num_days_from_sunday() as i64;
    jan4 - chrono::Duration::days(back)
}

/// Number of MMWR weeks (52 or 53) in `year`.
pub fn weeks_in_year(year: i32) -> u32 {
    let days = (week_one_start(year + 1) - week_one_start(year)).num_days();
    (days / 7) as u32
}

/// An influenza season running from EW40 of `start_year` to EW20 of the
/// following year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Season {
    pub start_year: i32,
}

impl Season {
    pub fn new(start_year: i32) -> Self {
        Self { start_year }
    }

    /// All weeks of the season in season order.
    pub fn weeks(self) -> Vec<EpiWeek> {
        let first = EpiWeek {
            year: self.start_year,
            week: SEASON_START_WEEK,
        };
        let last = EpiWeek {
            year: self.start_year + 1,
            week: SEASON_END_WEEK,
        };
        let mut out = vec![first];
        while *out.last().unwrap() != last {
            let next = out.last().unwrap().shift(1);
            out.push(next);
        }
        out
    }

    /// Resolves a bare week number as used in submission bins.
    pub fn week_from_number(self, week: u32) -> Result<EpiWeek> {
        if week >= SEASON_START_WEEK {
            EpiWeek::new(self.start_year, week)
        } else if (1..=SEASON_END_WEEK).contains(&week) {
            EpiWeek::new(self.start_year + 1, week)
        } else {
            Err(Error::OutOfRange(format!("week {week} in season {self}")))
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.start_year, (self.start_year + 1) % 100)
    }
}
