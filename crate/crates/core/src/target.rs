//! FluSight targets, their bin grids and window half-widths.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forecast::CategoricalForecast;
use crate::week::{EpiWeek, Season};

/// Number of 0.1%-wide wILI bins below the terminal catch-all.
pub const WILI_FINE_BINS: usize = 130;
/// Upper edge of the terminal wILI bin `[13, 100]`.
pub const WILI_MAX: f64 = 100.0;

/// Window half-width for wILI and peak-intensity targets.
pub const D_WILI: usize = 5;
/// Window half-width for onset and peak timing targets.
pub const D_WEEK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetId {
    Wili1Wk,
    Wili2Wk,
    Wili3Wk,
    Wili4Wk,
    OnsetWeek,
    PeakWeek,
    PeakIntensity,
}

impl TargetId {
    /// Table column order.
    pub const ALL: [TargetId; 7] = [
        TargetId::Wili1Wk,
        TargetId::Wili2Wk,
        TargetId::Wili3Wk,
        TargetId::Wili4Wk,
        TargetId::OnsetWeek,
        TargetId::PeakWeek,
        TargetId::PeakIntensity,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TargetId::Wili1Wk => "wili_1wk",
            TargetId::Wili2Wk => "wili_2wk",
            TargetId::Wili3Wk => "wili_3wk",
            TargetId::Wili4Wk => "wili_4wk",
            TargetId::OnsetWeek => "onset_week",
            TargetId::PeakWeek => "peak_week",
            TargetId::PeakIntensity => "peak_intensity",
        }
    }

    /// Target name as written in submission files.
    pub fn flusight_name(self) -> &'static str {
        match self {
            TargetId::Wili1Wk => "1 wk ahead",
            TargetId::Wili2Wk => "2 wk ahead",
            TargetId::Wili3Wk => "3 wk ahead",
            TargetId::Wili4Wk => "4 wk ahead",
            TargetId::OnsetWeek => "Season onset",
            TargetId::PeakWeek => "Season peak week",
            TargetId::PeakIntensity => "Season peak percentage",
        }
    }

    /// Short column header for tables.
    pub fn column(self) -> &'static str {
        match self {
            TargetId::Wili1Wk => "1 wk",
            TargetId::Wili2Wk => "2 wk",
            TargetId::Wili3Wk => "3 wk",
            TargetId::Wili4Wk => "4 wk",
            TargetId::OnsetWeek => "onset week",
            TargetId::PeakWeek => "peak week",
            TargetId::PeakIntensity => "peak intensity",
        }
    }

    /// Weeks ahead for short-term targets, `None` for seasonal ones.
    pub fn horizon(self) -> Option<u32> {
        match self {
            TargetId::Wili1Wk => Some(1),
            TargetId::Wili2Wk => Some(2),
            TargetId::Wili3Wk => Some(3),
            TargetId::Wili4Wk => Some(4),
            _ => None,
        }
    }

    pub fn is_timing(self) -> bool {
        matches!(self, TargetId::OnsetWeek | TargetId::PeakWeek)
    }

    pub fn default_d(self) -> usize {
        if self.is_timing() {
            D_WEEK
        } else {
            D_WILI
        }
    }

    pub fn unit(self) -> Unit {
        if self.is_timing() {
            Unit::Week
        } else {
            Unit::Percent
        }
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TargetId {
    type Err = Error;

    /// Accepts both the internal id and the submission-file name,
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        TargetId::ALL
            .into_iter()
            .find(|t| t.id().eq_ignore_ascii_case(s) || t.flusight_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTarget(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Percent,
    Week,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Percent => "percent",
            Unit::Week => "week",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bin {
    /// `[lo, hi)`, or `[lo, hi]` for the terminal catch-all.
    Interval { lo: f64, hi: f64, closed: bool },
    Week(EpiWeek),
    /// Onset never happens. Sits outside the ordered week grid.
    NoOnset,
}

impl Bin {
    fn contains(&self, obs: &Observation) -> bool {
        match (self, obs) {
            (Bin::Interval { lo, hi, closed }, Observation::Value(x)) => {
                *lo <= *x && (*x < *hi || (*closed && *x == *hi))
            }
            (Bin::Week(w), Observation::Week(o)) => w == o,
            (Bin::NoOnset, Observation::NoOnset) => true,
            _ => false,
        }
    }
}

/// Lower edge for value bins, the week for week bins, `none` otherwise.
impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bin::Interval { lo, .. } => write!(f, "{lo}"),
            Bin::Week(w) => write!(f, "{w}"),
            Bin::NoOnset => f.write_str("none"),
        }
    }
}

/// An observed outcome for one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Value(f64),
    Week(EpiWeek),
    NoOnset,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Value(x) => write!(f, "{x}"),
            Observation::Week(w) => write!(f, "{w}"),
            Observation::NoOnset => f.write_str("none"),
        }
    }
}

/// Bin structure and window half-width for one target.
///
/// Bins are ordered; any [`Bin::NoOnset`] bin comes last and is excluded
/// from every multibin window.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub target: TargetId,
    pub d: usize,
    pub bins: Vec<Bin>,
}

/// The fixed FluSight grid and default `d` for `target`.
///
/// Week grids need the season; interval grids ignore it.
pub fn target_spec(target: TargetId, season: Season) -> TargetSpec {
    let bins = match target {
        TargetId::OnsetWeek | TargetId::PeakWeek => {
            let mut bins: Vec<Bin> = season.weeks().into_iter().map(Bin::Week).collect();
            if target == TargetId::OnsetWeek {
                bins.push(Bin::NoOnset);
            }
            bins
        }
        _ => wili_bins(),
    };
    TargetSpec {
        target,
        d: target.default_d(),
        bins,
    }
}

fn wili_bins() -> Vec<Bin> {
    let mut bins: Vec<Bin> = (0..WILI_FINE_BINS)
        .map(|k| Bin::Interval {
            lo: k as f64 / 10.0,
            hi: (k + 1) as f64 / 10.0,
            closed: false,
        })
        .collect();
    bins.push(Bin::Interval {
        lo: WILI_FINE_BINS as f64 / 10.0,
        hi: WILI_MAX,
        closed: true,
    });
    bins
}

impl TargetSpec {
    /// Looks up `target` by name and builds its spec.
    pub fn named(target: &str, season: Season) -> Result<Self> {
        Ok(target_spec(target.parse()?, season))
    }

    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Number of leading bins that form the ordered grid.
    pub fn ordered_len(&self) -> usize {
        self.bins
            .iter()
            .position(|b| matches!(b, Bin::NoOnset))
            .unwrap_or(self.bins.len())
    }

    /// Builds a forecast on this grid, labelled by bin position.
    pub fn forecast(&self, probs: Vec<f64>, tol: f64) -> Result<CategoricalForecast> {
        if probs.len() != self.bins.len() {
            return Err(Error::BinGridMismatch {
                target: self.target.to_string(),
                reason: format!("{} probabilities for {} bins", probs.len(), self.bins.len()),
            });
        }
        let labels = (0..probs.len() as i64).collect();
        CategoricalForecast::with_labels(labels, probs, tol)
    }

    pub fn unit(&self) -> Unit {
        self.target.unit()
    }
}

/// Index of the bin holding `observed`.
///
/// Interval bins are left-closed and right-open, except the terminal bin
/// which also includes its upper edge.
pub fn outcome_to_bin(observed: &Observation, spec: &TargetSpec) -> Result<usize> {
    spec.bins
        .iter()
        .position(|b| b.contains(observed))
        .ok_or_else(|| Error::OutOfRange(observed.to_string()))
}
