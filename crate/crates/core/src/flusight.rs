//! Reading and writing FluSight submission and truth files.
//!
//! Submission files have the columns `Location, Target, Type, Unit,
//! Bin_start_incl, Bin_end_notincl, Value` (matched case-insensitively,
//! extra columns ignored). Team and issue week are not part of the file
//! content; they come from the file name, e.g. `EW49-2016-LANL_DBMplus.csv`,
//! where the week is the most recent week of data the forecast used.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use csv::StringRecord;

use crate::error::{Error, Result};
use crate::forecast::CategoricalForecast;
use crate::target::{outcome_to_bin, target_spec, Bin, Observation, TargetId, TargetSpec, Unit};
use crate::week::{EpiWeek, Season};

/// Normalization slack accepted for submitted probabilities.
pub const SUBMISSION_TOL: f64 = 1e-3;

const EDGE_TOL: f64 = 1e-9;

const SUBMISSION_COLUMNS: [&str; 7] = [
    "Location",
    "Target",
    "Type",
    "Unit",
    "Bin_start_incl",
    "Bin_end_notincl",
    "Value",
];

/// One submitted distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub team: String,
    pub location: String,
    pub target: TargetId,
    pub issue_week: EpiWeek,
    /// Aligned bin-for-bin with `target_spec(target, issue_week.season())`.
    pub forecast: CategoricalForecast,
}

impl ForecastRecord {
    pub fn spec(&self) -> TargetSpec {
        target_spec(self.target, self.issue_week.season())
    }
}

/// One observed outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub location: String,
    pub target: TargetId,
    /// Issue week the outcome applies to. Required for the week-ahead
    /// targets; `None` means the outcome holds for every issue week.
    pub issue_week: Option<EpiWeek>,
    pub observed: Observation,
    pub resolved_bin: usize,
}

/// Team and issue week of a submission file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmissionMeta {
    pub team: String,
    pub issue_week: EpiWeek,
}

impl SubmissionMeta {
    /// Parses names of the form `EWww-YYYY-TEAM.csv`.
    pub fn from_filename(path: &Path) -> Result<Self> {
        let bad = || {
            Error::InvalidConfig(format!(
                "cannot read team and week from file name {}",
                path.display()
            ))
        };
        let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
        let rest = stem.strip_prefix("EW").ok_or_else(bad)?;
        let mut parts = rest.splitn(3, '-');
        let week: u32 = parts.next().and_then(|w| w.parse().ok()).ok_or_else(bad)?;
        let year: i32 = parts.next().and_then(|y| y.parse().ok()).ok_or_else(bad)?;
        let team = parts.next().filter(|t| !t.is_empty()).ok_or_else(bad)?;
        Ok(Self {
            team: team.to_string(),
            issue_week: EpiWeek::new(year, week)?,
        })
    }

    pub fn filename(&self) -> String {
        format!(
            "EW{:02}-{}-{}.csv",
            self.issue_week.week, self.issue_week.year, self.team
        )
    }
}

/// Maps required column names to positions, case-insensitively.
fn column_index(headers: &StringRecord, names: &[&str]) -> Result<HashMap<String, usize>> {
    let mut out = HashMap::new();
    for name in names {
        let pos = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow {
                line: 1,
                reason: format!("missing column {name}"),
            })?;
        out.insert(name.to_string(), pos);
    }
    Ok(out)
}

fn optional_column(headers: &StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn field(row: &StringRecord, idx: usize, line: usize) -> Result<&str> {
    row.get(idx).map(str::trim).ok_or_else(|| Error::MalformedRow {
        line,
        reason: format!("missing field {}", idx + 1),
    })
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("cannot parse number {s:?}"),
    })
}

fn reader(content: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(content.as_bytes())
}

fn line_of(row: &StringRecord) -> usize {
    row.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Position of the bin starting at `start` (and ending at `end`) in `spec`.
fn locate_bin(spec: &TargetSpec, season: Season, start: &str, end: &str, line: usize) -> Result<usize> {
    let mismatch = |reason: String| Error::BinGridMismatch {
        target: spec.target.to_string(),
        reason: format!("line {line}: {reason}"),
    };
    if start.eq_ignore_ascii_case("none") {
        return spec
            .bins
            .iter()
            .position(|b| matches!(b, Bin::NoOnset))
            .ok_or_else(|| mismatch("\"none\" bin on a target without one".into()));
    }
    match spec.unit() {
        Unit::Percent => {
            let lo = parse_f64(start, line)?;
            let hi = parse_f64(end, line)?;
            spec.bins
                .iter()
                .position(|b| match b {
                    Bin::Interval { lo: l, hi: h, .. } => {
                        (l - lo).abs() < EDGE_TOL && (h - hi).abs() < EDGE_TOL
                    }
                    _ => false,
                })
                .ok_or_else(|| mismatch(format!("no bin [{start}, {end})")))
        }
        Unit::Week => {
            let w: u32 = start
                .parse()
                .map_err(|_| mismatch(format!("bad week {start:?}")))?;
            let e: u32 = end
                .parse()
                .map_err(|_| mismatch(format!("bad week {end:?}")))?;
            if e != w + 1 {
                return Err(mismatch(format!("week bin {start}-{end} is not one week wide")));
            }
            let week = season.week_from_number(w).map_err(|_| mismatch(format!("week {w} outside season")))?;
            spec.bins
                .iter()
                .position(|b| *b == Bin::Week(week))
                .ok_or_else(|| mismatch(format!("no bin for {week}")))
        }
    }
}

/// Parses one submission file into per-(location, target) forecasts.
///
/// Point rows are skipped. Records come out in order of first appearance.
pub fn parse_submission(csv_content: &str, meta: &SubmissionMeta) -> Result<Vec<ForecastRecord>> {
    parse_submission_with_tol(csv_content, meta, SUBMISSION_TOL)
}

/// [`parse_submission`] with a custom normalization tolerance.
pub fn parse_submission_with_tol(
    csv_content: &str,
    meta: &SubmissionMeta,
    tol: f64,
) -> Result<Vec<ForecastRecord>> {
    let season = meta.issue_week.season();
    let mut rdr = reader(csv_content);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let cols = column_index(&headers, &SUBMISSION_COLUMNS)?;
    let col = |name: &str| cols[name];

    struct Group {
        location: String,
        spec: TargetSpec,
        probs: Vec<Option<f64>>,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut lookup: HashMap<(String, TargetId), usize> = HashMap::new();

    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = line_of(&row);
        if !field(&row, col("Type"), line)?.eq_ignore_ascii_case("Bin") {
            continue;
        }
        let location = field(&row, col("Location"), line)?.to_string();
        let target: TargetId = field(&row, col("Target"), line)?.parse()?;
        let key = (location.clone(), target);
        let gi = *lookup.entry(key).or_insert_with(|| {
            let spec = target_spec(target, season);
            let n = spec.len();
            groups.push(Group {
                location,
                spec,
                probs: vec![None; n],
            });
            groups.len() - 1
        });
        let group = &mut groups[gi];
        let bin = locate_bin(
            &group.spec,
            season,
            field(&row, col("Bin_start_incl"), line)?,
            field(&row, col("Bin_end_notincl"), line)?,
            line,
        )?;
        let value = parse_f64(field(&row, col("Value"), line)?, line)?;
        if group.probs[bin].replace(value).is_some() {
            return Err(Error::BinGridMismatch {
                target: target.to_string(),
                reason: format!("line {line}: bin {bin} listed twice"),
            });
        }
    }

    groups
        .into_iter()
        .map(|g| {
            let missing = g.probs.iter().filter(|p| p.is_none()).count();
            if missing > 0 {
                return Err(Error::BinGridMismatch {
                    target: g.spec.target.to_string(),
                    reason: format!("{missing} of {} bins missing", g.spec.len()),
                });
            }
            let probs = g.probs.into_iter().map(Option::unwrap).collect();
            Ok(ForecastRecord {
                team: meta.team.clone(),
                location: g.location,
                target: g.spec.target,
                issue_week: meta.issue_week,
                forecast: g.spec.forecast(probs, tol)?,
            })
        })
        .collect()
}

fn format_edge(x: f64) -> String {
    format!("{x}")
}

/// Writes records back out in submission format (bin rows only).
pub fn write_submission(records: &[ForecastRecord]) -> String {
    let mut out = String::from("Location,Target,Type,Unit,Bin_start_incl,Bin_end_notincl,Value\n");
    for r in records {
        let spec = r.spec();
        let unit = spec.unit().as_str();
        for (bin, p) in spec.bins.iter().zip(r.forecast.probs()) {
            let (start, end) = match bin {
                Bin::Interval { lo, hi, .. } => (format_edge(*lo), format_edge(*hi)),
                Bin::Week(w) => (w.week.to_string(), (w.week + 1).to_string()),
                Bin::NoOnset => ("none".to_string(), "none".to_string()),
            };
            out.push_str(&format!(
                "{},{},Bin,{unit},{start},{end},{p}\n",
                quote(&r.location),
                r.target.flusight_name()
            ));
        }
    }
    out
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses an observation for `target`; bare week numbers resolve within
/// `season`.
pub fn parse_observation(raw: &str, target: TargetId, season: Season) -> Result<Observation> {
    let raw = raw.trim();
    match target.unit() {
        Unit::Percent => raw
            .parse()
            .map(Observation::Value)
            .map_err(|_| Error::OutOfRange(raw.to_string())),
        Unit::Week if raw.eq_ignore_ascii_case("none") => Ok(Observation::NoOnset),
        Unit::Week => parse_week(raw, season).map(Observation::Week),
    }
}

/// Accepts `YYYY-EWww` or a bare week number within `season`.
pub fn parse_week(raw: &str, season: Season) -> Result<EpiWeek> {
    match raw.trim().parse::<u32>() {
        Ok(n) => season.week_from_number(n),
        Err(_) => raw.parse(),
    }
}

/// Parses a truth file with columns `Location, Target, Value` and an
/// optional `Forecast_week` holding the issue week each row applies to.
pub fn parse_truth(csv_content: &str, season: Season) -> Result<Vec<TruthRecord>> {
    let mut rdr = reader(csv_content);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let cols = column_index(&headers, &["Location", "Target", "Value"])?;
    let week_col = optional_column(&headers, "Forecast_week");

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: 0,
            reason: e.to_string(),
        })?;
        let line = line_of(&row);
        let target: TargetId = field(&row, cols["Target"], line)?.parse()?;
        let issue_week = match week_col.map(|c| field(&row, c, line)).transpose()? {
            Some(w) if !w.is_empty() && !w.eq_ignore_ascii_case("NA") => Some(parse_week(w, season)?),
            _ => None,
        };
        let observed = parse_observation(field(&row, cols["Value"], line)?, target, season)?;
        let resolved_bin = outcome_to_bin(&observed, &target_spec(target, season))?;
        out.push(TruthRecord {
            location: field(&row, cols["Location"], line)?.to_string(),
            target,
            issue_week,
            observed,
            resolved_bin,
        });
    }
    Ok(out)
}

/// Lists `EW*.csv` files in `dir`, sorted by name.
pub fn submission_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("EW"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Parses every `EW*.csv` file in `dir`.
pub fn load_submissions(dir: &Path, tol: f64) -> Result<Vec<ForecastRecord>> {
    let files = submission_files(dir)
        .map_err(|e| Error::InvalidConfig(format!("cannot list {}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for path in files {
        out.extend(load_submission(&path, tol)?);
    }
    Ok(out)
}

/// Parses one submission file, taking team and week from its name.
pub fn load_submission(path: &Path, tol: f64) -> Result<Vec<ForecastRecord>> {
    let meta = SubmissionMeta::from_filename(path)?;
    let content = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_submission_with_tol(&content, &meta, tol)
}
