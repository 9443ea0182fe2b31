//! Season-level scoring: evaluation windows, per-target averages, hedged
//! re-submission and original-vs-hedged comparison tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flusight::{parse_week, ForecastRecord, TruthRecord};
use crate::forecast::{normalize_exact, pad_support, CategoricalForecast};
use crate::hedging::{optimize_hedged, HedgeMethod, OptimizerConfig};
use crate::scoring::{RuleKind, ScoreRule};
use crate::target::{Observation, TargetId, TargetSpec};
use crate::week::{EpiWeek, Season};

/// Onset forecasts count up to this many weeks after the observed onset.
pub const ONSET_WEEKS_AFTER: i64 = 6;
/// Week-ahead forecasts count from this many weeks before onset.
pub const SHORT_TERM_WEEKS_BEFORE_ONSET: i64 = 4;
/// Week-ahead forecasts count until this many weeks after the season end.
pub const SHORT_TERM_WEEKS_AFTER_END: i64 = 3;
/// Peak forecasts count until this many weeks after the season end.
pub const PEAK_WEEKS_AFTER_END: i64 = 1;

/// Issue weeks whose forecasts of `target` enter the season average.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationWindow {
    pub target: TargetId,
    pub included_issue_weeks: BTreeSet<EpiWeek>,
}

impl EvaluationWindow {
    pub fn new(target: TargetId, weeks: impl IntoIterator<Item = EpiWeek>) -> Result<Self> {
        let included_issue_weeks: BTreeSet<EpiWeek> = weeks.into_iter().collect();
        if included_issue_weeks.is_empty() {
            return Err(Error::InvalidConfig(format!("empty evaluation window for {target}")));
        }
        Ok(Self {
            target,
            included_issue_weeks,
        })
    }
}

/// Observed season events that bound the evaluation windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeasonMilestones {
    /// `None` when no onset occurred.
    pub onset: Option<EpiWeek>,
    /// Week wILI dropped below baseline for the last time. `None` leaves the
    /// end-bounded windows open.
    pub season_end: Option<EpiWeek>,
}

impl SeasonMilestones {
    /// Reads the onset week for `location` from truth rows.
    pub fn from_truth(truth: &[TruthRecord], location: &str) -> Self {
        let onset = truth
            .iter()
            .find(|t| t.location == location && t.target == TargetId::OnsetWeek)
            .and_then(|t| match t.observed {
                Observation::Week(w) => Some(w),
                _ => None,
            });
        Self {
            onset,
            season_end: None,
        }
    }
}

/// Builds windows from season milestones, restricted to `submitted` weeks.
///
/// - onset: every week through six weeks after the observed onset;
/// - peak week and peak intensity: every week through one week after the
///   season end;
/// - week-ahead targets: from four weeks before onset through three weeks
///   after the season end.
///
/// Missing milestones leave the corresponding bound open. Targets whose
/// window would be empty are dropped.
pub fn default_windows(milestones: &SeasonMilestones, submitted: &[EpiWeek]) -> Vec<EvaluationWindow> {
    let weeks: BTreeSet<EpiWeek> = submitted.iter().copied().collect();
    let onset = milestones.onset;
    let end = milestones.season_end;

    TargetId::ALL
        .into_iter()
        .filter_map(|target| {
            let (first, last) = match target {
                TargetId::OnsetWeek => (None, onset.map(|o| o.shift(ONSET_WEEKS_AFTER))),
                TargetId::PeakWeek | TargetId::PeakIntensity => {
                    (None, end.map(|e| e.shift(PEAK_WEEKS_AFTER_END)))
                }
                _ => (
                    onset.map(|o| o.shift(-SHORT_TERM_WEEKS_BEFORE_ONSET)),
                    end.map(|e| e.shift(SHORT_TERM_WEEKS_AFTER_END)),
                ),
            };
            let included = weeks
                .iter()
                .copied()
                .filter(|w| first.is_none_or(|f| *w >= f) && last.is_none_or(|l| *w <= l));
            EvaluationWindow::new(target, included).ok()
        })
        .collect()
}

/// Parses explicit windows: CSV with columns `Target, Issue_week`, one row
/// per included week.
pub fn parse_windows(csv_content: &str, season: Season) -> Result<Vec<EvaluationWindow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_content.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow {
                line: 1,
                reason: format!("missing column {name}"),
            })
    };
    let (tcol, wcol) = (find("Target")?, find("Issue_week")?);
    let mut weeks: BTreeMap<TargetId, Vec<EpiWeek>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: 0,
            reason: e.to_string(),
        })?;
        let target: TargetId = row[tcol].parse()?;
        weeks.entry(target).or_default().push(parse_week(&row[wcol], season)?);
    }
    weeks
        .into_iter()
        .map(|(t, w)| EvaluationWindow::new(t, w))
        .collect()
}

/// Scoring rule family applied across targets, each target using its own
/// window half-width unless overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub kind: RuleKind,
    pub floor: Option<f64>,
    pub d_override: BTreeMap<TargetId, usize>,
}

impl RuleSet {
    pub fn multibin() -> Self {
        Self {
            kind: RuleKind::MultibinLog,
            floor: None,
            d_override: BTreeMap::new(),
        }
    }

    pub fn log() -> Self {
        Self {
            kind: RuleKind::Log,
            ..Self::multibin()
        }
    }

    pub fn d_for(&self, target: TargetId) -> usize {
        self.d_override
            .get(&target)
            .copied()
            .unwrap_or_else(|| target.default_d())
    }

    pub fn rule_for(&self, target: TargetId) -> Result<ScoreRule> {
        let rule = match self.kind {
            RuleKind::Log => ScoreRule::log(),
            RuleKind::MultibinLog => ScoreRule::multibin(self.d_for(target)),
        };
        match self.floor {
            Some(f) => rule.with_floor(f),
            None => Ok(rule),
        }
    }
}

/// Scores `forecast` at bin `y` of `spec`. Bins after the ordered grid (the
/// onset "none" bin) are scored on their own mass only.
pub fn score_on_spec(spec: &TargetSpec, rule: &ScoreRule, forecast: &CategoricalForecast, y: usize) -> Result<f64> {
    let n = spec.ordered_len();
    let probs = forecast.probs();
    if y >= probs.len() {
        return Err(Error::IndexOutOfRange {
            index: y,
            len: probs.len(),
        });
    }
    if y < n {
        Ok(rule.score_probs(&probs[..n], y))
    } else {
        Ok(rule.log_with_same_floor().score_probs(probs, y))
    }
}

/// Expected score of `report` under `belief` on `spec`'s grid.
pub fn expected_on_spec(
    spec: &TargetSpec,
    rule: &ScoreRule,
    report: &CategoricalForecast,
    belief: &CategoricalForecast,
) -> Result<f64> {
    if report.len() != belief.len() {
        return Err(Error::SupportMismatch {
            left: report.len(),
            right: belief.len(),
        });
    }
    let mut total = 0.0;
    for (y, &b) in belief.probs().iter().enumerate() {
        if b > 0.0 {
            total += b * score_on_spec(spec, rule, report, y)?;
        }
    }
    Ok(total)
}

/// A hedged forecast on its original grid plus optimizer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgedForecast {
    pub forecast: CategoricalForecast,
    /// `None` when there was nothing to optimize (no mass on the ordered grid).
    pub method: Option<HedgeMethod>,
    pub iterations: usize,
    pub converged: bool,
    /// Expected multibin-score gain under the original forecast.
    pub expected_gain: f64,
}

/// Optimizes `forecast` for the multibin score with half-width `d` on
/// `spec`'s grid.
///
/// The ordered part is padded, hedged and trimmed back; isolated bins keep
/// their mass, which is already optimal for them.
pub fn hedge_on_spec(
    spec: &TargetSpec,
    forecast: &CategoricalForecast,
    d: usize,
    cfg: &OptimizerConfig,
) -> Result<HedgedForecast> {
    let n = spec.ordered_len();
    let probs = forecast.probs();
    let ordered_mass: f64 = probs[..n].iter().sum();
    if ordered_mass <= 0.0 {
        return Ok(HedgedForecast {
            forecast: forecast.clone(),
            method: None,
            iterations: 0,
            converged: true,
            expected_gain: 0.0,
        });
    }

    let mut ordered: Vec<f64> = probs[..n].iter().map(|p| p / ordered_mass).collect();
    normalize_exact(&mut ordered);
    let belief = CategoricalForecast::from_parts(forecast.labels()[..n].to_vec(), ordered, 0);
    let padded = pad_support(&belief, d);
    let result = optimize_hedged(&padded, d, cfg)?;
    let trimmed = result.g.window(padded.offset(), n)?;

    let mut out: Vec<f64> = trimmed.probs().iter().map(|g| g * ordered_mass).collect();
    out.extend_from_slice(&probs[n..]);
    normalize_exact(&mut out);
    let hedged = forecast.with_probs(out);

    let rule = ScoreRule::multibin(d);
    let expected_gain =
        expected_on_spec(spec, &rule, &hedged, forecast)? - expected_on_spec(spec, &rule, forecast, forecast)?;

    Ok(HedgedForecast {
        forecast: hedged,
        method: Some(result.method),
        iterations: result.iterations,
        converged: result.converged,
        expected_gain,
    })
}

/// A hedged submission record.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgedRecord {
    pub original: ForecastRecord,
    pub hedged: HedgedForecast,
}

impl HedgedRecord {
    pub fn record(&self) -> ForecastRecord {
        ForecastRecord {
            forecast: self.hedged.forecast.clone(),
            ..self.original.clone()
        }
    }
}

/// Replaces every forecast with its optimized version, each target using
/// `rules.d_for(target)`. Output order follows input order.
pub fn hedge_season(forecasts: &[ForecastRecord], rules: &RuleSet, cfg: &OptimizerConfig) -> Result<Vec<HedgedRecord>> {
    forecasts
        .par_iter()
        .map(|r| {
            let hedged = hedge_on_spec(&r.spec(), &r.forecast, rules.d_for(r.target), cfg)?;
            Ok(HedgedRecord {
                original: r.clone(),
                hedged,
            })
        })
        .collect()
}

/// Score of one forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredForecast {
    pub team: String,
    pub location: String,
    pub target: TargetId,
    pub issue_week: EpiWeek,
    pub score: f64,
}

/// Mean score and number of scored forecasts for one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// Finite, or `-inf` when any included forecast scored `-inf`.
    pub mean: f64,
    pub count: usize,
}

/// Season averages for one set of forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub cells: BTreeMap<TargetId, Cell>,
    /// Per-forecast scores ordered by target, location, issue week.
    pub scored: Vec<ScoredForecast>,
}

type Key = (String, TargetId, EpiWeek);

fn key_label(key: &Key) -> (String, String, String) {
    (key.0.clone(), key.1.to_string(), key.2.to_string())
}

/// Averages rule scores over the issue weeks each window includes, for every
/// location present in `forecasts`.
pub fn evaluate_season(
    forecasts: &[ForecastRecord],
    truth: &[TruthRecord],
    windows: &[EvaluationWindow],
    rules: &RuleSet,
) -> Result<ScoreRow> {
    let mut by_key: HashMap<Key, &ForecastRecord> = HashMap::new();
    for r in forecasts {
        let key = (r.location.clone(), r.target, r.issue_week);
        if by_key.insert(key.clone(), r).is_some() {
            let (location, target, week) = key_label(&key);
            return Err(Error::DuplicateForecast {
                location,
                target,
                week,
            });
        }
    }
    let mut truth_by_key: HashMap<(String, TargetId, Option<EpiWeek>), &TruthRecord> = HashMap::new();
    for t in truth {
        truth_by_key.insert((t.location.clone(), t.target, t.issue_week), t);
    }
    let locations: BTreeSet<&str> = forecasts.iter().map(|r| r.location.as_str()).collect();

    let mut scored = Vec::new();
    let mut cells = BTreeMap::new();
    let mut windows: Vec<&EvaluationWindow> = windows.iter().collect();
    windows.sort_by_key(|w| w.target);

    for window in windows {
        let rule = rules.rule_for(window.target)?;
        let mut sum = 0.0;
        let mut count = 0;
        for &location in &locations {
            for &week in &window.included_issue_weeks {
                let key = (location.to_string(), window.target, week);
                let record = by_key.get(&key).ok_or_else(|| {
                    let (location, target, week) = key_label(&key);
                    Error::MissingForecast {
                        location,
                        target,
                        week,
                    }
                })?;
                let t = truth_by_key
                    .get(&(key.0.clone(), key.1, Some(week)))
                    .or_else(|| truth_by_key.get(&(key.0.clone(), key.1, None)))
                    .ok_or_else(|| {
                        let (location, target, week) = key_label(&key);
                        Error::MissingTruth {
                            location,
                            target,
                            week,
                        }
                    })?;
                let spec = record.spec();
                let score = score_on_spec(&spec, &rule, &record.forecast, t.resolved_bin)?;
                sum += score;
                count += 1;
                scored.push(ScoredForecast {
                    team: record.team.clone(),
                    location: location.to_string(),
                    target: window.target,
                    issue_week: week,
                    score,
                });
            }
        }
        cells.insert(
            window.target,
            Cell {
                mean: sum / count as f64,
                count,
            },
        );
    }
    Ok(ScoreRow { cells, scored })
}

/// Original and hedged rows side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub original: ScoreRow,
    pub hedged: ScoreRow,
    /// `hedged - original` per target.
    pub gains: BTreeMap<TargetId, f64>,
}

/// Pairs two rows scored over the same targets and windows.
pub fn compare_table(original: &ScoreRow, hedged: &ScoreRow) -> Result<ScoreTable> {
    let targets = |r: &ScoreRow| r.cells.keys().copied().collect::<Vec<_>>();
    if targets(original) != targets(hedged) {
        return Err(Error::ShapeMismatch(format!(
            "targets {:?} vs {:?}",
            targets(original),
            targets(hedged)
        )));
    }
    let mut gains = BTreeMap::new();
    for (t, o) in &original.cells {
        let h = hedged.cells[t];
        if o.count != h.count {
            return Err(Error::ShapeMismatch(format!(
                "{t}: {} vs {} forecasts",
                o.count, h.count
            )));
        }
        gains.insert(*t, h.mean - o.mean);
    }
    Ok(ScoreTable {
        original: original.clone(),
        hedged: hedged.clone(),
        gains,
    })
}

/// Scores the original forecasts, hedges them, scores the hedged versions
/// with the same windows and returns both rows side by side.
pub fn season_table(
    forecasts: &[ForecastRecord],
    truth: &[TruthRecord],
    windows: &[EvaluationWindow],
    rules: &RuleSet,
    cfg: &OptimizerConfig,
) -> Result<(ScoreTable, Vec<HedgedRecord>)> {
    let original = evaluate_season(forecasts, truth, windows, rules)?;
    let hedged_records = hedge_season(forecasts, rules, cfg)?;
    let hedged: Vec<ForecastRecord> = hedged_records.iter().map(HedgedRecord::record).collect();
    let hedged_row = evaluate_season(&hedged, truth, windows, rules)?;
    Ok((compare_table(&original, &hedged_row)?, hedged_records))
}

/// Fixed-precision score; `-inf` for negative infinity and no `-0.000`.
pub fn format_score(x: f64, precision: usize) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    let s = format!("{x:.precision$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

impl ScoreTable {
    pub fn targets(&self) -> Vec<TargetId> {
        self.original.cells.keys().copied().collect()
    }

    /// CSV with columns `row` then one per target.
    pub fn to_csv(&self, precision: usize) -> String {
        let targets = self.targets();
        let mut out = String::from("row");
        for t in &targets {
            write!(out, ",{}", t.id()).unwrap();
        }
        out.push('\n');
        let mut line = |name: &str, cell: &dyn Fn(TargetId) -> String| {
            out.push_str(name);
            for t in &targets {
                write!(out, ",{}", cell(*t)).unwrap();
            }
            out.push('\n');
        };
        line("original", &|t| format_score(self.original.cells[&t].mean, precision));
        line("optimized", &|t| format_score(self.hedged.cells[&t].mean, precision));
        line("gain", &|t| format_score(self.gains[&t], precision));
        line("count", &|t| self.original.cells[&t].count.to_string());
        out
    }

    /// Fixed-width text table.
    pub fn to_text(&self, precision: usize) -> String {
        let targets = self.targets();
        let width = targets
            .iter()
            .map(|t| t.column().len())
            .max()
            .unwrap_or(0)
            .max(precision + 4);
        let mut out = format!("{:<20}", "");
        for t in &targets {
            write!(out, " {:>width$}", t.column()).unwrap();
        }
        out.push('\n');
        let mut line = |name: &str, cell: &dyn Fn(TargetId) -> String| {
            write!(out, "{name:<20}").unwrap();
            for t in &targets {
                write!(out, " {:>width$}", cell(*t)).unwrap();
            }
            out.push('\n');
        };
        line("original forecasts", &|t| format_score(self.original.cells[&t].mean, precision));
        line("optimized forecasts", &|t| format_score(self.hedged.cells[&t].mean, precision));
        line("gain", &|t| format_score(self.gains[&t], precision));
        line("forecasts scored", &|t| self.original.cells[&t].count.to_string());
        out
    }

    /// Per-forecast log: team, location, target, week, both scores.
    pub fn score_log_csv(&self) -> String {
        let mut out = String::from("team,location,target,week,score_original,score_hedged\n");
        for (o, h) in self.original.scored.iter().zip(&self.hedged.scored) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                o.team, o.location, o.target, o.issue_week, o.score, h.score
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::target_spec;

    fn week(s: &str) -> EpiWeek {
        s.parse().unwrap()
    }

    fn peak_record(issue: &str, probs: &[(usize, f64)]) -> ForecastRecord {
        let w = week(issue);
        let spec = target_spec(TargetId::PeakWeek, w.season());
        let mut p = vec![0.0; spec.len()];
        for &(i, v) in probs {
            p[i] = v;
        }
        ForecastRecord {
            team: "T".into(),
            location: "US National".into(),
            target: TargetId::PeakWeek,
            issue_week: w,
            forecast: spec.forecast(p, 1e-6).unwrap(),
        }
    }

    fn peak_truth(bin: usize) -> TruthRecord {
        let spec = target_spec(TargetId::PeakWeek, Season::new(2016));
        let crate::target::Bin::Week(w) = spec.bins[bin] else {
            unreachable!()
        };
        TruthRecord {
            location: "US National".into(),
            target: TargetId::PeakWeek,
            issue_week: None,
            observed: Observation::Week(w),
            resolved_bin: bin,
        }
    }

    #[test]
    fn single_forecast_cell_is_its_score() {
        let r = peak_record("2016-EW49", &[(17, 0.5), (18, 0.3), (19, 0.2)]);
        let windows = vec![EvaluationWindow::new(TargetId::PeakWeek, [week("2016-EW49")]).unwrap()];
        let row = evaluate_season(&[r], &[peak_truth(18)], &windows, &RuleSet::multibin()).unwrap();
        let cell = row.cells[&TargetId::PeakWeek];
        assert_eq!(cell.count, 1);
        assert_eq!(cell.mean, 1.0f64.ln());
        let row = evaluate_season(
            &[peak_record("2016-EW49", &[(17, 0.5), (18, 0.3), (19, 0.2)])],
            &[peak_truth(18)],
            &windows,
            &RuleSet::log(),
        )
        .unwrap();
        assert_eq!(row.cells[&TargetId::PeakWeek].mean, 0.3f64.ln());
    }

    #[test]
    fn window_without_forecasts_is_refused() {
        let r = peak_record("2016-EW49", &[(18, 1.0)]);
        let windows = vec![EvaluationWindow::new(TargetId::PeakWeek, [week("2016-EW50")]).unwrap()];
        assert!(matches!(
            evaluate_season(&[r], &[peak_truth(18)], &windows, &RuleSet::multibin()),
            Err(Error::MissingForecast { .. })
        ));
        assert!(EvaluationWindow::new(TargetId::PeakWeek, []).is_err());
    }

    #[test]
    fn missing_truth_and_duplicates() {
        let r = peak_record("2016-EW49", &[(18, 1.0)]);
        let windows = vec![EvaluationWindow::new(TargetId::PeakWeek, [week("2016-EW49")]).unwrap()];
        assert!(matches!(
            evaluate_season(std::slice::from_ref(&r), &[], &windows, &RuleSet::multibin()),
            Err(Error::MissingTruth { .. })
        ));
        assert!(matches!(
            evaluate_season(&[r.clone(), r], &[peak_truth(18)], &windows, &RuleSet::multibin()),
            Err(Error::DuplicateForecast { .. })
        ));
    }

    #[test]
    fn impossible_outcome_gives_negative_infinity() {
        let r = peak_record("2016-EW49", &[(5, 1.0)]);
        let windows = vec![EvaluationWindow::new(TargetId::PeakWeek, [week("2016-EW49")]).unwrap()];
        let row = evaluate_season(std::slice::from_ref(&r), &[peak_truth(18)], &windows, &RuleSet::multibin()).unwrap();
        assert_eq!(row.cells[&TargetId::PeakWeek].mean, f64::NEG_INFINITY);
        let mut floored = RuleSet::multibin();
        floored.floor = Some(-10.0);
        let row = evaluate_season(&[r], &[peak_truth(18)], &windows, &floored).unwrap();
        assert_eq!(row.cells[&TargetId::PeakWeek].mean, -10.0);
    }

    #[test]
    fn compare_rows() {
        let mk = |mean: f64, count| ScoreRow {
            cells: [(TargetId::OnsetWeek, Cell { mean, count })].into(),
            scored: vec![],
        };
        let t = compare_table(&mk(-0.39, 3), &mk(-0.33, 3)).unwrap();
        assert!((t.gains[&TargetId::OnsetWeek] - 0.06).abs() < 1e-12);
        let same = compare_table(&mk(-0.39, 3), &mk(-0.39, 3)).unwrap();
        assert_eq!(same.gains[&TargetId::OnsetWeek], 0.0);
        assert!(matches!(
            compare_table(&mk(-0.39, 3), &mk(-0.39, 4)),
            Err(Error::ShapeMismatch(_))
        ));
        let other = ScoreRow {
            cells: [(TargetId::PeakWeek, Cell { mean: 0.0, count: 3 })].into(),
            scored: vec![],
        };
        assert!(matches!(compare_table(&mk(-0.39, 3), &other), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn none_bin_is_isolated() {
        let spec = target_spec(TargetId::OnsetWeek, Season::new(2016));
        let mut p = vec![0.0; spec.len()];
        p[32] = 0.5; // EW20, last week bin
        p[33] = 0.5; // none
        let f = spec.forecast(p, 1e-6).unwrap();
        let rule = ScoreRule::multibin(1);
        assert_eq!(score_on_spec(&spec, &rule, &f, 33).unwrap(), 0.5f64.ln());
        assert_eq!(score_on_spec(&spec, &rule, &f, 32).unwrap(), 0.5f64.ln());
        assert_eq!(score_on_spec(&spec, &rule, &f, 31).unwrap(), 0.5f64.ln());
        assert_eq!(score_on_spec(&spec, &rule, &f, 30).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn hedging_keeps_none_mass() {
        let spec = target_spec(TargetId::OnsetWeek, Season::new(2016));
        let mut p = vec![0.0; spec.len()];
        p[10] = 0.3;
        p[11] = 0.3;
        p[12] = 0.3;
        p[33] = 0.1;
        let f = spec.forecast(p, 1e-6).unwrap();
        let h = hedge_on_spec(&spec, &f, 1, &OptimizerConfig::default()).unwrap();
        let g = h.forecast.probs();
        assert!((g[11] - 0.9).abs() < 1e-9);
        assert!((g[33] - 0.1).abs() < 1e-12);
        // 0.3 ln(2/3) twice under honesty, 0 when hedged
        assert!((h.expected_gain + 0.6 * (2.0f64 / 3.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn hedging_at_grid_edge_stays_on_grid() {
        let spec = target_spec(TargetId::PeakWeek, Season::new(2016));
        let mut p = vec![0.0; spec.len()];
        p[0] = 0.7;
        p[1] = 0.3;
        let f = spec.forecast(p, 1e-6).unwrap();
        let h = hedge_on_spec(&spec, &f, 1, &OptimizerConfig::default()).unwrap();
        assert_eq!(h.forecast.len(), spec.len());
        assert_eq!(h.forecast.probs().iter().sum::<f64>(), 1.0);
        assert!(h.expected_gain >= -1e-9);
    }

    #[test]
    fn default_window_rules() {
        let season = Season::new(2016);
        let weeks: Vec<EpiWeek> = season.weeks()[3..30].to_vec(); // EW43 .. 2017-EW17
        let m = SeasonMilestones {
            onset: Some(week("2016-EW50")),
            season_end: Some(week("2017-EW12")),
        };
        let w = default_windows(&m, &weeks);
        let get = |t| w.iter().find(|x| x.target == t).unwrap();
        let onset = get(TargetId::OnsetWeek);
        assert_eq!(*onset.included_issue_weeks.first().unwrap(), week("2016-EW43"));
        assert_eq!(*onset.included_issue_weeks.last().unwrap(), week("2017-EW04"));
        let peak = get(TargetId::PeakIntensity);
        assert_eq!(*peak.included_issue_weeks.last().unwrap(), week("2017-EW13"));
        let wk = get(TargetId::Wili1Wk);
        assert_eq!(*wk.included_issue_weeks.first().unwrap(), week("2016-EW46"));
        assert_eq!(*wk.included_issue_weeks.last().unwrap(), week("2017-EW15"));
        assert_eq!(w.len(), 7);
        let open = default_windows(&SeasonMilestones::default(), &weeks);
        assert!(open.iter().all(|x| x.included_issue_weeks.len() == weeks.len()));
    }

    #[test]
    fn windows_file() {
        let csv = "Target,Issue_week\nSeason onset,2016-EW49\nonset_week,50\n1 wk ahead,2017-EW06\n";
        let w = parse_windows(csv, Season::new(2016)).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].target, TargetId::Wili1Wk);
        assert_eq!(w[1].included_issue_weeks.len(), 2);
    }
}
