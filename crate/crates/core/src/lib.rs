//! Scoring categorical forecasts with the log and multibin log scores, and
//! computing the report that maximizes the expected multibin score.

pub mod error;
pub mod evaluation;
pub mod flusight;
pub mod forecast;
pub mod hedging;
pub mod scoring;
pub mod target;
pub mod week;
pub mod worked_examples;

pub use error::{Error, Result};
pub use forecast::{pad_support, validate_forecast, BlurredForecast, CategoricalForecast};
pub use hedging::{
    exact_deconvolve, hedging_gain, kl_divergence, optimize_hedged, EmSolver, HedgeMethod,
    HedgeResult, OptimizerConfig,
};
pub use scoring::{blur, expected_score, log_score, multibin_log_score, RuleKind, ScoreRule};
pub use target::{outcome_to_bin, target_spec, Bin, Observation, TargetId, TargetSpec};
pub use week::{EpiWeek, Season};
pub use evaluation::{
    compare_table, default_windows, evaluate_season, hedge_on_spec, hedge_season, parse_windows,
    season_table,
    Cell, EvaluationWindow, HedgedForecast, HedgedRecord, RuleSet, ScoreRow, ScoreTable,
    ScoredForecast, SeasonMilestones,
};
pub use flusight::{
    load_submission, load_submissions, parse_submission, parse_truth, write_submission, ForecastRecord, SubmissionMeta, TruthRecord,
};
pub use worked_examples::{worked_examples, WorkedExample};
