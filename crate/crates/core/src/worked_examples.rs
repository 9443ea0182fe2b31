//! Four small peak-timing beliefs (d = 1) that show how the optimal
//! multibin report differs from the belief, and the data needed to plot
//! each belief, its optimized report and both blurred versions.

use crate::error::Result;
use crate::forecast::{pad_support, CategoricalForecast};
use crate::hedging::{optimize_hedged, HedgeResult, OptimizerConfig};
use crate::scoring::{blur, expected_score, ScoreRule};

const D: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct WorkedExample {
    pub number: usize,
    pub d: usize,
    /// Belief `F`, labelled by week and padded for `d`.
    pub belief: CategoricalForecast,
    pub hedge: HedgeResult,
    pub belief_blurred: CategoricalForecast,
    pub report_blurred: CategoricalForecast,
    /// `E[MBlogS(F, Y) | F]`.
    pub honest_score: f64,
    /// `E[MBlogS(G, Y) | F]`.
    pub hedged_score: f64,
}

impl WorkedExample {
    pub fn report(&self) -> &CategoricalForecast {
        &self.hedge.g
    }

    /// Largest entrywise gap between `F` and the blurred report.
    pub fn blur_gap(&self) -> f64 {
        self.belief
            .probs()
            .iter()
            .zip(self.report_blurred.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Beliefs as `(first week label, probabilities)`.
pub fn beliefs() -> [(i64, Vec<f64>); 4] {
    let third = 1.0 / 3.0;
    [
        (3, vec![third, third, third]),
        (1, vec![0.0, 1.0 / 12.0, 0.25, third, 0.25, 1.0 / 12.0, 0.0]),
        (1, vec![0.0, 1.0 / 6.0, 1.0 / 6.0, third, 1.0 / 6.0, 1.0 / 6.0, 0.0]),
        (1, vec![0.0, 0.6, 0.2, 0.125, 0.05, 0.025, 0.0]),
    ]
}

pub fn worked_examples(cfg: &OptimizerConfig) -> Result<Vec<WorkedExample>> {
    let rule = ScoreRule::multibin(D);
    beliefs()
        .into_iter()
        .enumerate()
        .map(|(i, (first, probs))| {
            let labels = (first..first + probs.len() as i64).collect();
            let raw = CategoricalForecast::with_labels(labels, probs, 1e-9)?;
            let belief = pad_support(&raw, D);
            let hedge = optimize_hedged(&belief, D, cfg)?;
            Ok(WorkedExample {
                number: i + 1,
                d: D,
                belief_blurred: blur(&belief, D)?.into_forecast(),
                report_blurred: blur(&hedge.g, D)?.into_forecast(),
                honest_score: expected_score(&rule, &belief, &belief)?,
                hedged_score: expected_score(&rule, &hedge.g, &belief)?,
                belief,
                hedge,
            })
        })
        .collect()
}
