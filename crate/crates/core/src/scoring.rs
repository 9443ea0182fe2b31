//! Log score, multibin log score and the blur operator.
//!
//! All scores are positively oriented (larger is better) and use the natural
//! logarithm. For a forecast with zero mass on its `d` outermost bins at each
//! end, the multibin log score equals the log score of the blurred forecast
//! plus `ln(2d + 1)`.

use crate::error::{Error, Result};
use crate::forecast::{BlurredForecast, CategoricalForecast};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Log,
    MultibinLog,
}

/// A scoring rule: the log score, or the multibin log score with window
/// half-width `d`, optionally floored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRule {
    kind: RuleKind,
    d: usize,
    floor: Option<f64>,
}

impl ScoreRule {
    pub fn log() -> Self {
        Self {
            kind: RuleKind::Log,
            d: 0,
            floor: None,
        }
    }

    pub fn multibin(d: usize) -> Self {
        Self {
            kind: RuleKind::MultibinLog,
            d,
            floor: None,
        }
    }

    /// Clamps every returned score to at least `floor`, which must be finite
    /// and negative.
    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if !floor.is_finite() || floor >= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "score floor must be finite and negative, got {floor}"
            )));
        }
        self.floor = Some(floor);
        Ok(self)
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// Window half-width; always 0 for the log score.
    pub fn d(&self) -> usize {
        match self.kind {
            RuleKind::Log => 0,
            RuleKind::MultibinLog => self.d,
        }
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    /// Same rule with a different window half-width (no effect on `log`).
    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn score(&self, f: &CategoricalForecast, y: usize) -> Result<f64> {
        check_index(f, y)?;
        Ok(self.score_probs(f.probs(), y))
    }

    /// Log score carrying over this rule's floor.
    pub(crate) fn log_with_same_floor(&self) -> Self {
        Self {
            kind: RuleKind::Log,
            d: 0,
            floor: self.floor,
        }
    }

    pub(crate) fn score_probs(&self, probs: &[f64], y: usize) -> f64 {
        let raw = window_sum(probs, y, self.d()).ln();
        match self.floor {
            Some(floor) => raw.max(floor),
            None => raw,
        }
    }
}

fn check_index(f: &CategoricalForecast, y: usize) -> Result<()> {
    if y >= f.len() {
        return Err(Error::IndexOutOfRange {
            index: y,
            len: f.len(),
        });
    }
    Ok(())
}

/// Sum of `probs[center - d ..= center + d]`, with zeros outside the grid.
///
/// Shared by the multibin score and the blur so that both accumulate in the
/// same order.
#[inline]
pub(crate) fn window_sum(probs: &[f64], center: usize, d: usize) -> f64 {
    let lo = center.saturating_sub(d);
    let hi = (center + d).min(probs.len() - 1);
    probs[lo..=hi].iter().sum()
}

/// `ln(p_y)`; `-inf` when `p_y = 0`.
pub fn log_score(f: &CategoricalForecast, y: usize) -> Result<f64> {
    ScoreRule::log().score(f, y)
}

/// `ln(p_{y-d} + ... + p_{y+d})` with zero padding outside the grid.
pub fn multibin_log_score(f: &CategoricalForecast, y: usize, d: usize) -> Result<f64> {
    ScoreRule::multibin(d).score(f, y)
}

pub(crate) fn blur_probs(probs: &[f64], d: usize) -> Vec<f64> {
    let width = (2 * d + 1) as f64;
    (0..probs.len())
        .map(|t| window_sum(probs, t, d) / width)
        .collect()
}

/// Moving average of `f` over windows of `2d + 1` bins.
///
/// `f` must carry no mass on its first and last `d` bins, otherwise mass
/// would be lost off the grid.
pub fn blur(f: &CategoricalForecast, d: usize) -> Result<BlurredForecast> {
    if !f.is_regular(d) {
        return Err(Error::RegularityViolated { d });
    }
    if d == 0 {
        return Ok(BlurredForecast::new(f.clone(), 0));
    }
    Ok(BlurredForecast::new(f.with_probs(blur_probs(f.probs(), d)), d))
}

/// `sum_t belief_t * S(report, t)`, with `0 * -inf = 0`.
pub fn expected_score(
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
    Ok(expected_score_probs(rule, report.probs(), belief.probs()))
}

pub(crate) fn expected_score_probs(rule: &ScoreRule, report: &[f64], belief: &[f64]) -> f64 {
    belief
        .iter()
        .enumerate()
        .filter(|(_, &b)| b > 0.0)
        .map(|(t, &b)| b * rule.score_probs(report, t))
        .sum()
}
