//! Categorical forecast distributions over ordered bins.
//!
//! A [`CategoricalForecast`] is a probability vector `p_1..p_T` over `T`
//! ordered bins. Bins carry integer labels (week numbers, bin positions) so
//! that padding with extra zero bins keeps track of where the original
//! support sits.

use crate::error::{Error, Result};

/// Default tolerance on `|sum - 1|` accepted by [`validate_forecast`].
pub const DEFAULT_TOL: f64 = 1e-6;

/// Entries at or above this value are treated as floating-point noise and
/// clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalForecast {
    labels: Vec<i64>,
    probs: Vec<f64>,
    offset: usize,
}

/// Validates raw probabilities and returns a forecast labelled `1..=T`.
///
/// Sums within `tol` of one are silently renormalized; the stored vector
/// then sums to exactly `1.0` in left-to-right order.
pub fn validate_forecast(raw_probs: &[f64], tol: f64) -> Result<CategoricalForecast> {
    let labels = (1..=raw_probs.len() as i64).collect();
    CategoricalForecast::with_labels(labels, raw_probs.to_vec(), tol)
}

impl CategoricalForecast {
    /// Shorthand for [`validate_forecast`] at [`DEFAULT_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_forecast(&probs, DEFAULT_TOL)
    }

    pub fn with_labels(labels: Vec<i64>, mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptySupport);
        }
        if labels.len() != probs.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                probs: probs.len(),
            });
        }
        if let Some(i) = labels.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedLabels(i + 1));
        }
        for (index, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < NEGATIVE_CLAMP {
                return Err(Error::NegativeProbability { index, value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalized { sum, tol });
        }
        normalize_exact(&mut probs);
        Ok(Self {
            labels,
            probs,
            offset: 0,
        })
    }

    /// Builds a forecast from a vector already known to be a distribution.
    pub(crate) fn from_parts(labels: Vec<i64>, probs: Vec<f64>, offset: usize) -> Self {
        debug_assert_eq!(labels.len(), probs.len());
        Self {
            labels,
            probs,
            offset,
        }
    }

    /// Same labels and offset as `self`, different probabilities. The caller
    /// guarantees `probs` is a distribution of the right length.
    pub(crate) fn with_probs(&self, probs: Vec<f64>) -> Self {
        Self::from_parts(self.labels.clone(), probs, self.offset)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Number of zero bins prepended by [`pad_support`].
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the first largest probability.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// True when the first and last `d` bins carry no mass and `T > 2d`.
    pub fn is_regular(&self, d: usize) -> bool {
        let t = self.probs.len();
        t > 2 * d
            && self.probs[..d].iter().all(|&p| p == 0.0)
            && self.probs[t - d..].iter().all(|&p| p == 0.0)
    }

    /// Returns the `len` bins starting at `start`, dropping the rest.
    ///
    /// Mass outside the window is discarded; callers only use this to undo
    /// padding, where the dropped bins are zero.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() || len == 0 {
            return Err(Error::IndexOutOfRange {
                index: start + len,
                len: self.len(),
            });
        }
        let offset = self.offset.saturating_sub(start);
        Ok(Self::from_parts(
            self.labels[start..start + len].to_vec(),
            self.probs[start..start + len].to_vec(),
            offset,
        ))
    }
}

/// Prepends and appends the minimal number of zero bins so that the first
/// and last `d` bins carry no mass.
///
/// Labels of added bins continue the original label sequence in unit steps.
/// The result always has more than `2d` bins because at least one bin holds
/// positive mass.
pub fn pad_support(f: &CategoricalForecast, d: usize) -> CategoricalForecast {
    let leading = f.probs.iter().take_while(|&&p| p == 0.0).count();
    let trailing = f.probs.iter().rev().take_while(|&&p| p == 0.0).count();
    let prepend = d.saturating_sub(leading);
    let append = d.saturating_sub(trailing);
    if prepend == 0 && append == 0 {
        return f.clone();
    }

    let first = f.labels[0];
    let last = *f.labels.last().expect("non-empty forecast");
    let mut labels = Vec::with_capacity(f.len() + prepend + append);
    labels.extend((1..=prepend as i64).rev().map(|k| first - k));
    labels.extend_from_slice(&f.labels);
    labels.extend((1..=append as i64).map(|k| last + k));

    let mut probs = vec![0.0; prepend];
    probs.extend_from_slice(&f.probs);
    probs.resize(probs.len() + append, 0.0);

    CategoricalForecast::from_parts(labels, probs, f.offset + prepend)
}

/// Divides by the sum, then sets the last nonzero entry to one minus the sum
/// of the entries before it, which makes the left-to-right sum exactly `1.0`.
pub(crate) fn normalize_exact(probs: &mut [f64]) {
    let sum: f64 = probs.iter().sum();
    if sum == 1.0 || sum <= 0.0 {
        return;
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
        let head: f64 = probs[..last].iter().sum();
        probs[last] = (1.0 - head).max(0.0);
    }
}

/// Blurred (moving-average) version of a forecast, together with the window
/// half-width that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurredForecast {
    forecast: CategoricalForecast,
    d: usize,
}

impl BlurredForecast {
    pub(crate) fn new(forecast: CategoricalForecast, d: usize) -> Self {
        Self { forecast, d }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probs(&self) -> &[f64] {
        self.forecast.probs()
    }

    pub fn as_forecast(&self) -> &CategoricalForecast {
        &self.forecast
    }

    pub fn into_forecast(self) -> CategoricalForecast {
        self.forecast
    }
}
