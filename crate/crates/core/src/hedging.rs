//! Optimal hedged reports under the multibin log score.
//!
//! For a belief `F` the expected multibin score of a report `G` is
//! `sum_t p_t ln(blur(G)_t) + ln(2d + 1)`, so the best report is the one whose
//! blur is closest to `F` in Kullback-Leibler divergence. When some `G` blurs
//! to exactly `F` it is recovered by a left-to-right recursion; otherwise the
//! concave objective is maximized by multiplicative EM updates (the
//! Richardson-Lucy iteration with a box kernel).

use crate::error::{Error, Result};
use crate::forecast::{normalize_exact, BlurredForecast, CategoricalForecast};
use crate::scoring::{blur_probs, expected_score_probs, window_sum, ScoreRule};

/// Entries of an iterative optimum below this are reported as exact zeros.
pub const SUPPORT_TRUNCATION: f64 = 1e-12;

/// Maximum entrywise error allowed when re-blurring an exact solution.
pub const EXACT_REBLUR_TOL: f64 = 1e-10;

/// Expected gains at or below this count as ties with the honest report.
pub const NO_GAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once `|objective change| <= rel_tol * |objective|`.
    pub rel_tol: f64,
    /// Recursion entries above `-negativity_tol` count as zero.
    pub negativity_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            rel_tol: 1e-12,
            negativity_tol: 1e-9,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations > 0
            && self.rel_tol > 0.0
            && self.negativity_tol > 0.0
            && self.rel_tol.is_finite()
            && self.negativity_tol.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "optimizer settings must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeMethod {
    ExactRecursion,
    Iterative,
}

impl HedgeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HedgeMethod::ExactRecursion => "exact_recursion",
            HedgeMethod::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeResult {
    /// The optimized report, on the same (padded) support as the belief.
    pub g: CategoricalForecast,
    pub method: HedgeMethod,
    /// `sum_t p_t ln(blur(G)_t)`.
    pub objective: f64,
    /// `E[MBlogS(G, Y) | F] - E[MBlogS(F, Y) | F]`.
    pub expected_gain: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the stopping rule fired.
    pub converged: bool,
}

fn require_regular(f: &CategoricalForecast, d: usize) -> Result<()> {
    if f.is_regular(d) {
        Ok(())
    } else {
        Err(Error::RegularityViolated { d })
    }
}

/// `sum_t belief_t ln(blurred_t)` skipping outcomes the belief rules out.
fn objective_probs(belief: &[f64], blurred: &[f64]) -> f64 {
    belief
        .iter()
        .zip(blurred)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| p * q.ln())
        .sum()
}

/// The hedging objective `sum_t p_t ln(blur(G)_t)` for belief `f` and report `g`.
pub fn hedge_objective(f: &CategoricalForecast, g: &CategoricalForecast, d: usize) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::SupportMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    require_regular(g, d)?;
    Ok(objective_probs(f.probs(), &blur_probs(g.probs(), d)))
}

/// Finds `G` with `blur(G, d) = f` if one exists.
///
/// Runs `g_{t+d} = (2d+1) f_t - sum_{i=-d}^{d-1} g_{t+i}` from left to
/// right. Returns `None` when a step goes below `-negativity_tol`, when the
/// result leaves mass on the last `d` bins, or when re-blurring misses `f` by
/// more than [`EXACT_REBLUR_TOL`].
pub fn exact_deconvolve(
    f: &CategoricalForecast,
    d: usize,
    cfg: &OptimizerConfig,
) -> Result<Option<CategoricalForecast>> {
    require_regular(f, d)?;
    let p = f.probs();
    let t_len = p.len();
    let width = (2 * d + 1) as f64;
    let mut g = vec![0.0; t_len];

    for t in 0..t_len - d {
        let lo = t.saturating_sub(d);
        let known: f64 = g[lo..t + d].iter().sum();
        let next = width * p[t] - known;
        if next < -cfg.negativity_tol {
            return Ok(None);
        }
        g[t + d] = next;
    }

    for x in g.iter_mut() {
        if x.abs() <= cfg.negativity_tol {
            *x = 0.0;
        }
    }
    if g[t_len - d..].iter().any(|&x| x != 0.0) {
        return Ok(None);
    }
    if g.iter().sum::<f64>() <= 0.0 {
        return Ok(None);
    }
    normalize_exact(&mut g);

    let reblurred = blur_probs(&g, d);
    let fits = reblurred
        .iter()
        .zip(p)
        .all(|(a, b)| (a - b).abs() <= EXACT_REBLUR_TOL);
    Ok(fits.then(|| f.with_probs(g)))
}

/// Multiplicative EM iteration for `max_G sum_t p_t ln(blur(G)_t)`.
///
/// Each step multiplies `g_s` by the window average of `p_t / blur(G)_t`
/// over the windows that contain `s`. Mass is kept on bins `d..T-d`, which
/// makes every iterate regular; moving mass from an edge bin towards the
/// interior never lowers the objective, so nothing is lost by the
/// restriction.
#[derive(Debug, Clone)]
pub struct EmSolver {
    belief: Vec<f64>,
    d: usize,
    g: Vec<f64>,
    blurred: Vec<f64>,
    ratio: Vec<f64>,
    objective: f64,
    iterations: usize,
}

impl EmSolver {
    /// Starts from the uniform distribution over bins `d..T-d`.
    pub fn new(belief: &CategoricalForecast, d: usize) -> Result<Self> {
        require_regular(belief, d)?;
        let t_len = belief.len();
        let active = t_len - 2 * d;
        let mut g = vec![0.0; t_len];
        for x in &mut g[d..t_len - d] {
            *x = 1.0 / active as f64;
        }
        let blurred = blur_probs(&g, d);
        let objective = objective_probs(belief.probs(), &blurred);
        Ok(Self {
            belief: belief.probs().to_vec(),
            d,
            g,
            blurred,
            ratio: vec![0.0; t_len],
            objective,
            iterations: 0,
        })
    }

    /// Performs one update and returns the new objective.
    pub fn step(&mut self) -> f64 {
        let d = self.d;
        let t_len = self.g.len();
        let width = (2 * d + 1) as f64;

        for ((r, &p), &q) in self.ratio.iter_mut().zip(&self.belief).zip(&self.blurred) {
            *r = if p > 0.0 { p / q } else { 0.0 };
        }
        let mut total = 0.0;
        for s in d..t_len - d {
            self.g[s] *= window_sum(&self.ratio, s, d) / width;
            total += self.g[s];
        }
        for x in &mut self.g[d..t_len - d] {
            *x /= total;
        }

        self.blurred = blur_probs(&self.g, d);
        self.objective = objective_probs(&self.belief, &self.blurred);
        self.iterations += 1;
        self.objective
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn current(&self) -> &[f64] {
        &self.g
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Runs [`EmSolver`] to convergence and returns the truncated optimum.
fn iterate(f: &CategoricalForecast, d: usize, cfg: &OptimizerConfig) -> Result<(Vec<f64>, usize, bool)> {
    let mut solver = EmSolver::new(f, d)?;
    let mut converged = false;
    while solver.iterations() < cfg.max_iterations {
        let before = solver.objective();
        let after = solver.step();
        if (after - before).abs() <= cfg.rel_tol * after.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    let iterations = solver.iterations();
    let mut g = solver.g;
    for x in g.iter_mut() {
        if *x < SUPPORT_TRUNCATION {
            *x = 0.0;
        }
    }
    normalize_exact(&mut g);
    Ok((g, iterations, converged))
}

/// Computes the report maximizing the expected multibin log score under
/// belief `f`.
///
/// Tries [`exact_deconvolve`] first and falls back to the EM iteration. When
/// the result beats the belief itself by no more than [`NO_GAIN_TOL`], the
/// belief is returned instead, so already-optimal beliefs such as point
/// masses come back unchanged. The
/// optimum need not be unique; the uniform start and fixed update order make
/// the returned one reproducible.
pub fn optimize_hedged(f: &CategoricalForecast, d: usize, cfg: &OptimizerConfig) -> Result<HedgeResult> {
    cfg.validate()?;
    require_regular(f, d)?;

    let (g, method, iterations, converged) = match exact_deconvolve(f, d, cfg)? {
        Some(g) => (g.probs().to_vec(), HedgeMethod::ExactRecursion, 0, true),
        None => {
            let (g, iterations, converged) = iterate(f, d, cfg)?;
            (g, HedgeMethod::Iterative, iterations, converged)
        }
    };

    let rule = ScoreRule::multibin(d);
    let honest = expected_score_probs(&rule, f.probs(), f.probs());
    let mut expected_gain = expected_score_probs(&rule, &g, f.probs()) - honest;
    let g = if expected_gain <= NO_GAIN_TOL {
        expected_gain = 0.0;
        f.probs().to_vec()
    } else {
        g
    };
    let objective = objective_probs(f.probs(), &blur_probs(&g, d));

    Ok(HedgeResult {
        g: f.with_probs(g),
        method,
        objective,
        expected_gain,
        iterations,
        converged,
    })
}

/// Expected multibin-score improvement from reporting the optimized `G`
/// instead of the belief `f`.
pub fn hedging_gain(f: &CategoricalForecast, d: usize, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(optimize_hedged(f, d, cfg)?.expected_gain)
}

/// `KL(f || g_blur) = sum_t p_t ln(p_t / q_t)`; `+inf` when `f` puts mass
/// where `g_blur` has none.
pub fn kl_divergence(f: &CategoricalForecast, g_blur: &BlurredForecast) -> Result<f64> {
    if f.len() != g_blur.probs().len() {
        return Err(Error::SupportMismatch {
            left: f.len(),
            right: g_blur.probs().len(),
        });
    }
    Ok(f
        .probs()
        .iter()
        .zip(g_blur.probs())
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| if q > 0.0 { p * (p / q).ln() } else { f64::INFINITY })
        .sum())
}
