//! Deterministic fixtures for the benchmarks.

use multibin::{target_spec, CategoricalForecast, ForecastRecord, Season, TargetId};

/// Discretized normal on the 131-bin wILI grid, centred on `mean` percent
/// and cut off at four standard deviations.
pub fn wili_forecast(mean: f64, sd: f64) -> CategoricalForecast {
    let spec = target_spec(TargetId::Wili1Wk, Season::new(2016));
    let raw: Vec<f64> = (0..spec.len())
        .map(|i| {
            let x = i as f64 / 10.0 + 0.05;
            let z = (x - mean) / sd;
            if z.abs() > 4.0 {
                0.0
            } else {
                (-0.5 * z * z).exp()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    spec.forecast(raw.iter().map(|x| x / total).collect(), 1e-9)
        .expect("fixture is a distribution")
}

/// `count` one-week-ahead records over consecutive issue weeks.
pub fn wili_records(count: usize) -> Vec<ForecastRecord> {
    Season::new(2016)
        .weeks()
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(i, issue_week)| ForecastRecord {
            team: "BENCH".into(),
            location: "US National".into(),
            target: TargetId::Wili1Wk,
            issue_week,
            forecast: wili_forecast(2.0 + 0.2 * i as f64, 0.4 + 0.05 * i as f64),
        })
        .collect()
}
