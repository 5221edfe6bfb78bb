//! Run reports: per-population metric summaries and weighted empirical
//! CDFs.

use serde::Serialize;

use corridor_opt_core::objectives::PointMetric;
use corridor_opt_core::scenario::SampleSet;

use crate::error::CliError;
use crate::export::round9;

/// Weighted empirical CDF of one metric over one population: metric values
/// sorted ascending with their cumulative (population-renormalized) weights.
#[derive(Debug, Clone, Serialize)]
pub struct CdfSeries {
    pub values: Vec<f64>,
    pub cum_weights: Vec<f64>,
}

/// Weighted empirical CDF of `values` restricted to indices where
/// `include` is true. Weights are renormalized within the population.
pub fn compute_cdf(
    values: &[f64],
    weights: &[f64],
    include: impl Fn(usize) -> bool,
) -> Result<CdfSeries, CliError> {
    assert_eq!(values.len(), weights.len());
    let mut pairs: Vec<(f64, f64)> = (0..values.len())
        .filter(|&i| include(i))
        .map(|i| (values[i], weights[i]))
        .collect();
    let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
    if !(total > 0.0) {
        return Err(CliError::validation(
            "empty population: no weight selected for CDF",
        ));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    let mut series = CdfSeries {
        values: Vec::with_capacity(pairs.len()),
        cum_weights: Vec::with_capacity(pairs.len()),
    };
    for (value, weight) in pairs {
        cum += weight / total;
        series.values.push(value);
        series.cum_weights.push(cum);
    }
    Ok(series)
}

/// Ground/UAV split of one scalar summary.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct PopulationSplit {
    pub ground: Option<f64>,
    pub uav: Option<f64>,
}

/// Weighted mean of `values` over the selected indices, computed from the
/// export-rounded values and weights so it matches what a consumer of the
/// metrics file recomputes.
fn population_mean(
    samples: &SampleSet,
    values: &[f64],
    ground: bool,
) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, p) in samples.points().iter().enumerate() {
        if p.tag.is_ground() == ground {
            let w = round9(p.weight);
            num += w * round9(values[i]);
            den += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Per-population mean RSS and SINR of a configuration.
pub fn population_means(samples: &SampleSet, metrics: &[PointMetric]) -> (PopulationSplit, PopulationSplit) {
    let rss: Vec<f64> = metrics.iter().map(|m| m.rss_dbm).collect();
    let sinr: Vec<f64> = metrics.iter().map(|m| m.sinr_db).collect();
    (
        PopulationSplit {
            ground: population_mean(samples, &rss, true),
            uav: population_mean(samples, &rss, false),
        },
        PopulationSplit {
            ground: population_mean(samples, &sinr, true),
            uav: population_mean(samples, &sinr, false),
        },
    )
}

/// One station's final configuration.
#[derive(Debug, Clone, Serialize)]
pub struct StationReport {
    /// 1-based station id, matching all CSV exports.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub height: f64,
    pub azimuth_deg: f64,
    pub tilt_deg: f64,
    pub power_dbm: f64,
    pub active: bool,
}

/// Full machine-readable result of an `optimize` or `evaluate` run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub scenario_digest: String,
    pub seed: u64,
    pub restarts: u32,
    pub final_objective: f64,
    pub termination: String,
    pub outer_iterations: u32,
    pub wall_clock_seconds: f64,
    pub mean_rss_dbm: PopulationSplit,
    pub mean_sinr_db: PopulationSplit,
    pub stations: Vec<StationReport>,
    pub trace: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cdf_is_a_unit_step() {
        let series = compute_cdf(&[7.0, 7.0, 7.0], &[0.2, 0.3, 0.5], |_| true).unwrap();
        assert_eq!(series.values, vec![7.0, 7.0, 7.0]);
        assert!((series.cum_weights.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_atom_cdf() {
        let series = compute_cdf(&[3.0, 1.0], &[0.5, 0.5], |_| true).unwrap();
        assert_eq!(series.values, vec![1.0, 3.0]);
        assert!((series.cum_weights[0] - 0.5).abs() < 1e-12);
        assert!((series.cum_weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles_match_a_sort_and_scan_oracle() {
        // Deterministic pseudo-random values; equal weights.
        let n = 257;
        let values: Vec<f64> = (0..n)
            .map(|i| ((i as f64 * 12.9898).sin() * 43758.5453).fract())
            .collect();
        let weights = vec![1.0 / n as f64; n];
        let series = compute_cdf(&values, &weights, |_| true).unwrap();

        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        for (k, q) in [(n / 4, 0.25), (n / 2, 0.5), (3 * n / 4, 0.75)] {
            // The CDF value at sorted[k] must be (k+1)/n.
            let idx = series.values.iter().position(|&v| v == sorted[k]).unwrap();
            assert!(
                (series.cum_weights[idx] - (k + 1) as f64 / n as f64).abs() < 1e-9,
                "quantile {q}"
            );
        }
        // Endpoints: first positive, last exactly ~1.
        assert!(series.cum_weights[0] > 0.0);
        assert!((series.cum_weights[n - 1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_population_is_an_error() {
        assert!(compute_cdf(&[1.0], &[1.0], |_| false).is_err());
    }
}
