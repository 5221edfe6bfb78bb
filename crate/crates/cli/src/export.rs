//! CSV and JSON result writers.
//!
//! Report exports print floats at 9 significant digits (the documented
//! round-trip precision bound of the CSV outputs). The tilt and power
//! interchange files use full-precision shortest round-trip formatting
//! instead, so that `evaluate` reproduces an `optimize` run's objective
//! exactly rather than merely to export precision.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use corridor_opt_core::objectives::PointMetric;
use corridor_opt_core::partition::Partition;
use corridor_opt_core::scenario::{Deployment, RegionSpec, RegionTag, SampleSet};

use crate::error::CliError;
use crate::report::{CdfSeries, RunReport};

/// Format a float at 9 significant digits.
pub fn fmt9(value: f64) -> String {
    format!("{value:.8e}")
}

/// Round a float to the 9-significant-digit export grid.
pub fn round9(value: f64) -> f64 {
    fmt9(value).parse().unwrap_or(value)
}

fn region_name(regions: &RegionSpec, tag: RegionTag) -> &str {
    match tag {
        RegionTag::Ground => "ground",
        RegionTag::Corridor(u) => &regions.corridors[u].name,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::validation(format!("cannot create `{}`: {e}", path.display())))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| CliError::validation(format!("cannot write `{}`: {e}", path.display())))?;
    Ok(())
}

/// `config.csv`: one row per station with its full final configuration.
pub fn write_config_csv(dir: &Path, dep: &Deployment) -> Result<PathBuf, CliError> {
    let mut out = String::from("bs_id,x,y,height,azimuth,tilt_deg,power_dbm,active\n");
    for bs in &dep.base_stations {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            bs.id + 1,
            fmt9(bs.x),
            fmt9(bs.y),
            fmt9(bs.height),
            fmt9(bs.azimuth_deg),
            fmt9(bs.tilt_deg),
            fmt9(bs.power_dbm),
            bs.active
        ));
    }
    let path = dir.join("config.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// `tilts.csv` / `powers.csv`: the interchange files consumed by
/// `evaluate`, at full precision.
pub fn write_vector_csv(
    dir: &Path,
    name: &str,
    column: &str,
    values: &[f64],
) -> Result<PathBuf, CliError> {
    let mut out = format!("bs_id,{column}\n");
    for (n, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{v}\n", n + 1));
    }
    let path = dir.join(name);
    write_file(&path, &out)?;
    Ok(path)
}

/// Parse a two-column `bs_id,value` CSV written by [`write_vector_csv`].
pub fn read_vector_csv(path: &Path, expected_len: usize) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read `{}`: {e}", path.display())))?;
    let mut values = vec![f64::NAN; expected_len];
    let mut seen = vec![false; expected_len];
    for (line_no, line) in text.lines().enumerate() {
        if line_no == 0 || line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (id, value) = match (fields.next(), fields.next()) {
            (Some(id), Some(value)) => (id.trim(), value.trim()),
            _ => {
                return Err(CliError::validation(format!(
                    "`{}` line {}: expected `bs_id,value`",
                    path.display(),
                    line_no + 1
                )))
            }
        };
        let id: usize = id.parse().map_err(|_| {
            CliError::validation(format!("`{}` line {}: bad bs_id", path.display(), line_no + 1))
        })?;
        if id == 0 || id > expected_len {
            return Err(CliError::validation(format!(
                "`{}` line {}: bs_id {id} out of range 1..={expected_len}",
                path.display(),
                line_no + 1
            )));
        }
        if seen[id - 1] {
            return Err(CliError::validation(format!(
                "`{}`: duplicate bs_id {id}",
                path.display()
            )));
        }
        seen[id - 1] = true;
        values[id - 1] = value.parse().map_err(|_| {
            CliError::validation(format!("`{}` line {}: bad value", path.display(), line_no + 1))
        })?;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(CliError::validation(format!(
            "`{}`: missing bs_id {}",
            path.display(),
            missing + 1
        )));
    }
    Ok(values)
}

/// `metrics.csv`: per-point serving station and link quality.
pub fn write_metrics_csv(
    dir: &Path,
    regions: &RegionSpec,
    samples: &SampleSet,
    partition: &Partition,
    metrics: &[PointMetric],
) -> Result<PathBuf, CliError> {
    let mut out = String::from("x,y,z,region,weight,serving_bs,rss_dbm,sinr_db\n");
    for (q, p) in samples.points().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt9(p.point.x),
            fmt9(p.point.y),
            fmt9(p.point.height),
            region_name(regions, p.tag),
            fmt9(p.weight),
            partition.serving(q) + 1,
            fmt9(metrics[q].rss_dbm),
            fmt9(metrics[q].sinr_db)
        ));
    }
    let path = dir.join("metrics.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// `partition.csv`: the cell assignment of every sample point.
pub fn write_partition_csv(
    dir: &Path,
    regions: &RegionSpec,
    samples: &SampleSet,
    partition: &Partition,
) -> Result<PathBuf, CliError> {
    let mut out = String::from("x,y,z,region_tag,weight,bs_index\n");
    for (q, p) in samples.points().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt9(p.point.x),
            fmt9(p.point.y),
            fmt9(p.point.height),
            region_name(regions, p.tag),
            fmt9(p.weight),
            partition.serving(q) + 1
        ));
    }
    let path = dir.join("partition.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// `cdf_<metric>_<population>.csv`: plot-ready weighted CDF.
pub fn write_cdf_csv(dir: &Path, name: &str, series: &CdfSeries) -> Result<PathBuf, CliError> {
    let mut out = String::from("value,cum_weight\n");
    for (v, c) in series.values.iter().zip(&series.cum_weights) {
        out.push_str(&format!("{},{}\n", fmt9(*v), fmt9(*c)));
    }
    let path = dir.join(name);
    write_file(&path, &out)?;
    Ok(path)
}

/// `trace.csv`: objective value per outer iteration.
pub fn write_trace_csv(dir: &Path, trace: &[f64]) -> Result<PathBuf, CliError> {
    let mut out = String::from("outer_iter,objective\n");
    for (k, v) in trace.iter().enumerate() {
        out.push_str(&format!("{k},{}\n", fmt9(*v)));
    }
    let path = dir.join("trace.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// `report.json`: the full machine-readable run report.
pub fn write_report_json(dir: &Path, report: &RunReport) -> Result<PathBuf, CliError> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::validation(format!("report serialization: {e}")))?;
    let path = dir.join("report.json");
    write_file(&path, &format!("{json}\n"))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(-21.02), "-2.10200000e1");
        assert_eq!(fmt9(0.0), "0.00000000e0");
        assert_eq!(round9(1.0 / 3.0), 3.33333333e-1);
    }

    #[test]
    fn vector_csv_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let values = vec![0.1 + 0.2, -43.000000000000014, 1e-300, 12.0];
        let path = write_vector_csv(dir.path(), "tilts.csv", "tilt_deg", &values).unwrap();
        let back = read_vector_csv(&path, 4).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn vector_csv_rejects_missing_and_duplicate_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "bs_id,tilt_deg\n1,0.5\n1,0.7\n").unwrap();
        assert!(read_vector_csv(&path, 2).is_err());
        std::fs::write(&path, "bs_id,tilt_deg\n1,0.5\n").unwrap();
        assert!(read_vector_csv(&path, 2).is_err());
    }
}
