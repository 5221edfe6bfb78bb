//! Cell partitioning: assign every sample point to the station with the
//! strongest RSS, and verify optimality by single-point exchange.
//!
//! One rule serves all four objectives: the SINR-maximizing (and
//! max-product- and soft-max-min-maximizing) cell of a point coincides with
//! its RSS-maximizing cell, because the per-point metrics are all strictly
//! increasing transforms of `rss_lin / (total - rss_lin + sigma2)`, which is
//! itself increasing in `rss_lin`.

use alloc::vec::Vec;

use rand_core::SeedableRng;

use crate::channel::{self, LinkClass};
use crate::error::{Error, Result};
use crate::math;
use crate::objectives::{ObjectiveKind, ObjectiveSpec};
use crate::scenario::{uniform_index, Deployment, SampleSet};

/// Assignment of every sample point to exactly one base station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    generation: u64,
}

impl Partition {
    /// Wrap an explicit assignment; every index must address a station.
    pub fn from_assignment(assignment: Vec<u32>, n_bs: usize, generation: u64) -> Result<Self> {
        if assignment.iter().any(|&a| a as usize >= n_bs) {
            return Err(Error::invalid(
                "assignment",
                "station index out of range",
            ));
        }
        Ok(Partition {
            assignment,
            generation,
        })
    }

    /// Uniform random assignment, deterministic in `seed`. Used to
    /// initialize the optimizers.
    pub fn random(n_points: usize, n_bs: usize, seed: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let assignment = (0..n_points)
            .map(|_| uniform_index(&mut rng, n_bs) as u32)
            .collect();
        Partition {
            assignment,
            generation: 0,
        }
    }

    #[inline(always)]
    pub fn serving(&self, q: usize) -> usize {
        self.assignment[q] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Monotone counter identifying the re-partitioning step that produced
    /// this assignment; downstream caches key on it.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Reassign one point (bumps the generation). Intended for tests and
    /// counterexample construction.
    pub fn reassign(&mut self, q: usize, bs: u32) {
        self.assignment[q] = bs;
        self.generation += 1;
    }

    /// Total sample weight served by each station.
    pub fn cell_weights(&self, samples: &SampleSet, n_bs: usize) -> Vec<f64> {
        let mut weights = alloc::vec![0.0f64; n_bs];
        for (q, p) in samples.points().iter().enumerate() {
            weights[self.serving(q)] += p.weight;
        }
        weights
    }
}

/// Per-point RSS in dBm of every station, straight from the channel model.
fn rss_row(samples: &SampleSet, dep: &Deployment, q: usize) -> Result<Vec<f64>> {
    let pt = &samples.point(q).point;
    dep.base_stations
        .iter()
        .enumerate()
        .map(|(n, bs)| {
            let link = LinkClass::from_kind(samples.link_kind(q, n));
            channel::rss_dbm(bs, &dep.pattern, pt, &link)
        })
        .collect()
}

/// Assign every point to the station with the strongest RSS.
///
/// Deterministic: ties break to the lowest station index. This is the
/// objective-independent optimal partitioning for fixed tilts and powers.
pub fn assign_best_rss(samples: &SampleSet, dep: &Deployment) -> Result<Partition> {
    let mut assignment = Vec::with_capacity(samples.len());
    for q in 0..samples.len() {
        let row = rss_row(samples, dep, q)?;
        let mut best = 0u32;
        let mut best_rss = f64::NEG_INFINITY;
        for (n, &rss) in row.iter().enumerate() {
            if rss > best_rss {
                best_rss = rss;
                best = n as u32;
            }
        }
        assignment.push(best);
    }
    Partition::from_assignment(assignment, dep.n_bs(), 0)
}

/// Metric of station `n` at a point (the quantity the point would
/// contribute to the objective if served by `n`), from its RSS row.
fn point_metric(spec: &ObjectiveSpec, rss_db_row: &[f64], n: usize) -> f64 {
    match spec.kind {
        ObjectiveKind::Rss => rss_db_row[n],
        _ => {
            let mut interference = 0.0;
            for (j, &rss) in rss_db_row.iter().enumerate() {
                if j != n {
                    interference += channel::db_to_linear(rss);
                }
            }
            let s = channel::db_to_linear(rss_db_row[n]) / (interference + spec.sigma2);
            match spec.kind {
                ObjectiveKind::Sinr => 10.0 * math::log10(s),
                _ => spec.gamma(s),
            }
        }
    }
}

/// Check that no single-point reassignment can increase the objective.
///
/// For every point the metric of its assigned station must be at least the
/// metric of every other station, up to a relative slack of 1e-9 that
/// absorbs floating-point disagreement between the RSS argmax and the
/// metric argmax (mathematically they coincide for all four objectives).
pub fn verify_partition_optimality(
    partition: &Partition,
    samples: &SampleSet,
    dep: &Deployment,
    spec: &ObjectiveSpec,
) -> Result<bool> {
    spec.validate()?;
    if partition.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            context: "partition",
            expected: samples.len(),
            actual: partition.len(),
        });
    }
    const SLACK: f64 = 1e-9;
    for q in 0..samples.len() {
        let row = rss_row(samples, dep, q)?;
        let assigned = partition.serving(q);
        let assigned_metric = point_metric(spec, &row, assigned);
        for n in 0..dep.n_bs() {
            if n == assigned {
                continue;
            }
            let other = point_metric(spec, &row, n);
            let tolerance = SLACK * math::abs(assigned_metric).max(1.0);
            if other > assigned_metric + tolerance {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AntennaPattern, BaseStation, Point3D};
    use crate::scenario::{RegionTag, SamplePoint};

    /// Two single-sector stations facing each other: a genuine mirror
    /// geometry (position and boresight both reflect about x = 0).
    fn mirror_pair() -> Deployment {
        let mk = |id: usize, x: f64, azimuth: f64| BaseStation {
            id,
            x,
            y: 0.0,
            height: 25.0,
            azimuth_deg: azimuth,
            tilt_deg: 0.0,
            power_dbm: 43.0,
            active: true,
        };
        Deployment {
            base_stations: alloc::vec![mk(0, -300.0, 0.0), mk(1, 300.0, 180.0)],
            pattern: AntennaPattern::default(),
            rho_max_dbm: 200.0,
        }
    }

    /// Points along the axis at station height, so the vertical rolloff
    /// plays no role and RSS ordering follows pathloss and azimuth alone.
    fn line_samples() -> SampleSet {
        let n = 21;
        let points = (0..n)
            .map(|i| SamplePoint {
                point: Point3D::new(-500.0 + 50.0 * i as f64, 7.0, 25.0),
                weight: 1.0 / n as f64,
                tag: RegionTag::Ground,
            })
            .collect();
        SampleSet::new(points).unwrap()
    }

    #[test]
    fn mirror_geometry_mirrors_assignments_and_ties_break_low() {
        let dep = mirror_pair();
        let samples = line_samples();
        let partition = assign_best_rss(&samples, &dep).unwrap();
        let n = samples.len();
        for q in 0..n {
            let mirrored = n - 1 - q;
            let x = samples.point(q).point.x;
            if x == 0.0 {
                // Exact RSS tie on the bisector: lowest index wins.
                assert_eq!(partition.serving(q), 0, "bisector tie-break");
            } else {
                assert_eq!(
                    partition.serving(q),
                    1 - partition.serving(mirrored),
                    "assignments at x = {x} and x = {} must mirror",
                    samples.point(mirrored).point.x
                );
            }
        }
        // The beam-facing midsection goes to the station whose boresight
        // covers it: between the two sites each station serves its own side.
        for (q, p) in samples.points().iter().enumerate() {
            if p.point.x > -300.0 && p.point.x < 0.0 {
                assert_eq!(partition.serving(q), 0, "x = {}", p.point.x);
            }
        }
    }

    #[test]
    fn overwhelming_power_captures_every_point() {
        let mut dep = mirror_pair();
        dep.base_stations[1].power_dbm += 100.0;
        let samples = line_samples();
        let partition = assign_best_rss(&samples, &dep).unwrap();
        assert!(partition.assignment().iter().all(|&a| a == 1));
    }

    #[test]
    fn table_assignment_matches_the_direct_channel_route() {
        // Dual route: the precomputed-table argmax must agree with the
        // assignment computed straight from the channel primitives.
        let mk = |id: usize, x: f64, y: f64, az: f64| BaseStation {
            id,
            x,
            y,
            height: 20.0 + 3.0 * id as f64,
            azimuth_deg: az,
            tilt_deg: -5.0 + 4.0 * id as f64,
            power_dbm: 20.0 + 5.0 * id as f64,
            active: true,
        };
        let dep = Deployment {
            base_stations: alloc::vec![
                mk(0, -180.0, 40.0, 10.0),
                mk(1, 150.0, -90.0, -130.0),
                mk(2, 60.0, 210.0, 100.0),
            ],
            pattern: AntennaPattern::default(),
            rho_max_dbm: 43.0,
        };
        let points = (0..40)
            .map(|i| {
                let a = i as f64 * 0.7;
                SamplePoint {
                    point: Point3D::new(400.0 * a.cos(), 400.0 * a.sin(), 1.5 + (i % 3) as f64 * 60.0),
                    weight: 1.0 / 40.0,
                    tag: RegionTag::Ground,
                }
            })
            .collect();
        let samples = SampleSet::new(points).unwrap();
        let direct = assign_best_rss(&samples, &dep).unwrap();
        let table = crate::objectives::EvalTable::new(&dep, &samples).unwrap();
        let via_table = table.assign_best_rss(&dep.tilts_deg(), &dep.powers_dbm(), 0);
        assert_eq!(direct.assignment(), via_table.assignment());
    }

    #[test]
    fn assignment_is_idempotent_and_power_shift_invariant() {
        let mut dep = mirror_pair();
        let samples = line_samples();
        let a = assign_best_rss(&samples, &dep).unwrap();
        let b = assign_best_rss(&samples, &dep).unwrap();
        assert_eq!(a.assignment(), b.assignment());
        for bs in &mut dep.base_stations {
            bs.power_dbm += 17.5;
        }
        let c = assign_best_rss(&samples, &dep).unwrap();
        assert_eq!(a.assignment(), c.assignment());
    }

    #[test]
    fn best_rss_partition_is_optimal_for_all_objectives() {
        let dep = mirror_pair();
        let samples = line_samples();
        let partition = assign_best_rss(&samples, &dep).unwrap();
        let sigma2 = channel::db_to_linear(-104.0);
        let specs = [
            ObjectiveSpec::rss(),
            ObjectiveSpec::sinr(sigma2),
            ObjectiveSpec::max_product(0.1, 0.1, sigma2),
            ObjectiveSpec::soft_max_min(1.0, 0.01, 1.0, sigma2),
        ];
        for spec in specs {
            assert!(
                verify_partition_optimality(&partition, &samples, &dep, &spec).unwrap(),
                "kind {:?}",
                spec.kind
            );
        }
    }

    #[test]
    fn deliberate_misassignment_fails_verification() {
        let dep = mirror_pair();
        let samples = line_samples();
        let mut partition = assign_best_rss(&samples, &dep).unwrap();
        // A point dead ahead of station 0 is strictly weaker at station 1.
        let q = samples
            .points()
            .iter()
            .position(|p| p.point.x == -150.0)
            .unwrap();
        assert_eq!(partition.serving(q), 0);
        partition.reassign(q, 1);
        let spec = ObjectiveSpec::rss();
        assert!(!verify_partition_optimality(&partition, &samples, &dep, &spec).unwrap());
    }

    #[test]
    fn single_station_assignment_is_always_optimal() {
        let mut dep = mirror_pair();
        dep.base_stations.truncate(1);
        let samples = line_samples();
        let partition = assign_best_rss(&samples, &dep).unwrap();
        let spec = ObjectiveSpec::sinr(1e-12);
        assert!(verify_partition_optimality(&partition, &samples, &dep, &spec).unwrap());
    }

    #[test]
    fn random_partition_is_seed_deterministic() {
        let a = Partition::random(100, 7, 42);
        let b = Partition::random(100, 7, 42);
        assert_eq!(a, b);
        let c = Partition::random(100, 7, 43);
        assert_ne!(a.assignment(), c.assignment());
        assert!(a.assignment().iter().all(|&x| x < 7));
    }
}
