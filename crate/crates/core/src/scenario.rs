//! Deployment and user-density construction: hexagonal sites with three
//! sectors each, the ground region and aerial corridors, and the weighted
//! midpoint grid that discretizes the user distribution.

use alloc::string::String;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::channel::{los_probability, AntennaPattern, BaseStation, LinkKind, Point3D};
use crate::error::{Error, Result};
use crate::math;
use crate::sum::CompensatedSum;

/// Axis-aligned rectangle in the horizontal plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.depth()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        let finite = self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite();
        if !finite || self.width() <= 0.0 || self.depth() <= 0.0 {
            return Err(Error::invalid(field, "rectangle must be non-degenerate"));
        }
        Ok(())
    }
}

/// One aerial corridor: a rectangle flown at a fixed height.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub name: String,
    pub rect: Rect,
    pub height_m: f64,
}

/// Ground region, corridors, and the ground/corridor mixing ratio `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub ground: Rect,
    pub ground_height_m: f64,
    pub corridors: Vec<Corridor>,
    /// Weight of the ground population; `1 - r` goes to the corridors.
    pub mixing_ratio: f64,
}

impl RegionSpec {
    /// The four-corridor square deployment used throughout the case study:
    /// 1.5 km x 1.5 km ground region, two corridors at 150 m and two at
    /// 120 m forming a square ring of 40 m wide lanes.
    pub fn case_study(mixing_ratio: f64) -> Self {
        RegionSpec {
            ground: Rect::new(-750.0, 750.0, -750.0, 750.0),
            ground_height_m: 1.5,
            corridors: alloc::vec![
                Corridor {
                    name: String::from("corridor-1"),
                    rect: Rect::new(-770.0, -730.0, -1000.0, 1000.0),
                    height_m: 150.0,
                },
                Corridor {
                    name: String::from("corridor-2"),
                    rect: Rect::new(-1000.0, 1000.0, -770.0, -730.0),
                    height_m: 120.0,
                },
                Corridor {
                    name: String::from("corridor-3"),
                    rect: Rect::new(-1000.0, 1000.0, 730.0, 770.0),
                    height_m: 120.0,
                },
                Corridor {
                    name: String::from("corridor-4"),
                    rect: Rect::new(730.0, 770.0, -1000.0, 1000.0),
                    height_m: 150.0,
                },
            ],
            mixing_ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ground.validate("regions.ground")?;
        if !(0.0..=1.0).contains(&self.mixing_ratio) {
            return Err(Error::invalid("mixing_ratio", "must lie in [0, 1]"));
        }
        for (i, corridor) in self.corridors.iter().enumerate() {
            corridor.rect.validate("regions.corridors")?;
            if !corridor.height_m.is_finite() {
                return Err(Error::invalid("corridor height", "must be finite"));
            }
            for other in &self.corridors[..i] {
                if other.name == corridor.name {
                    return Err(Error::invalid(
                        "corridors",
                        alloc::format!("duplicate corridor name `{}`", corridor.name),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Which population a sample point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    Ground,
    /// Index into `RegionSpec::corridors`.
    Corridor(usize),
}

impl RegionTag {
    pub fn is_ground(&self) -> bool {
        matches!(self, RegionTag::Ground)
    }
}

/// One weighted evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub point: Point3D,
    pub weight: f64,
    pub tag: RegionTag,
}

/// Per-(point, station) line-of-sight labels for ground links.
#[derive(Debug, Clone, PartialEq)]
pub struct LosLabels {
    n_bs: usize,
    bits: Vec<bool>,
}

impl LosLabels {
    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    #[inline]
    pub fn get(&self, point: usize, bs: usize) -> bool {
        self.bits[point * self.n_bs + bs]
    }
}

/// Weighted 3D evaluation points discretizing the user density, with
/// optional per-link LoS labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<SamplePoint>,
    los_labels: Option<LosLabels>,
}

impl SampleSet {
    pub fn new(points: Vec<SamplePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let set = SampleSet {
            points,
            los_labels: None,
        };
        set.check_weights()?;
        Ok(set)
    }

    fn check_weights(&self) -> Result<()> {
        let mut total = CompensatedSum::new();
        for p in &self.points {
            if !(p.weight > 0.0) {
                return Err(Error::invalid("weights", "all weights must be positive"));
            }
            total.add(p.weight);
        }
        if math::abs(total.value() - 1.0) > 1e-12 {
            return Err(Error::invalid("weights", "weights must sum to 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &SamplePoint {
        &self.points[index]
    }

    pub fn los_labels(&self) -> Option<&LosLabels> {
        self.los_labels.as_ref()
    }

    /// Attach sampled LoS labels (one row per point).
    pub fn set_los_labels(&mut self, labels: LosLabels) -> Result<()> {
        if labels.bits.len() != self.points.len() * labels.n_bs {
            return Err(Error::DimensionMismatch {
                context: "LoS labels",
                expected: self.points.len() * labels.n_bs,
                actual: labels.bits.len(),
            });
        }
        self.los_labels = Some(labels);
        Ok(())
    }

    /// Link condition between point `q` and station `n`: corridor points are
    /// always in line of sight; ground points follow their sampled label and
    /// default to NLoS when no labels are attached.
    #[inline]
    pub fn link_kind(&self, q: usize, n: usize) -> LinkKind {
        match self.points[q].tag {
            RegionTag::Corridor(_) => LinkKind::UavLos,
            RegionTag::Ground => match &self.los_labels {
                Some(labels) if labels.get(q, n) => LinkKind::GueLos,
                _ => LinkKind::GueNlos,
            },
        }
    }

    /// Total weight carried by ground (`true`) or corridor (`false`) points.
    pub fn population_weight(&self, ground: bool) -> f64 {
        let mut total = CompensatedSum::new();
        for p in &self.points {
            if p.tag.is_ground() == ground {
                total.add(p.weight);
            }
        }
        total.value()
    }
}

/// An ordered set of sector base stations sharing one antenna pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub base_stations: Vec<BaseStation>,
    pub pattern: AntennaPattern,
    /// Transmit power cap, dBm.
    pub rho_max_dbm: f64,
}

impl Deployment {
    pub fn n_bs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn tilts_deg(&self) -> Vec<f64> {
        self.base_stations.iter().map(|b| b.tilt_deg).collect()
    }

    pub fn powers_dbm(&self) -> Vec<f64> {
        self.base_stations.iter().map(|b| b.power_dbm).collect()
    }

    pub fn set_tilts_deg(&mut self, tilts: &[f64]) -> Result<()> {
        if tilts.len() != self.base_stations.len() {
            return Err(Error::DimensionMismatch {
                context: "set_tilts_deg",
                expected: self.base_stations.len(),
                actual: tilts.len(),
            });
        }
        for (bs, &t) in self.base_stations.iter_mut().zip(tilts) {
            bs.tilt_deg = t;
        }
        Ok(())
    }

    pub fn set_powers_dbm(&mut self, powers: &[f64]) -> Result<()> {
        if powers.len() != self.base_stations.len() {
            return Err(Error::DimensionMismatch {
                context: "set_powers_dbm",
                expected: self.base_stations.len(),
                actual: powers.len(),
            });
        }
        for (bs, &p) in self.base_stations.iter_mut().zip(powers) {
            bs.power_dbm = p;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        if self.base_stations.is_empty() {
            return Err(Error::invalid("base_stations", "deployment is empty"));
        }
        if self.base_stations.len() % 3 != 0 {
            return Err(Error::invalid(
                "base_stations",
                "sites carry three sectors each",
            ));
        }
        for (n, bs) in self.base_stations.iter().enumerate() {
            bs.validate()?;
            if bs.id != n {
                return Err(Error::invalid("base_stations", "ids must be contiguous"));
            }
            if bs.power_dbm > self.rho_max_dbm {
                return Err(Error::invalid("power_dbm", "exceeds rho_max"));
            }
            // Sectors of one site share position and height; azimuths step
            // by 120 degrees in index order.
            let site_first = 3 * (n / 3);
            let first = &self.base_stations[site_first];
            if bs.x != first.x || bs.y != first.y || bs.height != first.height {
                return Err(Error::invalid(
                    "base_stations",
                    "sectors of one site must share position and height",
                ));
            }
            let expected = sector_azimuth_deg(n % 3);
            if math::abs(bs.azimuth_deg - expected) > 1e-9 {
                return Err(Error::invalid(
                    "azimuth_deg",
                    "sectors must carry azimuths 0, +120, -120 in index order",
                ));
            }
        }
        Ok(())
    }
}

/// Azimuth of sector `s` (0, 1, 2) mapped into [-180, +180]: 0, +120, -120.
fn sector_azimuth_deg(sector: usize) -> f64 {
    match sector {
        0 => 0.0,
        1 => 120.0,
        _ => -120.0,
    }
}

/// Build a hexagonal multi-ring deployment.
///
/// Site positions are `isd * (i * (1, 0) + j * (1/2, sqrt(3)/2))` over all
/// axial coordinates `(i, j)` within `rings` of the origin; `rings = 2`
/// yields the 19-site, 57-sector layout. Sites are ordered by ring and then
/// angle, with the origin first; site `k` (zero-based) carries stations
/// `3k..3k+3` at azimuths 0, +120, -120. All stations start at the tilt 0
/// and transmit at `rho_max_dbm`.
pub fn build_hex_deployment(
    rings: u32,
    isd_m: f64,
    height_m: f64,
    pattern: AntennaPattern,
    rho_max_dbm: f64,
) -> Result<Deployment> {
    pattern.validate()?;
    if !(isd_m > 0.0) {
        return Err(Error::invalid("isd_m", "must be positive"));
    }
    if !(height_m > 0.0) {
        return Err(Error::invalid("bs_height_m", "must be positive"));
    }
    let r = rings as i64;
    let mut sites: Vec<(i64, f64, f64, f64)> = Vec::new(); // (ring, angle, x, y)
    for i in -r..=r {
        for j in -r..=r {
            let ring = i.abs().max(j.abs()).max((i + j).abs());
            if ring > r {
                continue;
            }
            let x = isd_m * (i as f64 + 0.5 * j as f64);
            let y = isd_m * (j as f64) * math::sqrt(3.0) * 0.5;
            let angle = if ring == 0 { 0.0 } else { math::atan2(y, x) };
            sites.push((ring, angle, x, y));
        }
    }
    sites.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.total_cmp(&b.1))
            .then_with(|| a.2.total_cmp(&b.2))
    });

    let mut base_stations = Vec::with_capacity(sites.len() * 3);
    for (site_idx, &(_, _, x, y)) in sites.iter().enumerate() {
        for sector in 0..3usize {
            base_stations.push(BaseStation {
                id: 3 * site_idx + sector,
                x,
                y,
                height: height_m,
                azimuth_deg: sector_azimuth_deg(sector),
                tilt_deg: 0.0,
                power_dbm: rho_max_dbm,
                active: true,
            });
        }
    }
    let deployment = Deployment {
        base_stations,
        pattern,
        rho_max_dbm,
    };
    deployment.validate()?;
    Ok(deployment)
}

/// Number of midpoint cells along one axis.
fn cell_count(extent: f64, step: f64) -> usize {
    (math::round(extent / step) as usize).max(1)
}

fn grid_rect(
    rect: &Rect,
    step: f64,
    height: f64,
    tag: RegionTag,
    region_weight: f64,
    out: &mut Vec<SamplePoint>,
    region_name: &str,
) -> Result<()> {
    if !(step > 0.0) {
        return Err(Error::invalid("grid step", "must be positive"));
    }
    if step >= rect.width() || step >= rect.depth() {
        return Err(Error::invalid(
            "grid step",
            alloc::format!("step {step} must be smaller than the sides of `{region_name}`"),
        ));
    }
    let nx = cell_count(rect.width(), step);
    let ny = cell_count(rect.depth(), step);
    if nx * ny == 0 {
        return Err(Error::EmptyRegion {
            region: String::from(region_name),
        });
    }
    let cw = rect.width() / nx as f64;
    let cd = rect.depth() / ny as f64;
    let point_weight = region_weight / (nx * ny) as f64;
    for iy in 0..ny {
        let y = rect.y_min + (iy as f64 + 0.5) * cd;
        for ix in 0..nx {
            let x = rect.x_min + (ix as f64 + 0.5) * cw;
            out.push(SamplePoint {
                point: Point3D::new(x, y, height),
                weight: point_weight,
                tag,
            });
        }
    }
    Ok(())
}

/// Discretize the user density with midpoint grids.
///
/// The ground region receives total mass `r` spread uniformly over its
/// cells; the corridors share mass `1 - r` proportionally to their areas.
/// Corridors are sampled independently: overlapping footprints contribute
/// one point per corridor at that corridor's height. Populations with zero
/// mass are omitted entirely. Weights are renormalized to sum to exactly 1.
pub fn build_sample_grid(
    regions: &RegionSpec,
    ground_step_m: f64,
    corridor_step_m: f64,
) -> Result<SampleSet> {
    regions.validate()?;
    let r = regions.mixing_ratio;
    let mut points = Vec::new();

    if r > 0.0 {
        grid_rect(
            &regions.ground,
            ground_step_m,
            regions.ground_height_m,
            RegionTag::Ground,
            r,
            &mut points,
            "ground",
        )?;
    }
    if r < 1.0 {
        if regions.corridors.is_empty() {
            return Err(Error::invalid(
                "corridors",
                "mixing_ratio < 1 requires at least one corridor",
            ));
        }
        let total_area: f64 = regions.corridors.iter().map(|c| c.rect.area()).sum();
        for (u, corridor) in regions.corridors.iter().enumerate() {
            let mass = (1.0 - r) * corridor.rect.area() / total_area;
            grid_rect(
                &corridor.rect,
                corridor_step_m,
                corridor.height_m,
                RegionTag::Corridor(u),
                mass,
                &mut points,
                &corridor.name,
            )?;
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySampleSet);
    }

    let mut total = CompensatedSum::new();
    for p in &points {
        total.add(p.weight);
    }
    let norm = total.value();
    for p in &mut points {
        p.weight /= norm;
    }
    SampleSet::new(points)
}

/// Uniform f64 in [0, 1) from one RNG draw.
#[inline]
pub(crate) fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` (Lemire reduction; bias is negligible and the
/// stream is stable across platforms).
#[inline]
pub(crate) fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Sample one LoS label per (ground point, station) pair.
///
/// Ground labels are Bernoulli draws with the line-of-sight probability of
/// the pair, consuming exactly one uniform draw each in (point, station)
/// order. Corridor points are always labeled LoS and consume no draws. The
/// result is a pure function of `seed`.
pub fn sample_los_labels(samples: &SampleSet, bss: &[BaseStation], seed: u64) -> LosLabels {
    let n_bs = bss.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(samples.len() * n_bs);
    for p in samples.points() {
        match p.tag {
            RegionTag::Corridor(_) => bits.extend(core::iter::repeat(true).take(n_bs)),
            RegionTag::Ground => {
                for bs in bss {
                    let pr = los_probability(&p.point, bs);
                    bits.push(uniform_f64(&mut rng) <= pr);
                }
            }
        }
    }
    LosLabels { n_bs, bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn case_pattern() -> AntennaPattern {
        AntennaPattern::default()
    }

    #[test]
    fn hex_ring_counts() {
        let d0 = build_hex_deployment(0, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        assert_eq!(d0.n_bs(), 3);
        assert_eq!((d0.base_stations[0].x, d0.base_stations[0].y), (0.0, 0.0));

        let d1 = build_hex_deployment(1, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        assert_eq!(d1.n_bs(), 21);
        for site in 1..7 {
            let bs = &d1.base_stations[3 * site];
            let dist = (bs.x * bs.x + bs.y * bs.y).sqrt();
            assert_relative_eq!(dist, 500.0, epsilon = 1e-9);
        }

        let d2 = build_hex_deployment(2, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        assert_eq!(d2.n_bs(), 57);
        assert_eq!((d2.base_stations[0].x, d2.base_stations[0].y), (0.0, 0.0));
        d2.validate().unwrap();
    }

    #[test]
    fn hex_layout_is_sixty_degree_symmetric() {
        let d = build_hex_deployment(2, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        let sites: Vec<(f64, f64)> = d
            .base_stations
            .iter()
            .step_by(3)
            .map(|b| (b.x, b.y))
            .collect();
        let (c, s) = (
            60.0_f64.to_radians().cos(),
            60.0_f64.to_radians().sin(),
        );
        for &(x, y) in &sites {
            let rx = c * x - s * y;
            let ry = s * x + c * y;
            let matched = sites
                .iter()
                .any(|&(ox, oy)| ((ox - rx).powi(2) + (oy - ry).powi(2)).sqrt() < 1e-9);
            assert!(matched, "rotated site ({rx}, {ry}) missing");
        }
    }

    #[test]
    fn sector_azimuths_follow_index_order() {
        let d = build_hex_deployment(1, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        for site in 0..7 {
            assert_eq!(d.base_stations[3 * site].azimuth_deg, 0.0);
            assert_eq!(d.base_stations[3 * site + 1].azimuth_deg, 120.0);
            assert_eq!(d.base_stations[3 * site + 2].azimuth_deg, -120.0);
        }
    }

    #[test]
    fn degenerate_mixtures_omit_the_other_population() {
        let all_ground = build_sample_grid(&RegionSpec::case_study(1.0), 100.0, 10.0).unwrap();
        assert!(all_ground.points().iter().all(|p| p.tag.is_ground()));
        assert_relative_eq!(all_ground.population_weight(true), 1.0, epsilon = 1e-12);

        let all_air = build_sample_grid(&RegionSpec::case_study(0.0), 100.0, 10.0).unwrap();
        assert!(all_air.points().iter().all(|p| !p.tag.is_ground()));
        assert_relative_eq!(all_air.population_weight(false), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn case_study_masses_split_by_mixing_ratio_and_area() {
        let set = build_sample_grid(&RegionSpec::case_study(0.5), 50.0, 10.0).unwrap();
        assert_relative_eq!(set.population_weight(true), 0.5, epsilon = 1e-12);
        assert_relative_eq!(set.population_weight(false), 0.5, epsilon = 1e-12);
        // Equal-area corridors carry equal mass.
        let mut per_corridor = [0.0f64; 4];
        for p in set.points() {
            if let RegionTag::Corridor(u) = p.tag {
                per_corridor[u] += p.weight;
            }
        }
        for &mass in &per_corridor {
            assert_relative_eq!(mass, 0.125, epsilon = 1e-9);
        }
    }

    #[test]
    fn weights_always_sum_to_one() {
        for r in [0.0, 0.25, 0.5, 1.0] {
            let set = build_sample_grid(&RegionSpec::case_study(r), 75.0, 20.0).unwrap();
            let total: f64 = crate::sum::compensated_total(set.points().iter().map(|p| p.weight));
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn every_point_lies_inside_its_region() {
        let regions = RegionSpec::case_study(0.5);
        let set = build_sample_grid(&regions, 50.0, 10.0).unwrap();
        for p in set.points() {
            match p.tag {
                RegionTag::Ground => {
                    assert!(regions.ground.contains(p.point.x, p.point.y));
                    assert_eq!(p.point.height, regions.ground_height_m);
                }
                RegionTag::Corridor(u) => {
                    assert!(regions.corridors[u].rect.contains(p.point.x, p.point.y));
                    assert_eq!(p.point.height, regions.corridors[u].height_m);
                }
            }
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let err = build_sample_grid(&RegionSpec::case_study(0.5), 50.0, 45.0);
        assert!(err.is_err(), "45 m step exceeds the 40 m corridor width");
    }

    #[test]
    fn duplicate_corridor_names_are_rejected() {
        let mut regions = RegionSpec::case_study(0.5);
        regions.corridors[1].name = regions.corridors[0].name.clone();
        assert!(regions.validate().is_err());
    }

    #[test]
    fn los_labels_are_deterministic_and_corridors_always_los() {
        let d = build_hex_deployment(0, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        let set = build_sample_grid(&RegionSpec::case_study(0.5), 250.0, 20.0).unwrap();
        let a = sample_los_labels(&set, &d.base_stations, 7);
        let b = sample_los_labels(&set, &d.base_stations, 7);
        assert_eq!(a, b);
        for (q, p) in set.points().iter().enumerate() {
            if !p.tag.is_ground() {
                for n in 0..d.n_bs() {
                    assert!(a.get(q, n));
                }
            }
        }
        let c = sample_los_labels(&set, &d.base_stations, 8);
        assert_ne!(a, c, "different seeds should disagree somewhere");
    }

    #[test]
    fn ground_point_next_to_every_station_is_always_los() {
        let d = build_hex_deployment(0, 500.0, 25.0, case_pattern(), 43.0).unwrap();
        // All three sectors sit at the origin; a point 10 m away is inside
        // the probability-1 disc of each.
        let points = alloc::vec![SamplePoint {
            point: Point3D::new(10.0, 0.0, 1.5),
            weight: 1.0,
            tag: RegionTag::Ground,
        }];
        let set = SampleSet::new(points).unwrap();
        let labels = sample_los_labels(&set, &d.base_stations, 123);
        for n in 0..3 {
            assert!(labels.get(0, n));
        }
    }
}
