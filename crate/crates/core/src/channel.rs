//! Link model between one base station and one 3D point: angle geometry,
//! directional antenna gain, pathloss, RSS, SINR, and line-of-sight
//! probability.
//!
//! Conventions used throughout the crate:
//!
//! * All angles are degrees. The quadratic gain rolloff is unit-consistent
//!   only when offsets and beamwidths share units.
//! * Transmit powers and RSS are dBm; gains and losses are dB.
//! * Linear-domain RSS is `10^(dBm/10)` with no mW/W normalization. Noise
//!   variance `sigma2` must be supplied in the same convention (a noise
//!   floor of -104 dBm is `10^(-10.4)`).

use crate::error::{Error, Result};
use crate::math;

/// 2D position plus height, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3D {
    pub x: f64,
    pub y: f64,
    pub height: f64,
}

impl Point3D {
    pub const fn new(x: f64, y: f64, height: f64) -> Self {
        Point3D { x, y, height }
    }
}

/// One sector antenna of a deployment site.
///
/// `id` is the zero-based contiguous index inside the deployment (exports
/// number stations from 1). `active` is a reporting flag only; optimization
/// never removes a station.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub height: f64,
    /// Horizontal boresight, degrees in [-180, +180]. Fixed at deployment.
    pub azimuth_deg: f64,
    /// Vertical tilt, degrees in [-90, +90]. Positive is uptilt.
    pub tilt_deg: f64,
    /// Transmit power, dBm.
    pub power_dbm: f64,
    pub active: bool,
}

impl BaseStation {
    /// Check the per-station invariants (`rho_max` is enforced by the
    /// enclosing deployment).
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.tilt_deg) || !self.tilt_deg.is_finite() {
            return Err(Error::invalid("tilt_deg", "must lie in [-90, +90]"));
        }
        if !(-180.0..=180.0).contains(&self.azimuth_deg) || !self.azimuth_deg.is_finite() {
            return Err(Error::invalid("azimuth_deg", "must lie in [-180, +180]"));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::invalid("power_dbm", "must be finite"));
        }
        Ok(())
    }
}

/// Directional antenna pattern: quadratic rolloff from boresight in both
/// planes, clamped by nothing (the model is a pure parabola in dB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    /// Vertical half-power beamwidth, degrees.
    pub theta_3db_deg: f64,
    /// Horizontal half-power beamwidth, degrees.
    pub phi_3db_deg: f64,
    /// Boresight gain, dBi.
    pub a_max_dbi: f64,
}

impl AntennaPattern {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_3db_deg > 0.0) {
            return Err(Error::invalid("theta_3db_deg", "must be positive"));
        }
        if !(self.phi_3db_deg > 0.0) {
            return Err(Error::invalid("phi_3db_deg", "must be positive"));
        }
        if !self.a_max_dbi.is_finite() {
            return Err(Error::invalid("a_max_dbi", "must be finite"));
        }
        Ok(())
    }
}

impl Default for AntennaPattern {
    /// 10 degree vertical and 65 degree horizontal half-power beamwidths
    /// with 14 dBi boresight gain.
    fn default() -> Self {
        AntennaPattern {
            theta_3db_deg: 10.0,
            phi_3db_deg: 65.0,
            a_max_dbi: 14.0,
        }
    }
}

/// Line-of-sight condition of one link; selects the pathloss constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// Aerial user, always in line of sight.
    UavLos,
    /// Ground user in line of sight.
    GueLos,
    /// Ground user without line of sight.
    GueNlos,
}

/// Pathloss intercept/slope pair for one link condition (2 GHz carrier).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkClass {
    pub kind: LinkKind,
    /// Intercept `a`, dB.
    pub intercept_db: f64,
    /// Slope `b` (ten times the pathloss exponent).
    pub slope: f64,
}

impl LinkClass {
    /// Constants for `kind` from the standard channel table: LoS links use
    /// 34.02 dB / 22 (exponent 2.2), NLoS ground links 38.42 dB / 30
    /// (exponent 3.0).
    pub const fn from_kind(kind: LinkKind) -> Self {
        match kind {
            LinkKind::UavLos => LinkClass {
                kind,
                intercept_db: 34.02,
                slope: 22.0,
            },
            LinkKind::GueLos => LinkClass {
                kind,
                intercept_db: 34.02,
                slope: 22.0,
            },
            LinkKind::GueNlos => LinkClass {
                kind,
                intercept_db: 38.42,
                slope: 30.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope > 0.0) {
            return Err(Error::invalid("slope", "must be positive"));
        }
        let table = LinkClass::from_kind(self.kind);
        if self.intercept_db != table.intercept_db || self.slope != table.slope {
            return Err(Error::invalid(
                "link_class",
                "constants disagree with the configured table",
            ));
        }
        Ok(())
    }
}

/// Convert a dB(m) quantity to the linear domain (`10^(x/10)`).
#[inline(always)]
pub fn db_to_linear(db: f64) -> f64 {
    math::exp(db * core::f64::consts::LN_10 * 0.1)
}

/// Convert a linear-domain quantity to dB (`10 log10 x`).
#[inline(always)]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * math::log10(linear)
}

/// Wrap an angle difference into the half-open interval `(-180, +180]`
/// degrees (ties at the boundary resolve to +180).
#[inline]
pub(crate) fn wrap_offset_deg(mut delta: f64) -> f64 {
    while delta > 180.0 {
        delta -= 360.0;
    }
    while delta <= -180.0 {
        delta += 360.0;
    }
    delta
}

/// Elevation and azimuth angles from `bs` to `pt`, both in degrees.
///
/// The elevation is `atan((h_q - h_B) / horizontal_distance)`. The azimuth
/// is the bearing of `pt` shifted by whole turns so that the offset from the
/// station boresight lies in `(-180, +180]`. Directly above or below the
/// station the elevation saturates at +-90 and the bearing equals the
/// boresight (no horizontal penalty).
pub fn elevation_azimuth(bs: &BaseStation, pt: &Point3D) -> (f64, f64) {
    let dx = pt.x - bs.x;
    let dy = pt.y - bs.y;
    let dh = pt.height - bs.height;
    let horizontal = math::sqrt(dx * dx + dy * dy);
    if horizontal == 0.0 {
        let theta = if dh > 0.0 {
            90.0
        } else if dh < 0.0 {
            -90.0
        } else {
            0.0
        };
        return (theta, bs.azimuth_deg);
    }
    let theta = math::atan2(dh, horizontal) * math::DEG_PER_RAD;
    let bearing = math::atan2(dy, dx) * math::DEG_PER_RAD;
    let phi = bs.azimuth_deg + wrap_offset_deg(bearing - bs.azimuth_deg);
    (theta, phi)
}

/// Total directional antenna gain of `bs` toward `pt`, in dB.
///
/// `A_max - (12/theta_3db^2) (theta - tilt)^2 - (12/phi_3db^2) (phi - azimuth)^2`;
/// never exceeds `A_max`.
pub fn antenna_gain_db(bs: &BaseStation, pattern: &AntennaPattern, pt: &Point3D) -> f64 {
    let (theta, phi) = elevation_azimuth(bs, pt);
    let v = theta - bs.tilt_deg;
    let h = phi - bs.azimuth_deg;
    pattern.a_max_dbi - 12.0 / (pattern.theta_3db_deg * pattern.theta_3db_deg) * v * v
        - 12.0 / (pattern.phi_3db_deg * pattern.phi_3db_deg) * h * h
}

/// Pathloss between `bs` and `pt` in dB: `a + b log10(3D distance)`.
///
/// Errors when the 3D distance is zero (co-located point).
pub fn pathloss_db(bs: &BaseStation, pt: &Point3D, link: &LinkClass) -> Result<f64> {
    let dx = pt.x - bs.x;
    let dy = pt.y - bs.y;
    let dh = pt.height - bs.height;
    let d3 = math::sqrt(dx * dx + dy * dy + dh * dh);
    if d3 == 0.0 {
        return Err(Error::CoLocatedSample { bs_index: bs.id });
    }
    Ok(link.intercept_db + link.slope * math::log10(d3))
}

/// Received signal strength at `pt` from `bs`, in dBm:
/// transmit power plus antenna gain minus pathloss.
pub fn rss_dbm(
    bs: &BaseStation,
    pattern: &AntennaPattern,
    pt: &Point3D,
    link: &LinkClass,
) -> Result<f64> {
    Ok(bs.power_dbm + antenna_gain_db(bs, pattern, pt) - pathloss_db(bs, pt, link)?)
}

/// SINR in dB of station `n` at `pt` against all other stations plus noise.
///
/// `links` holds one link class per station (same order as `all`). `sigma2`
/// is the linear-domain noise variance. With zero noise and zero
/// interference the ratio is `+inf` for a nonzero signal and a domain error
/// for a zero signal.
pub fn sinr_db(
    n: usize,
    pt: &Point3D,
    all: &[BaseStation],
    pattern: &AntennaPattern,
    links: &[LinkClass],
    sigma2: f64,
) -> Result<f64> {
    if all.is_empty() {
        return Err(Error::invalid("all_bs", "need at least one base station"));
    }
    if links.len() != all.len() {
        return Err(Error::DimensionMismatch {
            context: "sinr_db link classes",
            expected: all.len(),
            actual: links.len(),
        });
    }
    if sigma2 < 0.0 {
        return Err(Error::invalid("sigma2", "must be non-negative"));
    }
    let mut interference = 0.0;
    let mut signal = 0.0;
    for (j, bs) in all.iter().enumerate() {
        let lin = db_to_linear(rss_dbm(bs, pattern, pt, &links[j])?);
        if j == n {
            signal = lin;
        } else {
            interference += lin;
        }
    }
    let denominator = interference + sigma2;
    if denominator == 0.0 && signal == 0.0 {
        return Err(Error::UndefinedSinr);
    }
    Ok(linear_to_db(signal / denominator))
}

/// Probability that a ground point at `pt` sees `bs` in line of sight.
///
/// 1 within 18 m of the station (2D distance), otherwise
/// `18/d + (1 - 18/d) exp(-d/63)`.
pub fn los_probability(pt: &Point3D, bs: &BaseStation) -> f64 {
    let dx = pt.x - bs.x;
    let dy = pt.y - bs.y;
    let d = math::sqrt(dx * dx + dy * dy);
    if d <= 18.0 {
        1.0
    } else {
        let near = 18.0 / d;
        near + (1.0 - near) * math::exp(-d / 63.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn station(x: f64, y: f64, height: f64, azimuth: f64) -> BaseStation {
        BaseStation {
            id: 0,
            x,
            y,
            height,
            azimuth_deg: azimuth,
            tilt_deg: 0.0,
            power_dbm: 43.0,
            active: true,
        }
    }

    #[test]
    fn elevation_zero_at_equal_height() {
        let bs = station(0.0, 0.0, 25.0, 0.0);
        let pt = Point3D::new(120.0, -40.0, 25.0);
        let (theta, _) = elevation_azimuth(&bs, &pt);
        assert_eq!(theta, 0.0);
    }

    #[test]
    fn elevation_45_when_rise_equals_run() {
        let bs = station(0.0, 0.0, 25.0, 0.0);
        let pt = Point3D::new(30.0, 40.0, 25.0 + 50.0);
        let (theta, _) = elevation_azimuth(&bs, &pt);
        assert_relative_eq!(theta, 45.0, max_relative = 1e-12);
    }

    #[test]
    fn azimuth_wraps_across_the_antimeridian() {
        // Boresight +170, point bearing -170: the offset must come out +20,
        // not -340.
        let bs = station(0.0, 0.0, 25.0, 170.0);
        let bearing = -170.0_f64.to_radians();
        let pt = Point3D::new(100.0 * bearing.cos(), 100.0 * bearing.sin(), 25.0);
        let (_, phi) = elevation_azimuth(&bs, &pt);
        assert_relative_eq!(phi - bs.azimuth_deg, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_column_uses_boresight_azimuth() {
        let bs = station(10.0, -5.0, 25.0, 42.0);
        let above = Point3D::new(10.0, -5.0, 100.0);
        let below = Point3D::new(10.0, -5.0, 1.5);
        assert_eq!(elevation_azimuth(&bs, &above), (90.0, 42.0));
        assert_eq!(elevation_azimuth(&bs, &below), (-90.0, 42.0));
    }

    #[test]
    fn boresight_gain_is_a_max() {
        let bs = station(0.0, 0.0, 25.0, 0.0);
        let pattern = AntennaPattern::default();
        // On the boresight: same height (tilt 0) straight along azimuth 0.
        let pt = Point3D::new(200.0, 0.0, 25.0);
        assert_relative_eq!(antenna_gain_db(&bs, &pattern, &pt), 14.0, epsilon = 1e-12);
    }

    #[test]
    fn half_power_offsets_lose_three_db_each() {
        let pattern = AntennaPattern::default();
        let mut bs = station(0.0, 0.0, 0.0, 0.0);
        bs.tilt_deg = 0.0;
        // Horizontal offset of phi_3db/2 and vertical offset of theta_3db/2.
        let h_off = (pattern.phi_3db_deg / 2.0).to_radians();
        let dist = 1000.0;
        let pt = Point3D::new(
            dist * h_off.cos(),
            dist * h_off.sin(),
            dist * (pattern.theta_3db_deg / 2.0).to_radians().tan(),
        );
        let gain = antenna_gain_db(&bs, &pattern, &pt);
        assert_relative_eq!(gain, 14.0 - 3.0 - 3.0, epsilon = 1e-6);
    }

    #[test]
    fn vertical_offset_of_one_beamwidth_costs_twelve_db() {
        let pattern = AntennaPattern::default();
        let bs = station(0.0, 0.0, 0.0, 0.0);
        let dist = 500.0;
        let pt = Point3D::new(dist, 0.0, dist * 10.0_f64.to_radians().tan());
        assert_relative_eq!(
            antenna_gain_db(&bs, &pattern, &pt),
            14.0 - 12.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn pathloss_reference_values() {
        let bs = station(0.0, 0.0, 0.0, 0.0);
        let uav = LinkClass::from_kind(LinkKind::UavLos);
        let nlos = LinkClass::from_kind(LinkKind::GueNlos);
        let at = |d: f64| Point3D::new(d, 0.0, 0.0);
        assert_relative_eq!(
            pathloss_db(&bs, &at(100.0), &uav).unwrap(),
            78.02,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            pathloss_db(&bs, &at(1.0), &nlos).unwrap(),
            38.42,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            pathloss_db(&bs, &at(1000.0), &uav).unwrap(),
            100.02,
            epsilon = 1e-9
        );
    }

    #[test]
    fn pathloss_rejects_co_located_point() {
        let bs = station(3.0, 4.0, 25.0, 0.0);
        let pt = Point3D::new(3.0, 4.0, 25.0);
        let link = LinkClass::from_kind(LinkKind::GueNlos);
        assert_eq!(
            pathloss_db(&bs, &pt, &link),
            Err(Error::CoLocatedSample { bs_index: 0 })
        );
    }

    #[test]
    fn rss_combines_power_gain_and_loss() {
        // 43 dBm + 14 dB boresight gain - 78.02 dB pathloss = -21.02 dBm.
        let bs = station(0.0, 0.0, 0.0, 0.0);
        let pattern = AntennaPattern::default();
        let link = LinkClass::from_kind(LinkKind::UavLos);
        let pt = Point3D::new(100.0, 0.0, 0.0);
        assert_relative_eq!(
            rss_dbm(&bs, &pattern, &pt, &link).unwrap(),
            -21.02,
            epsilon = 1e-9
        );
    }

    #[test]
    fn rss_is_additive_in_power() {
        let mut bs = station(12.0, 9.0, 25.0, 30.0);
        bs.tilt_deg = -4.0;
        let pattern = AntennaPattern::default();
        let link = LinkClass::from_kind(LinkKind::GueNlos);
        let pt = Point3D::new(200.0, -80.0, 1.5);
        let base = rss_dbm(&bs, &pattern, &pt, &link).unwrap();
        bs.power_dbm += 7.25;
        let bumped = rss_dbm(&bs, &pattern, &pt, &link).unwrap();
        assert_eq!(bumped, base + 7.25);
    }

    #[test]
    fn single_station_sinr_is_rss_over_noise() {
        let bs = station(0.0, 0.0, 0.0, 0.0);
        let pattern = AntennaPattern::default();
        let links = [LinkClass::from_kind(LinkKind::UavLos)];
        let pt = Point3D::new(100.0, 0.0, 0.0);
        let sigma2 = db_to_linear(-104.0);
        let sinr = sinr_db(0, &pt, core::slice::from_ref(&bs), &pattern, &links, sigma2).unwrap();
        assert_relative_eq!(sinr, -21.02 + 104.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_midpoint_sinr_tends_to_zero_db() {
        let a = station(-100.0, 0.0, 25.0, 0.0);
        let mut b = station(100.0, 0.0, 25.0, 180.0);
        b.id = 1;
        let pattern = AntennaPattern::default();
        let links = [
            LinkClass::from_kind(LinkKind::GueNlos),
            LinkClass::from_kind(LinkKind::GueNlos),
        ];
        let pt = Point3D::new(0.0, 0.0, 1.5);
        let stations = [a, b];
        let sinr = sinr_db(0, &pt, &stations, &pattern, &links, 1e-30).unwrap();
        assert_relative_eq!(sinr, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn sinr_zero_over_zero_is_a_domain_error() {
        // Zero signal can only happen through underflow; force it with an
        // absurd transmit power.
        let mut bs = station(0.0, 0.0, 0.0, 0.0);
        bs.power_dbm = -4000.0;
        let pattern = AntennaPattern::default();
        let links = [LinkClass::from_kind(LinkKind::GueNlos)];
        let pt = Point3D::new(100.0, 0.0, 0.0);
        assert_eq!(
            sinr_db(0, &pt, core::slice::from_ref(&bs), &pattern, &links, 0.0),
            Err(Error::UndefinedSinr)
        );
    }

    #[test]
    fn los_probability_reference_values() {
        let bs = station(0.0, 0.0, 25.0, 0.0);
        let at = |d: f64| Point3D::new(d, 0.0, 1.5);
        assert_eq!(los_probability(&at(10.0), &bs), 1.0);
        assert_eq!(los_probability(&at(18.0), &bs), 1.0);
        let expected = 18.0 / 63.0 + (45.0 / 63.0) * (-1.0_f64).exp();
        assert_relative_eq!(los_probability(&at(63.0), &bs), expected, epsilon = 1e-12);
    }

    #[test]
    fn link_class_table_is_consistent() {
        for kind in [LinkKind::UavLos, LinkKind::GueLos, LinkKind::GueNlos] {
            LinkClass::from_kind(kind).validate().unwrap();
        }
        let mut bad = LinkClass::from_kind(LinkKind::GueNlos);
        bad.slope = 22.0;
        assert!(bad.validate().is_err());
    }
}
