//! The four performance functions and their analytic gradients.
//!
//! Every objective is a weighted sum over sample points of a per-point
//! metric of the serving station:
//!
//! * `Rss` — RSS in dBm (coverage proxy; no power gradient).
//! * `Sinr` — SINR in dB.
//! * `MaxProduct` — `-ln(mu + 1/(sinr_lin + nu))`, a product-of-SINRs proxy.
//! * `SoftMaxMin` — `-exp(alpha / (sinr_lin + nu)^xi)`, a smooth max-min
//!   proxy.
//!
//! Gradients with respect to tilts and powers share one structure: with
//! `s` the linear SINR of the serving station `i` at a point and
//! `omega(s) = s * d(gamma)/d(s)`, the per-point contribution is
//! `omega * ln(10)/10` times the derivative of the serving RSS in dB (own
//! component) minus the same factor times `rss_lin(n) / interference(i)`
//! for every other component `n`. The three SINR-family objectives differ
//! only in `gamma` and `omega`; the dB-domain SINR objective has
//! `omega * ln(10)/10 = 1` exactly. Gradients treat the partition as
//! frozen: boundary terms cancel and are never computed.
//!
//! All reductions run chunk-by-chunk with compensated summation in fixed
//! point order, so evaluation is deterministic bit-for-bit, serial or
//! parallel.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::db_to_linear;
use crate::error::{Error, Result};
use crate::exec;
use crate::math;
use crate::partition::Partition;
use crate::scenario::{Deployment, SampleSet};
use crate::sum::CompensatedSum;

/// Which performance function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Rss,
    Sinr,
    MaxProduct,
    SoftMaxMin,
}

/// Variable block a gradient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// Vertical antenna tilts, degrees.
    Tilt,
    /// Transmit powers, dBm.
    Power,
}

/// Objective selection plus its hyperparameters.
///
/// `sigma2` is the linear-domain noise variance (same `10^(dBm/10)`
/// convention as linear RSS). `mu`/`nu` are the max-product offsets (`nu` is
/// shared with soft max-min), `alpha` the max-min softness, `xi <= 1` the
/// dynamic-range compression exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub sigma2: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub xi: f64,
}

impl ObjectiveSpec {
    pub fn rss() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::Rss,
            sigma2: 0.0,
            mu: 0.0,
            nu: 0.0,
            alpha: 1.0,
            xi: 1.0,
        }
    }

    pub fn sinr(sigma2: f64) -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::Sinr,
            sigma2,
            mu: 0.0,
            nu: 0.0,
            alpha: 1.0,
            xi: 1.0,
        }
    }

    pub fn max_product(mu: f64, nu: f64, sigma2: f64) -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::MaxProduct,
            sigma2,
            mu,
            nu,
            alpha: 1.0,
            xi: 1.0,
        }
    }

    pub fn soft_max_min(alpha: f64, nu: f64, xi: f64, sigma2: f64) -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::SoftMaxMin,
            sigma2,
            mu: 0.0,
            nu,
            alpha,
            xi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= 0.0) {
            return Err(Error::invalid("sigma2", "must be non-negative"));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::invalid("mu", "must be non-negative"));
        }
        if !(self.nu >= 0.0) {
            return Err(Error::invalid("nu", "must be non-negative"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(Error::invalid("xi", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Per-point metric as a function of the linear SINR (SINR-family kinds
    /// only).
    pub fn gamma(&self, sinr_lin: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Rss => f64::NAN,
            ObjectiveKind::Sinr => 10.0 * math::log10(sinr_lin),
            ObjectiveKind::MaxProduct => -math::ln(self.mu + 1.0 / (sinr_lin + self.nu)),
            ObjectiveKind::SoftMaxMin => {
                -math::exp(self.alpha / math::powf(sinr_lin + self.nu, self.xi))
            }
        }
    }

    /// `omega(s) * ln(10)/10` where `omega(s) = s * d(gamma)/ds`: the shared
    /// factor turning dB-domain RSS derivatives into metric derivatives.
    fn omega_eff(&self, s: f64) -> f64 {
        const TAU: f64 = math::LN10_OVER_10;
        if s.is_infinite() {
            // Zero interference and noise: the limits below keep the
            // gradient consistent with the (locally constant) float value.
            return match self.kind {
                ObjectiveKind::Sinr => 1.0,
                ObjectiveKind::MaxProduct => {
                    if self.mu > 0.0 {
                        0.0
                    } else {
                        TAU
                    }
                }
                _ => 0.0,
            };
        }
        match self.kind {
            ObjectiveKind::Rss => 1.0,
            ObjectiveKind::Sinr => 1.0,
            ObjectiveKind::MaxProduct => {
                let shifted = s + self.nu;
                TAU * s / (shifted * (1.0 + self.mu * shifted))
            }
            ObjectiveKind::SoftMaxMin => {
                let shifted = s + self.nu;
                let pow_xi = math::powf(shifted, self.xi);
                let bump = math::exp(self.alpha / pow_xi);
                TAU * self.alpha * self.xi * s * bump / (pow_xi * shifted)
            }
        }
    }
}

/// Per-station partial derivatives of an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    values: Vec<f64>,
}

impl GradientVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Precomputed tilt- and power-independent link table.
///
/// For every (point, station) pair the elevation angle and the static dB
/// budget (boresight gain minus horizontal-offset penalty minus pathloss)
/// are fixed by the geometry, the azimuths, and the link classes. RSS then
/// reduces to `power + static - (12/theta_3db^2)(elevation - tilt)^2`, which
/// keeps the optimizer inner loops free of trigonometry and logarithms.
#[derive(Debug, Clone)]
pub struct EvalTable {
    n_points: usize,
    n_bs: usize,
    elevation_deg: Vec<f64>,
    static_gain_db: Vec<f64>,
    weights: Vec<f64>,
    /// `12 / theta_3db^2`.
    vertical_coeff: f64,
}

impl EvalTable {
    pub fn new(dep: &Deployment, samples: &SampleSet) -> Result<Self> {
        dep.pattern.validate()?;
        let n_bs = dep.base_stations.len();
        let n_points = samples.len();
        let hc = 12.0 / (dep.pattern.phi_3db_deg * dep.pattern.phi_3db_deg);
        let mut elevation_deg = Vec::with_capacity(n_points * n_bs);
        let mut static_gain_db = Vec::with_capacity(n_points * n_bs);
        let mut weights = Vec::with_capacity(n_points);
        for (q, sample) in samples.points().iter().enumerate() {
            weights.push(sample.weight);
            for (n, bs) in dep.base_stations.iter().enumerate() {
                let (theta, phi) = crate::channel::elevation_azimuth(bs, &sample.point);
                let link =
                    crate::channel::LinkClass::from_kind(samples.link_kind(q, n));
                let dx = sample.point.x - bs.x;
                let dy = sample.point.y - bs.y;
                let dh = sample.point.height - bs.height;
                let d3 = math::sqrt(dx * dx + dy * dy + dh * dh);
                if d3 == 0.0 {
                    return Err(Error::CoLocatedSample { bs_index: n });
                }
                let pathloss = link.intercept_db + link.slope * math::log10(d3);
                let h_off = phi - bs.azimuth_deg;
                elevation_deg.push(theta);
                static_gain_db.push(dep.pattern.a_max_dbi - hc * h_off * h_off - pathloss);
            }
        }
        Ok(EvalTable {
            n_points,
            n_bs,
            elevation_deg,
            static_gain_db,
            weights,
            vertical_coeff: 12.0 / (dep.pattern.theta_3db_deg * dep.pattern.theta_3db_deg),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    /// RSS in dBm of station `n` at point `q` for the given tilt and power.
    #[inline(always)]
    pub fn rss_dbm(&self, q: usize, n: usize, tilt_deg: f64, power_dbm: f64) -> f64 {
        let idx = q * self.n_bs + n;
        let d = self.elevation_deg[idx] - tilt_deg;
        power_dbm + self.static_gain_db[idx] - self.vertical_coeff * d * d
    }

    /// Assign every point to the station with the strongest RSS (ties break
    /// to the lowest index).
    pub fn assign_best_rss(&self, tilts: &[f64], powers: &[f64], generation: u64) -> Partition {
        debug_assert_eq!(tilts.len(), self.n_bs);
        debug_assert_eq!(powers.len(), self.n_bs);
        let chunks = exec::map_chunks(self.n_points, |range| {
            let mut out = Vec::with_capacity(range.len());
            for q in range {
                let mut best = 0u32;
                let mut best_rss = f64::NEG_INFINITY;
                for n in 0..self.n_bs {
                    let rss = self.rss_dbm(q, n, tilts[n], powers[n]);
                    if rss > best_rss {
                        best_rss = rss;
                        best = n as u32;
                    }
                }
                out.push(best);
            }
            out
        });
        let mut assignment = Vec::with_capacity(self.n_points);
        for chunk in chunks {
            assignment.extend_from_slice(&chunk);
        }
        Partition::from_assignment(assignment, self.n_bs, generation)
            .expect("assignment indices are in range by construction")
    }
}

fn check_state(
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
) -> Result<()> {
    if tilts.len() != table.n_bs {
        return Err(Error::DimensionMismatch {
            context: "tilts",
            expected: table.n_bs,
            actual: tilts.len(),
        });
    }
    if powers.len() != table.n_bs {
        return Err(Error::DimensionMismatch {
            context: "powers",
            expected: table.n_bs,
            actual: powers.len(),
        });
    }
    if partition.len() != table.n_points {
        return Err(Error::DimensionMismatch {
            context: "partition",
            expected: table.n_points,
            actual: partition.len(),
        });
    }
    Ok(())
}

struct ChunkAccum {
    phi: CompensatedSum,
    grad: Option<Vec<CompensatedSum>>,
}

fn sweep(
    spec: &ObjectiveSpec,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
    block: Option<Block>,
) -> Result<(f64, Option<GradientVector>)> {
    spec.validate()?;
    check_state(table, partition, tilts, powers)?;
    if spec.kind == ObjectiveKind::Rss && block == Some(Block::Power) {
        return Err(Error::RssPowerGradient);
    }
    let nb = table.n_bs;
    let two_vc = 2.0 * table.vertical_coeff;

    let chunks: Vec<Result<ChunkAccum>> = exec::map_chunks(table.n_points, |range| {
        let mut phi = CompensatedSum::new();
        let mut grad = block.map(|_| vec![CompensatedSum::new(); nb]);
        let mut rss_lin = vec![0.0f64; nb];
        let mut offsets = vec![0.0f64; nb];
        for q in range {
            let i = partition.serving(q);
            let w = table.weights[q];
            let base = q * nb;
            if spec.kind == ObjectiveKind::Rss {
                let d = table.elevation_deg[base + i] - tilts[i];
                let rss_db =
                    powers[i] + table.static_gain_db[base + i] - table.vertical_coeff * d * d;
                phi.add(w * rss_db);
                if let Some(g) = grad.as_mut() {
                    g[i].add(w * two_vc * d);
                }
                continue;
            }

            let mut interference = 0.0;
            for n in 0..nb {
                let d = table.elevation_deg[base + n] - tilts[n];
                let rss_db =
                    powers[n] + table.static_gain_db[base + n] - table.vertical_coeff * d * d;
                let lin = db_to_linear(rss_db);
                rss_lin[n] = lin;
                offsets[n] = d;
                if n != i {
                    interference += lin;
                }
            }
            let denom = interference + spec.sigma2;
            let signal = rss_lin[i];
            if denom == 0.0 && signal == 0.0 {
                return Err(Error::UndefinedSinr);
            }
            let s = signal / denom;
            phi.add(w * spec.gamma(s));

            if let Some(g) = grad.as_mut() {
                let weff = spec.omega_eff(s);
                match block.expect("grad implies block") {
                    Block::Tilt => {
                        g[i].add(w * weff * two_vc * offsets[i]);
                        if denom > 0.0 {
                            let c = w * weff * two_vc / denom;
                            for n in 0..nb {
                                if n != i {
                                    g[n].add(-c * offsets[n] * rss_lin[n]);
                                }
                            }
                        }
                    }
                    Block::Power => {
                        g[i].add(w * weff);
                        if denom > 0.0 {
                            let c = w * weff / denom;
                            for n in 0..nb {
                                if n != i {
                                    g[n].add(-c * rss_lin[n]);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(ChunkAccum { phi, grad })
    });

    let mut phi = CompensatedSum::new();
    let mut grad = block.map(|_| vec![CompensatedSum::new(); nb]);
    for chunk in chunks {
        let chunk = chunk?;
        phi.merge(chunk.phi);
        if let (Some(total), Some(partial)) = (grad.as_mut(), chunk.grad) {
            for (t, p) in total.iter_mut().zip(partial) {
                t.merge(p);
            }
        }
    }
    let gradient = grad.map(|components| GradientVector {
        values: components.iter().map(|c| c.value()).collect(),
    });
    Ok((phi.value(), gradient))
}

/// Evaluate the objective on a precomputed table.
pub fn eval_objective_with(
    spec: &ObjectiveSpec,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
) -> Result<f64> {
    sweep(spec, table, partition, tilts, powers, None).map(|(phi, _)| phi)
}

/// Evaluate the objective and one gradient block in a single fused pass.
pub fn eval_and_grad_with(
    spec: &ObjectiveSpec,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
    block: Block,
) -> Result<(f64, GradientVector)> {
    sweep(spec, table, partition, tilts, powers, Some(block))
        .map(|(phi, grad)| (phi, grad.expect("gradient requested")))
}

/// Tilt gradient on a precomputed table.
pub fn grad_theta_with(
    spec: &ObjectiveSpec,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
) -> Result<GradientVector> {
    eval_and_grad_with(spec, table, partition, tilts, powers, Block::Tilt).map(|(_, g)| g)
}

/// Power gradient on a precomputed table. Errors for the RSS objective.
pub fn grad_rho_with(
    spec: &ObjectiveSpec,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
) -> Result<GradientVector> {
    eval_and_grad_with(spec, table, partition, tilts, powers, Block::Power).map(|(_, g)| g)
}

/// Evaluate the objective for a deployment state (builds the link table).
pub fn eval_objective(
    spec: &ObjectiveSpec,
    partition: &Partition,
    samples: &SampleSet,
    dep: &Deployment,
) -> Result<f64> {
    let table = EvalTable::new(dep, samples)?;
    eval_objective_with(
        spec,
        &table,
        partition,
        &dep.tilts_deg(),
        &dep.powers_dbm(),
    )
}

/// Tilt gradient for a deployment state (builds the link table).
pub fn grad_theta(
    spec: &ObjectiveSpec,
    partition: &Partition,
    samples: &SampleSet,
    dep: &Deployment,
) -> Result<GradientVector> {
    let table = EvalTable::new(dep, samples)?;
    grad_theta_with(
        spec,
        &table,
        partition,
        &dep.tilts_deg(),
        &dep.powers_dbm(),
    )
}

/// Power gradient for a deployment state (builds the link table).
pub fn grad_rho(
    spec: &ObjectiveSpec,
    partition: &Partition,
    samples: &SampleSet,
    dep: &Deployment,
) -> Result<GradientVector> {
    let table = EvalTable::new(dep, samples)?;
    grad_rho_with(
        spec,
        &table,
        partition,
        &dep.tilts_deg(),
        &dep.powers_dbm(),
    )
}

/// Per-point RSS and SINR of the serving station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMetric {
    pub rss_dbm: f64,
    pub sinr_db: f64,
}

/// RSS/SINR of every point's serving station under the given state.
pub fn point_metrics(
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
    sigma2: f64,
) -> Result<Vec<PointMetric>> {
    check_state(table, partition, tilts, powers)?;
    if sigma2 < 0.0 {
        return Err(Error::invalid("sigma2", "must be non-negative"));
    }
    let nb = table.n_bs;
    let chunks: Vec<Result<Vec<PointMetric>>> = exec::map_chunks(table.n_points, |range| {
        let mut out = Vec::with_capacity(range.len());
        for q in range {
            let i = partition.serving(q);
            let mut interference = 0.0;
            let mut serving_db = 0.0;
            for n in 0..nb {
                let rss_db = table.rss_dbm(q, n, tilts[n], powers[n]);
                if n == i {
                    serving_db = rss_db;
                } else {
                    interference += db_to_linear(rss_db);
                }
            }
            let denom = interference + sigma2;
            let signal = db_to_linear(serving_db);
            if denom == 0.0 && signal == 0.0 {
                return Err(Error::UndefinedSinr);
            }
            out.push(PointMetric {
                rss_dbm: serving_db,
                sinr_db: 10.0 * math::log10(signal / denom),
            });
        }
        Ok(out)
    });
    let mut metrics = Vec::with_capacity(table.n_points);
    for chunk in chunks {
        metrics.extend(chunk?);
    }
    Ok(metrics)
}
