//! Finite-difference verification of the analytic gradients.
//!
//! The primary correctness gate of the crate: every component of all seven
//! gradient forms (RSS/tilt, SINR/tilt, SINR/power, max-product/tilt,
//! max-product/power, soft-max-min/tilt, soft-max-min/power) is compared
//! against a central finite difference of the objective with the partition
//! frozen, at randomized states.

use alloc::vec::Vec;

use rand_core::SeedableRng;

use crate::channel::{AntennaPattern, BaseStation, Point3D};
use crate::error::Result;
use crate::objectives::{
    eval_objective_with, grad_rho_with, grad_theta_with, Block, EvalTable, ObjectiveKind,
    ObjectiveSpec,
};
use crate::partition::Partition;
use crate::scenario::{
    sample_los_labels, uniform_f64, uniform_index, Deployment, RegionTag, SamplePoint, SampleSet,
};

/// Gate parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Number of random states.
    pub trials: u32,
    /// Relative tolerance.
    pub tolerance: f64,
    /// Absolute error floor for near-zero components.
    pub abs_floor: f64,
    /// Central-difference step (degrees for tilts, dB for powers).
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            trials: 100,
            tolerance: 1e-5,
            abs_floor: 1e-9,
            fd_step: 1e-4,
            seed: 0,
        }
    }
}

/// One component that disagreed with its finite difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckFailure {
    pub trial: u32,
    pub kind: ObjectiveKind,
    pub block: Block,
    pub component: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub error: f64,
    pub allowed: f64,
}

/// Aggregate outcome of a gate run.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSummary {
    pub trials: u32,
    pub components_checked: u64,
    /// Worst error scaled by its allowance (≤ 1 passes).
    pub worst_scaled_error: f64,
    pub failures: Vec<GradCheckFailure>,
}

impl GradCheckSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The seven (objective, block) gradient forms built over shared
/// hyperparameters.
///
/// The soft-max-min metric is a double exponential; at randomized states it
/// can reach magnitudes where a central difference at the pinned step can no
/// longer resolve the gradient (roundoff noise `eps * |phi| / 2h` exceeds
/// the tolerance). Its hyperparameters are therefore conditioned so that
/// `exp(alpha / nu^xi) <= e^7`; the gradient code is identical for any
/// parameter values, so the check still exercises the full form.
fn seven_forms(params: &ObjectiveSpec) -> [(ObjectiveSpec, Block); 7] {
    let sinr = ObjectiveSpec::sinr(params.sigma2);
    let mp = ObjectiveSpec::max_product(params.mu, params.nu, params.sigma2);
    let nu_sm = params.nu.max(0.05);
    let alpha_sm = params
        .alpha
        .min(7.0 * crate::math::powf(nu_sm, params.xi));
    let sm = ObjectiveSpec::soft_max_min(alpha_sm, nu_sm, params.xi, params.sigma2);
    [
        (ObjectiveSpec::rss(), Block::Tilt),
        (sinr, Block::Tilt),
        (sinr, Block::Power),
        (mp, Block::Tilt),
        (mp, Block::Power),
        (sm, Block::Tilt),
        (sm, Block::Power),
    ]
}

struct CheckContext<'a> {
    cfg: &'a GradCheckConfig,
    summary: &'a mut GradCheckSummary,
}

/// Compare one analytic gradient against central finite differences of the
/// objective with the partition frozen.
fn check_form(
    ctx: &mut CheckContext<'_>,
    trial: u32,
    spec: &ObjectiveSpec,
    block: Block,
    table: &EvalTable,
    partition: &Partition,
    tilts: &[f64],
    powers: &[f64],
) -> Result<()> {
    let analytic = match block {
        Block::Tilt => grad_theta_with(spec, table, partition, tilts, powers)?,
        Block::Power => grad_rho_with(spec, table, partition, tilts, powers)?,
    };
    let h = ctx.cfg.fd_step;
    let mut perturbed_tilts = tilts.to_vec();
    let mut perturbed_powers = powers.to_vec();
    for n in 0..table.n_bs() {
        let (vector, original): (&mut Vec<f64>, f64) = match block {
            Block::Tilt => (&mut perturbed_tilts, tilts[n]),
            Block::Power => (&mut perturbed_powers, powers[n]),
        };
        vector[n] = original + h;
        let plus = eval_objective_with(spec, table, partition, &perturbed_tilts, &perturbed_powers)?;
        let (vector, _) = match block {
            Block::Tilt => (&mut perturbed_tilts, 0.0),
            Block::Power => (&mut perturbed_powers, 0.0),
        };
        vector[n] = original - h;
        let minus =
            eval_objective_with(spec, table, partition, &perturbed_tilts, &perturbed_powers)?;
        let (vector, _) = match block {
            Block::Tilt => (&mut perturbed_tilts, 0.0),
            Block::Power => (&mut perturbed_powers, 0.0),
        };
        vector[n] = original;

        let numeric = (plus - minus) / (2.0 * h);
        let a = analytic.values()[n];
        let error = crate::math::abs(a - numeric);
        let allowed = ctx
            .cfg
            .abs_floor
            .max(ctx.cfg.tolerance * crate::math::abs(a).max(crate::math::abs(numeric)));
        ctx.summary.components_checked += 1;
        let scaled = error / allowed;
        if scaled > ctx.summary.worst_scaled_error {
            ctx.summary.worst_scaled_error = scaled;
        }
        if error > allowed {
            ctx.summary.failures.push(GradCheckFailure {
                trial,
                kind: spec.kind,
                block,
                component: n,
                analytic: a,
                numeric,
                error,
                allowed,
            });
        }
    }
    Ok(())
}

fn random_micro_state(
    rng: &mut rand_chacha::ChaCha8Rng,
    trial: u32,
) -> Result<(Deployment, SampleSet, Vec<f64>, Vec<f64>, ObjectiveSpec)> {
    let n_bs = 3 + uniform_index(rng, 7);
    let n_points = 30 + uniform_index(rng, 71);

    let mut base_stations = Vec::with_capacity(n_bs);
    for id in 0..n_bs {
        base_stations.push(BaseStation {
            id,
            x: -600.0 + 1200.0 * uniform_f64(rng),
            y: -600.0 + 1200.0 * uniform_f64(rng),
            height: 10.0 + 35.0 * uniform_f64(rng),
            azimuth_deg: -180.0 + 360.0 * uniform_f64(rng),
            tilt_deg: 0.0,
            power_dbm: 0.0,
            active: true,
        });
    }
    let dep = Deployment {
        base_stations,
        pattern: AntennaPattern::default(),
        rho_max_dbm: 43.0,
    };

    let mut raw_points = Vec::with_capacity(n_points);
    let mut total = 0.0;
    for _ in 0..n_points {
        // Keep a minimum horizontal clearance from every station so that
        // elevation angles stay away from +-90 degrees and linear RSS stays
        // comfortably inside f64 range even at extreme tilt offsets.
        let (x, y) = loop {
            let x = -800.0 + 1600.0 * uniform_f64(rng);
            let y = -800.0 + 1600.0 * uniform_f64(rng);
            let clear = dep
                .base_stations
                .iter()
                .all(|b| (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) > 30.0 * 30.0);
            if clear {
                break (x, y);
            }
        };
        let ground = uniform_f64(rng) < 0.6;
        let (height, tag) = if ground {
            (1.5, RegionTag::Ground)
        } else {
            (80.0 + 80.0 * uniform_f64(rng), RegionTag::Corridor(0))
        };
        let weight = 0.5 + uniform_f64(rng);
        total += weight;
        raw_points.push(SamplePoint {
            point: Point3D::new(x, y, height),
            weight,
            tag,
        });
    }
    for p in &mut raw_points {
        p.weight /= total;
    }
    let mut samples = SampleSet::new(raw_points)?;
    if trial % 2 == 1 {
        let labels = sample_los_labels(&samples, &dep.base_stations, trial as u64);
        samples.set_los_labels(labels)?;
    }

    let tilts: Vec<f64> = (0..n_bs).map(|_| -30.0 + 60.0 * uniform_f64(rng)).collect();
    let powers: Vec<f64> = (0..n_bs).map(|_| 43.0 * uniform_f64(rng)).collect();

    let sigma2 = if trial % 2 == 0 {
        0.0
    } else {
        crate::channel::db_to_linear(-104.0)
    };
    const OFFSETS: [f64; 4] = [0.0, 0.01, 0.1, 1.0];
    let params = ObjectiveSpec {
        kind: ObjectiveKind::MaxProduct,
        sigma2,
        mu: OFFSETS[uniform_index(rng, 4)],
        nu: OFFSETS[uniform_index(rng, 4)],
        alpha: 0.5 + 1.5 * uniform_f64(rng),
        xi: [0.25, 0.5, 1.0][uniform_index(rng, 3)],
    };
    Ok((dep, samples, tilts, powers, params))
}

/// Run the gate on fully random micro-scenarios (3-9 stations, 30-100
/// points, tilts in [-30, 30] degrees, powers in [0, 43] dBm, noise
/// alternating between 0 and the -104 dBm floor).
pub fn run_random_gate(cfg: &GradCheckConfig) -> Result<GradCheckSummary> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut summary = GradCheckSummary {
        trials: cfg.trials,
        components_checked: 0,
        worst_scaled_error: 0.0,
        failures: Vec::new(),
    };
    for trial in 0..cfg.trials {
        let (dep, samples, tilts, powers, params) = random_micro_state(&mut rng, trial)?;
        let table = EvalTable::new(&dep, &samples)?;
        let partition = table.assign_best_rss(&tilts, &powers, 0);
        let mut ctx = CheckContext {
            cfg,
            summary: &mut summary,
        };
        for (spec, block) in seven_forms(&params) {
            check_form(
                &mut ctx, trial, &spec, block, &table, &partition, &tilts, &powers,
            )?;
        }
    }
    Ok(summary)
}

/// Run the gate on a fixed deployment and sample grid, drawing random tilt
/// and power states per trial. `params` supplies the noise variance and the
/// max-product / soft-max-min hyperparameters.
pub fn check_deployment(
    dep: &Deployment,
    samples: &SampleSet,
    params: &ObjectiveSpec,
    cfg: &GradCheckConfig,
) -> Result<GradCheckSummary> {
    let table = EvalTable::new(dep, samples)?;
    let n_bs = dep.n_bs();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut summary = GradCheckSummary {
        trials: cfg.trials,
        components_checked: 0,
        worst_scaled_error: 0.0,
        failures: Vec::new(),
    };
    for trial in 0..cfg.trials {
        let tilts: Vec<f64> = (0..n_bs)
            .map(|_| -30.0 + 60.0 * uniform_f64(&mut rng))
            .collect();
        let powers: Vec<f64> = (0..n_bs)
            .map(|_| dep.rho_max_dbm * uniform_f64(&mut rng))
            .collect();
        let partition = table.assign_best_rss(&tilts, &powers, trial as u64);
        let mut ctx = CheckContext {
            cfg,
            summary: &mut summary,
        };
        for (spec, block) in seven_forms(params) {
            check_form(
                &mut ctx, trial, &spec, block, &table, &partition, &tilts, &powers,
            )?;
        }
    }
    Ok(summary)
}
