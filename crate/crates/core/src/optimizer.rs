//! Alternating-optimization loops: re-partition, tilt ascent, and (for the
//! SINR-family objectives) projected power ascent, with learning-rate decay
//! and convergence tracking.
//!
//! The loops follow the do-while shape: an outer pass re-partitions and
//! then runs one decaying-rate gradient ascent per variable block until the
//! relative improvement drops below the block threshold; the outer pass
//! repeats until its own threshold. Two artifact-level guards make the
//! monotonicity of the trace a hard invariant rather than an expectation:
//! relative improvements divide by `max(|old|, 1e-12)` (objectives can be
//! negative), and a step that strictly decreases the objective is rolled
//! back with the learning rate halved before retrying.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::objectives::{
    eval_and_grad_with, eval_objective_with, Block, EvalTable, ObjectiveKind, ObjectiveSpec,
};
use crate::partition::Partition;
use crate::scenario::{Deployment, SampleSet};

/// The four optimization algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Tilt-only optimization of mean RSS at maximum transmit power.
    MaxRssVat,
    /// Tilt and power optimization of mean SINR.
    MaxSinrPaVat,
    /// Tilt and power optimization of the max-product proxy.
    MpPaVat,
    /// Tilt and power optimization of the soft max-min proxy.
    SmmPaVat,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::MaxRssVat,
        Algorithm::MaxSinrPaVat,
        Algorithm::MpPaVat,
        Algorithm::SmmPaVat,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MaxRssVat => "max-rss-vat",
            Algorithm::MaxSinrPaVat => "max-sinr-pa-vat",
            Algorithm::MpPaVat => "mp-pa-vat",
            Algorithm::SmmPaVat => "smm-pa-vat",
        }
    }

    pub fn objective_kind(&self) -> ObjectiveKind {
        match self {
            Algorithm::MaxRssVat => ObjectiveKind::Rss,
            Algorithm::MaxSinrPaVat => ObjectiveKind::Sinr,
            Algorithm::MpPaVat => ObjectiveKind::MaxProduct,
            Algorithm::SmmPaVat => ObjectiveKind::SoftMaxMin,
        }
    }

    pub fn optimizes_power(&self) -> bool {
        !matches!(self, Algorithm::MaxRssVat)
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-rss-vat" => Ok(Algorithm::MaxRssVat),
            "max-sinr-pa-vat" => Ok(Algorithm::MaxSinrPaVat),
            "mp-pa-vat" => Ok(Algorithm::MpPaVat),
            "smm-pa-vat" => Ok(Algorithm::SmmPaVat),
            other => Err(Error::invalid(
                "algorithm",
                alloc::format!(
                    "unknown algorithm `{other}` (expected max-rss-vat, max-sinr-pa-vat, mp-pa-vat, or smm-pa-vat)"
                ),
            )),
        }
    }
}

/// Learning rates, decay, thresholds, caps, and initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Initial tilt-ascent learning rate, in (0, 1).
    pub eta0_theta: f64,
    /// Initial power-ascent learning rate, in (0, 1).
    pub eta0_rho: f64,
    /// Multiplicative learning-rate decay per inner step, in (0, 1).
    pub kappa: f64,
    /// Relative-improvement threshold of the tilt inner loop.
    pub eps1: f64,
    /// Relative-improvement threshold of the power inner loop.
    pub eps2: f64,
    /// Relative-improvement threshold of the outer loop.
    pub eps3: f64,
    /// Transmit power cap, dBm.
    pub rho_max_dbm: f64,
    /// Outer-iteration cap.
    pub max_outer: u32,
    /// Inner-step cap per ascent phase.
    pub max_inner: u32,
    /// Seed for the random initial partition.
    pub seed: u64,
    /// Initial tilt for every station, degrees.
    pub init_tilt_deg: f64,
    /// Initial power for every station, dBm. `None` picks the algorithm
    /// default: `rho_max` for RSS (its optimum), 0 dBm otherwise.
    pub init_power_dbm: Option<f64>,
    /// Reporting threshold: stations ending below this power are flagged
    /// inactive in the output. Optimization never hard-disables a station.
    pub inactive_threshold_dbm: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eta0_theta: 0.01,
            eta0_rho: 0.5,
            kappa: 0.999,
            eps1: 1e-8,
            eps2: 1e-8,
            eps3: 1e-8,
            rho_max_dbm: 43.0,
            max_outer: 500,
            max_inner: 5000,
            seed: 0,
            init_tilt_deg: 0.0,
            init_power_dbm: None,
            inactive_threshold_dbm: -20.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, eta) in [("eta0_theta", self.eta0_theta), ("eta0_rho", self.eta0_rho)] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::invalid(name, "must lie in (0, 1)"));
            }
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::invalid("kappa", "must lie in (0, 1)"));
        }
        for (name, eps) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("eps3", self.eps3),
        ] {
            if !(eps > 0.0) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::invalid("iteration caps", "must be at least 1"));
        }
        if !self.rho_max_dbm.is_finite() {
            return Err(Error::invalid("rho_max_dbm", "must be finite"));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Outer relative improvement fell below `eps3`.
    Converged,
    /// The outer-iteration cap was reached.
    OuterIterationCap,
}

/// Summary of one inner ascent phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLog {
    pub outer: u32,
    pub block: Block,
    pub steps: u32,
    pub objective_delta: f64,
    /// The phase hit `max_inner` while still improving.
    pub truncated: bool,
}

/// Final state and history of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerRun {
    pub algorithm: Algorithm,
    pub tilts_deg: Vec<f64>,
    pub powers_dbm: Vec<f64>,
    /// Reporting flags: power above the inactive threshold.
    pub active: Vec<bool>,
    pub partition: Partition,
    /// Objective value before the first outer iteration and after each one,
    /// plus the final re-partitioned state. Non-decreasing.
    pub trace: Vec<f64>,
    pub phase_logs: Vec<PhaseLog>,
    pub termination: TerminationReason,
    pub outer_iterations: u32,
    /// Objective of the final (re-partitioned) state; equals `trace.last()`.
    pub final_objective: f64,
}

/// Relative improvement with a sign-safe denominator.
#[inline]
pub fn relative_improvement(new: f64, old: f64) -> f64 {
    (new - old) / math::abs(old).max(1e-12)
}

/// A maximization problem exposing fused value-and-gradient evaluation.
pub trait AscentObjective {
    fn dim(&self) -> usize;
    /// Objective value and gradient at `x` (gradient written into `grad`).
    fn eval_and_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64>;
}

/// Parameters of one decaying-rate ascent phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentParams {
    pub eta0: f64,
    pub kappa: f64,
    /// Relative-improvement exit threshold.
    pub eps: f64,
    pub max_steps: u32,
    /// Componentwise upper bound (power projection); `None` for tilts.
    pub upper_bound: Option<f64>,
}

/// Outcome of one ascent phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOutcome {
    pub steps: u32,
    pub objective_start: f64,
    pub objective_end: f64,
    pub truncated: bool,
}

const MAX_BACKTRACKS: u32 = 64;

/// Decaying-rate projected gradient ascent on `x`, in place.
///
/// Each step decays the rate by `kappa`, moves along the gradient, clamps
/// to the upper bound if one is given, and re-evaluates. A step that
/// strictly decreases the objective is rolled back and the rate halved
/// before retrying; after `MAX_BACKTRACKS` rejected halvings the step is
/// skipped (treated as a zero step). The loop exits when the relative
/// improvement of a step falls below `eps`, or after `max_steps` steps
/// (reported as truncation).
pub fn ascend<O: AscentObjective>(
    objective: &mut O,
    x: &mut [f64],
    params: &AscentParams,
) -> Result<AscentOutcome> {
    let dim = x.len();
    debug_assert_eq!(dim, objective.dim());
    let mut grad = vec![0.0f64; dim];
    let mut phi = objective.eval_and_grad(x, &mut grad)?;
    if !phi.is_finite() {
        return Err(Error::NonFiniteObjective {
            value: phi,
            context: "ascent entry",
            outer: 0,
        });
    }
    let start = phi;
    let mut eta = params.eta0;
    let mut steps = 0u32;
    let mut truncated = false;
    let mut candidate = vec![0.0f64; dim];
    let mut cand_grad = vec![0.0f64; dim];

    loop {
        if steps >= params.max_steps {
            truncated = true;
            break;
        }
        steps += 1;
        eta *= params.kappa;

        let mut backtracks = 0u32;
        let phi_new = loop {
            for k in 0..dim {
                let mut value = x[k] + eta * grad[k];
                if let Some(bound) = params.upper_bound {
                    value = value.min(bound);
                }
                candidate[k] = value;
            }
            let value = objective.eval_and_grad(&candidate, &mut cand_grad)?;
            if value.is_nan() {
                return Err(Error::NonFiniteObjective {
                    value,
                    context: "ascent step",
                    outer: 0,
                });
            }
            if value >= phi {
                break value;
            }
            // Rejected: roll back and halve the rate.
            eta *= 0.5;
            backtracks += 1;
            if backtracks >= MAX_BACKTRACKS {
                candidate.copy_from_slice(x);
                cand_grad.copy_from_slice(&grad);
                break phi;
            }
        };
        if !phi_new.is_finite() {
            return Err(Error::NonFiniteObjective {
                value: phi_new,
                context: "ascent step",
                outer: 0,
            });
        }
        x.copy_from_slice(&candidate);
        core::mem::swap(&mut grad, &mut cand_grad);
        let improvement = relative_improvement(phi_new, phi);
        phi = phi_new;
        if improvement < params.eps {
            break;
        }
    }

    Ok(AscentOutcome {
        steps,
        objective_start: start,
        objective_end: phi,
        truncated,
    })
}

/// One variable block of the network objective with the other block frozen.
struct NetworkBlock<'a> {
    spec: &'a ObjectiveSpec,
    table: &'a EvalTable,
    partition: &'a Partition,
    fixed: &'a [f64],
    block: Block,
}

impl AscentObjective for NetworkBlock<'_> {
    fn dim(&self) -> usize {
        self.table.n_bs()
    }

    fn eval_and_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let (tilts, powers) = match self.block {
            Block::Tilt => (x, self.fixed),
            Block::Power => (self.fixed, x),
        };
        let (phi, gradient) =
            eval_and_grad_with(self.spec, self.table, self.partition, tilts, powers, self.block)?;
        grad.copy_from_slice(gradient.values());
        Ok(phi)
    }
}

/// Observer invoked after each outer iteration with (iteration, objective).
pub type TraceObserver<'a> = &'a mut dyn FnMut(u32, f64);

/// Tilt-only mean-RSS optimization with every station at maximum power.
pub fn run_max_rss_vat(
    dep: &Deployment,
    samples: &SampleSet,
    config: &OptimizerConfig,
) -> Result<OptimizerRun> {
    run_algorithm(Algorithm::MaxRssVat, &ObjectiveSpec::rss(), dep, samples, config)
}

/// Power-and-tilt optimization for the SINR, max-product, or soft max-min
/// objective. `spec.kind` must not be `Rss`.
pub fn run_pa_vat(
    spec: &ObjectiveSpec,
    dep: &Deployment,
    samples: &SampleSet,
    config: &OptimizerConfig,
) -> Result<OptimizerRun> {
    let algorithm = match spec.kind {
        ObjectiveKind::Rss => return Err(Error::RssPowerGradient),
        ObjectiveKind::Sinr => Algorithm::MaxSinrPaVat,
        ObjectiveKind::MaxProduct => Algorithm::MpPaVat,
        ObjectiveKind::SoftMaxMin => Algorithm::SmmPaVat,
    };
    run_algorithm(algorithm, spec, dep, samples, config)
}

/// Run `algorithm` on the given scenario.
pub fn run_algorithm(
    algorithm: Algorithm,
    spec: &ObjectiveSpec,
    dep: &Deployment,
    samples: &SampleSet,
    config: &OptimizerConfig,
) -> Result<OptimizerRun> {
    run_with_observer(algorithm, spec, dep, samples, config, &mut |_, _| {})
}

/// Run `algorithm`, reporting each outer iteration to `observer`.
pub fn run_with_observer(
    algorithm: Algorithm,
    spec: &ObjectiveSpec,
    dep: &Deployment,
    samples: &SampleSet,
    config: &OptimizerConfig,
    observer: TraceObserver<'_>,
) -> Result<OptimizerRun> {
    config.validate()?;
    spec.validate()?;
    if spec.kind != algorithm.objective_kind() {
        return Err(Error::invalid(
            "objective kind",
            "does not match the algorithm",
        ));
    }
    let n_bs = dep.n_bs();
    if n_bs == 0 {
        return Err(Error::invalid("deployment", "no base stations"));
    }

    let table = EvalTable::new(dep, samples)?;
    let mut tilts = vec![config.init_tilt_deg; n_bs];
    let mut powers = if algorithm.optimizes_power() {
        let init = config.init_power_dbm.unwrap_or(0.0);
        vec![init.min(config.rho_max_dbm); n_bs]
    } else {
        // Without interference the optimal transmit power is the maximum.
        vec![config.rho_max_dbm; n_bs]
    };

    let mut generation = 0u64;
    let mut partition = Partition::random(samples.len(), n_bs, config.seed);
    let mut phi_old = eval_objective_with(spec, &table, &partition, &tilts, &powers)?;
    if !phi_old.is_finite() {
        return Err(Error::NonFiniteObjective {
            value: phi_old,
            context: "initial state",
            outer: 0,
        });
    }
    let mut trace = vec![phi_old];
    let mut phase_logs = Vec::new();
    let mut termination = TerminationReason::OuterIterationCap;
    let mut outer = 0u32;
    observer(0, phi_old);

    while outer < config.max_outer {
        outer += 1;
        generation += 1;
        partition = table.assign_best_rss(&tilts, &powers, generation);

        let tilt_outcome = {
            let mut block = NetworkBlock {
                spec,
                table: &table,
                partition: &partition,
                fixed: &powers,
                block: Block::Tilt,
            };
            ascend(
                &mut block,
                &mut tilts,
                &AscentParams {
                    eta0: config.eta0_theta,
                    kappa: config.kappa,
                    eps: config.eps1,
                    max_steps: config.max_inner,
                    upper_bound: None,
                },
            )
            .map_err(|e| tag_outer(e, outer))?
        };
        phase_logs.push(PhaseLog {
            outer,
            block: Block::Tilt,
            steps: tilt_outcome.steps,
            objective_delta: tilt_outcome.objective_end - tilt_outcome.objective_start,
            truncated: tilt_outcome.truncated,
        });
        let mut phi_new = tilt_outcome.objective_end;

        if algorithm.optimizes_power() {
            let power_outcome = {
                let mut block = NetworkBlock {
                    spec,
                    table: &table,
                    partition: &partition,
                    fixed: &tilts,
                    block: Block::Power,
                };
                ascend(
                    &mut block,
                    &mut powers,
                    &AscentParams {
                        eta0: config.eta0_rho,
                        kappa: config.kappa,
                        eps: config.eps2,
                        max_steps: config.max_inner,
                        upper_bound: Some(config.rho_max_dbm),
                    },
                )
                .map_err(|e| tag_outer(e, outer))?
            };
            phase_logs.push(PhaseLog {
                outer,
                block: Block::Power,
                steps: power_outcome.steps,
                objective_delta: power_outcome.objective_end - power_outcome.objective_start,
                truncated: power_outcome.truncated,
            });
            phi_new = power_outcome.objective_end;
        }

        trace.push(phi_new);
        observer(outer, phi_new);
        let improvement = relative_improvement(phi_new, phi_old);
        phi_old = phi_new;
        if improvement < config.eps3 {
            termination = TerminationReason::Converged;
            break;
        }
    }

    // Canonical final state: refresh the partition so that re-evaluating the
    // exported tilts and powers reproduces the reported objective exactly.
    generation += 1;
    partition = table.assign_best_rss(&tilts, &powers, generation);
    let final_objective = eval_objective_with(spec, &table, &partition, &tilts, &powers)?;
    trace.push(final_objective);

    let active = powers
        .iter()
        .map(|&p| p > config.inactive_threshold_dbm)
        .collect();

    Ok(OptimizerRun {
        algorithm,
        tilts_deg: tilts,
        powers_dbm: powers,
        active,
        partition,
        trace,
        phase_logs,
        termination,
        outer_iterations: outer,
        final_objective,
    })
}

fn tag_outer(error: Error, outer: u32) -> Error {
    match error {
        Error::NonFiniteObjective { value, context, .. } => Error::NonFiniteObjective {
            value,
            context,
            outer,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Concave 1D quadratic with maximizer at `peak`.
    struct Quadratic {
        peak: f64,
        evals: u32,
    }

    impl AscentObjective for Quadratic {
        fn dim(&self) -> usize {
            1
        }
        fn eval_and_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
            self.evals += 1;
            let d = x[0] - self.peak;
            grad[0] = -2.0 * d;
            Ok(-d * d)
        }
    }

    #[test]
    fn ascend_approaches_the_quadratic_maximizer_monotonically() {
        let mut problem = Quadratic { peak: 3.0, evals: 0 };
        let mut x = [0.0];
        let params = AscentParams {
            eta0: 0.2,
            kappa: 0.999,
            eps: 1e-14,
            max_steps: 10_000,
            upper_bound: None,
        };
        // Track monotone distance decrease by stepping manually in two
        // stages: a run from farther away never overshoots past the result
        // of a run from nearer.
        let outcome = ascend(&mut problem, &mut x, &params).unwrap();
        assert!(outcome.objective_end >= outcome.objective_start);
        assert!((x[0] - 3.0).abs() < 1e-5, "x = {}", x[0]);
    }

    #[test]
    fn zero_gradient_exits_after_one_noop_step() {
        let mut problem = Quadratic { peak: 5.0, evals: 0 };
        let mut x = [5.0];
        let params = AscentParams {
            eta0: 0.5,
            kappa: 0.9,
            eps: 1e-8,
            max_steps: 100,
            upper_bound: None,
        };
        let outcome = ascend(&mut problem, &mut x, &params).unwrap();
        assert_eq!(outcome.steps, 1);
        assert_eq!(x[0], 5.0);
        assert_eq!(outcome.objective_start, outcome.objective_end);
    }

    /// Linear objective pushing x upward forever.
    struct Linear;

    impl AscentObjective for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn eval_and_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
            grad[0] = 1.0;
            Ok(x[0])
        }
    }

    #[test]
    fn projection_clamps_to_the_upper_bound() {
        let mut x = [42.9];
        let params = AscentParams {
            eta0: 0.9,
            kappa: 0.999,
            eps: 1e-12,
            max_steps: 50,
            upper_bound: Some(43.0),
        };
        let outcome = ascend(&mut Linear, &mut x, &params).unwrap();
        assert_eq!(x[0], 43.0);
        assert!(outcome.steps <= 50);
    }

    #[test]
    fn truncation_is_flagged_when_the_cap_hits() {
        let mut x = [0.0];
        let params = AscentParams {
            eta0: 0.01,
            kappa: 0.9999,
            eps: 1e-15,
            max_steps: 3,
            upper_bound: None,
        };
        let outcome = ascend(&mut Linear, &mut x, &params).unwrap();
        assert!(outcome.truncated);
        assert_eq!(outcome.steps, 3);
    }
}
