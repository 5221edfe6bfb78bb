//! The scenario file: a JSON document with top-level keys `deployment`,
//! `regions`, `objective`, `optimizer`, and `seed`. Every field except
//! `objective.algorithm` is optional and defaults to the documented
//! case-study values; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use corridor_opt_core::channel::{db_to_linear, AntennaPattern};
use corridor_opt_core::objectives::ObjectiveSpec;
use corridor_opt_core::optimizer::{Algorithm, OptimizerConfig};
use corridor_opt_core::scenario::{
    build_hex_deployment, build_sample_grid, sample_los_labels, Corridor, Deployment, Rect,
    RegionSpec, SampleSet,
};

use crate::error::CliError;

fn default_rings() -> u32 {
    2
}
fn default_isd() -> f64 {
    500.0
}
fn default_bs_height() -> f64 {
    25.0
}
fn default_rho_max() -> f64 {
    43.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub theta_3db_deg: f64,
    pub phi_3db_deg: f64,
    pub a_max_dbi: f64,
}

impl Default for PatternFile {
    fn default() -> Self {
        PatternFile {
            theta_3db_deg: 10.0,
            phi_3db_deg: 65.0,
            a_max_dbi: 14.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentFile {
    pub rings: u32,
    pub isd_m: f64,
    pub bs_height_m: f64,
    pub rho_max_dbm: f64,
    pub pattern: PatternFile,
}

impl Default for DeploymentFile {
    fn default() -> Self {
        DeploymentFile {
            rings: default_rings(),
            isd_m: default_isd(),
            bs_height_m: default_bs_height(),
            rho_max_dbm: default_rho_max(),
            pattern: PatternFile::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectFile {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorFile {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionsFile {
    pub ground: RectFile,
    pub corridors: Vec<CorridorFile>,
    pub mixing_ratio: f64,
    pub ground_step_m: f64,
    pub corridor_step_m: f64,
    /// Sample per-link LoS labels for ground users instead of all-NLoS.
    pub probabilistic_los: bool,
}

impl Default for RegionsFile {
    fn default() -> Self {
        let case = RegionSpec::case_study(0.5);
        RegionsFile {
            ground: RectFile {
                x_min: case.ground.x_min,
                x_max: case.ground.x_max,
                y_min: case.ground.y_min,
                y_max: case.ground.y_max,
                height_m: case.ground_height_m,
            },
            corridors: case
                .corridors
                .iter()
                .map(|c| CorridorFile {
                    name: c.name.clone(),
                    x_min: c.rect.x_min,
                    x_max: c.rect.x_max,
                    y_min: c.rect.y_min,
                    y_max: c.rect.y_max,
                    height_m: c.height_m,
                })
                .collect(),
            mixing_ratio: 0.5,
            ground_step_m: 25.0,
            corridor_step_m: 10.0,
            probabilistic_los: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveFile {
    /// One of `max-rss-vat`, `max-sinr-pa-vat`, `mp-pa-vat`, `smm-pa-vat`.
    pub algorithm: String,
    /// Noise power in dBm (converted to linear internally).
    #[serde(default = "default_sigma2_dbm")]
    pub sigma2_dbm: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
}

fn default_sigma2_dbm() -> f64 {
    -104.0
}
fn default_mu() -> f64 {
    0.1
}
fn default_nu() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    1.0
}
fn default_xi() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerFile {
    pub eta0_theta: f64,
    pub eta0_rho: f64,
    pub kappa: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub max_outer: u32,
    pub max_inner: u32,
    pub init_tilt_deg: f64,
    pub init_power_dbm: Option<f64>,
    pub inactive_threshold_dbm: f64,
}

impl Default for OptimizerFile {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        OptimizerFile {
            eta0_theta: d.eta0_theta,
            eta0_rho: d.eta0_rho,
            kappa: d.kappa,
            eps1: d.eps1,
            eps2: d.eps2,
            eps3: d.eps3,
            max_outer: d.max_outer,
            max_inner: d.max_inner,
            init_tilt_deg: d.init_tilt_deg,
            init_power_dbm: d.init_power_dbm,
            inactive_threshold_dbm: d.inactive_threshold_dbm,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deployment: DeploymentFile,
    #[serde(default)]
    pub regions: RegionsFile,
    pub objective: ObjectiveFile,
    #[serde(default)]
    pub optimizer: OptimizerFile,
}

/// A fully validated, assembled scenario.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub algorithm: Algorithm,
    pub deployment: Deployment,
    pub regions: RegionSpec,
    pub samples: SampleSet,
    pub objective: ObjectiveSpec,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    /// SHA-256 of the canonicalized scenario JSON.
    pub digest: String,
}

impl ScenarioFile {
    pub fn from_json(json: &str) -> Result<Self, CliError> {
        serde_json::from_str(json)
            .map_err(|e| CliError::validation(format!("scenario parse error: {e}")))
    }

    pub fn to_regions(&self) -> RegionSpec {
        RegionSpec {
            ground: Rect::new(
                self.regions.ground.x_min,
                self.regions.ground.x_max,
                self.regions.ground.y_min,
                self.regions.ground.y_max,
            ),
            ground_height_m: self.regions.ground.height_m,
            corridors: self
                .regions
                .corridors
                .iter()
                .map(|c| Corridor {
                    name: c.name.clone(),
                    rect: Rect::new(c.x_min, c.x_max, c.y_min, c.y_max),
                    height_m: c.height_m,
                })
                .collect(),
            mixing_ratio: self.regions.mixing_ratio,
        }
    }

    /// Assemble and validate everything. `algorithm_override` and
    /// `seed_override` replace the file's values when given (the `--algo`
    /// and `--seed` flags). The seed governs both the LoS label realization
    /// and the optimizer's initial partition.
    pub fn assemble(
        mut self,
        algorithm_override: Option<Algorithm>,
        seed_override: Option<u64>,
    ) -> Result<LoadedScenario, CliError> {
        if let Some(seed) = seed_override {
            self.seed = seed;
        }
        let algorithm = match algorithm_override {
            Some(a) => a,
            None => self
                .objective
                .algorithm
                .parse::<Algorithm>()
                .map_err(|e| CliError::validation(e.to_string()))?,
        };

        let pattern = AntennaPattern {
            theta_3db_deg: self.deployment.pattern.theta_3db_deg,
            phi_3db_deg: self.deployment.pattern.phi_3db_deg,
            a_max_dbi: self.deployment.pattern.a_max_dbi,
        };
        let deployment = build_hex_deployment(
            self.deployment.rings,
            self.deployment.isd_m,
            self.deployment.bs_height_m,
            pattern,
            self.deployment.rho_max_dbm,
        )?;

        let regions = self.to_regions();
        let mut samples =
            build_sample_grid(&regions, self.regions.ground_step_m, self.regions.corridor_step_m)?;
        if self.regions.probabilistic_los {
            let labels = sample_los_labels(&samples, &deployment.base_stations, self.seed);
            samples.set_los_labels(labels)?;
        }

        let sigma2 = db_to_linear(self.objective.sigma2_dbm);
        let objective = ObjectiveSpec {
            kind: algorithm.objective_kind(),
            sigma2,
            mu: self.objective.mu,
            nu: self.objective.nu,
            alpha: self.objective.alpha,
            xi: self.objective.xi,
        };
        objective.validate()?;

        let optimizer = OptimizerConfig {
            eta0_theta: self.optimizer.eta0_theta,
            eta0_rho: self.optimizer.eta0_rho,
            kappa: self.optimizer.kappa,
            eps1: self.optimizer.eps1,
            eps2: self.optimizer.eps2,
            eps3: self.optimizer.eps3,
            rho_max_dbm: self.deployment.rho_max_dbm,
            max_outer: self.optimizer.max_outer,
            max_inner: self.optimizer.max_inner,
            seed: self.seed,
            init_tilt_deg: self.optimizer.init_tilt_deg,
            init_power_dbm: self.optimizer.init_power_dbm,
            inactive_threshold_dbm: self.optimizer.inactive_threshold_dbm,
        };
        optimizer.validate()?;

        let canonical = serde_json::to_string(&self)
            .map_err(|e| CliError::validation(format!("scenario serialization: {e}")))?;
        let digest = hex::encode(Sha256::digest(canonical.as_bytes()));

        Ok(LoadedScenario {
            seed: self.seed,
            file: self,
            algorithm,
            deployment,
            regions,
            samples,
            objective,
            optimizer,
            digest,
        })
    }
}

/// Read, parse, validate, and assemble a scenario file.
pub fn load_scenario(
    path: &Path,
    algorithm_override: Option<Algorithm>,
    seed_override: Option<u64>,
) -> Result<LoadedScenario, CliError> {
    let json = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read scenario `{}`: {e}", path.display()))
    })?;
    ScenarioFile::from_json(&json)?.assemble(algorithm_override, seed_override)
}
