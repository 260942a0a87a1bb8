use std::path::Path;

use serde::{Deserialize, Serialize};
use stackguide::eval::sha256_hex;
use stackguide::net::{NetConfig, TrainConfig};
use stackguide::scene::SceneConfig;
use stackguide::sift::{PriorNoise, SiftConfig};
use stackguide::trajectory::{SuccessRule, TrajectoryConfig};
use stackguide::view_synth::SamplerConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub train: usize,
    pub test: usize,
    pub train_images: Option<Vec<String>>,
    pub test_images: Option<Vec<String>>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            train: 2000,
            test: 200,
            train_images: None,
            test_images: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub overlays: usize,
    /// "png" or "ppm".
    pub overlay_format: String,
    /// Single reference image for the baseline.
    pub reference: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            overlays: 4,
            overlay_format: "png".into(),
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub count: usize,
    pub train_count: usize,
    pub success: SuccessRule,
    /// Also judge the baseline on the test trajectories.
    pub baseline: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            count: 100,
            train_count: 90,
            success: SuccessRule::default(),
            baseline: false,
        }
    }
}

/// Everything a run needs; written next to the outputs of every command.
/// The global `seed` overrides the component seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub scene: SceneConfig,
    pub sampler: SamplerConfig,
    pub dataset: DatasetConfig,
    pub net: NetConfig,
    pub train: TrainConfig,
    pub sift: SiftConfig,
    pub prior_noise: PriorNoise,
    pub eval: EvalConfig,
    pub trajectory: TrajectoryConfig,
    pub protocol: ProtocolConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: 1,
            scene: SceneConfig::default(),
            sampler: SamplerConfig::default(),
            dataset: DatasetConfig::default(),
            net: NetConfig::default(),
            train: TrainConfig::default(),
            sift: SiftConfig::default(),
            prior_noise: PriorNoise::default(),
            eval: EvalConfig::default(),
            trajectory: TrajectoryConfig::default(),
            protocol: ProtocolConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Apply flag overrides and push the global seed into the components.
    pub fn resolve(mut self, seed: Option<u64>, threads: Option<usize>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(t) = threads {
            self.threads = t;
        }
        self.threads = self.threads.max(1);
        self.train.seed = self.seed;
        self.trajectory.seed = self.seed;
        self.sift.ransac.seed = self.seed;
        self.net.input_size = self.sampler.view_size;
        self.trajectory.view_size = self.sampler.view_size;
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Write(format!("{}: {e}", dir.display())))?;
        let path = dir.join("config.toml");
        std::fs::write(&path, self.to_toml()).map_err(|e| CliError::Write(format!("{}: {e}", path.display())))
    }
}
