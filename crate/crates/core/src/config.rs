//! Simulation configuration and the two dataset presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authoring::GroupActivity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("`{field}` must be at least {min}, got {value}")]
    TooSmall {
        field: &'static str,
        min: f64,
        value: f64,
    },
    #[error("`{0}`: lower bound exceeds upper bound")]
    InvertedRange(&'static str),
    #[error("activity weights must be nonnegative with a positive sum")]
    NoActivities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetMode {
    /// Per-view tracking and detection annotations plus the scene description.
    Rgb,
    /// Per-group 3D motion files plus the scene description.
    #[serde(rename = "3d")]
    ThreeD,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Rgb,
    #[serde(rename = "3d")]
    ThreeD,
}

/// Selection weight per group activity; a zero weight disables the activity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityWeights {
    pub walking: f64,
    pub waiting: f64,
    pub queueing: f64,
    pub talking: f64,
    pub dancing: f64,
    pub jogging: f64,
}

impl Default for ActivityWeights {
    fn default() -> Self {
        Self {
            walking: 1.0,
            waiting: 1.0,
            queueing: 1.0,
            talking: 1.0,
            dancing: 1.0,
            jogging: 1.0,
        }
    }
}

impl ActivityWeights {
    pub fn only(activity: GroupActivity) -> Self {
        let mut w = Self {
            walking: 0.0,
            waiting: 0.0,
            queueing: 0.0,
            talking: 0.0,
            dancing: 0.0,
            jogging: 0.0,
        };
        *w.get_mut(activity) = 1.0;
        w
    }

    pub fn get(&self, activity: GroupActivity) -> f64 {
        match activity {
            GroupActivity::Walking => self.walking,
            GroupActivity::Waiting => self.waiting,
            GroupActivity::Queueing => self.queueing,
            GroupActivity::Talking => self.talking,
            GroupActivity::Dancing => self.dancing,
            GroupActivity::Jogging => self.jogging,
        }
    }

    fn get_mut(&mut self, activity: GroupActivity) -> &mut f64 {
        match activity {
            GroupActivity::Walking => &mut self.walking,
            GroupActivity::Waiting => &mut self.waiting,
            GroupActivity::Queueing => &mut self.queueing,
            GroupActivity::Talking => &mut self.talking,
            GroupActivity::Dancing => &mut self.dancing,
            GroupActivity::Jogging => &mut self.jogging,
        }
    }

    /// Weights in [`GroupActivity::ALL`] order.
    pub fn as_vec(&self) -> Vec<f64> {
        GroupActivity::ALL.iter().map(|a| self.get(*a)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogCounts {
    pub scenes: usize,
    pub hdris: usize,
    pub lighting_volumes: usize,
    pub characters: usize,
    pub clips: usize,
}

impl Default for CatalogCounts {
    fn default() -> Self {
        Self {
            scenes: 25,
            hdris: 104,
            lighting_volumes: 5,
            characters: 2200,
            clips: 384,
        }
    }
}

/// Scale of the per-character placement jitter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    /// Position jitter half-width as a fraction of the character interval.
    pub position_fraction: f64,
    /// Heading jitter half-width, degrees.
    pub heading_degrees: f64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            position_fraction: 0.25,
            heading_degrees: 45.0,
        }
    }
}

impl PerturbConfig {
    pub fn none() -> Self {
        Self {
            position_fraction: 0.0,
            heading_degrees: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub master_seed: u64,
    pub n_simulations: usize,
    pub frames: usize,
    pub fps: f64,
    pub n_views: usize,
    pub dataset_mode: DatasetMode,
    pub activity_weights: ActivityWeights,
    pub max_groups: usize,
    pub min_characters: usize,
    pub max_characters: usize,
    pub min_interval: f64,
    pub max_interval: f64,
    pub perturbation: PerturbConfig,
    pub catalog: CatalogCounts,
    pub catalog_override: Option<PathBuf>,
    pub output_root: PathBuf,
    pub joint_block: bool,
    pub speed_adjust: bool,
    pub image_width: u32,
    pub image_height: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self::preset(Preset::Rgb)
    }
}

impl SimulationConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            master_seed: 0,
            n_simulations: 1,
            frames: 100,
            fps: 20.0,
            n_views: 4,
            dataset_mode: DatasetMode::Rgb,
            activity_weights: ActivityWeights::default(),
            max_groups: 3,
            min_characters: 1,
            max_characters: 8,
            min_interval: 0.6,
            max_interval: 1.5,
            perturbation: PerturbConfig::default(),
            catalog: CatalogCounts::default(),
            catalog_override: None,
            output_root: PathBuf::from("out"),
            joint_block: false,
            speed_adjust: true,
            image_width: 1920,
            image_height: 1080,
        };
        match preset {
            Preset::Rgb => base,
            Preset::ThreeD => Self {
                frames: 150,
                fps: 30.0,
                n_views: 1,
                dataset_mode: DatasetMode::ThreeD,
                max_groups: 1,
                max_characters: 13,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts: [(&'static str, usize); 11] = [
            ("n_simulations", self.n_simulations),
            ("frames", self.frames),
            ("n_views", self.n_views),
            ("max_groups", self.max_groups),
            ("min_characters", self.min_characters),
            ("max_characters", self.max_characters),
            ("catalog.scenes", self.catalog.scenes),
            ("catalog.hdris", self.catalog.hdris),
            ("catalog.lighting_volumes", self.catalog.lighting_volumes),
            ("catalog.characters", self.catalog.characters),
            ("catalog.clips", self.catalog.clips),
        ];
        for (field, value) in counts {
            if value < 1 {
                return Err(ConfigError::TooSmall {
                    field,
                    min: 1.0,
                    value: value as f64,
                });
            }
        }
        if self.min_characters > self.max_characters {
            return Err(ConfigError::InvertedRange("min_characters/max_characters"));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(ConfigError::TooSmall {
                field: "fps",
                min: 0.0,
                value: self.fps,
            });
        }
        if !(self.min_interval > 0.0) {
            return Err(ConfigError::TooSmall {
                field: "min_interval",
                min: 0.0,
                value: self.min_interval,
            });
        }
        if !(self.min_interval <= self.max_interval) {
            return Err(ConfigError::InvertedRange("min_interval/max_interval"));
        }
        if self.perturbation.position_fraction < 0.0 || self.perturbation.heading_degrees < 0.0 {
            return Err(ConfigError::TooSmall {
                field: "perturbation",
                min: 0.0,
                value: self
                    .perturbation
                    .position_fraction
                    .min(self.perturbation.heading_degrees),
            });
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(ConfigError::TooSmall {
                field: "image size",
                min: 1.0,
                value: 0.0,
            });
        }
        let weights = self.activity_weights.as_vec();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0
        {
            return Err(ConfigError::NoActivities);
        }
        Ok(())
    }

    /// Duration of one simulated clip, seconds.
    pub fn clip_seconds(&self) -> f64 {
        self.frames as f64 / self.fps
    }
}
