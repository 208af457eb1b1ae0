//! Deterministic procedural simulator for multi-person group activities.
//!
//! A run goes: seed streams ([`randomization`]) → asset catalog
//! ([`catalog`]) → authored scene ([`authoring`]) → per-frame motion
//! ([`dynamics`]) → cameras and boxes ([`camera`]) → files ([`export`]).
//! [`metrics`] scores the resulting motion.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod authoring;
pub mod camera;
pub mod catalog;
pub mod config;
pub mod dynamics;
pub mod export;
pub mod geometry;
pub mod metrics;
pub mod randomization;
pub mod skeleton;

pub use authoring::{instantiate_scene, GroupActivity, SceneInstance};
pub use catalog::{build_default_catalog, AssetCatalog, AtomicAction};
pub use config::{Preset, SimulationConfig};
pub use dynamics::{simulate, GroupMotion, SimOptions, SimulationOutput};
pub use randomization::RngStream;

use thiserror::Error;

/// Any failure from the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Random(#[from] randomization::RandomError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
    #[error(transparent)]
    Authoring(#[from] authoring::AuthoringError),
    #[error(transparent)]
    Camera(#[from] camera::CameraError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Export(#[from] export::ExportError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}
