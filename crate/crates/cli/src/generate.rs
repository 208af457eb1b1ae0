//! Dataset generation campaigns.

use std::path::{Path, PathBuf};

use groupsim_core::authoring::{instantiate_scene, AuthoringError, GroupActivity};
use groupsim_core::catalog::{build_default_catalog, AssetCatalog};
use groupsim_core::config::{DatasetMode, SimulationConfig};
use groupsim_core::dynamics::{simulate, SimOptions, SpeedAdjustParams};
use groupsim_core::export::{
    annotate_view, write_coco, write_mot, write_motion3d, write_scene, FrameMeta, SceneDescription,
};
use groupsim_core::RngStream;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{sha256_file, CliError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    Ok,
    PlacementFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the dataset root, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub group_id: u32,
    pub activity: GroupActivity,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub index: usize,
    pub sim_id: String,
    pub stream: String,
    pub status: SimStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub groups: Vec<GroupEntry>,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub generator_version: String,
    /// The run's config with `output_root` cleared, so manifests of the
    /// same campaign written to different places are byte-identical.
    pub config: SimulationConfig,
    pub simulations: Vec<SimRecord>,
}

pub fn sim_id(index: usize) -> String {
    format!("sim_{index:06}")
}

pub fn sim_stream_label(index: usize) -> String {
    format!("sim/{index}")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn entry(root: &Path, rel: &str) -> Result<FileEntry, CliError> {
    let path = root.join(rel);
    let (sha256, bytes) = sha256_file(&path)?;
    Ok(FileEntry {
        path: rel.to_string(),
        bytes,
        sha256,
    })
}

/// Author, simulate and export one simulation. Placement failures are
/// recorded rather than retried so index `s` always maps to stream `sim/s`.
pub fn run_simulation(
    config: &SimulationConfig,
    catalog: &AssetCatalog,
    index: usize,
) -> Result<SimRecord, CliError> {
    let root = &config.output_root;
    let id = sim_id(index);
    let label = sim_stream_label(index);
    let stream = RngStream::new(config.master_seed).derive(&label)?;
    let mut record = SimRecord {
        index,
        sim_id: id.clone(),
        stream: label,
        status: SimStatus::Ok,
        error: None,
        groups: Vec::new(),
        files: Vec::new(),
    };
    let scene = match instantiate_scene(config, catalog, &stream) {
        Ok(s) => s,
        Err(e @ AuthoringError::PlacementFailure { .. }) => {
            warn!("{id}: {e}; skipped");
            record.status = SimStatus::PlacementFailed;
            record.error = Some(e.to_string());
            return Ok(record);
        }
        Err(e) => return Err(e.into()),
    };
    record.groups = scene
        .groups
        .iter()
        .map(|g| GroupEntry {
            group_id: g.group_id,
            activity: g.activity,
            size: g.members.len(),
        })
        .collect();

    let options = SimOptions {
        speed_adjust: config.speed_adjust,
        params: SpeedAdjustParams::default(),
        joint_block: config.joint_block,
    };
    let output = simulate(&scene, catalog, config.frames, config.fps, &options)?;
    let dir = root.join(&id);
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;

    match config.dataset_mode {
        DatasetMode::ThreeD => {
            for motion in &output.motions {
                let rel = format!("{id}/motion3d_g{:02}.bin", motion.group_id);
                write_motion3d(motion, &root.join(&rel))?;
                record.files.push(entry(root, &rel)?);
            }
        }
        DatasetMode::Rgb => {
            let rel = format!("{id}/scene.json");
            let desc = SceneDescription {
                sim_index: index,
                sim_id: id.clone(),
                master_seed: config.master_seed,
                frames: config.frames,
                fps: config.fps,
                occlusion_model: "none: every character is annotated with visibility 1.0".into(),
                scene: scene.clone(),
            };
            write_scene(&desc, &root.join(&rel))?;
            record.files.push(entry(root, &rel)?);
            for (view, cam) in scene.cameras.iter().enumerate() {
                let view_dir = format!("{id}/view_{view:02}");
                std::fs::create_dir_all(root.join(&view_dir)).map_err(io(&root.join(&view_dir)))?;
                let records = annotate_view(&output.trace, cam);
                let gt = format!("{view_dir}/gt.txt");
                write_mot(&records, &root.join(&gt))?;
                record.files.push(entry(root, &gt)?);
                let meta = FrameMeta {
                    sim_index: index,
                    sim_id: id.clone(),
                    view,
                    frames: config.frames,
                    image_size: cam.image_size(),
                    seed: config.master_seed,
                };
                let coco = format!("{view_dir}/annotations.json");
                write_coco(&records, &meta, &root.join(&coco))?;
                record.files.push(entry(root, &coco)?);
            }
        }
    }
    Ok(record)
}

/// Run every simulation on `jobs` workers and write the manifest. Output
/// is independent of `jobs` and of completion order.
pub fn cmd_generate(config: &SimulationConfig, jobs: usize) -> Result<Manifest, CliError> {
    config.validate().map_err(|e| CliError::Config {
        path: "<config>".into(),
        reason: e.to_string(),
    })?;
    let root: PathBuf = config.output_root.clone();
    std::fs::create_dir_all(&root).map_err(io(&root))?;
    let catalog = build_default_catalog(
        config,
        &RngStream::new(config.master_seed).derive("catalog")?,
    )?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    info!(
        "generating {} simulations on {} workers",
        config.n_simulations,
        jobs.max(1)
    );
    let simulations = pool.install(|| {
        (0..config.n_simulations)
            .into_par_iter()
            .map(|i| run_simulation(config, &catalog, i))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut recorded = config.clone();
    recorded.output_root = PathBuf::new();
    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        generator_version: env!("CARGO_PKG_VERSION").to_string(),
        config: recorded,
        simulations,
    };
    let path = root.join(MANIFEST_FILE);
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, bytes).map_err(io(&path))?;
    Ok(manifest)
}

pub fn read_manifest(root: &Path) -> Result<Manifest, CliError> {
    let path = root.join(MANIFEST_FILE);
    let bytes = std::fs::read(&path).map_err(io(&path))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Corrupt {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}
