//! Dataset statistics over a generated dataset.

use std::path::Path;

use groupsim_core::export::{dataset_stats, decode_motion3d, read_scene, SimSummary, StatsReport};

use crate::generate::{read_manifest, SimStatus};
use crate::{sha256_file, CliError};

pub const STATS_FILE: &str = "stats.json";

/// Verify every manifest digest, then aggregate group composition read
/// back from the emitted files. Writes `stats.json` next to the manifest.
pub fn cmd_stats(root: &Path) -> Result<StatsReport, CliError> {
    let manifest = read_manifest(root)?;
    let mut summaries = Vec::new();
    for sim in manifest
        .simulations
        .iter()
        .filter(|s| s.status == SimStatus::Ok)
    {
        for f in &sim.files {
            let path = root.join(&f.path);
            let (digest, bytes) = sha256_file(&path)?;
            if digest != f.sha256 || bytes != f.bytes {
                return Err(CliError::Corrupt {
                    path: path.display().to_string(),
                    reason: "content does not match the manifest digest".into(),
                });
            }
        }
        summaries.push(summarize(root, sim)?);
    }
    if summaries.is_empty() {
        return Err(CliError::EmptyDataset(root.display().to_string()));
    }
    let report = dataset_stats(&summaries);
    let path = root.join(STATS_FILE);
    let bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    std::fs::write(&path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(report)
}

fn summarize(root: &Path, sim: &crate::generate::SimRecord) -> Result<SimSummary, CliError> {
    if let Some(scene) = sim.files.iter().find(|f| f.path.ends_with("scene.json")) {
        let desc = read_scene(&root.join(&scene.path))?;
        return Ok(SimSummary::from_scene(&desc.scene, desc.frames, desc.fps));
    }
    let mut summary: Option<SimSummary> = None;
    for f in sim.files.iter().filter(|f| f.path.ends_with(".bin")) {
        let path = root.join(&f.path);
        let bytes = std::fs::read(&path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let (header, _) = decode_motion3d(&bytes, &path)?;
        let s = summary.get_or_insert(SimSummary {
            frames: header.frames,
            fps: header.fps,
            groups: Vec::new(),
        });
        s.groups.push((header.activity, header.persons));
    }
    summary.ok_or_else(|| CliError::Corrupt {
        path: root.join(&sim.sim_id).display().to_string(),
        reason: "simulation has neither a scene description nor motion files".into(),
    })
}
