//! Metric reports over motion files and external feature dumps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use groupsim_core::export::read_motion3d;
use groupsim_core::metrics::{
    diversity, fid, geometric_features, multimodality, social_force_report, FeatureSet, FidScore,
    ForceParams, ForceReport,
};
use groupsim_core::{GroupMotion, RngStream};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_PAIRS: usize = 200;

#[derive(Clone, Debug)]
pub struct MetricsOptions {
    pub n_pairs: usize,
    pub seed: u64,
    /// Motion file or directory scored against the input with FID.
    pub reference: Option<PathBuf>,
    /// JSON feature dump scored instead of the built-in descriptor.
    pub features: Option<PathBuf>,
    pub params: ForceParams,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self {
            n_pairs: DEFAULT_PAIRS,
            seed: 0,
            reference: None,
            features: None,
            params: ForceParams::default(),
        }
    }
}

/// External features: `generated` vectors, optional `reference` vectors,
/// and optional per-vector class `labels` for multimodality.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureFile {
    pub generated: Vec<Vec<f64>>,
    #[serde(default)]
    pub reference: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnedScores {
    pub extractor: String,
    pub samples: usize,
    pub n_pairs: usize,
    pub diversity: Option<f64>,
    pub multimodality: Option<f64>,
    /// Classes left out of multimodality for having fewer than two samples.
    pub skipped_classes: Vec<String>,
    pub fid: Option<FidScore>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceSummary {
    pub motions: usize,
    pub interaction_force: f64,
    pub contact_force: f64,
    pub total_force: f64,
    pub collision_frequency: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub motions: usize,
    pub single_person_motions: usize,
    pub force_aggregation: String,
    pub force_params: ForceParams,
    pub overall: ForceSummary,
    pub per_activity: BTreeMap<String, ForceSummary>,
    pub learned: Option<LearnedScores>,
}

/// Pools per-motion reports: force means weighted by person-frames,
/// collision frequency averaged over motions.
#[derive(Default)]
struct Pool {
    weight: f64,
    interaction: f64,
    contact: f64,
    total: f64,
    collisions: f64,
    motions: usize,
}

impl Pool {
    fn add(&mut self, r: &ForceReport, person_frames: f64) {
        self.weight += person_frames;
        self.interaction += r.interaction_force * person_frames;
        self.contact += r.contact_force * person_frames;
        self.total += r.total_force * person_frames;
        self.collisions += r.collision_frequency;
        self.motions += 1;
    }

    fn summary(&self) -> ForceSummary {
        if self.motions == 0 {
            return ForceSummary::default();
        }
        ForceSummary {
            motions: self.motions,
            interaction_force: self.interaction / self.weight,
            contact_force: self.contact / self.weight,
            total_force: self.total / self.weight,
            collision_frequency: self.collisions / self.motions as f64,
        }
    }
}

fn collect_bins(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    for entry in std::fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_dir() {
            collect_bins(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "bin") {
            out.push(p);
        }
    }
    Ok(())
}

/// Every motion file under `path` (or `path` itself), in path order.
pub fn load_motions(path: &Path) -> Result<Vec<GroupMotion>, CliError> {
    let mut files = Vec::new();
    collect_bins(path, &mut files)?;
    files.sort();
    let motions = files
        .iter()
        .map(|f| read_motion3d(f))
        .collect::<Result<Vec<_>, _>>()?;
    if motions.is_empty() {
        return Err(CliError::EmptyDataset(path.display().to_string()));
    }
    Ok(motions)
}

fn feature_set(vectors: Vec<Vec<f64>>) -> Result<FeatureSet, CliError> {
    Ok(FeatureSet::new(None, vectors)?)
}

fn score(
    extractor: &str,
    generated: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    reference: Option<Vec<Vec<f64>>>,
    opts: &MetricsOptions,
) -> Result<LearnedScores, CliError> {
    let rng = RngStream::new(opts.seed).derive("metrics")?;
    let mut scores = LearnedScores {
        extractor: extractor.to_string(),
        samples: generated.len(),
        n_pairs: opts.n_pairs,
        ..LearnedScores::default()
    };
    if let Some(labels) = labels {
        if labels.len() != generated.len() {
            return Err(CliError::Usage(format!(
                "{} labels for {} feature vectors",
                labels.len(),
                generated.len()
            )));
        }
        let mut by_class: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        for (l, v) in labels.into_iter().zip(&generated) {
            by_class.entry(l).or_default().push(v.clone());
        }
        let mut sets = BTreeMap::new();
        for (class, vectors) in by_class {
            if vectors.len() < 2 {
                scores.skipped_classes.push(class);
            } else {
                sets.insert(class.clone(), FeatureSet::new(Some(class), vectors)?);
            }
        }
        if !sets.is_empty() {
            scores.multimodality = Some(multimodality(
                &sets,
                opts.n_pairs,
                &mut rng.derive("multimodality")?,
            )?);
        }
    }
    let set = feature_set(generated)?;
    if set.len() >= 2 {
        scores.diversity = Some(diversity(
            &set,
            opts.n_pairs,
            &mut rng.derive("diversity")?,
        )?);
    }
    if let Some(reference) = reference {
        scores.fid = Some(fid(&set, &feature_set(reference)?)?);
    }
    Ok(scores)
}

/// Social-force and collision metrics for the motions under `path`, plus
/// diversity, multimodality and FID on the built-in descriptor or on an
/// external feature file.
pub fn cmd_metrics(path: Option<&Path>, opts: &MetricsOptions) -> Result<MetricsReport, CliError> {
    let mut report = MetricsReport {
        force_aggregation:
            "mean over (person, frame) of the magnitude of the vector sum of pairwise forces".into(),
        force_params: opts.params.clone(),
        ..MetricsReport::default()
    };
    if let Some(path) = path {
        let motions = load_motions(path)?;
        report.motions = motions.len();
        let mut overall = Pool::default();
        let mut per_activity: BTreeMap<String, Pool> = BTreeMap::new();
        for m in &motions {
            let r = social_force_report(m, &opts.params);
            if r.single_person {
                report.single_person_motions += 1;
                continue;
            }
            let w = (m.persons() * m.frames()) as f64;
            overall.add(&r, w);
            per_activity
                .entry(m.activity.name().to_string())
                .or_default()
                .add(&r, w);
        }
        report.overall = overall.summary();
        report.per_activity = per_activity
            .iter()
            .map(|(k, p)| (k.clone(), p.summary()))
            .collect();

        if opts.features.is_none() {
            let generated: Vec<Vec<f64>> = motions.iter().map(geometric_features).collect();
            let labels = motions
                .iter()
                .map(|m| m.activity.name().to_string())
                .collect();
            let reference = match &opts.reference {
                Some(r) => Some(load_motions(r)?.iter().map(geometric_features).collect()),
                None => None,
            };
            report.learned = Some(score(
                "geometric",
                generated,
                Some(labels),
                reference,
                opts,
            )?);
        }
    }
    if let Some(file) = &opts.features {
        let bytes = std::fs::read(file).map_err(|source| CliError::Io {
            path: file.display().to_string(),
            source,
        })?;
        let dump: FeatureFile = serde_json::from_slice(&bytes).map_err(|e| CliError::Corrupt {
            path: file.display().to_string(),
            reason: e.to_string(),
        })?;
        report.learned = Some(score(
            "external",
            dump.generated,
            dump.labels,
            dump.reference,
            opts,
        )?);
    }
    if path.is_none() && opts.features.is_none() {
        return Err(CliError::Usage(
            "nothing to score: give a motion path or --features".into(),
        ));
    }
    Ok(report)
}
