//! Abstract asset catalogs: scenes, HDRIs, lighting volumes, characters and
//! parametric animation clips.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SimulationConfig;
use crate::randomization::{RandomError, RngStream};

pub const DEFAULT_SHOULDER_WIDTH: f64 = 0.45;
pub const WALK_SPEED: f64 = 1.4;
pub const RUN_SPEED: f64 = 3.0;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog category `{0}` has zero entries")]
    ZeroCount(&'static str),
    #[error("{have} clips cannot cover all {need} atomic actions")]
    TooFewClips { have: usize, need: usize },
    #[error("invalid asset `{id}`: {reason}")]
    InvalidAsset { id: String, reason: String },
    #[error("unknown asset id `{0}` in override")]
    UnknownId(String),
    #[error("no clip for action `{0}`")]
    NoClipForAction(AtomicAction),
    #[error("reading override file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing override file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Random(#[from] RandomError),
}

/// Per-person atomic action class. Six slots are reserved for clip families
/// that carry no dedicated behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicAction {
    Walk,
    Run,
    Dance,
    Idle,
    Text,
    Talk,
    Point,
    Wave,
    Reserved1,
    Reserved2,
    Reserved3,
    Reserved4,
    Reserved5,
    Reserved6,
}

impl AtomicAction {
    pub const ALL: [AtomicAction; 14] = [
        AtomicAction::Walk,
        AtomicAction::Run,
        AtomicAction::Dance,
        AtomicAction::Idle,
        AtomicAction::Text,
        AtomicAction::Talk,
        AtomicAction::Point,
        AtomicAction::Wave,
        AtomicAction::Reserved1,
        AtomicAction::Reserved2,
        AtomicAction::Reserved3,
        AtomicAction::Reserved4,
        AtomicAction::Reserved5,
        AtomicAction::Reserved6,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomicAction::Walk => "walk",
            AtomicAction::Run => "run",
            AtomicAction::Dance => "dance",
            AtomicAction::Idle => "idle",
            AtomicAction::Text => "text",
            AtomicAction::Talk => "talk",
            AtomicAction::Point => "point",
            AtomicAction::Wave => "wave",
            AtomicAction::Reserved1 => "reserved_1",
            AtomicAction::Reserved2 => "reserved_2",
            AtomicAction::Reserved3 => "reserved_3",
            AtomicAction::Reserved4 => "reserved_4",
            AtomicAction::Reserved5 => "reserved_5",
            AtomicAction::Reserved6 => "reserved_6",
        }
    }

    /// Walk and run translate the character; everything else plays in place.
    pub fn is_locomotion(self) -> bool {
        matches!(self, AtomicAction::Walk | AtomicAction::Run)
    }
}

impl fmt::Display for AtomicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AtomicAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown atomic action `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterAsset {
    pub id: String,
    pub height: f64,
    pub shoulder_width: f64,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipAsset {
    pub id: String,
    pub action_class: AtomicAction,
    /// Root translation speed at unit animation speed, m/s.
    pub nominal_speed: f64,
    /// Seconds per animation cycle.
    pub cycle_length: f64,
    /// Blend parameters in [0, 1], keyed `arm_space` and `stride`.
    pub style_params: BTreeMap<String, f64>,
}

impl ClipAsset {
    /// Translation multiplier from the stride style, in [0.9, 1.1].
    pub fn stride_factor(&self) -> f64 {
        let stride = self.style_params.get("stride").copied().unwrap_or(0.5);
        0.9 + 0.2 * stride
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |reason: &str| CatalogError::InvalidAsset {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if !(self.cycle_length > 0.0) {
            return Err(invalid("cycle_length must be positive"));
        }
        if !(self.nominal_speed >= 0.0) {
            return Err(invalid("nominal_speed must be nonnegative"));
        }
        if self.action_class.is_locomotion() && self.nominal_speed <= 0.0 {
            return Err(invalid("locomotion clips need a positive speed"));
        }
        if !self.action_class.is_locomotion() && self.nominal_speed != 0.0 {
            return Err(invalid("in-place clips must have zero speed"));
        }
        if self.style_params.values().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("style parameters must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl CharacterAsset {
    fn validate(&self) -> Result<(), CatalogError> {
        if !(self.height > 0.0 && self.shoulder_width > 0.0) {
            return Err(CatalogError::InvalidAsset {
                id: self.id.clone(),
                reason: "height and shoulder_width must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetCatalog {
    pub scenes: Vec<String>,
    pub hdris: Vec<String>,
    pub lighting_volumes: Vec<String>,
    pub characters: Vec<CharacterAsset>,
    pub clips: Vec<ClipAsset>,
}

/// Optional per-asset overrides loaded from a JSON document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogOverrides {
    pub characters: Vec<CharacterOverride>,
    pub clips: Vec<ClipOverride>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterOverride {
    pub id: String,
    pub height: Option<f64>,
    pub shoulder_width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipOverride {
    pub id: String,
    pub action: Option<AtomicAction>,
    pub nominal_speed: Option<f64>,
    pub cycle_length: Option<f64>,
}

impl CatalogOverrides {
    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl AssetCatalog {
    pub fn validate(&self) -> Result<(), CatalogError> {
        for (name, len) in [
            ("scenes", self.scenes.len()),
            ("hdris", self.hdris.len()),
            ("lighting_volumes", self.lighting_volumes.len()),
            ("characters", self.characters.len()),
            ("clips", self.clips.len()),
        ] {
            if len == 0 {
                return Err(CatalogError::ZeroCount(name));
            }
        }
        for c in &self.characters {
            c.validate()?;
        }
        for c in &self.clips {
            c.validate()?;
        }
        Ok(())
    }

    /// Indices of the clips playing `action`.
    pub fn clips_for(&self, action: AtomicAction) -> Vec<usize> {
        self.clips
            .iter()
            .enumerate()
            .filter(|(_, c)| c.action_class == action)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn character(&self, id: &str) -> Option<&CharacterAsset> {
        self.characters.iter().find(|c| c.id == id)
    }

    pub fn clip(&self, id: &str) -> Option<&ClipAsset> {
        self.clips.iter().find(|c| c.id == id)
    }

    pub fn apply_overrides(&mut self, overrides: &CatalogOverrides) -> Result<(), CatalogError> {
        for o in &overrides.characters {
            let c = self
                .characters
                .iter_mut()
                .find(|c| c.id == o.id)
                .ok_or_else(|| CatalogError::UnknownId(o.id.clone()))?;
            if let Some(h) = o.height {
                c.height = h;
            }
            if let Some(w) = o.shoulder_width {
                c.shoulder_width = w;
            }
        }
        for o in &overrides.clips {
            let c = self
                .clips
                .iter_mut()
                .find(|c| c.id == o.id)
                .ok_or_else(|| CatalogError::UnknownId(o.id.clone()))?;
            if let Some(a) = o.action {
                c.action_class = a;
                if o.nominal_speed.is_none() {
                    c.nominal_speed = default_speed(a);
                }
            }
            if let Some(s) = o.nominal_speed {
                c.nominal_speed = s;
            }
            if let Some(l) = o.cycle_length {
                c.cycle_length = l;
            }
        }
        self.validate()
    }
}

fn default_speed(action: AtomicAction) -> f64 {
    match action {
        AtomicAction::Walk => WALK_SPEED,
        AtomicAction::Run => RUN_SPEED,
        _ => 0.0,
    }
}

const AGE_GROUPS: [&str; 3] = ["young", "adult", "senior"];
const BODY_TYPES: [&str; 3] = ["slim", "average", "broad"];

/// Builds the default catalog with the configured cardinalities. Clip `i`
/// plays action `i mod 14`, so at least 14 clips are required.
pub fn build_default_catalog(
    config: &SimulationConfig,
    rng: &RngStream,
) -> Result<AssetCatalog, CatalogError> {
    let counts = &config.catalog;
    for (name, len) in [
        ("scenes", counts.scenes),
        ("hdris", counts.hdris),
        ("lighting_volumes", counts.lighting_volumes),
        ("characters", counts.characters),
        ("clips", counts.clips),
    ] {
        if len == 0 {
            return Err(CatalogError::ZeroCount(name));
        }
    }
    let n_actions = AtomicAction::ALL.len();
    if counts.clips < n_actions {
        return Err(CatalogError::TooFewClips {
            have: counts.clips,
            need: n_actions,
        });
    }

    let mut char_rng = rng.child("catalog/characters");
    let characters = (0..counts.characters)
        .map(|i| {
            let height = char_rng.sample_real(1.5, 1.9)?;
            let mut metadata = BTreeMap::new();
            metadata.insert(
                "age_group".to_string(),
                char_rng.sample_choice(&AGE_GROUPS, None)?.to_string(),
            );
            metadata.insert(
                "body_type".to_string(),
                char_rng.sample_choice(&BODY_TYPES, None)?.to_string(),
            );
            Ok(CharacterAsset {
                id: format!("char_{i:04}"),
                height,
                shoulder_width: DEFAULT_SHOULDER_WIDTH,
                metadata,
            })
        })
        .collect::<Result<Vec<_>, RandomError>>()?;

    let mut clip_rng = rng.child("catalog/clips");
    let clips = (0..counts.clips)
        .map(|i| {
            let action = AtomicAction::ALL[i % n_actions];
            let variant = i / n_actions;
            let cycle_length = match action {
                AtomicAction::Walk => 1.1,
                AtomicAction::Run => 0.7,
                _ => clip_rng.sample_real(2.0, 6.0)?,
            };
            let mut style_params = BTreeMap::new();
            style_params.insert("arm_space".to_string(), clip_rng.sample_real(0.0, 1.0)?);
            style_params.insert("stride".to_string(), clip_rng.sample_real(0.0, 1.0)?);
            Ok(ClipAsset {
                id: format!("clip_{}_{variant:02}", action.name()),
                action_class: action,
                nominal_speed: default_speed(action),
                cycle_length,
                style_params,
            })
        })
        .collect::<Result<Vec<_>, RandomError>>()?;

    let mut catalog = AssetCatalog {
        scenes: (0..counts.scenes)
            .map(|i| format!("scene_{i:03}"))
            .collect(),
        hdris: (0..counts.hdris).map(|i| format!("hdri_{i:03}")).collect(),
        lighting_volumes: (0..counts.lighting_volumes)
            .map(|i| format!("volume_{i:02}"))
            .collect(),
        characters,
        clips,
    };
    if let Some(path) = &config.catalog_override {
        catalog.apply_overrides(&CatalogOverrides::from_path(path)?)?;
    }
    catalog.validate()?;
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CatalogCounts;

    fn config_with(counts: CatalogCounts) -> SimulationConfig {
        SimulationConfig {
            catalog: counts,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn reference_scale_cardinalities() {
        let cat = build_default_catalog(&SimulationConfig::default(), &RngStream::new(1)).unwrap();
        assert_eq!(cat.scenes.len(), 25);
        assert_eq!(cat.hdris.len(), 104);
        assert_eq!(cat.lighting_volumes.len(), 5);
        assert_eq!(cat.characters.len(), 2200);
        assert_eq!(cat.clips.len(), 384);
        for action in AtomicAction::ALL {
            assert!(!cat.clips_for(action).is_empty(), "{action}");
        }
        for c in &cat.characters {
            assert!((1.5..1.9).contains(&c.height));
            assert_eq!(c.shoulder_width, 0.45);
        }
        for clip in &cat.clips {
            match clip.action_class {
                AtomicAction::Walk => assert_eq!(clip.nominal_speed, 1.4),
                AtomicAction::Run => assert_eq!(clip.nominal_speed, 3.0),
                _ => assert_eq!(clip.nominal_speed, 0.0),
            }
            let s = clip.stride_factor();
            assert!((0.9..=1.1).contains(&s));
        }
        let mut ids: Vec<_> = cat.clips.iter().map(|c| &c.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 384);
    }

    #[test]
    fn single_character_catalog() {
        let cfg = config_with(CatalogCounts {
            characters: 1,
            ..CatalogCounts::default()
        });
        let cat = build_default_catalog(&cfg, &RngStream::new(3)).unwrap();
        assert_eq!(cat.characters.len(), 1);
        cat.validate().unwrap();
    }

    #[test]
    fn deterministic() {
        let cfg = SimulationConfig::default();
        let a = build_default_catalog(&cfg, &RngStream::new(42)).unwrap();
        let b = build_default_catalog(&cfg, &RngStream::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_and_short_counts_fail() {
        let cfg = config_with(CatalogCounts {
            hdris: 0,
            ..CatalogCounts::default()
        });
        assert!(matches!(
            build_default_catalog(&cfg, &RngStream::new(0)),
            Err(CatalogError::ZeroCount("hdris"))
        ));
        let cfg = config_with(CatalogCounts {
            clips: 13,
            ..CatalogCounts::default()
        });
        assert!(matches!(
            build_default_catalog(&cfg, &RngStream::new(0)),
            Err(CatalogError::TooFewClips { have: 13, .. })
        ));
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut cat =
            build_default_catalog(&SimulationConfig::default(), &RngStream::new(9)).unwrap();
        let ov: CatalogOverrides = serde_json::from_str(
            r#"{"characters":[{"id":"char_0000","height":2.0,"shoulder_width":0.5}],
                "clips":[{"id":"clip_walk_00","nominal_speed":1.2,"cycle_length":1.0}]}"#,
        )
        .unwrap();
        cat.apply_overrides(&ov).unwrap();
        assert_eq!(cat.character("char_0000").unwrap().height, 2.0);
        assert_eq!(cat.clip("clip_walk_00").unwrap().nominal_speed, 1.2);

        let bad: CatalogOverrides =
            serde_json::from_str(r#"{"clips":[{"id":"clip_idle_00","nominal_speed":1.0}]}"#)
                .unwrap();
        assert!(matches!(
            cat.apply_overrides(&bad),
            Err(CatalogError::InvalidAsset { .. })
        ));
        let unknown: CatalogOverrides =
            serde_json::from_str(r#"{"characters":[{"id":"nobody"}]}"#).unwrap();
        assert!(matches!(
            cat.apply_overrides(&unknown),
            Err(CatalogError::UnknownId(_))
        ));
    }

    #[test]
    fn action_names_round_trip() {
        assert_eq!(AtomicAction::ALL.len(), 14);
        for a in AtomicAction::ALL {
            assert_eq!(a.name().parse::<AtomicAction>().unwrap(), a);
            assert_eq!(AtomicAction::from_index(a.index()), Some(a));
        }
        assert_eq!(AtomicAction::from_index(14), None);
    }
}
