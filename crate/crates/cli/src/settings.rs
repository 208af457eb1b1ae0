//! Config files: a preset, then the file's keys, then command-line flags.

use std::path::{Path, PathBuf};

use groupsim_core::config::{Preset, SimulationConfig};
use serde_json::{json, Map, Value};

use crate::CliError;

/// Flag values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_simulations: Option<usize>,
    pub joint_block: Option<bool>,
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parse TOML config text. A top-level `preset` key picks the base values;
/// every other key must be a [`SimulationConfig`] field.
pub fn parse_config(
    text: &str,
    overrides: &Overrides,
    origin: &str,
) -> Result<SimulationConfig, CliError> {
    let bad = |reason: String| CliError::Config {
        path: origin.to_string(),
        reason,
    };
    let table: toml::Table = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
    let mut file = serde_json::to_value(table).map_err(|e| bad(e.to_string()))?;
    let file_preset = match file.as_object_mut().and_then(|m| m.remove("preset")) {
        Some(v) => {
            Some(serde_json::from_value::<Preset>(v).map_err(|e| bad(format!("preset: {e}")))?)
        }
        None => None,
    };
    let preset = overrides.preset.or(file_preset).unwrap_or(Preset::Rgb);
    let mut merged =
        serde_json::to_value(SimulationConfig::preset(preset)).expect("config serializes");
    merge(&mut merged, file);
    let mut config: SimulationConfig =
        serde_json::from_value(merged).map_err(|e| bad(e.to_string()))?;
    apply_overrides(&mut config, overrides);
    config.validate().map_err(|e| bad(e.to_string()))?;
    Ok(config)
}

fn apply_overrides(config: &mut SimulationConfig, o: &Overrides) {
    if let Some(seed) = o.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &o.out {
        config.output_root = out.clone();
    }
    if let Some(n) = o.n_simulations {
        config.n_simulations = n;
    }
    if let Some(j) = o.joint_block {
        config.joint_block = j;
    }
}

/// Load from an optional file; without one, the preset plus flags.
pub fn load_config(
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<SimulationConfig, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            parse_config(&text, overrides, &p.display().to_string())
        }
        None => parse_config("", overrides, "<flags>"),
    }
}

fn field(kind: &str, default: Value, description: &str) -> Value {
    json!({ "type": kind, "default": default, "description": description })
}

/// JSON Schema of the config file. Defaults are the rgb preset.
pub fn config_schema() -> Value {
    let d = serde_json::to_value(SimulationConfig::preset(Preset::Rgb)).expect("config serializes");
    let mut props = Map::new();
    props.insert(
        "preset".into(),
        json!({ "enum": ["rgb", "3d"], "default": "rgb", "description": "base values before the file's keys are applied" }),
    );
    let rows: [(&str, &str, &str); 18] = [
        (
            "master_seed",
            "integer",
            "root seed; simulation s draws from stream sim/s",
        ),
        (
            "n_simulations",
            "integer",
            "number of independent simulations, at least 1",
        ),
        ("frames", "integer", "frames per simulation"),
        ("fps", "number", "frames per second"),
        ("n_views", "integer", "cameras per simulation (rgb mode)"),
        (
            "dataset_mode",
            "string",
            "rgb: boxes and scene descriptions; 3d: motion files",
        ),
        (
            "max_groups",
            "integer",
            "groups per scene are uniform in [1, max_groups]",
        ),
        (
            "min_characters",
            "integer",
            "lower bound of the uniform group size",
        ),
        (
            "max_characters",
            "integer",
            "upper bound of the uniform group size",
        ),
        (
            "min_interval",
            "number",
            "lower bound of member spacing, meters",
        ),
        (
            "max_interval",
            "number",
            "upper bound of member spacing, meters",
        ),
        (
            "catalog_override",
            "string",
            "optional JSON file overriding character and clip fields",
        ),
        ("output_root", "string", "dataset directory"),
        (
            "joint_block",
            "boolean",
            "append the 26-joint block to motion files",
        ),
        (
            "speed_adjust",
            "boolean",
            "run the walking speed-adjustment rule",
        ),
        ("image_width", "integer", "image width, pixels"),
        ("image_height", "integer", "image height, pixels"),
        (
            "activity_weights",
            "object",
            "relative weight of each group activity",
        ),
    ];
    for (name, kind, description) in rows {
        props.insert(name.into(), field(kind, d[name].clone(), description));
    }
    props.insert(
        "perturbation".into(),
        field(
            "object",
            d["perturbation"].clone(),
            "position_fraction of the interval and heading_degrees",
        ),
    );
    props.insert(
        "catalog".into(),
        field(
            "object",
            d["catalog"].clone(),
            "asset counts: scenes, hdris, lighting_volumes, characters, clips",
        ),
    );
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "groupsim config (TOML)",
        "type": "object",
        "additionalProperties": false,
        "properties": Value::Object(props),
    })
}
