//! Run configuration: a TOML document with `[radar]`, `[scene]`, `[harness]`,
//! `[output]` and `[quadrature]` sections, layered over the defaults and then
//! over `--set section.key=value` overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sardelay::kernel::{kappa, RadarConfig};
use sardelay::moments::{QuadratureOptions, TargetModel};
use sardelay::sampler::Scene;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harness {
    pub n_img: usize,
    pub master_seed: u64,
    /// Generating model for `simulate`.
    pub true_model: TargetModel,
    /// Datasets written by `simulate`.
    pub n_datasets: usize,
}

impl Default for Harness {
    fn default() -> Self {
        Self { n_img: 400, master_seed: 42, true_model: TargetModel::Delayed, n_datasets: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("sardelay-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; when absent the demo radar for `scene.kappa` is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radar: Option<RadarConfig>,
    pub scene: Scene,
    pub harness: Harness,
    pub output: Output,
    pub quadrature: QuadratureOptions,
}

/// A configuration problem; the binary exits with code 2 on these.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

// Recursively overlays `top` onto `base`; tables merge, everything else
// replaces.
fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a
/// bare string.
fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn apply_override(doc: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_error(format!("bad key path `{path}`")));
    }
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut table = doc;
    for key in parents {
        let entry = table.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("`{key}` in `{path}` is not a section")))?;
    }
    table.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Defaults, then the file at `path` if given, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = Table::try_from(RunConfig::default())
            .map_err(|e| config_error(format!("cannot serialize defaults: {e}")))?;
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            let user: Table = text
                .parse()
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            merge(&mut doc, user);
        }
        for assignment in overrides {
            apply_override(&mut doc, assignment)?;
        }
        let cfg: RunConfig = Value::Table(doc)
            .try_into()
            .map_err(|e| config_error(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_error(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| config_error(format!("cannot serialize configuration: {e}")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let lib = |e: sardelay::Error| config_error(e.to_string());
        self.scene.validate().map_err(lib)?;
        self.quadrature.validate().map_err(lib)?;
        if self.harness.n_img == 0 {
            return Err(config_error("harness.n_img must be at least 1"));
        }
        if self.harness.n_datasets == 0 {
            return Err(config_error("harness.n_datasets must be at least 1"));
        }
        if let Some(radar) = &self.radar {
            radar.validate().map_err(lib)?;
            let k = kappa(radar);
            if (k - self.scene.kappa).abs() > 1e-9 * k.max(1.0) {
                return Err(config_error(format!(
                    "radar gives κ = {k} but scene.kappa = {}",
                    self.scene.kappa
                )));
            }
        }
        Ok(())
    }

    /// The configured radar, or the demo radar with the scene's κ.
    pub fn radar(&self) -> Result<RadarConfig, ConfigError> {
        match self.radar {
            Some(r) => Ok(r),
            None => RadarConfig::demo(self.scene.kappa).map_err(|e| config_error(e.to_string())),
        }
    }

    pub fn out_path(&self, explicit: Option<&Path>, default_name: &str) -> PathBuf {
        explicit.map(Path::to_path_buf).unwrap_or_else(|| self.output.dir.join(default_name))
    }
}
