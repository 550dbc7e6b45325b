use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use crate::UsageError;

/// Values read from `--config`. Keys use the long flag names.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub frames: Option<usize>,
    pub levels: Option<usize>,
    pub lambda_s: Option<f64>,
    pub lambda_e: Option<f64>,
    pub no_explainability: Option<bool>,
    pub lr: Option<f64>,
    pub max_iters: Option<usize>,
    pub cap: Option<f64>,
    pub crop: Option<f64>,
    pub snippet_len: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {}", path.display(), e.message())).into())
    }
}

/// Flag, then config file, then built-in default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
