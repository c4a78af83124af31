//! TOML run configuration. Every section is optional and every key falls back
//! to the command-line flag, then to the built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub global: GlobalSection,
    #[serde(default)]
    pub iscore: DataSection,
    #[serde(default)]
    pub discretize: DataSection,
    #[serde(default)]
    pub bda: BdaSection,
    #[serde(default)]
    pub dagger: DaggerSection,
    #[serde(default)]
    pub toy: ToySection,
    #[serde(default)]
    pub text: TextSection,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSection {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub data: Option<PathBuf>,
    pub no_header: Option<bool>,
    pub columns: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BdaSection {
    pub data: Option<PathBuf>,
    pub no_header: Option<bool>,
    pub k: Option<usize>,
    pub draws: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaggerSection {
    pub data: Option<PathBuf>,
    pub no_header: Option<bool>,
    pub columns: Option<Vec<String>>,
    pub train_rows: Option<usize>,
    pub apply: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySection {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub reps: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSection {
    pub corpus: Option<PathBuf>,
    pub desk_docs: Option<usize>,
    pub orders: Option<Vec<usize>>,
    pub max_features: Option<usize>,
    pub vocab_size: Option<usize>,
    pub top_fraction: Option<f64>,
    pub classifier: Option<String>,
    pub hidden: Option<usize>,
    pub eta: Option<f64>,
    pub epochs: Option<usize>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub data: Option<PathBuf>,
    pub no_header: Option<bool>,
    pub model: Option<String>,
    pub train_fraction: Option<f64>,
    pub top_fraction: Option<f64>,
    pub hidden: Option<usize>,
    pub eta: Option<f64>,
    pub epochs: Option<usize>,
    pub init_scale: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
}
