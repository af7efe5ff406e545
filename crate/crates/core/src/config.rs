//! Pipeline configuration, read from a TOML file. Every field has a default;
//! relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evalmetrics::OverlapDefinition;
use crate::matrixbuild::{DocFrequencyRule, FilterBounds};
use crate::textprep::WeightConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub feed_list: PathBuf,
    pub stop_words: PathBuf,
    pub corpus: PathBuf,
    pub matrix: PathBuf,
    pub tensor: PathBuf,
    pub factors_dir: PathBuf,
    pub reports_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            feed_list: "blogfeedlist".into(),
            stop_words: "stopwords".into(),
            corpus: "out/corpus.jsonl".into(),
            matrix: "out/matrix.csv".into(),
            tensor: "out/tensor.txt".into(),
            factors_dir: "out/factors".into(),
            reports_dir: "out/reports".into(),
        }
    }
}

impl Paths {
    fn resolve_against(&mut self, base: &Path) {
        for p in [
            &mut self.feed_list,
            &mut self.stop_words,
            &mut self.corpus,
            &mut self.matrix,
            &mut self.tensor,
            &mut self.factors_dir,
            &mut self.reports_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParafacSettings {
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for ParafacSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmfSettings {
    pub trials: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for NmfSettings {
    fn default() -> Self {
        Self {
            trials: 10,
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Label written into report rows.
    pub dataset: String,
    pub paths: Paths,
    pub bounds: FilterBounds,
    pub weights: WeightConfig,
    pub doc_frequency: DocFrequencyRule,
    pub ranks: Vec<usize>,
    pub parafac: ParafacSettings,
    pub nmf: NmfSettings,
    pub overlap_k: Vec<usize>,
    pub overlap_definition: OverlapDefinition,
    pub top_blogs: usize,
    pub top_words: usize,
    /// Use the literal task-1 product instead of the dimension-consistent one.
    pub strict_paper: bool,
    pub allow_network: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: "dataset".into(),
            paths: Paths::default(),
            bounds: FilterBounds::default(),
            weights: WeightConfig::default(),
            doc_frequency: DocFrequencyRule::default(),
            ranks: (1..=7).map(|i| 2 * i).collect(),
            parafac: ParafacSettings::default(),
            nmf: NmfSettings::default(),
            overlap_k: vec![10, 20, 30],
            overlap_definition: OverlapDefinition::default(),
            top_blogs: 10,
            top_words: 10,
            strict_paper: false,
            allow_network: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.paths.resolve_against(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return Err(format!("ranks must be positive and non-empty, got {:?}", self.ranks));
        }
        if self.overlap_k.contains(&0) {
            return Err("overlap k values must be positive".into());
        }
        self.bounds.validate().map_err(|e| e.to_string())?;
        if self.parafac.epsilon.is_nan() || self.parafac.epsilon <= 0.0 || self.parafac.max_iters == 0 {
            return Err("parafac epsilon and max_iters must be positive".into());
        }
        if self.nmf.trials == 0 || self.nmf.max_iters == 0 || self.nmf.tol < 0.0 {
            return Err("nmf trials and max_iters must be positive, tol non-negative".into());
        }
        Ok(())
    }
}
