//! JSON pipeline configuration. Every field is optional; command-line flags
//! take precedence over values found here.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub task: Option<String>,
    /// Fallback for every stage seed.
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// `angle` (" > ") or `comma` (", ").
    pub path_separator: Option<String>,
    pub ingest: IngestConfig,
    pub clean: CleanConfig,
    pub stats: StatsConfig,
    pub taxonomy: TaxonomyConfig,
    pub negatives: NegativesConfig,
    pub mining: MiningConfig,
    pub augment: AugmentConfig,
    pub split: SplitConfig,
    pub evaluate: EvaluateConfig,
    pub report: ReportConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub allowlist: Option<PathBuf>,
    pub remove_conflicts: Option<bool>,
    pub dedup: Option<bool>,
    pub filter_numeric: Option<bool>,
    /// `ignore-punctuation` or `digits-only`.
    pub numeric_mode: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaxonomyConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativesConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub strategy: Option<String>,
    pub seed: Option<u64>,
    pub max_resamples: Option<u32>,
    /// Program and arguments of an NDJSON query generator.
    pub generator: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub mode: Option<String>,
    pub tau: Option<f64>,
    pub hard_pick: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub input: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub targets: Option<Vec<String>>,
    pub quota: Option<usize>,
    pub seed: Option<u64>,
    /// `stub` or the base URL of a translation service.
    pub translator: Option<String>,
    pub batch_size: Option<usize>,
    pub retries: Option<u32>,
    pub concurrency: Option<usize>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub mode: Option<String>,
    pub ratios: Option<[f64; 3]>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub gold: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Metrics reports of other tasks to average with.
    pub with: Vec<PathBuf>,
    pub average_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub title: Option<String>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config() {
        let c: PipelineConfig = serde_json::from_str(
            r#"{"task":"qi","mining":{"mode":"hard","tau":0.6},"split":{"ratios":[0.8,0.1,0.1]}}"#,
        )
        .unwrap();
        assert_eq!(c.task.as_deref(), Some("qi"));
        assert_eq!(c.mining.tau, Some(0.6));
        assert_eq!(c.split.ratios, Some([0.8, 0.1, 0.1]));
        assert_eq!(c.clean, CleanConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"tsk":"qc"}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"clean":{"dedupe":true}}"#).is_err());
    }
}
