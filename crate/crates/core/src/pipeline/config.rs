use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::SplitSpec;
use crate::error::{Error, Result};
use crate::evaluation::Averaging;
use crate::filters::FilterConfig;
use crate::learners::EnsembleConfig;
use crate::pool::PoolConfig;
use crate::pso::{FitnessConfig, PsoConfig};
use crate::rfe::RfeConfig;

/// Every setting of a pipeline run. Seeds inside the sub-configs are
/// ignored; each run derives them from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filters: FilterConfig,
    pub rfe: RfeConfig,
    pub pool: PoolConfig,
    pub pso: PsoConfig,
    pub fitness: FitnessConfig,
    pub ensemble: EnsembleConfig,
    pub split: SplitSpec,
    /// Search the pool with the swarm; when false the whole pool is used.
    pub use_pso: bool,
    /// Select features once on all rows instead of inside every split.
    pub global_selection: bool,
    pub runs: usize,
    /// Also run k-fold cross-validation with this many folds.
    pub folds: Option<usize>,
    pub averaging: Averaging,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            filters: FilterConfig::default(),
            rfe: RfeConfig::default(),
            pool: PoolConfig::default(),
            pso: PsoConfig::default(),
            fitness: FitnessConfig::default(),
            ensemble: EnsembleConfig::default(),
            split: SplitSpec::default(),
            use_pso: true,
            global_selection: false,
            runs: 10,
            folds: None,
            averaging: Averaging::Macro,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.filters.validate()?;
        self.pso.validate()?;
        self.ensemble.gbt.validate()?;
        self.split.validate()?;
        if self.runs == 0 {
            return Err(Error::param("runs must be at least 1"));
        }
        if self.folds.is_some_and(|k| k < 2) {
            return Err(Error::param("cross-validation needs at least 2 folds"));
        }
        if self.rfe.iterations == 0 || self.rfe.target_count == 0 {
            return Err(Error::param("RFE iterations and target must be positive"));
        }
        if self.pool.cap == Some(0) {
            return Err(Error::param("pool cap must be positive"));
        }
        if self.fitness.folds < 2 {
            return Err(Error::param("fitness needs at least 2 folds"));
        }
        if self.ensemble.forest.n_trees == 0 {
            return Err(Error::param("forest needs at least one tree"));
        }
        if !(self.ensemble.weight_holdout > 0.0 && self.ensemble.weight_holdout < 1.0) {
            return Err(Error::param("weight_holdout must lie in (0,1)"));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::param(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            Self::from_toml_str(&text)
        } else {
            Self::from_json_str(&text)
        }
    }

    /// SHA-256 of the config serialized with sorted keys.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
