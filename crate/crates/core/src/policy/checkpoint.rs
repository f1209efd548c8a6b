use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OptimizerState, PolicyParams};
use crate::featex::Standardization;
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned JSON record of parameters and optimizer state. Reals round-trip
/// bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: PolicyParams,
    pub optimizer: Option<OptimizerState>,
    /// Feature standardization the parameters were trained against.
    #[serde(default)]
    pub features: Option<Standardization>,
}

impl Checkpoint {
    pub fn new(params: PolicyParams, optimizer: Option<OptimizerState>) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            params,
            optimizer,
            features: None,
        }
    }

    pub fn with_features(mut self, features: Standardization) -> Self {
        self.features = Some(features);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(s)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint version {}",
                ck.version
            )));
        }
        // re-validate the shape invariants serde bypassed
        PolicyParams::from_parts(
            ck.params.n_features(),
            ck.params.n_bins(),
            ck.params.theta().to_vec(),
        )?;
        if ck.features.as_ref().is_some_and(|f| !f.validate()) {
            return Err(Error::Config(
                "checkpoint feature scale must be positive and finite".into(),
            ));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_json(&fs::read_to_string(path)?)
    }
}
