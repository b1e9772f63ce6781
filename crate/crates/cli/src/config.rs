use std::path::Path;

use ecofollower::ddpg::TrainConfig;
use ecofollower::env::EnvConfig;
use ecofollower::eval::IndicatorConfig;
use ecofollower::idm::IdmParams;
use ecofollower::objectives::RewardConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `--config` file: every block and field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub reward: RewardConfig,
    pub env: EnvConfig,
    pub idm: IdmParams,
    pub indicators: IndicatorConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}
