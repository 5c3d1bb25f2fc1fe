//! The full mining pipeline: normalization, initialization, state merging,
//! clock refinement and guard generation.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automaton::TimedAutomaton;
use crate::miner::{mine_stages, MineError, MinerConfig, Stages};
use crate::policy::{apply_policy, PolicyConfig, PolicyError};
use crate::trace::TimedTrace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiningConfig {
    pub k: usize,
    pub policy: PolicyConfig,
}

impl MiningConfig {
    pub fn new(k: usize, policy: PolicyConfig) -> Self {
        MiningConfig { k, policy }
    }

    /// The absolute clock is generated exactly when its guards are kept.
    pub fn miner(&self) -> MinerConfig {
        MinerConfig { k: self.k, absolute_clock: self.policy.absolute_guards }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Clone, Debug)]
pub struct MinedModel {
    pub model: TimedAutomaton,
    pub stages: Stages,
    pub elapsed: Duration,
    pub events: usize,
}

pub fn mine(traces: &[TimedTrace], config: &MiningConfig) -> Result<MinedModel, PipelineError> {
    let start = Instant::now();
    let stages = mine_stages(traces, &config.miner())?;
    let model = apply_policy(&stages.refined, &config.policy)?;
    Ok(MinedModel {
        model,
        stages,
        elapsed: start.elapsed(),
        events: traces.iter().map(TimedTrace::len).sum(),
    })
}
