//! Mining timed automata from execution traces of nested operations.
//!
//! A corpus of valid traces is turned into a timed automaton whose clocks
//! time individual operations; guard policies then generalize the observed
//! durations into intervals so that unseen but similar executions are
//! accepted while slow or reordered ones are rejected.

pub mod automaton;
pub mod eval;
pub mod fixed;
pub mod miner;
pub mod pipeline;
pub mod policy;
pub mod trace;

pub use automaton::{accepts, accepts_events, AcceptResult, ClockId, Guard, GuardForm, StateId, TimedAutomaton, Transition};
pub use fixed::Fixed;
pub use miner::{mine_stages, MinerConfig, Stages};
pub use pipeline::{mine, MinedModel, MiningConfig, PipelineError};
pub use policy::{apply_policy, generate_guard, Confidence, Policy, PolicyConfig};
pub use trace::{normalize, parse_corpus, validate, EventType, TimedEvent, TimedTrace};
