//! Timed automata with interval or equality guards on transitions.

mod accept;
mod dot;
mod format;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fixed::Fixed;
use crate::trace::{is_valid_label, EventType};

pub use accept::{accepts, accepts_events, AcceptResult, CheckError, Failure, FailureReason};
pub use dot::to_dot;
pub use format::{parse_model, write_model, ModelParseError, FORMAT_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClockKind {
    Absolute,
    Relative,
}

/// Clock identifier. The absolute clock is written `t`, relative clocks `c<index>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId {
    pub kind: ClockKind,
    pub index: u32,
}

impl ClockId {
    pub const ABSOLUTE: ClockId = ClockId { kind: ClockKind::Absolute, index: 0 };

    pub const fn relative(index: u32) -> Self {
        ClockId { kind: ClockKind::Relative, index }
    }

    pub fn is_absolute(self) -> bool {
        self.kind == ClockKind::Absolute
    }
}

impl fmt::Display for ClockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ClockKind::Absolute => write!(f, "t"),
            ClockKind::Relative => write!(f, "c{}", self.index),
        }
    }
}

impl FromStr for ClockId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "t" {
            return Ok(ClockId::ABSOLUTE);
        }
        let digits = s.strip_prefix('c').ok_or(())?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(());
        }
        digits.parse().map(ClockId::relative).map_err(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardForm {
    /// An observed clock value; produced by mining, replaced by intervals
    /// during guard generation.
    Equality(u64),
    /// Closed interval `[lo, hi]`.
    Interval { lo: Fixed, hi: Fixed },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub clock: ClockId,
    pub form: GuardForm,
}

impl Guard {
    pub fn equality(clock: ClockId, value: u64) -> Self {
        Guard { clock, form: GuardForm::Equality(value) }
    }

    pub fn interval(clock: ClockId, lo: Fixed, hi: Fixed) -> Self {
        Guard { clock, form: GuardForm::Interval { lo, hi } }
    }

    pub fn admits(&self, value: u64) -> bool {
        match self.form {
            GuardForm::Equality(v) => v == value,
            GuardForm::Interval { lo, hi } => lo.le_int(value) && hi.ge_int(value),
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self.form, GuardForm::Interval { .. })
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            GuardForm::Equality(v) => write!(f, "{}={}", self.clock, v),
            GuardForm::Interval { lo, hi } => write!(f, "{}=[{},{}]", self.clock, lo, hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub target: StateId,
    pub operation: String,
    pub event_type: EventType,
    /// Kept sorted; equality guards form a multiset of observations.
    pub guards: Vec<Guard>,
    pub resets: BTreeSet<ClockId>,
}

impl Transition {
    pub fn new(source: StateId, target: StateId, operation: impl Into<String>, event_type: EventType) -> Self {
        Transition {
            source,
            target,
            operation: operation.into(),
            event_type,
            guards: Vec::new(),
            resets: BTreeSet::new(),
        }
    }

    pub fn with_guards(mut self, guards: impl IntoIterator<Item = Guard>) -> Self {
        self.guards.extend(guards);
        self.guards.sort();
        self
    }

    pub fn with_resets(mut self, resets: impl IntoIterator<Item = ClockId>) -> Self {
        self.resets.extend(resets);
        self
    }

    /// Guards on `clock`, as a contiguous slice of the sorted guard list.
    pub fn guards_on(&self, clock: ClockId) -> &[Guard] {
        let start = self.guards.partition_point(|g| g.clock < clock);
        let end = self.guards.partition_point(|g| g.clock <= clock);
        &self.guards[start..end]
    }

    /// Distinct clocks carrying at least one guard, in order.
    pub fn guarded_clocks(&self) -> impl Iterator<Item = ClockId> + '_ {
        self.guards
            .iter()
            .enumerate()
            .filter(|(i, g)| *i == 0 || self.guards[i - 1].clock != g.clock)
            .map(|(_, g)| g.clock)
    }

    pub(crate) fn sort_key(&self) -> (StateId, &str, EventType, StateId) {
        (self.source, self.operation.as_str(), self.event_type, self.target)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("automaton has no states")]
    NoStates,
    #[error("initial state {0} does not exist")]
    BadInitial(StateId),
    #[error("transition {index} references missing state {state}")]
    BadState { index: usize, state: StateId },
    #[error("transition {index} references undeclared clock {clock}")]
    UndeclaredClock { index: usize, clock: ClockId },
    #[error("the absolute clock t must be declared exactly once")]
    MissingAbsolute,
    #[error("transition {index} uses label `{label}` outside the alphabet")]
    UnknownLabel { index: usize, label: String },
    #[error("invalid operation label `{0}`")]
    InvalidLabel(String),
    #[error("transition {index} resets clocks on an End event")]
    ResetOnEnd { index: usize },
    #[error("transition {index}: interval on {clock} has lo > hi")]
    EmptyInterval { index: usize, clock: ClockId },
    #[error("transition {index}: clock {clock} mixes interval and equality guards or has several intervals")]
    MixedGuards { index: usize, clock: ClockId },
}

/// A timed automaton `(S, s0, C, E, TR)` without state invariants.
///
/// States are `0..num_states`. Transitions are kept sorted by
/// `(source, operation, event_type, target)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedAutomaton {
    num_states: u32,
    initial: StateId,
    clocks: BTreeSet<ClockId>,
    alphabet: BTreeSet<String>,
    transitions: Vec<Transition>,
}

impl TimedAutomaton {
    pub fn new(
        num_states: u32,
        initial: StateId,
        clocks: BTreeSet<ClockId>,
        alphabet: BTreeSet<String>,
        mut transitions: Vec<Transition>,
    ) -> Result<Self, AutomatonError> {
        if num_states == 0 {
            return Err(AutomatonError::NoStates);
        }
        if initial.0 >= num_states {
            return Err(AutomatonError::BadInitial(initial));
        }
        if !clocks.contains(&ClockId::ABSOLUTE) {
            return Err(AutomatonError::MissingAbsolute);
        }
        if let Some(bad) = alphabet.iter().find(|l| !is_valid_label(l)) {
            return Err(AutomatonError::InvalidLabel(bad.clone()));
        }
        for tr in &mut transitions {
            tr.guards.sort();
        }
        transitions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.guards.cmp(&b.guards)));
        for (index, tr) in transitions.iter().enumerate() {
            for s in [tr.source, tr.target] {
                if s.0 >= num_states {
                    return Err(AutomatonError::BadState { index, state: s });
                }
            }
            if !alphabet.contains(&tr.operation) {
                return Err(AutomatonError::UnknownLabel { index, label: tr.operation.clone() });
            }
            if tr.event_type == EventType::End && !tr.resets.is_empty() {
                return Err(AutomatonError::ResetOnEnd { index });
            }
            for &clock in tr.resets.iter().chain(tr.guards.iter().map(|g| &g.clock)) {
                if !clocks.contains(&clock) {
                    return Err(AutomatonError::UndeclaredClock { index, clock });
                }
            }
            for clock in tr.guarded_clocks() {
                let gs = tr.guards_on(clock);
                let intervals = gs.iter().filter(|g| g.is_interval()).count();
                if intervals > 0 && gs.len() > 1 {
                    return Err(AutomatonError::MixedGuards { index, clock });
                }
                if let GuardForm::Interval { lo, hi } = gs[0].form {
                    if lo > hi {
                        return Err(AutomatonError::EmptyInterval { index, clock });
                    }
                }
            }
        }
        Ok(TimedAutomaton { num_states, initial, clocks, alphabet, transitions })
    }

    /// Automaton with only the initial state.
    pub fn empty() -> Self {
        TimedAutomaton {
            num_states: 1,
            initial: StateId(0),
            clocks: BTreeSet::from([ClockId::ABSOLUTE]),
            alphabet: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn clocks(&self) -> &BTreeSet<ClockId> {
        &self.clocks
    }

    pub fn relative_clocks(&self) -> impl Iterator<Item = ClockId> + '_ {
        self.clocks.iter().copied().filter(|c| !c.is_absolute())
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transition indices leaving each state, in canonical order.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_states as usize];
        for (i, tr) in self.transitions.iter().enumerate() {
            out[tr.source.0 as usize].push(i);
        }
        out
    }

    /// Same structure with every guard removed.
    pub fn without_guards(&self) -> TimedAutomaton {
        let mut a = self.clone();
        for tr in &mut a.transitions {
            tr.guards.clear();
        }
        a
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            states: self.num_states as usize,
            transitions: self.transitions.len(),
            clocks: self.clocks.len(),
        }
    }

    pub(crate) fn into_parts(self) -> (u32, StateId, BTreeSet<ClockId>, BTreeSet<String>, Vec<Transition>) {
        (self.num_states, self.initial, self.clocks, self.alphabet, self.transitions)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub states: usize,
    pub transitions: usize,
    pub clocks: usize,
}
