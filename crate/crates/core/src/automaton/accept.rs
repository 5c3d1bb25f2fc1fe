//! Trace acceptance.
//!
//! A trace is accepted when some path from the initial state consumes every
//! event, with matching operation and event type and all guards satisfied.
//! There are no final states, so prefixes ending inside an operation are
//! accepted too.
//!
//! Guard evaluation:
//! * guards on one clock are alternatives: the clock satisfies them when any
//!   of them admits its value (an interval, or one of the observed equalities);
//! * the absolute clock is evaluated against the time since its last reset and
//!   ignored while it has never been reset, or when `check_absolute` is off;
//! * relative clocks measure operation durations. On an End event only the
//!   relative clocks whose latest reset happened at the matching Begin event
//!   are evaluated; their common value is the operation's duration and the
//!   transition passes when at least one of them satisfies its guards. Other
//!   relative guards are ignored, as for never-reset clocks.
//!
//! Nondeterminism is handled by a depth-first search in canonical transition
//! order, memoizing configurations at branching points.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::{ClockId, Guard, GuardForm, StateId, TimedAutomaton, Transition};
use crate::trace::{EventType, TimedEvent, TimedTrace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("trace has no events")]
    Empty,
    #[error("malformed trace: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// No transition with the event's operation and type leaves the state.
    MissingTransition,
    /// The transition exists but `clock`, valued `value`, violates its guards.
    Guard { transition: usize, clock: ClockId, value: u64, expected: String },
}

/// Why the longest-consuming path stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// Number of events consumed before the block; also the blocked event's index.
    pub consumed: usize,
    pub state: StateId,
    pub event: TimedEvent,
    pub reason: FailureReason,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            FailureReason::MissingTransition => write!(
                f,
                "event {} ({}): no transition {}/{} from {}",
                self.consumed, self.event, self.event.operation, self.event.event_type, self.state
            ),
            FailureReason::Guard { clock, value, expected, .. } => write!(
                f,
                "event {} ({}): guard on {clock} violated at {}: {clock}={value} not in {expected}",
                self.consumed, self.event, self.state
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptResult {
    pub accepted: bool,
    /// Transition indices of the accepting path (empty when rejected).
    pub witness: Vec<usize>,
    pub failure: Option<Failure>,
}

/// Checks a well-formed trace. The trace is normalized before matching.
pub fn accepts(automaton: &TimedAutomaton, trace: &TimedTrace, check_absolute: bool) -> Result<AcceptResult, CheckError> {
    trace.ensure_well_formed().map_err(|e| CheckError::Malformed(e.to_string()))?;
    accepts_events(automaton, trace.events(), check_absolute)
}

/// Checks a raw event sequence that may end with operations still open.
///
/// The sequence must be non-empty, have non-decreasing timestamps and close
/// operations in proper nesting order.
pub fn accepts_events(
    automaton: &TimedAutomaton,
    events: &[TimedEvent],
    check_absolute: bool,
) -> Result<AcceptResult, CheckError> {
    let Some(first) = events.first() else {
        return Err(CheckError::Empty);
    };
    let mut open: Vec<&str> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        if i > 0 && e.timestamp < events[i - 1].timestamp {
            return Err(CheckError::Malformed(format!("time decreases at event {i}")));
        }
        match e.event_type {
            EventType::Begin => open.push(&e.operation),
            EventType::End => {
                if open.pop() != Some(e.operation.as_str()) {
                    return Err(CheckError::Malformed(format!("End {} at event {i} does not close the innermost operation", e.operation)));
                }
            }
        }
    }
    let base = first.timestamp;
    let normalized: Vec<TimedEvent> = events
        .iter()
        .map(|e| TimedEvent { timestamp: e.timestamp - base, ..e.clone() })
        .collect();
    Ok(Search::new(automaton, &normalized, check_absolute).run())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct OpenOp {
    begin: u64,
    /// Relative clocks reset by this operation's Begin and not reset since.
    live: Vec<ClockId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Config {
    index: usize,
    state: StateId,
    abs_reset: Option<u64>,
    open: Vec<OpenOp>,
}

const ROOT: usize = usize::MAX;

struct Search<'a> {
    automaton: &'a TimedAutomaton,
    events: &'a [TimedEvent],
    check_absolute: bool,
    outgoing: Vec<Vec<usize>>,
    /// (parent node, transition taken)
    nodes: Vec<(usize, usize)>,
    best: Option<Failure>,
}

impl<'a> Search<'a> {
    fn new(automaton: &'a TimedAutomaton, events: &'a [TimedEvent], check_absolute: bool) -> Self {
        Search { automaton, events, check_absolute, outgoing: automaton.outgoing(), nodes: Vec::new(), best: None }
    }

    fn record(&mut self, failure: Failure) {
        if self.best.as_ref().is_none_or(|b| failure.consumed > b.consumed) {
            self.best = Some(failure);
        }
    }

    fn run(mut self) -> AcceptResult {
        let start = Config { index: 0, state: self.automaton.initial(), abs_reset: None, open: Vec::new() };
        let mut stack = vec![(start, ROOT)];
        let mut visited: HashSet<Config> = HashSet::new();

        while let Some((cfg, node)) = stack.pop() {
            if cfg.index == self.events.len() {
                return AcceptResult { accepted: true, witness: self.path(node), failure: None };
            }
            let event = &self.events[cfg.index];
            let trs = self.automaton.transitions();
            let candidates: Vec<usize> = self.outgoing[cfg.state.0 as usize]
                .iter()
                .copied()
                .filter(|&t| trs[t].event_type == event.event_type && trs[t].operation == event.operation)
                .collect();
            if candidates.is_empty() {
                self.record(Failure {
                    consumed: cfg.index,
                    state: cfg.state,
                    event: event.clone(),
                    reason: FailureReason::MissingTransition,
                });
                continue;
            }
            if candidates.len() > 1 && !visited.insert(cfg.clone()) {
                continue;
            }
            let mut children = Vec::with_capacity(candidates.len());
            for &t in &candidates {
                let tr = &trs[t];
                match self.check_guards(tr, &cfg, event) {
                    Ok(()) => children.push((t, step(&cfg, tr, event))),
                    Err((clock, value)) => self.record(Failure {
                        consumed: cfg.index,
                        state: cfg.state,
                        event: event.clone(),
                        reason: FailureReason::Guard { transition: t, clock, value, expected: describe(tr.guards_on(clock)) },
                    }),
                }
            }
            for (t, child) in children.into_iter().rev() {
                self.nodes.push((node, t));
                stack.push((child, self.nodes.len() - 1));
            }
        }
        AcceptResult { accepted: false, witness: Vec::new(), failure: self.best }
    }

    fn check_guards(&self, tr: &Transition, cfg: &Config, event: &TimedEvent) -> Result<(), (ClockId, u64)> {
        if self.check_absolute {
            if let Some(reset) = cfg.abs_reset {
                let value = event.timestamp - reset;
                let gs = tr.guards_on(ClockId::ABSOLUTE);
                if !gs.is_empty() && !gs.iter().any(|g| g.admits(value)) {
                    return Err((ClockId::ABSOLUTE, value));
                }
            }
        }
        if event.event_type == EventType::End {
            let Some(top) = cfg.open.last() else { return Ok(()) };
            let value = event.timestamp - top.begin;
            let mut blocked = None;
            for clock in tr.guarded_clocks().filter(|c| !c.is_absolute()) {
                if top.live.binary_search(&clock).is_err() {
                    continue;
                }
                if tr.guards_on(clock).iter().any(|g| g.admits(value)) {
                    return Ok(());
                }
                blocked.get_or_insert(clock);
            }
            if let Some(clock) = blocked {
                return Err((clock, value));
            }
        }
        Ok(())
    }

    fn path(&self, mut node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while node != ROOT {
            let (parent, t) = self.nodes[node];
            out.push(t);
            node = parent;
        }
        out.reverse();
        out
    }
}

fn step(cfg: &Config, tr: &Transition, event: &TimedEvent) -> Config {
    let mut next = cfg.clone();
    next.index += 1;
    next.state = tr.target;
    if tr.resets.contains(&ClockId::ABSOLUTE) {
        next.abs_reset = Some(event.timestamp);
    }
    let relative: Vec<ClockId> = tr.resets.iter().copied().filter(|c| !c.is_absolute()).collect();
    if !relative.is_empty() {
        for op in &mut next.open {
            op.live.retain(|c| relative.binary_search(c).is_err());
        }
    }
    match event.event_type {
        EventType::Begin => next.open.push(OpenOp { begin: event.timestamp, live: relative }),
        EventType::End => {
            next.open.pop();
        }
    }
    next
}

fn describe(guards: &[Guard]) -> String {
    match guards.first().map(|g| g.form) {
        Some(GuardForm::Interval { lo, hi }) => format!("[{lo},{hi}]"),
        _ => {
            let mut vals: Vec<u64> = guards
                .iter()
                .filter_map(|g| match g.form {
                    GuardForm::Equality(v) => Some(v),
                    GuardForm::Interval { .. } => None,
                })
                .collect();
            vals.dedup();
            let shown: Vec<String> = vals.iter().take(8).map(u64::to_string).collect();
            let more = if vals.len() > 8 { ",..." } else { "" };
            format!("{{{}{more}}}", shown.join(","))
        }
    }
}
