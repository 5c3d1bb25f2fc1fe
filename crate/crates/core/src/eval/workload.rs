//! Synthetic workloads: nested call traces with random self-times, and
//! anomaly injection producing invalid traces.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::Fixed;
use crate::trace::{is_valid_label, EventType, TimedEvent, TimedTrace};

/// Maximum call nesting depth of generated traces.
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationDist {
    Uniform { lo: u64, hi: u64 },
    Normal { mean: f64, std_dev: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repetition {
    pub min: u32,
    pub max: u32,
}

impl Default for Repetition {
    fn default() -> Self {
        Repetition { min: 1, max: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationSpec {
    pub label: String,
    /// Operations called, in order, from inside this one.
    #[serde(default)]
    pub children: Vec<String>,
    /// How many times this operation runs each time its parent calls it.
    #[serde(default)]
    pub repetition: Repetition,
    /// Self-time, excluding time spent in children.
    pub duration: DurationDist,
}

/// A generator of call traces: one root call per trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub roots: Vec<String>,
    pub operations: Vec<OperationSpec>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkloadError {
    #[error("cannot parse workload: {0}")]
    Parse(String),
    #[error("workload has no roots")]
    NoRoots,
    #[error("invalid operation label `{0}`")]
    InvalidLabel(String),
    #[error("operation `{0}` defined twice")]
    Duplicate(String),
    #[error("unknown operation `{0}`")]
    Unknown(String),
    #[error("operation `{0}`: repetition min exceeds max")]
    Repetition(String),
    #[error("operation `{0}`: invalid duration distribution")]
    Duration(String),
    #[error("nesting through `{0}` cannot terminate within depth {MAX_DEPTH}")]
    Unbounded(String),
    #[error("need at least one trace")]
    NoTraces,
    #[error("timestamps overflow while generating `{0}`")]
    Overflow(String),
}

impl WorkloadSpec {
    pub fn from_toml(text: &str) -> Result<Self, WorkloadError> {
        let spec: WorkloadSpec = toml::from_str(text).map_err(|e| WorkloadError::Parse(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("workload specs serialize")
    }

    fn index(&self) -> Result<HashMap<&str, &OperationSpec>, WorkloadError> {
        let mut ops = HashMap::new();
        for op in &self.operations {
            if !is_valid_label(&op.label) {
                return Err(WorkloadError::InvalidLabel(op.label.clone()));
            }
            if ops.insert(op.label.as_str(), op).is_some() {
                return Err(WorkloadError::Duplicate(op.label.clone()));
            }
        }
        Ok(ops)
    }

    /// Validates references, parameters and termination of the nesting.
    pub fn check(&self) -> Result<(), WorkloadError> {
        if self.roots.is_empty() {
            return Err(WorkloadError::NoRoots);
        }
        let ops = self.index()?;
        for op in &self.operations {
            if op.repetition.min > op.repetition.max {
                return Err(WorkloadError::Repetition(op.label.clone()));
            }
            let ok = match op.duration {
                DurationDist::Uniform { lo, hi } => lo <= hi,
                DurationDist::Normal { mean, std_dev } => mean.is_finite() && std_dev.is_finite() && mean >= 0.0 && std_dev >= 0.0,
            };
            if !ok {
                return Err(WorkloadError::Duration(op.label.clone()));
            }
            if let Some(c) = op.children.iter().find(|c| !ops.contains_key(c.as_str())) {
                return Err(WorkloadError::Unknown(c.clone()));
            }
        }
        // longest nesting chain from each root; a cycle or a chain deeper than MAX_DEPTH is rejected
        fn depth<'a>(
            label: &'a str,
            ops: &HashMap<&'a str, &'a OperationSpec>,
            on_path: &mut Vec<&'a str>,
            memo: &mut HashMap<&'a str, usize>,
        ) -> Result<usize, WorkloadError> {
            if let Some(&d) = memo.get(label) {
                return Ok(d);
            }
            if on_path.contains(&label) || on_path.len() >= MAX_DEPTH {
                return Err(WorkloadError::Unbounded(label.to_owned()));
            }
            on_path.push(label);
            let mut d = 1;
            for c in &ops[label].children {
                d = d.max(1 + depth(c, ops, on_path, memo)?);
            }
            on_path.pop();
            if d > MAX_DEPTH {
                return Err(WorkloadError::Unbounded(label.to_owned()));
            }
            memo.insert(label, d);
            Ok(d)
        }
        let mut memo = HashMap::new();
        for r in &self.roots {
            if !ops.contains_key(r.as_str()) {
                return Err(WorkloadError::Unknown(r.clone()));
            }
            depth(r, &ops, &mut Vec::new(), &mut memo)?;
        }
        Ok(())
    }
}

struct Generator<'a> {
    ops: HashMap<&'a str, &'a OperationSpec>,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn self_time(&mut self, d: DurationDist) -> u64 {
        match d {
            DurationDist::Uniform { lo, hi } => self.rng.gen_range(lo..=hi),
            DurationDist::Normal { mean, std_dev } => {
                let n = Normal::new(mean, std_dev).expect("checked parameters");
                n.sample(&mut self.rng).round().max(0.0) as u64
            }
        }
    }

    /// Emits one call starting at `start`; returns its end time.
    fn call(&mut self, label: &str, start: u64, out: &mut Vec<TimedEvent>) -> Result<u64, WorkloadError> {
        let op = self.ops[label];
        out.push(TimedEvent::begin(label, start));
        let own = self.self_time(op.duration);
        let mut calls: Vec<&str> = Vec::new();
        for c in &op.children {
            let rep = self.ops[c.as_str()].repetition;
            let n = self.rng.gen_range(rep.min..=rep.max);
            calls.extend(std::iter::repeat_n(c.as_str(), n as usize));
        }
        // self-time is spread over the gaps around child calls; the remainder goes last
        let gaps = calls.len() as u64 + 1;
        let (gap, rem) = (own / gaps, own % gaps);
        let overflow = || WorkloadError::Overflow(label.to_owned());
        let mut now = start;
        for c in calls {
            now = now.checked_add(gap).ok_or_else(overflow)?;
            now = self.call(c, now, out)?;
        }
        now = now.checked_add(gap + rem).ok_or_else(overflow)?;
        out.push(TimedEvent::end(label, now));
        Ok(now)
    }
}

/// Generates `n` traces, deterministically from `spec.seed`. Each trace is a
/// single call of a root operation starting at time 0.
pub fn generate_corpus(spec: &WorkloadSpec, n: usize) -> Result<Vec<TimedTrace>, WorkloadError> {
    if n == 0 {
        return Err(WorkloadError::NoTraces);
    }
    spec.check()?;
    let mut g = Generator { ops: spec.index()?, rng: ChaCha8Rng::seed_from_u64(spec.seed) };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let root = &spec.roots[g.rng.gen_range(0..spec.roots.len())];
        let mut events = Vec::new();
        g.call(root, 0, &mut events)?;
        out.push(TimedTrace::well_formed(events).expect("generator emits well-formed traces"));
    }
    Ok(out)
}

/// Ways of turning a valid trace into an invalid one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnomalySpec {
    /// Every self-time is multiplied by `factor` (resource contention).
    Overload { factor: f64 },
    /// Only the self-time of `label` is multiplied (a performance fault).
    SlowOp { label: String, factor: f64 },
    /// The first pair of adjacent sibling calls with different labels swap labels.
    Reorder,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnomalyError {
    #[error("cannot parse anomaly: {0}")]
    Parse(String),
    #[error("factor {0} must be greater than 1")]
    Factor(f64),
    #[error("operation `{0}` does not occur in the trace")]
    AbsentLabel(String),
    #[error("no adjacent sibling calls with different labels to reorder")]
    NothingToReorder,
    #[error("malformed input trace: {0}")]
    Malformed(String),
}

impl AnomalySpec {
    pub fn from_toml(text: &str) -> Result<Self, AnomalyError> {
        let spec: AnomalySpec = toml::from_str(text).map_err(|e| AnomalyError::Parse(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), AnomalyError> {
        match self {
            AnomalySpec::Overload { factor } | AnomalySpec::SlowOp { factor, .. } => {
                if !(factor.is_finite() && *factor > 1.0) || Fixed::ceil_f64(*factor) == Fixed::ONE {
                    return Err(AnomalyError::Factor(*factor));
                }
                if *factor > 1e6 {
                    return Err(AnomalyError::Factor(*factor));
                }
                Ok(())
            }
            AnomalySpec::Reorder => Ok(()),
        }
    }
}

fn factor_fixed(f: f64) -> Fixed {
    Fixed::from_micros((f * 1e6).round() as u64)
}

/// Applies an anomaly, rebuilding timestamps from scaled self-time gaps.
///
/// The time between two consecutive events is attributed to the innermost
/// operation open at that moment; scaling an operation's self-time scales
/// those gaps, which also stretches every enclosing operation.
pub fn inject_anomaly(trace: &TimedTrace, spec: &AnomalySpec) -> Result<TimedTrace, AnomalyError> {
    spec.check()?;
    trace.ensure_well_formed().map_err(|e| AnomalyError::Malformed(e.to_string()))?;
    let events = trace.events();
    match spec {
        AnomalySpec::Overload { factor } => Ok(rescale(trace, factor_fixed(*factor), |_| true)),
        AnomalySpec::SlowOp { label, factor } => {
            if !events.iter().any(|e| &e.operation == label) {
                return Err(AnomalyError::AbsentLabel(label.clone()));
            }
            Ok(rescale(trace, factor_fixed(*factor), |owner| owner == Some(label.as_str())))
        }
        AnomalySpec::Reorder => reorder(trace),
    }
}

fn rescale(trace: &TimedTrace, factor: Fixed, scaled: impl Fn(Option<&str>) -> bool) -> TimedTrace {
    let events = trace.events();
    let mut stamps = Vec::with_capacity(events.len());
    stamps.push(events[0].timestamp);
    let mut open: Vec<&str> = Vec::new();
    for i in 1..events.len() {
        let prev = &events[i - 1];
        match prev.event_type {
            EventType::Begin => open.push(&prev.operation),
            EventType::End => {
                open.pop();
            }
        }
        let gap = events[i].timestamp - prev.timestamp;
        let gap = if scaled(open.last().copied()) { factor.scale_int_round(gap) } else { gap };
        stamps.push(stamps[i - 1].saturating_add(gap));
    }
    trace.with_timestamps(&stamps)
}

fn reorder(trace: &TimedTrace) -> Result<TimedTrace, AnomalyError> {
    let events = trace.events();
    // direct children of each open call (usize::MAX for top level), as begin indices
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut open = vec![usize::MAX];
    for (i, e) in events.iter().enumerate() {
        match e.event_type {
            EventType::Begin => {
                children.entry(*open.last().expect("sentinel")).or_default().push(i);
                open.push(i);
            }
            EventType::End => {
                open.pop();
            }
        }
    }
    let mut parents: Vec<&Vec<usize>> = children.values().collect();
    // top level sorts last under usize::MAX; visit parents in trace order
    parents.rotate_right(usize::from(children.contains_key(&usize::MAX)));
    for kids in parents {
        for w in kids.windows(2) {
            let (a, b) = (w[0], w[1]);
            if events[a].operation != events[b].operation {
                let mut swapped = events.to_vec();
                let (la, lb) = (events[a].operation.clone(), events[b].operation.clone());
                for i in [a, trace.pair(a)] {
                    swapped[i].operation = lb.clone();
                }
                for i in [b, trace.pair(b)] {
                    swapped[i].operation = la.clone();
                }
                return TimedTrace::well_formed(swapped).map_err(|e| AnomalyError::Malformed(e.to_string()));
            }
        }
    }
    Err(AnomalyError::NothingToReorder)
}
