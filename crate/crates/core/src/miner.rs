//! Automaton initialization, kFuture state merging, redundant-transition
//! merging and clock refinement.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::automaton::{AutomatonError, ClockId, Guard, StateId, TimedAutomaton, Transition};
use crate::trace::{normalize, EventType, TimedTrace, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinerConfig {
    pub k: usize,
    pub absolute_clock: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig { k: 2, absolute_clock: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MineError {
    #[error("no traces to mine")]
    NoTraces,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("trace {index}: {source}")]
    Trace { index: usize, source: TraceError },
    #[error("trace {0} is not normalized (first timestamp is not 0)")]
    NotNormalized(usize),
    #[error("clock {clock} is reset on {resets} and checked on {checks} transitions (expected one each)")]
    Refinement { clock: ClockId, resets: usize, checks: usize },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// One branch per trace, sharing only the initial state.
///
/// Relative clocks are numbered by the global position of their Begin event
/// among all Begin events of the corpus, starting at 1.
pub fn build_initial(traces: &[TimedTrace], config: &MinerConfig) -> Result<TimedAutomaton, MineError> {
    if traces.is_empty() {
        return Err(MineError::NoTraces);
    }
    let mut clocks = BTreeSet::from([ClockId::ABSOLUTE]);
    let mut alphabet = BTreeSet::new();
    let mut transitions = Vec::new();
    let mut next_state = 1u32;
    let mut next_clock = 1u32;

    for (j, trace) in traces.iter().enumerate() {
        trace.ensure_well_formed().map_err(|source| MineError::Trace { index: j, source })?;
        let events = trace.events();
        if events[0].timestamp != 0 {
            return Err(MineError::NotNormalized(j));
        }
        let mut clock_of = vec![None; events.len()];
        let mut prev = StateId(0);
        for (i, e) in events.iter().enumerate() {
            let state = StateId(next_state);
            next_state += 1;
            alphabet.insert(e.operation.clone());
            let mut tr = Transition::new(prev, state, e.operation.clone(), e.event_type);
            if config.absolute_clock {
                tr.guards.push(Guard::equality(ClockId::ABSOLUTE, e.timestamp));
            }
            match e.event_type {
                EventType::Begin => {
                    let c = ClockId::relative(next_clock);
                    next_clock += 1;
                    clocks.insert(c);
                    clock_of[i] = Some(c);
                    tr.resets.insert(c);
                    if i == 0 && config.absolute_clock {
                        tr.resets.insert(ClockId::ABSOLUTE);
                    }
                }
                EventType::End => {
                    let p = trace.pair(i);
                    let c = clock_of[p].expect("begin precedes its end in a well-formed trace");
                    tr.guards.push(Guard::equality(c, e.timestamp - events[p].timestamp));
                }
            }
            tr.guards.sort();
            transitions.push(tr);
            prev = state;
        }
    }
    let a = TimedAutomaton::new(next_state, StateId(0), clocks, alphabet, transitions)?;
    Ok(canonicalize(&a))
}

/// Renumbers states breadth-first from the initial state, visiting outgoing
/// transitions by `(operation, event_type, target)`. Unreachable states are dropped.
pub fn canonicalize(automaton: &TimedAutomaton) -> TimedAutomaton {
    let outgoing = automaton.outgoing();
    let trs = automaton.transitions();
    let mut new_id = vec![u32::MAX; automaton.num_states() as usize];
    let mut queue = VecDeque::from([automaton.initial()]);
    new_id[automaton.initial().0 as usize] = 0;
    let mut count = 1u32;
    while let Some(s) = queue.pop_front() {
        // outgoing lists are already in (operation, event_type, target) order
        for &t in &outgoing[s.0 as usize] {
            let target = trs[t].target;
            if new_id[target.0 as usize] == u32::MAX {
                new_id[target.0 as usize] = count;
                count += 1;
                queue.push_back(target);
            }
        }
    }
    let (_, _, clocks, alphabet, transitions) = automaton.clone().into_parts();
    let transitions = transitions
        .into_iter()
        .filter(|tr| new_id[tr.source.0 as usize] != u32::MAX)
        .map(|mut tr| {
            tr.source = StateId(new_id[tr.source.0 as usize]);
            tr.target = StateId(new_id[tr.target.0 as usize]);
            tr
        })
        .collect();
    TimedAutomaton::new(count, StateId(0), clocks, alphabet, transitions).expect("renumbering preserves validity")
}

/// Label/type sequences accepted from a state, each of length at most k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KFuture {
    pub sequences: BTreeSet<Vec<(String, EventType)>>,
}

type Sym = u32;
type Future = BTreeSet<Vec<Sym>>;

struct Symbols<'a> {
    labels: Vec<&'a str>,
}

impl<'a> Symbols<'a> {
    fn new(a: &'a TimedAutomaton) -> Self {
        Symbols { labels: a.alphabet().iter().map(String::as_str).collect() }
    }

    fn of(&self, tr: &Transition) -> Sym {
        let idx = self.labels.binary_search(&tr.operation.as_str()).expect("label in alphabet") as u32;
        idx * 2 + u32::from(tr.event_type == EventType::End)
    }

    fn decode(&self, s: Sym) -> (String, EventType) {
        let ty = if s.is_multiple_of(2) { EventType::Begin } else { EventType::End };
        (self.labels[(s / 2) as usize].to_owned(), ty)
    }
}

/// kFutures of every state: walks of exactly k steps, plus shorter walks
/// that stop at a state without outgoing transitions.
fn all_futures(a: &TimedAutomaton, k: usize, syms: &Symbols) -> Vec<Future> {
    let outgoing = a.outgoing();
    let trs = a.transitions();
    let n = a.num_states() as usize;
    let eps: Future = BTreeSet::from([Vec::new()]);
    let mut cur: Vec<Future> = vec![eps.clone(); n];
    for _ in 0..k {
        let next = (0..n)
            .map(|s| {
                if outgoing[s].is_empty() {
                    return eps.clone();
                }
                let mut set = BTreeSet::new();
                for &t in &outgoing[s] {
                    let sym = syms.of(&trs[t]);
                    for w in &cur[trs[t].target.0 as usize] {
                        let mut seq = Vec::with_capacity(w.len() + 1);
                        seq.push(sym);
                        seq.extend_from_slice(w);
                        set.insert(seq);
                    }
                }
                set
            })
            .collect();
        cur = next;
    }
    cur
}

pub fn compute_kfuture(automaton: &TimedAutomaton, state: StateId, k: usize) -> KFuture {
    let syms = Symbols::new(automaton);
    let all = all_futures(automaton, k, &syms);
    let sequences = all[state.0 as usize]
        .iter()
        .map(|w| w.iter().map(|&s| syms.decode(s)).collect())
        .collect();
    KFuture { sequences }
}

/// Collapses kFuture-equivalent states, a whole class at a time, until no
/// two states share a kFuture. Redundant transitions are merged after every pass.
pub fn merge_states(automaton: &TimedAutomaton, k: usize) -> Result<TimedAutomaton, MineError> {
    if k == 0 {
        return Err(MineError::InvalidK);
    }
    let mut current = canonicalize(automaton);
    loop {
        let syms = Symbols::new(&current);
        let futures = all_futures(&current, k, &syms);
        let mut class_of_future: HashMap<&Future, u32> = HashMap::new();
        let mut class = Vec::with_capacity(futures.len());
        for f in &futures {
            let next = class_of_future.len() as u32;
            class.push(*class_of_future.entry(f).or_insert(next));
        }
        if class_of_future.len() == futures.len() {
            return Ok(current);
        }
        let classes = class_of_future.len() as u32;
        let initial = StateId(class[current.initial().0 as usize]);
        let (_, _, clocks, alphabet, transitions) = current.clone().into_parts();
        let transitions = transitions
            .into_iter()
            .map(|mut tr| {
                tr.source = StateId(class[tr.source.0 as usize]);
                tr.target = StateId(class[tr.target.0 as usize]);
                tr
            })
            .collect();
        let collapsed = TimedAutomaton::new(classes, initial, clocks, alphabet, merge_transition_list(transitions))?;
        current = canonicalize(&collapsed);
    }
}

fn merge_transition_list(mut transitions: Vec<Transition>) -> Vec<Transition> {
    transitions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut out: Vec<Transition> = Vec::with_capacity(transitions.len());
    for tr in transitions {
        match out.last_mut() {
            Some(last) if last.sort_key() == tr.sort_key() => {
                last.guards.extend(tr.guards);
                last.resets.extend(tr.resets);
            }
            _ => out.push(tr),
        }
    }
    for tr in &mut out {
        tr.guards.sort();
    }
    out
}

/// Replaces transitions sharing `(source, target, operation, event_type)` by a
/// single one carrying the multiset union of guards and the union of resets.
pub fn merge_redundant_transitions(automaton: &TimedAutomaton) -> Result<TimedAutomaton, MineError> {
    let (n, initial, clocks, alphabet, transitions) = automaton.clone().into_parts();
    Ok(TimedAutomaton::new(n, initial, clocks, alphabet, merge_transition_list(transitions))?)
}

/// Unifies relative clocks that are reset on the same transition and checked
/// on the same transition, keeping the lowest-indexed clock of each group.
pub fn refine_clocks(automaton: &TimedAutomaton) -> Result<TimedAutomaton, MineError> {
    let trs = automaton.transitions();
    let mut reset_on: BTreeMap<ClockId, Vec<usize>> = BTreeMap::new();
    let mut checked_on: BTreeMap<ClockId, Vec<usize>> = BTreeMap::new();
    for (i, tr) in trs.iter().enumerate() {
        for &c in tr.resets.iter().filter(|c| !c.is_absolute()) {
            reset_on.entry(c).or_default().push(i);
        }
        for c in tr.guarded_clocks().filter(|c| !c.is_absolute()) {
            checked_on.entry(c).or_default().push(i);
        }
    }
    let mut representative: BTreeMap<(usize, usize), ClockId> = BTreeMap::new();
    let mut rename: BTreeMap<ClockId, ClockId> = BTreeMap::new();
    for c in automaton.relative_clocks() {
        let r = reset_on.get(&c).map_or(&[][..], Vec::as_slice);
        let k = checked_on.get(&c).map_or(&[][..], Vec::as_slice);
        let (&[reset], &[check]) = (r, k) else {
            return Err(MineError::Refinement { clock: c, resets: r.len(), checks: k.len() });
        };
        // relative clocks iterate in ascending order, so the first one seen survives
        let rep = *representative.entry((reset, check)).or_insert(c);
        rename.insert(c, rep);
    }

    let (n, initial, _, alphabet, transitions) = automaton.clone().into_parts();
    let clocks: BTreeSet<ClockId> = std::iter::once(ClockId::ABSOLUTE).chain(representative.values().copied()).collect();
    let transitions = transitions
        .into_iter()
        .map(|mut tr| {
            for g in &mut tr.guards {
                if let Some(&r) = rename.get(&g.clock) {
                    g.clock = r;
                }
            }
            tr.guards.sort();
            tr.resets.retain(|c| c.is_absolute() || rename.get(c) == Some(c));
            tr
        })
        .collect();
    Ok(TimedAutomaton::new(n, initial, clocks, alphabet, transitions)?)
}

/// Intermediate automata of one mining run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stages {
    pub initial: TimedAutomaton,
    pub merged: TimedAutomaton,
    pub refined: TimedAutomaton,
}

/// Normalization through clock refinement.
pub fn mine_stages(traces: &[TimedTrace], config: &MinerConfig) -> Result<Stages, MineError> {
    if config.k == 0 {
        return Err(MineError::InvalidK);
    }
    if traces.is_empty() {
        return Err(MineError::NoTraces);
    }
    let mut normalized = Vec::with_capacity(traces.len());
    for (index, t) in traces.iter().enumerate() {
        t.ensure_well_formed().map_err(|source| MineError::Trace { index, source })?;
        normalized.push(normalize(t));
    }
    let initial = build_initial(&normalized, config)?;
    let merged = merge_states(&initial, config.k)?;
    let refined = refine_clocks(&merged)?;
    Ok(Stages { initial, merged, refined })
}
