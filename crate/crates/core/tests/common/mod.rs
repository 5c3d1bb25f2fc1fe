//! Shared generators and reference implementations for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use tkt_core::eval::{DurationDist, OperationSpec, Repetition, WorkloadSpec};
use tkt_core::{ClockId, EventType, Fixed, Guard, StateId, TimedAutomaton, TimedEvent, Transition};

/// A random nesting workload with a single root operation `op0`.
pub fn random_workload(rng: &mut impl Rng) -> WorkloadSpec {
    let n = rng.gen_range(2..=5);
    let mut operations = Vec::new();
    for i in 0..n {
        let mut children: Vec<String> =
            (i + 1..n).filter(|_| rng.gen_bool(0.45)).take(3).map(|j| format!("op{j}")).collect();
        if i == 0 && children.is_empty() {
            children.push("op1".into());
        }
        let min = if i == 0 { 1 } else { rng.gen_range(0..=1) };
        let max = if i == 0 { 1 } else { min + rng.gen_range(0..=2) };
        let duration = if rng.gen_bool(0.5) {
            let lo = rng.gen_range(0..50);
            DurationDist::Uniform { lo, hi: lo + rng.gen_range(0..100) }
        } else {
            DurationDist::Normal { mean: rng.gen_range(10.0..100.0), std_dev: rng.gen_range(0.0..20.0) }
        };
        operations.push(OperationSpec { label: format!("op{i}"), children, repetition: Repetition { min, max }, duration });
    }
    WorkloadSpec { seed: rng.gen(), roots: vec!["op0".into()], operations }
}

const OPS: [&str; 3] = ["a", "b", "c"];

/// Random automaton over `a`, `b`, `c` with at most `max_states` states.
/// With `deterministic`, each state has at most one transition per
/// (operation, event type). Guards are random equalities or intervals.
pub fn random_automaton(rng: &mut impl Rng, max_states: u32, deterministic: bool, guards: bool) -> TimedAutomaton {
    let n = rng.gen_range(1..=max_states);
    let nclocks = rng.gen_range(0..=3u32);
    let clocks: BTreeSet<ClockId> =
        std::iter::once(ClockId::ABSOLUTE).chain((1..=nclocks).map(ClockId::relative)).collect();
    let clock_list: Vec<ClockId> = clocks.iter().copied().collect();
    let mut transitions = Vec::new();
    for s in 0..n {
        let mut used = BTreeSet::new();
        for _ in 0..rng.gen_range(0..=5) {
            let op = *OPS.choose(rng).unwrap();
            let ty = if rng.gen_bool(0.5) { EventType::Begin } else { EventType::End };
            if deterministic && !used.insert((op, ty)) {
                continue;
            }
            let mut tr = Transition::new(StateId(s), StateId(rng.gen_range(0..n)), op, ty);
            if ty == EventType::Begin {
                tr = tr.with_resets(clock_list.iter().copied().filter(|_| rng.gen_bool(0.4)));
            }
            if guards {
                let mut gs = Vec::new();
                for &c in &clock_list {
                    if !rng.gen_bool(0.3) {
                        continue;
                    }
                    if rng.gen_bool(0.5) {
                        let lo = rng.gen_range(0..20u64);
                        let hi = lo + rng.gen_range(0..40u64);
                        gs.push(Guard::interval(c, Fixed::from_int(lo), Fixed::from_int(hi)));
                    } else {
                        for _ in 0..rng.gen_range(1..=3) {
                            gs.push(Guard::equality(c, rng.gen_range(0..12)));
                        }
                    }
                }
                tr = tr.with_guards(gs);
            }
            transitions.push(tr);
        }
    }
    TimedAutomaton::new(n, StateId(0), clocks, OPS.iter().map(|s| s.to_string()).collect(), transitions).unwrap()
}

/// A random properly nested event sequence of at most `max_len` events,
/// following the automaton's transitions with probability `steer` per step.
/// With `close`, open operations are ended at the end.
pub fn random_events(rng: &mut impl Rng, a: &TimedAutomaton, max_len: usize, steer: f64, close: bool) -> Vec<TimedEvent> {
    let outgoing = a.outgoing();
    let mut state = Some(a.initial());
    let mut open: Vec<&str> = Vec::new();
    let mut events = Vec::new();
    let mut now = rng.gen_range(0..1000u64);
    let len = rng.gen_range(1..=max_len);
    while events.len() < len {
        now += rng.gen_range(0..8);
        let nested_ok = |t: &Transition, open: &[&str]| match t.event_type {
            EventType::Begin => true,
            EventType::End => open.last() == Some(&t.operation.as_str()),
        };
        let choices: Vec<&Transition> = state
            .map(|s| outgoing[s.0 as usize].iter().map(|&i| &a.transitions()[i]).filter(|t| nested_ok(t, &open)).collect())
            .unwrap_or_default();
        let (op, ty) = if !choices.is_empty() && rng.gen_bool(steer) {
            let t = choices[rng.gen_range(0..choices.len())];
            state = Some(t.target);
            (OPS.iter().copied().find(|o| *o == t.operation).unwrap(), t.event_type)
        } else {
            state = None;
            match open.last() {
                Some(&top) if rng.gen_bool(0.5) => (top, EventType::End),
                _ => (*OPS.choose(rng).unwrap(), EventType::Begin),
            }
        };
        match ty {
            EventType::Begin => open.push(op),
            EventType::End => {
                open.pop();
            }
        }
        events.push(TimedEvent::new(ty, op, now));
    }
    if close {
        while let Some(op) = open.pop() {
            now += rng.gen_range(0..8);
            events.push(TimedEvent::end(op, now));
        }
    }
    events
}

/// Untimed acceptance by exhaustive path enumeration.
pub fn untimed_accepts(a: &TimedAutomaton, events: &[TimedEvent]) -> bool {
    fn go(a: &TimedAutomaton, state: StateId, events: &[TimedEvent]) -> bool {
        let Some((e, rest)) = events.split_first() else { return true };
        a.transitions()
            .iter()
            .filter(|t| t.source == state && t.operation == e.operation && t.event_type == e.event_type)
            .any(|t| go(a, t.target, rest))
    }
    go(a, a.initial(), events)
}

/// Outcome of following the unique path of a deterministic automaton:
/// `Ok(())` or `Err(index of the blocked event)`.
pub fn simulate_deterministic(a: &TimedAutomaton, events: &[TimedEvent], check_absolute: bool) -> Result<(), usize> {
    let base = events[0].timestamp;
    let time = |i: usize| events[i].timestamp - base;
    let mut state = a.initial();
    // clock -> index of the event whose transition last reset it
    let mut last_reset: HashMap<ClockId, usize> = HashMap::new();
    let mut begins: Vec<usize> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        let tr = a
            .transitions()
            .iter()
            .find(|t| t.source == state && t.operation == e.operation && t.event_type == e.event_type)
            .ok_or(i)?;
        let satisfied = |c: ClockId, v: u64| tr.guards.iter().filter(|g| g.clock == c).any(|g| g.admits(v));
        let has_guards = |c: ClockId| tr.guards.iter().any(|g| g.clock == c);
        if check_absolute && has_guards(ClockId::ABSOLUTE) {
            if let Some(&r) = last_reset.get(&ClockId::ABSOLUTE) {
                if !satisfied(ClockId::ABSOLUTE, time(i) - time(r)) {
                    return Err(i);
                }
            }
        }
        match e.event_type {
            EventType::Begin => begins.push(i),
            EventType::End => {
                let b = begins.pop().expect("well nested");
                let live: Vec<ClockId> = a
                    .relative_clocks()
                    .filter(|&c| has_guards(c) && last_reset.get(&c) == Some(&b))
                    .collect();
                if !live.is_empty() && !live.iter().any(|&c| satisfied(c, time(i) - time(b))) {
                    return Err(i);
                }
            }
        }
        for &c in &tr.resets {
            last_reset.insert(c, i);
        }
        state = tr.target;
    }
    Ok(())
}
