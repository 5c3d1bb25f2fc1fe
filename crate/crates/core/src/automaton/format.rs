//! Line-oriented model file format.
//!
//! ```text
//! tkt-model 1
//! states 3
//! initial 0
//! clocks t c1
//! alphabet f
//! tr 0 1 B f guards resets t c1
//! tr 1 2 E f guards t=[2.85,3.15] c1=[2.85,3.15] resets
//! ```
//!
//! Header lines appear in exactly this order. Each `tr` line is
//! `tr <source> <target> <B|E> <operation> guards <guard>* resets <clock>*`,
//! where a guard is `<clock>=<integer>` (an observed equality) or
//! `<clock>=[<lo>,<hi>]` (a closed interval with up to six decimals).
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{AutomatonError, ClockId, Guard, GuardForm, StateId, TimedAutomaton, Transition};
use crate::fixed::Fixed;
use crate::trace::EventType;

pub const FORMAT_HEADER: &str = "tkt-model 1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("invalid model: {0}")]
    Invalid(#[from] AutomatonError),
}

pub fn write_model(automaton: &TimedAutomaton) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!("states {}\n", automaton.num_states()));
    out.push_str(&format!("initial {}\n", automaton.initial().0));
    let mut line = String::from("clocks");
    for c in automaton.clocks() {
        line.push(' ');
        line.push_str(&c.to_string());
    }
    out.push_str(&line);
    out.push('\n');
    let mut line = String::from("alphabet");
    for l in automaton.alphabet() {
        line.push(' ');
        line.push_str(l);
    }
    out.push_str(&line);
    out.push('\n');
    for tr in automaton.transitions() {
        let mut line = format!("tr {} {} {} {} guards", tr.source.0, tr.target.0, tr.event_type, tr.operation);
        for g in &tr.guards {
            line.push(' ');
            line.push_str(&g.to_string());
        }
        line.push_str(" resets");
        for c in &tr.resets {
            line.push(' ');
            line.push_str(&c.to_string());
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn syntax(line: usize, message: impl Into<String>) -> ModelParseError {
    ModelParseError::Syntax { line, message: message.into() }
}

fn parse_clock(tok: &str, line: usize) -> Result<ClockId, ModelParseError> {
    tok.parse().map_err(|_| syntax(line, format!("invalid clock `{tok}`")))
}

fn parse_guard(tok: &str, line: usize) -> Result<Guard, ModelParseError> {
    let (clock, rhs) = tok.split_once('=').ok_or_else(|| syntax(line, format!("invalid guard `{tok}`")))?;
    let clock = parse_clock(clock, line)?;
    if let Some(body) = rhs.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let (lo, hi) = body.split_once(',').ok_or_else(|| syntax(line, format!("invalid interval `{rhs}`")))?;
        let lo: Fixed = lo.parse().map_err(|e| syntax(line, format!("{e}")))?;
        let hi: Fixed = hi.parse().map_err(|e| syntax(line, format!("{e}")))?;
        return Ok(Guard { clock, form: GuardForm::Interval { lo, hi } });
    }
    if rhs.is_empty() || !rhs.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, format!("invalid guard value `{rhs}`")));
    }
    let v = rhs.parse().map_err(|_| syntax(line, format!("guard value `{rhs}` out of range")))?;
    Ok(Guard::equality(clock, v))
}

fn parse_u32(tok: &str, line: usize) -> Result<u32, ModelParseError> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, format!("expected a non-negative integer, found `{tok}`")));
    }
    tok.parse().map_err(|_| syntax(line, format!("`{tok}` out of range")))
}

/// Parses the model format; the trailing newline is optional.
pub fn parse_model(text: &str) -> Result<TimedAutomaton, ModelParseError> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = |key: &'static str| -> Result<(usize, Vec<&str>), ModelParseError> {
        let (n, l) = lines.next().ok_or(ModelParseError::Missing(key))?;
        let mut toks = l.split(' ');
        if toks.next() != Some(key) {
            return Err(syntax(n, format!("expected `{key}`")));
        }
        Ok((n, toks.collect()))
    };

    let (n, version) = header("tkt-model")?;
    if version != ["1"] {
        return Err(syntax(n, "unsupported model format version"));
    }
    let (n, toks) = header("states")?;
    let [count] = toks[..] else { return Err(syntax(n, "expected `states <count>`")) };
    let num_states = parse_u32(count, n)?;
    let (n, toks) = header("initial")?;
    let [init] = toks[..] else { return Err(syntax(n, "expected `initial <state>`")) };
    let initial = StateId(parse_u32(init, n)?);
    let (n, toks) = header("clocks")?;
    let mut clocks = BTreeSet::new();
    for t in toks {
        if !clocks.insert(parse_clock(t, n)?) {
            return Err(syntax(n, format!("duplicate clock `{t}`")));
        }
    }
    let (_, toks) = header("alphabet")?;
    let alphabet: BTreeSet<String> = toks.into_iter().map(str::to_owned).collect();

    let mut transitions = Vec::new();
    for (n, l) in lines {
        let toks: Vec<&str> = l.split(' ').collect();
        if toks.len() < 7 || toks[0] != "tr" || toks[5] != "guards" {
            return Err(syntax(n, "expected `tr <src> <dst> <B|E> <op> guards ... resets ...`"));
        }
        let source = StateId(parse_u32(toks[1], n)?);
        let target = StateId(parse_u32(toks[2], n)?);
        let event_type = EventType::from_symbol(toks[3]).ok_or_else(|| syntax(n, format!("invalid event type `{}`", toks[3])))?;
        let split = toks[6..]
            .iter()
            .position(|&t| t == "resets")
            .map(|p| p + 6)
            .ok_or_else(|| syntax(n, "missing `resets`"))?;
        let guards = toks[6..split].iter().map(|t| parse_guard(t, n)).collect::<Result<Vec<_>, _>>()?;
        let mut resets = BTreeSet::new();
        for t in &toks[split + 1..] {
            if !resets.insert(parse_clock(t, n)?) {
                return Err(syntax(n, format!("duplicate reset `{t}`")));
            }
        }
        transitions.push(Transition::new(source, target, toks[4], event_type).with_guards(guards).with_resets(resets));
    }
    Ok(TimedAutomaton::new(num_states, initial, clocks, alphabet, transitions)?)
}
