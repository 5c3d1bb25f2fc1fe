//! Timed traces: begin/end events with timestamps, their text format,
//! well-formedness checks and normalization.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Whether an event marks the start or the completion of an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventType {
    Begin,
    End,
}

impl EventType {
    pub fn symbol(self) -> char {
        match self {
            EventType::Begin => 'B',
            EventType::End => 'E',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "B" => Some(EventType::Begin),
            "E" => Some(EventType::End),
            _ => None,
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Operation labels are restricted to `[A-Za-z0-9_.$]+`.
pub fn is_valid_label(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'$'))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TimedEvent {
    pub event_type: EventType,
    pub operation: String,
    pub timestamp: u64,
}

impl TimedEvent {
    pub fn new(event_type: EventType, operation: impl Into<String>, timestamp: u64) -> Self {
        Self { event_type, operation: operation.into(), timestamp }
    }

    pub fn begin(operation: impl Into<String>, timestamp: u64) -> Self {
        Self::new(EventType::Begin, operation, timestamp)
    }

    pub fn end(operation: impl Into<String>, timestamp: u64) -> Self {
        Self::new(EventType::End, operation, timestamp)
    }
}

impl fmt::Display for TimedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.event_type, self.operation, self.timestamp)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace has no events")]
    Empty,
    #[error("invalid operation label `{label}` at event {index}")]
    InvalidLabel { index: usize, label: String },
    #[error("unmatched End for {operation} at event {index}")]
    UnmatchedEnd { index: usize, operation: String },
    #[error("unmatched Begin for {operation} at event {index}")]
    UnmatchedBegin { index: usize, operation: String },
    #[error("trace is not well-formed: {0}")]
    Malformed(Violation),
}

/// A sequence of events whose Begin/End pairing has been resolved.
///
/// Pairing follows a stack discipline per operation label: an End is matched
/// with the most recent unmatched Begin of the same label. Construction does
/// not enforce timestamp order or proper nesting; use [`validate`] for that.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedTrace {
    events: Vec<TimedEvent>,
    pairing: Vec<usize>,
}

impl TimedTrace {
    pub fn new(events: Vec<TimedEvent>) -> Result<Self, TraceError> {
        if events.is_empty() {
            return Err(TraceError::Empty);
        }
        let mut open: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut pairing = vec![usize::MAX; events.len()];
        for (i, e) in events.iter().enumerate() {
            if !is_valid_label(&e.operation) {
                return Err(TraceError::InvalidLabel { index: i, label: e.operation.clone() });
            }
            match e.event_type {
                EventType::Begin => open.entry(e.operation.as_str()).or_default().push(i),
                EventType::End => {
                    let Some(b) = open.get_mut(e.operation.as_str()).and_then(Vec::pop) else {
                        return Err(TraceError::UnmatchedEnd { index: i, operation: e.operation.clone() });
                    };
                    pairing[b] = i;
                    pairing[i] = b;
                }
            }
        }
        if let Some(i) = pairing.iter().position(|&p| p == usize::MAX) {
            return Err(TraceError::UnmatchedBegin { index: i, operation: events[i].operation.clone() });
        }
        Ok(Self { events, pairing })
    }

    /// Builds the trace and additionally requires it to be well-formed.
    pub fn well_formed(events: Vec<TimedEvent>) -> Result<Self, TraceError> {
        let t = Self::new(events)?;
        t.ensure_well_formed()?;
        Ok(t)
    }

    pub fn ensure_well_formed(&self) -> Result<(), TraceError> {
        match validate(self).into_iter().next() {
            Some(v) => Err(TraceError::Malformed(v)),
            None => Ok(()),
        }
    }

    pub fn events(&self) -> &[TimedEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Index of the partner event of event `i`.
    pub fn pair(&self, i: usize) -> usize {
        self.pairing[i]
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn into_events(self) -> Vec<TimedEvent> {
        self.events
    }

    /// Same structure with new timestamps; pairing is label-based so it carries over.
    pub(crate) fn with_timestamps(&self, stamps: &[u64]) -> TimedTrace {
        debug_assert_eq!(stamps.len(), self.events.len());
        let events = self
            .events
            .iter()
            .zip(stamps)
            .map(|(e, &t)| TimedEvent { timestamp: t, ..e.clone() })
            .collect();
        TimedTrace { events, pairing: self.pairing.clone() }
    }
}

impl fmt::Display for TimedTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Property {
    TimeDecrease,
    Nesting,
}

/// A broken well-formedness property and the event where it was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Violation {
    pub property: Property,
    pub index: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.property {
            Property::TimeDecrease => write!(f, "time decreases at event {}", self.index),
            Property::Nesting => write!(f, "nesting violated at event {}", self.index),
        }
    }
}

/// Checks timestamp monotonicity and proper nesting. Pairing itself is
/// guaranteed by [`TimedTrace::new`].
pub fn validate(trace: &TimedTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    let events = trace.events();
    for i in 1..events.len() {
        if events[i].timestamp < events[i - 1].timestamp {
            out.push(Violation { property: Property::TimeDecrease, index: i });
        }
    }
    let mut stack: Vec<usize> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        match e.event_type {
            EventType::Begin => stack.push(i),
            EventType::End => {
                let partner = trace.pair(i);
                if stack.last() != Some(&partner) {
                    out.push(Violation { property: Property::Nesting, index: i });
                }
                if let Some(pos) = stack.iter().rposition(|&b| b == partner) {
                    stack.remove(pos);
                }
            }
        }
    }
    out.sort_by_key(|v| (v.index, v.property as u8));
    out
}

/// Shifts all timestamps so that the first event happens at time 0.
pub fn normalize(trace: &TimedTrace) -> TimedTrace {
    let base = trace.events()[0].timestamp;
    let stamps: Vec<u64> = trace.events().iter().map(|e| e.timestamp.saturating_sub(base)).collect();
    trace.with_timestamps(&stamps)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected `<B|E> <operation> <timestamp>`")]
    Syntax,
    #[error("unknown event type `{0}`")]
    EventType(String),
    #[error("invalid operation label `{0}`")]
    Label(String),
    #[error("invalid timestamp `{0}` (expected a non-negative integer)")]
    Timestamp(String),
    #[error("{0}")]
    Trace(TraceError),
    #[error("expected exactly one trace, found {0}")]
    TraceCount(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn parse_event(line: &str, lineno: usize) -> Result<TimedEvent, ParseError> {
    let err = |kind| ParseError { line: lineno, kind };
    let mut parts = line.split(' ');
    let (Some(ty), Some(op), Some(ts), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(err(ParseErrorKind::Syntax));
    };
    let event_type = EventType::from_symbol(ty).ok_or_else(|| err(ParseErrorKind::EventType(ty.to_owned())))?;
    if !is_valid_label(op) {
        return Err(err(ParseErrorKind::Label(op.to_owned())));
    }
    if ts.is_empty() || !ts.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(ParseErrorKind::Timestamp(ts.to_owned())));
    }
    let timestamp = ts.parse().map_err(|_| err(ParseErrorKind::Timestamp(ts.to_owned())))?;
    Ok(TimedEvent { event_type, operation: op.to_owned(), timestamp })
}

/// Parses a corpus: traces separated by blank lines, `#` lines ignored.
///
/// Pairing errors are reported at the line of the offending event.
pub fn parse_corpus(text: &str) -> Result<Vec<TimedTrace>, ParseError> {
    let mut traces = Vec::new();
    let mut events = Vec::new();
    let mut lines = Vec::new();

    let mut flush = |events: &mut Vec<TimedEvent>, lines: &mut Vec<usize>| -> Result<(), ParseError> {
        if events.is_empty() {
            return Ok(());
        }
        let first_line = lines[0];
        let trace = TimedTrace::new(std::mem::take(events)).map_err(|e| {
            let line = match &e {
                TraceError::InvalidLabel { index, .. }
                | TraceError::UnmatchedEnd { index, .. }
                | TraceError::UnmatchedBegin { index, .. } => lines[*index],
                _ => first_line,
            };
            ParseError { line, kind: ParseErrorKind::Trace(e) }
        })?;
        lines.clear();
        traces.push(trace);
        Ok(())
    };

    for (i, line) in text.split('\n').enumerate() {
        let lineno = i + 1;
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut events, &mut lines)?;
            continue;
        }
        events.push(parse_event(line, lineno)?);
        lines.push(lineno);
    }
    flush(&mut events, &mut lines)?;
    Ok(traces)
}

/// Parses a single trace. Empty input is an error.
pub fn parse_trace(text: &str) -> Result<TimedTrace, ParseError> {
    let mut traces = parse_corpus(text)?;
    match traces.len() {
        1 => Ok(traces.pop().expect("one trace")),
        0 => Err(ParseError { line: 1, kind: ParseErrorKind::Trace(TraceError::Empty) }),
        n => Err(ParseError { line: 1, kind: ParseErrorKind::TraceCount(n) }),
    }
}

/// Canonical corpus text: one event per line, one blank line between traces.
pub fn write_corpus(traces: &[TimedTrace]) -> String {
    let mut out = String::new();
    for (i, t) in traces.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&t.to_string());
    }
    out
}
