//! Canonical order-event stream.
//!
//! One file holds one symbol-day. The first line is a header
//!
//! ```text
//! # lob-events v1 tick_cents=1 open_ms=0 close_ms=23400000
//! ```
//!
//! followed by one event per line:
//! `timestamp_ms,kind,order_id,side,price_ticks,volume_shares` with kind in
//! `A` (add), `C` (cancel), `X` (partial cancel), `E` (execute),
//! `P` (partial execute), `H` (hidden trade) and side in `B`/`S`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::book::{BookError, BookState};

pub const HEADER_MAGIC: &str = "# lob-events v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn code(self) -> char {
        match self {
            Side::Buy => 'B',
            Side::Sell => 'S',
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Add,
    Cancel,
    CancelPartial,
    Execute,
    ExecutePartial,
    HiddenTrade,
}

impl EventKind {
    pub fn code(self) -> char {
        match self {
            EventKind::Add => 'A',
            EventKind::Cancel => 'C',
            EventKind::CancelPartial => 'X',
            EventKind::Execute => 'E',
            EventKind::ExecutePartial => 'P',
            EventKind::HiddenTrade => 'H',
        }
    }

    fn from_code(code: &str) -> Option<EventKind> {
        Some(match code {
            "A" => EventKind::Add,
            "C" => EventKind::Cancel,
            "X" => EventKind::CancelPartial,
            "E" => EventKind::Execute,
            "P" => EventKind::ExecutePartial,
            "H" => EventKind::HiddenTrade,
            _ => return None,
        })
    }

    /// Trades against visible or hidden liquidity.
    pub fn is_trade(self) -> bool {
        matches!(
            self,
            EventKind::Execute | EventKind::ExecutePartial | EventKind::HiddenTrade
        )
    }

    pub fn is_partial(self) -> bool {
        matches!(self, EventKind::CancelPartial | EventKind::ExecutePartial)
    }
}

/// One atomic book change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderEvent {
    pub timestamp_ms: i64,
    pub kind: EventKind,
    pub order_id: u64,
    pub side: Side,
    pub price_ticks: i64,
    pub volume_shares: u64,
}

impl OrderEvent {
    pub fn new(
        timestamp_ms: i64,
        kind: EventKind,
        order_id: u64,
        side: Side,
        price_ticks: i64,
        volume_shares: u64,
    ) -> Self {
        Self {
            timestamp_ms,
            kind,
            order_id,
            side,
            price_ticks,
            volume_shares,
        }
    }
}

impl fmt::Display for OrderEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.timestamp_ms,
            self.kind.code(),
            self.order_id,
            self.side.code(),
            self.price_ticks,
            self.volume_shares
        )
    }
}

/// A single malformed field within an event line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("field `{field}`: {reason}")]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl FieldError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {source}")]
    Field {
        line: usize,
        #[source]
        source: FieldError,
    },
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
}

const FIELDS: [&str; 6] = [
    "timestamp_ms",
    "kind",
    "order_id",
    "side",
    "price_ticks",
    "volume_shares",
];

/// Decodes one canonical record line.
pub fn parse_event_line(line: &str) -> Result<OrderEvent, FieldError> {
    let parts: Vec<&str> = line.trim().split(',').map(str::trim).collect();
    if parts.len() != FIELDS.len() {
        return Err(FieldError::new(
            "record",
            format!("expected {} fields, found {}", FIELDS.len(), parts.len()),
        ));
    }
    let timestamp_ms: i64 = parse_num(parts[0], FIELDS[0])?;
    if timestamp_ms < 0 {
        return Err(FieldError::new(FIELDS[0], "negative timestamp"));
    }
    let kind = EventKind::from_code(parts[1])
        .ok_or_else(|| FieldError::new(FIELDS[1], format!("unknown kind code `{}`", parts[1])))?;
    let order_id: u64 = parse_num(parts[2], FIELDS[2])?;
    let side = match parts[3] {
        "B" => Side::Buy,
        "S" => Side::Sell,
        other => {
            return Err(FieldError::new(
                FIELDS[3],
                format!("unknown side code `{other}`"),
            ))
        }
    };
    let price_ticks: i64 = parse_num(parts[4], FIELDS[4])?;
    if price_ticks <= 0 {
        return Err(FieldError::new(FIELDS[4], "price must be positive"));
    }
    let volume_shares: u64 = parse_num(parts[5], FIELDS[5])?;
    if volume_shares == 0 {
        return Err(FieldError::new(FIELDS[5], "volume must be positive"));
    }
    Ok(OrderEvent {
        timestamp_ms,
        kind,
        order_id,
        side,
        price_ticks,
        volume_shares,
    })
}

fn parse_num<T: FromStr>(s: &str, field: &'static str) -> Result<T, FieldError> {
    s.parse()
        .map_err(|_| FieldError::new(field, format!("not a number: `{s}`")))
}

/// Canonical text form of an event; inverse of [`parse_event_line`].
pub fn serialize_event_line(event: &OrderEvent) -> String {
    event.to_string()
}

impl FromStr for OrderEvent {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_event_line(s)
    }
}

/// An immutable symbol-day of events plus its session bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    pub events: Vec<OrderEvent>,
    pub session_start_ms: i64,
    pub session_end_ms: i64,
    pub market_open_ms: i64,
    pub market_close_ms: i64,
    pub tick_size_cents: i64,
}

impl EventStream {
    /// Builds a stream whose session starts at 0 and ends at the later of the
    /// market close and the last event.
    pub fn new(events: Vec<OrderEvent>, tick_size_cents: i64, open_ms: i64, close_ms: i64) -> Self {
        let last = events.last().map_or(0, |e| e.timestamp_ms);
        Self {
            events,
            session_start_ms: 0,
            session_end_ms: close_ms.max(last),
            market_open_ms: open_ms,
            market_close_ms: close_ms,
            tick_size_cents,
        }
    }

    pub fn header_line(&self) -> String {
        format!(
            "{HEADER_MAGIC} tick_cents={} open_ms={} close_ms={}",
            self.tick_size_cents, self.market_open_ms, self.market_close_ms
        )
    }

    /// Serializes the whole stream in the canonical file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.events.len() + 1));
        out.push_str(&self.header_line());
        out.push('\n');
        for e in &self.events {
            use std::fmt::Write;
            let _ = writeln!(out, "{e}");
        }
        out
    }

    pub fn write_to<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header_line())?;
        for e in &self.events {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }

    /// Parses a complete event file.
    pub fn parse(text: &str) -> Result<EventStream, ParseError> {
        let mut lines = text.lines().enumerate();
        let (tick, open, close) = match lines.next() {
            Some((_, header)) => parse_header(header)?,
            None => {
                return Err(ParseError::Header {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        };
        let mut events = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let event = parse_event_line(line).map_err(|source| ParseError::Field {
                line: idx + 1,
                source,
            })?;
            events.push(event);
        }
        Ok(EventStream::new(events, tick, open, close))
    }
}

fn parse_header(line: &str) -> Result<(i64, i64, i64), ParseError> {
    let err = |reason: &str| ParseError::Header {
        line: 1,
        reason: reason.to_string(),
    };
    let rest = line
        .trim()
        .strip_prefix(HEADER_MAGIC)
        .ok_or_else(|| err("missing `# lob-events v1` prefix"))?;
    let (mut tick, mut open, mut close) = (None, None, None);
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err("expected key=value"))?;
        let value: i64 = value
            .parse()
            .map_err(|_| err(&format!("non-numeric value for `{key}`")))?;
        match key {
            "tick_cents" => tick = Some(value),
            "open_ms" => open = Some(value),
            "close_ms" => close = Some(value),
            other => return Err(err(&format!("unknown key `{other}`"))),
        }
    }
    let tick = tick.ok_or_else(|| err("missing tick_cents"))?;
    let open = open.ok_or_else(|| err("missing open_ms"))?;
    let close = close.ok_or_else(|| err("missing close_ms"))?;
    if tick <= 0 {
        return Err(err("tick_cents must be positive"));
    }
    Ok((tick, open, close))
}

/// What went wrong at one position of a stream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViolationKind {
    #[error("timestamp regression: {previous} ms followed by {current} ms")]
    TimestampRegression { previous: i64, current: i64 },
    #[error("order_id 0 is reserved for hidden trades")]
    ReservedOrderId,
    #[error("hidden trade must carry order_id 0")]
    HiddenTradeWithOrderId,
    #[error("{0}")]
    Book(BookError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index into `EventStream::events`; `None` for stream-level problems.
    pub index: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "event {i}: {}", self.kind),
            None => write!(f, "stream: {}", self.kind),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Set when the session window itself is malformed.
    pub window_error: Option<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.window_error.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "OK");
        }
        if let Some(w) = &self.window_error {
            writeln!(f, "window: {w}")?;
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks stream integrity by replaying it against a fresh book.
///
/// Offending events are reported and skipped; replay continues so every
/// violation is listed in order.
pub fn validate_stream(stream: &EventStream) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !(stream.session_start_ms <= stream.market_open_ms
        && stream.market_open_ms < stream.market_close_ms
        && stream.market_close_ms <= stream.session_end_ms)
    {
        report.window_error = Some(format!(
            "expected session_start <= open < close <= session_end, got {} <= {} < {} <= {}",
            stream.session_start_ms,
            stream.market_open_ms,
            stream.market_close_ms,
            stream.session_end_ms
        ));
    }
    let mut book = BookState::new();
    let mut seen = HashSet::new();
    let mut last_ts = i64::MIN;
    for (i, event) in stream.events.iter().enumerate() {
        if event.timestamp_ms < last_ts {
            report.violations.push(Violation {
                index: Some(i),
                kind: ViolationKind::TimestampRegression {
                    previous: last_ts,
                    current: event.timestamp_ms,
                },
            });
        }
        last_ts = last_ts.max(event.timestamp_ms);
        let id_problem = match (event.kind, event.order_id) {
            (EventKind::HiddenTrade, 0) => None,
            (EventKind::HiddenTrade, _) => Some(ViolationKind::HiddenTradeWithOrderId),
            (_, 0) => Some(ViolationKind::ReservedOrderId),
            _ => None,
        };
        if let Some(kind) = id_problem {
            report.violations.push(Violation {
                index: Some(i),
                kind,
            });
            continue;
        }
        if event.kind == EventKind::Add && !seen.insert(event.order_id) {
            report.violations.push(Violation {
                index: Some(i),
                kind: ViolationKind::Book(BookError::DuplicateOrder {
                    order_id: event.order_id,
                }),
            });
            continue;
        }
        if let Err(e) = book.apply_event(event) {
            report.violations.push(Violation {
                index: Some(i),
                kind: ViolationKind::Book(e),
            });
        }
    }
    report
}
